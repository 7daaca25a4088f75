//! Decision and bandwidth optimization.
//!
//! The joint problem is solved by decomposition: for a fixed upload decision,
//! the bandwidth shares that minimize completion latency make every
//! participant finish compute-plus-upload at the same instant, so the optimal
//! latency is the root of a monotone bandwidth-demand function and is found
//! by bisection ([`solve_bandwidth`]). The outer search over binary decision
//! vectors is exhaustive up to a configurable device count and hill-climbing
//! beyond it ([`solve_judba`]). Two fixed-decision benchmark schemes with an
//! equal bandwidth split are provided for comparison.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    BandwidthAllocation, CompressionProfile, DeviceProfile, Solution, SystemConfig, UploadDecision,
};
use crate::physics::{self, local_compute_latency, resolved_latent_bits, snr_log2};
use crate::scalar::{lit, Scalar};

/// Convergence record of one bandwidth bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionReport<S> {
    /// Minimal completion latency found.
    pub t_star: S,
    /// Bisection iterations spent.
    pub iterations: u32,
    /// `|g(t_star) - 1|`, the unallocated share of the bandwidth budget.
    pub residual: S,
    /// Final bracket around the root, `bracket.0 < t_star <= bracket.1`.
    pub bracket: (S, S),
}

/// Per-participant constants of one solve: compute time, full-band rate, and
/// payload size.
struct Link<S> {
    device: usize,
    t_comp: S,
    /// Full-band uplink rate `B * log2(1 + P*h/N0)` in bits per second.
    rate: S,
    latent_bits: S,
}

fn participant_links<S: Scalar>(
    devices: &[DeviceProfile<S>],
    decision: &UploadDecision,
    config: &SystemConfig<S>,
) -> Vec<Link<S>> {
    let latent_bits = resolved_latent_bits(devices, config);
    decision
        .participants()
        .map(|i| Link {
            device: i,
            t_comp: local_compute_latency(&devices[i], config),
            rate: config.bandwidth_hz * snr_log2(&devices[i], config),
            latent_bits: latent_bits[i],
        })
        .collect()
}

fn demand_at<S: Scalar>(links: &[Link<S>], t: S) -> S {
    links.iter().fold(S::zero(), |acc, link| {
        acc + link.latent_bits / (link.rate * (t - link.t_comp))
    })
}

/// Total bandwidth fraction the participants need to all finish by `t`:
/// `sum_i v_i / (rate_i * (t - t_comp_i))`. Strictly decreasing in `t` on
/// `t > max t_comp`.
pub fn bandwidth_demand<S: Scalar>(
    t: S,
    devices: &[DeviceProfile<S>],
    decision: &UploadDecision,
    config: &SystemConfig<S>,
) -> Result<S> {
    let links = participant_links(devices, decision, config);
    for link in &links {
        if t <= link.t_comp {
            return Err(Error::BracketViolation {
                t: t.to_f64().unwrap_or(f64::NAN),
                t_comp: link.t_comp.to_f64().unwrap_or(f64::NAN),
                device: link.device,
            });
        }
    }
    Ok(demand_at(&links, t))
}

/// Minimizes completion latency for a fixed decision by splitting the band so
/// every participant finishes at the same time.
///
/// The returned shares are `w_i = v_i / (rate_i * (T* - t_comp_i))` with `T*`
/// located by bisection so the demand `g(T*)` is within `bisect_tol` of the
/// unit budget from below. Non-participants hold exactly zero.
pub fn solve_bandwidth<S: Scalar>(
    devices: &[DeviceProfile<S>],
    decision: &UploadDecision,
    config: &SystemConfig<S>,
) -> Result<(BandwidthAllocation<S>, BisectionReport<S>)> {
    let links = participant_links(devices, decision, config);
    if links.is_empty() {
        return Err(Error::NoParticipants);
    }
    let tol = config.bisect_tol;
    let t_comp_max = links
        .iter()
        .map(|l| l.t_comp)
        .fold(S::zero(), |a, b| a.max(b));
    // The demand diverges at max t_comp, so bracket just above it.
    let t_low = t_comp_max * (S::one() + lit(1e-12));

    // Seed the upper end with enough headroom that the slowest-rate device
    // could carry everyone's payload, then double until the demand drops
    // below the budget.
    let min_rate = links
        .iter()
        .map(|l| l.rate)
        .fold(S::infinity(), |a, b| a.min(b));
    let total_bits = links.iter().fold(S::zero(), |acc, l| acc + l.latent_bits);
    let mut offset = total_bits / min_rate;
    let mut lo = t_low;
    let mut hi = t_low + offset;
    let mut guard = 0;
    while demand_at(&links, hi) > S::one() {
        lo = hi;
        offset = offset + offset;
        hi = t_low + offset;
        guard += 1;
        if guard > 200 {
            return Err(Error::NoConvergence {
                max_iter: config.bisect_max_iter,
                residual: f64::INFINITY,
            });
        }
    }

    let mut iterations = 0;
    let mut residual = S::one() - demand_at(&links, hi);
    while residual > tol && iterations < config.bisect_max_iter {
        let mid = (lo + hi) * lit(0.5);
        if mid <= lo || mid >= hi {
            break; // interval collapsed to machine precision
        }
        let demand = demand_at(&links, mid);
        if demand > S::one() {
            lo = mid;
        } else {
            hi = mid;
            residual = S::one() - demand;
        }
        iterations += 1;
    }
    if residual > tol {
        return Err(Error::NoConvergence {
            max_iter: config.bisect_max_iter,
            residual: residual.to_f64().unwrap_or(f64::NAN),
        });
    }

    let t_star = hi;
    let mut shares = vec![S::zero(); devices.len()];
    for link in &links {
        shares[link.device] = link.latent_bits / (link.rate * (t_star - link.t_comp));
    }
    Ok((
        BandwidthAllocation::new(shares),
        BisectionReport {
            t_star,
            iterations,
            residual,
            bracket: (lo, hi),
        },
    ))
}

/// Cost-model evaluation of one decision: optimal bandwidth for participants,
/// the all-zero allocation when nobody uploads.
pub fn evaluate_decision<S: Scalar>(
    devices: &[DeviceProfile<S>],
    decision: &UploadDecision,
    config: &SystemConfig<S>,
    profile: &CompressionProfile<S>,
) -> Result<Solution<S>> {
    let allocation = if decision.num_participants() == 0 {
        BandwidthAllocation::zeros(devices.len())
    } else {
        solve_bandwidth(devices, decision, config)?.0
    };
    physics::system_cost(devices, decision, &allocation, config, profile)
}

/// Tie-break key: lower cost wins, then fewer uploads, then the
/// lexicographically smaller decision vector.
fn better<'a, S: Scalar>(a: &'a Solution<S>, b: &'a Solution<S>) -> &'a Solution<S> {
    if a.system_cost != b.system_cost {
        return if a.system_cost < b.system_cost { a } else { b };
    }
    let key = |s: &Solution<S>| (s.decision.num_participants(), s.decision.clone());
    if key(a) <= key(b) {
        a
    } else {
        b
    }
}

/// Global minimum over all `2^M` decision vectors. Errors when `M` exceeds
/// `exhaustive_threshold`.
pub fn solve_decision_exhaustive<S: Scalar>(
    devices: &[DeviceProfile<S>],
    config: &SystemConfig<S>,
    profile: &CompressionProfile<S>,
) -> Result<Solution<S>> {
    let m = devices.len();
    if m > config.exhaustive_threshold {
        return Err(Error::TooManyDevices {
            devices: m,
            threshold: config.exhaustive_threshold,
        });
    }
    if m == 0 {
        return Err(Error::NoParticipants);
    }
    // The tie-break comparator is a total order, so the parallel reduction
    // returns the same winner as a sequential scan.
    (0u64..1 << m)
        .into_par_iter()
        .map(|mask| {
            let decision = UploadDecision::from_mask(mask, m);
            evaluate_decision(devices, &decision, config, profile)
        })
        .try_reduce_with(|a, b| Ok(better(&a, &b).clone()))
        .expect("at least one decision exists")
}

/// Hill climbing over single-bit flips, starting from everyone uploading.
/// Each round applies the flip that most reduces the system cost; stops at a
/// local optimum. Deterministic for fixed inputs.
pub fn solve_decision_greedy<S: Scalar>(
    devices: &[DeviceProfile<S>],
    config: &SystemConfig<S>,
    profile: &CompressionProfile<S>,
) -> Result<Solution<S>> {
    let m = devices.len();
    if m == 0 {
        return Err(Error::NoParticipants);
    }
    let mut current = evaluate_decision(devices, &UploadDecision::all_ones(m), config, profile)?;
    for _round in 0..m * m {
        let mut best_flip: Option<Solution<S>> = None;
        for bit in 0..m {
            let candidate =
                evaluate_decision(devices, &current.decision.flipped(bit), config, profile)?;
            best_flip = Some(match best_flip {
                None => candidate,
                Some(best) => better(&candidate, &best).clone(),
            });
        }
        let best = best_flip.expect("m >= 1 yields at least one flip");
        if best.system_cost < current.system_cost {
            current = best;
        } else {
            break;
        }
    }
    Ok(current)
}

/// Full solve: exhaustive search when the scenario is small enough, greedy
/// hill climbing otherwise.
pub fn solve_judba<S: Scalar>(
    devices: &[DeviceProfile<S>],
    config: &SystemConfig<S>,
    profile: &CompressionProfile<S>,
) -> Result<Solution<S>> {
    if devices.len() <= config.exhaustive_threshold {
        solve_decision_exhaustive(devices, config, profile)
    } else {
        solve_decision_greedy(devices, config, profile)
    }
}

/// Benchmark: everyone uploads and the band is split equally.
pub fn benchmark_fully_uploading<S: Scalar>(
    devices: &[DeviceProfile<S>],
    config: &SystemConfig<S>,
    profile: &CompressionProfile<S>,
) -> Result<Solution<S>> {
    if devices.is_empty() {
        return Err(Error::NoParticipants);
    }
    let decision = UploadDecision::all_ones(devices.len());
    let allocation = BandwidthAllocation::equal_split(&decision);
    physics::system_cost(devices, &decision, &allocation, config, profile)
}

/// Benchmark: each device uploads with probability one half, drawn from a
/// seeded generator, and participants split the band equally.
pub fn benchmark_randomly_uploading<S: Scalar>(
    devices: &[DeviceProfile<S>],
    config: &SystemConfig<S>,
    profile: &CompressionProfile<S>,
    rng_seed: u64,
) -> Result<Solution<S>> {
    if devices.is_empty() {
        return Err(Error::NoParticipants);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let rho: Vec<bool> = (0..devices.len())
        .map(|_| rng.random_range(0..2u32) == 1)
        .collect();
    let decision = UploadDecision::new(rho);
    let allocation = BandwidthAllocation::equal_split(&decision);
    physics::system_cost(devices, &decision, &allocation, config, profile)
}
