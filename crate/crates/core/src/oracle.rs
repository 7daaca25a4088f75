//! Independent brute-force verifiers.
//!
//! Everything in this module re-derives its numbers from the raw formulas in
//! straight-line code, deliberately sharing no helpers with the physics or
//! solver modules, so agreement between the two paths is meaningful
//! evidence. The grid oracle checks the equal-finish-time bandwidth solution
//! against direct enumeration of the share simplex; the cost oracle
//! re-evaluates the whole energy/latency account for a given decision and
//! allocation.

use crate::error::{Error, Result};
use crate::model::{
    BandwidthAllocation, CompressionProfile, DeviceProfile, SystemConfig, UploadDecision,
};
use crate::scalar::{count, Scalar};

/// Max finish time of `participants` under shares `w`, from raw formulas.
fn max_finish_time<S: Scalar>(
    participants: &[DeviceProfile<S>],
    w: &[S],
    config: &SystemConfig<S>,
) -> S {
    let latent = straight_line_latent_bits(participants, config);
    let mut worst = S::zero();
    for (i, d) in participants.iter().enumerate() {
        let t_comp = count::<S>(d.num_samples) * config.cycles_per_image / d.cpu_freq_hz;
        let rate = w[i]
            * config.bandwidth_hz
            * (S::one() + d.tx_power_w * d.channel_gain / config.noise_w).log2();
        let finish = t_comp + latent[i] / rate;
        worst = worst.max(finish);
    }
    worst
}

fn straight_line_latent_bits<S: Scalar>(
    devices: &[DeviceProfile<S>],
    config: &SystemConfig<S>,
) -> Vec<S> {
    if config.common_latent_size {
        let mut total = S::zero();
        for d in devices {
            total = total + count::<S>(d.num_samples) * d.sample_bits;
        }
        let v = total / count::<S>(devices.len() as u64) / config.compression_ratio;
        vec![v; devices.len()]
    } else {
        devices
            .iter()
            .map(|d| count::<S>(d.num_samples) * d.sample_bits / config.compression_ratio)
            .collect()
    }
}

/// Enumerates positive share vectors summing to one at resolution
/// `grid_step` and returns the one minimizing the max finish time, with ties
/// broken toward the lexicographically smallest vector.
///
/// Restricted to one, two, or three participants: the simplex grows as
/// `step^-(N-1)` and this is a verification tool, not a solver.
pub fn grid_bandwidth_oracle<S: Scalar>(
    participants: &[DeviceProfile<S>],
    config: &SystemConfig<S>,
    grid_step: S,
) -> Result<(Vec<S>, S)> {
    let n = participants.len();
    if n == 0 {
        return Err(Error::NoParticipants);
    }
    if n > 3 {
        return Err(Error::TooManyParticipants(n));
    }
    let step_f64 = grid_step.to_f64().unwrap_or(f64::NAN);
    if !(1e-4..=1e-2).contains(&step_f64) {
        return Err(Error::InvalidGridStep(step_f64));
    }

    if n == 1 {
        let w = vec![S::one()];
        let t = max_finish_time(participants, &w, config);
        return Ok((w, t));
    }

    let steps = (S::one() / grid_step)
        .to_usize()
        .expect("step count fits usize");
    let mut best_w: Option<Vec<S>> = None;
    let mut best_t = S::infinity();
    let mut consider = |w: Vec<S>, t: S| {
        // Strict improvement wins; enumeration is lexicographic, so on an
        // exact tie the earlier (lexicographically smaller) vector stays.
        if t < best_t {
            best_t = t;
            best_w = Some(w);
        }
    };

    match n {
        2 => {
            for k in 1..steps {
                let w1 = count::<S>(k as u64) * grid_step;
                let w2 = S::one() - w1;
                if w2 <= S::zero() {
                    break;
                }
                let w = vec![w1, w2];
                let t = max_finish_time(participants, &w, config);
                consider(w, t);
            }
        }
        3 => {
            for k1 in 1..steps {
                let w1 = count::<S>(k1 as u64) * grid_step;
                for k2 in 1..steps - k1 {
                    let w2 = count::<S>(k2 as u64) * grid_step;
                    let w3 = S::one() - w1 - w2;
                    if w3 <= S::zero() {
                        break;
                    }
                    let w = vec![w1, w2, w3];
                    let t = max_finish_time(participants, &w, config);
                    consider(w, t);
                }
            }
        }
        _ => unreachable!(),
    }

    let best_w = best_w.expect("grid contains at least one interior point");
    Ok((best_w, best_t))
}

/// Re-evaluates the system cost of `(decision, allocation)` from the raw
/// formulas, with no physics-module code in the path. Returns the sum of the
/// per-device weighted costs.
pub fn brute_force_cost<S: Scalar>(
    devices: &[DeviceProfile<S>],
    decision: &UploadDecision,
    allocation: &BandwidthAllocation<S>,
    config: &SystemConfig<S>,
    profile: &CompressionProfile<S>,
) -> Result<S> {
    let model_params = profile
        .rows
        .iter()
        .find(|row| row.lambda == config.compression_ratio)
        .map(|row| row.model_params)
        .ok_or(Error::UnknownRatio {
            lambda: config.compression_ratio.to_f64().unwrap_or(f64::NAN),
        })?;
    let latent = straight_line_latent_bits(devices, config);

    let mut participant_samples = S::zero();
    for (i, d) in devices.iter().enumerate() {
        if decision.rho[i] {
            participant_samples = participant_samples + count::<S>(d.num_samples);
        }
    }
    let t_train = config.train_cycles_per_sample * participant_samples / config.edge_freq_hz;

    let mut latency = S::zero();
    for (i, d) in devices.iter().enumerate() {
        if !decision.rho[i] {
            continue;
        }
        let w = allocation.shares[i];
        if w <= S::zero() {
            return Err(Error::ZeroBandwidth { device: d.id });
        }
        let t_comp = count::<S>(d.num_samples) * config.cycles_per_image / d.cpu_freq_hz;
        let rate = w
            * config.bandwidth_hz
            * (S::one() + d.tx_power_w * d.channel_gain / config.noise_w).log2();
        latency = latency.max(t_comp + latent[i] / rate);
    }

    let mut total_cost = S::zero();
    for (i, d) in devices.iter().enumerate() {
        let samples = count::<S>(d.num_samples);
        let f2 = d.cpu_freq_hz * d.cpu_freq_hz;
        let encode = config.kappa * config.cycles_per_image * samples * f2;
        let inf = config.kappa * config.inference_cycles_per_sample * samples * f2;
        let idle = config.idle_power_w * t_train;
        let down_rate = config.bandwidth_hz
            * (S::one() + config.bs_tx_power_w * d.channel_gain / config.noise_w).log2();
        let down =
            config.idle_power_w * model_params * count::<S>(u64::from(config.bits_per_parameter))
                / down_rate;
        let energy = if decision.rho[i] {
            let rate = allocation.shares[i]
                * config.bandwidth_hz
                * (S::one() + d.tx_power_w * d.channel_gain / config.noise_w).log2();
            let trans = d.tx_power_w * latent[i] / rate;
            encode + trans + idle + down + inf
        } else {
            let tune = config.kappa * config.finetune_cycles_per_sample * samples * f2;
            encode + idle + down + tune + inf
        };
        total_cost = total_cost + config.alpha * energy + (S::one() - config.alpha) * latency;
    }
    Ok(total_cost)
}
