//! The `solve`, `sweep`, and `verify` subcommands.

use std::path::Path;

use judba_core::harness::{self, SweepAxis};
use judba_core::model::UploadDecision;
use judba_core::physics::{local_compute_latency, resolved_latent_bits, snr_log2};
use judba_core::{oracle, solver, BandwidthAllocation, ScenarioSpec, SweepRecord};

use crate::io::{load_config, write_atomic, LoadedConfig};
use crate::Failure;

fn csv_with_version(records: &[SweepRecord]) -> String {
    format!(
        "# judba-sim v{}\n{}",
        env!("CARGO_PKG_VERSION"),
        harness::records_to_csv(records)
    )
}

fn emit(out: Option<&Path>, csv: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write_atomic(path, csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

pub fn solve(config: Option<&Path>, seed: Option<u64>, out: Option<&Path>) -> Result<(), Failure> {
    let LoadedConfig {
        system,
        spec,
        profile,
    } = load_config(config)?;
    let spec = ScenarioSpec {
        rng_seed: seed.unwrap_or(spec.rng_seed),
        ..spec
    };
    let devices = harness::generate_scenario(&spec, &system);
    let runs = harness::run_schemes(&devices, &system, &profile, spec.rng_seed)?;
    let (accuracy, _) = profile.lookup(system.compression_ratio)?;

    let best = &runs.proposed;
    println!(
        "scenario: M={} seed={} lambda={} alpha={}",
        spec.num_devices, spec.rng_seed, system.compression_ratio, system.alpha
    );
    println!(
        "{:<10} {:>14} {:>12} {:>16} {:>4}",
        "scheme", "system_cost", "T*_s", "total_energy_J", "N"
    );
    for (label, solution) in [
        ("proposed", &runs.proposed),
        ("fully", &runs.fully),
        ("random", &runs.random),
    ] {
        println!(
            "{:<10} {:>14.6} {:>12.6} {:>16.6} {:>4}",
            label,
            solution.system_cost,
            solution.completion_latency_s,
            solution.total_energy_j(),
            solution.decision.num_participants()
        );
    }
    let rho: Vec<u8> = best.decision.rho.iter().map(|&r| u8::from(r)).collect();
    println!("decision rho*: {rho:?}");
    let shares: Vec<String> = best
        .allocation
        .shares
        .iter()
        .map(|w| format!("{w:.6}"))
        .collect();
    println!(
        "shares w*: [{}] (sum {:.9})",
        shares.join(", "),
        best.allocation.shares.iter().sum::<f64>()
    );
    println!("T* = {:.9} s", best.completion_latency_s);
    println!(
        "{:<4} {:>9} {:>12} {:>5} {:>4} {:>10} {:>14}",
        "dev", "f_GHz", "gain", "|D|", "rho", "w", "delta_e_J"
    );
    for (i, d) in devices.iter().enumerate() {
        println!(
            "{:<4} {:>9.4} {:>12.4e} {:>5} {:>4} {:>10.6} {:>14.6}",
            d.id,
            d.cpu_freq_hz / 1e9,
            d.channel_gain,
            d.num_samples,
            u8::from(best.decision.uploads(i)),
            best.allocation.shares[i],
            best.per_device_energy[i].delta_e()
        );
    }

    let mut records = harness::records_for_cell(
        SweepAxis::DeviceCount,
        spec.num_devices as f64,
        spec.rng_seed,
        &runs,
        accuracy,
    );
    harness::normalize(&mut records)?;
    harness::fill_efficiency(&mut records)?;
    if out.is_some() {
        emit(out, &csv_with_version(&records))?;
    }
    Ok(())
}

pub fn sweep(
    config: Option<&Path>,
    axis: &str,
    values: &str,
    seeds: u64,
    first_seed: u64,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let LoadedConfig {
        system,
        spec,
        profile,
    } = load_config(config)?;
    let axis = SweepAxis::parse(axis).map_err(|e| Failure::usage(e.to_string()))?;
    let values: Vec<f64> = values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Failure::usage(format!("value `{v}` is not a number")))
        })
        .collect::<Result<_, _>>()?;
    if seeds == 0 {
        return Err(Failure::usage("--seeds must be at least 1"));
    }
    let seeds: Vec<u64> = (first_seed..first_seed.saturating_add(seeds)).collect();
    let records = harness::sweep(&spec, &system, &profile, axis, &values, &seeds)?;
    // Whether the two fixed-decision benchmarks swap ranking along the axis
    // depends on the calibration, so report it instead of asserting it.
    let flips = harness::crossover_points(
        &records,
        harness::Scheme::FullyUploading,
        harness::Scheme::RandomlyUploading,
    );
    match flips.as_slice() {
        [] => eprintln!("benchmark ordering: no fully/random crossover on this axis"),
        points => eprintln!("benchmark ordering: fully/random crossover at {points:?}"),
    }
    emit(out, &csv_with_version(&records))
}

/// Splitmix step, used to derive decision masks for the cost cross-check.
fn splitmix(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn verify(config: Option<&Path>, trials: u64, seed: u64) -> Result<(), Failure> {
    if trials < 1 {
        return Err(Failure::usage("--trials must be at least 1"));
    }
    let LoadedConfig {
        system,
        spec,
        profile,
    } = load_config(config)?;
    let grid_step = 1e-3;

    // Check A: bisection T* against the grid oracle on 1-3 participant
    // instances. The oracle cannot beat the true optimum by more than the
    // bisection tolerance, and must reach T* within the grid resolution
    // (bounded by evaluating the grid point nearest the exact shares).
    let mut max_gap = 0.0f64;
    for trial in 0..trials {
        let n = 1 + (trial % 3) as usize;
        let trial_seed = seed.wrapping_add(trial);
        let trial_spec = ScenarioSpec {
            num_devices: n,
            rng_seed: trial_seed,
            ..spec.clone()
        };
        let devices = harness::generate_scenario(&trial_spec, &system);
        let decision = UploadDecision::all_ones(n);
        let (alloc, report) =
            solver::solve_bandwidth(&devices, &decision, &system).map_err(|e| {
                Failure::solver(format!("bandwidth solve failed at seed {trial_seed}: {e}"))
            })?;
        let (_, best_t) = oracle::grid_bandwidth_oracle(&devices, &system, grid_step)
            .map_err(|e| Failure::solver(format!("oracle failed at seed {trial_seed}: {e}")))?;

        max_gap = max_gap.max((best_t - report.t_star).abs() / report.t_star);
        let low_bound = report.t_star * (1.0 - system.bisect_tol);
        if best_t < low_bound {
            return Err(Failure::breach(format!(
                "grid oracle beat the bisection beyond tolerance at seed {trial_seed}: \
                 T_grid={best_t} T*={}",
                report.t_star
            )));
        }

        // Finish time at the enumerated grid point nearest the exact shares.
        let latent = resolved_latent_bits(&devices, &system);
        let mut grid_shares: Vec<f64> = alloc.shares[..n - 1]
            .iter()
            .map(|w| (w / grid_step).floor().max(1.0) * grid_step)
            .collect();
        grid_shares.push(1.0 - grid_shares.iter().sum::<f64>());
        let t_ub = if grid_shares[n - 1] > 0.0 {
            devices
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    local_compute_latency(d, &system)
                        + latent[i] / (grid_shares[i] * system.bandwidth_hz * snr_log2(d, &system))
                })
                .fold(0.0f64, f64::max)
        } else {
            f64::INFINITY
        };
        if best_t > t_ub * (1.0 + 1e-12) {
            return Err(Failure::breach(format!(
                "grid oracle exceeded its discretization bound at seed {trial_seed}: \
                 T_grid={best_t} bound={t_ub}"
            )));
        }
    }
    println!(
        "bandwidth check: {trials} instances within [T*(1-tol), nearest-grid bound], \
         max |T_grid - T*|/T* = {max_gap:.3e}"
    );

    // Check B: straight-line cost re-evaluation against the cost model on
    // random (scenario, decision) pairs.
    let mut max_rel = 0.0f64;
    for trial in 0..trials {
        let trial_seed = seed.wrapping_add(0x5EED).wrapping_add(trial);
        let trial_spec = ScenarioSpec {
            num_devices: 8,
            rng_seed: trial_seed,
            ..spec.clone()
        };
        let devices = harness::generate_scenario(&trial_spec, &system);
        let mask = splitmix(trial_seed) & 0xFF;
        let decision = UploadDecision::from_mask(mask, 8);
        let allocation = if decision.num_participants() == 0 {
            BandwidthAllocation::zeros(8)
        } else {
            solver::solve_bandwidth(&devices, &decision, &system)
                .map_err(|e| Failure::solver(e.to_string()))?
                .0
        };
        let model =
            judba_core::physics::system_cost(&devices, &decision, &allocation, &system, &profile)
                .map_err(|e| Failure::solver(e.to_string()))?
                .system_cost;
        let oracle_cost =
            oracle::brute_force_cost(&devices, &decision, &allocation, &system, &profile)
                .map_err(|e| Failure::solver(e.to_string()))?;
        let rel = (model - oracle_cost).abs() / model.abs().max(f64::MIN_POSITIVE);
        max_rel = max_rel.max(rel);
        if rel > 1e-9 {
            return Err(Failure::breach(format!(
                "cost mismatch at seed {trial_seed}: model={model} oracle={oracle_cost} rel={rel:.3e}"
            )));
        }
    }
    println!(
        "cost check: {trials} (scenario, decision) pairs, max relative deviation {max_rel:.3e}"
    );
    Ok(())
}
