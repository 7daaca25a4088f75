//! Acceptance suite: one test per shipped guarantee, each printing a
//! PASS line with the measured numbers (visible with `--nocapture`).
//!
//! Run with `cargo test -p judba-core --test acceptance -- --nocapture`.

use std::time::Instant;

use judba_core::harness::{self, Scheme, SweepAxis};
use judba_core::model::UploadDecision;
use judba_core::physics::{self, local_compute_latency, resolved_latent_bits, snr_log2};
use judba_core::{
    oracle, solver, BandwidthAllocation, CompressionProfile, ScenarioSpec, SystemConfig,
};

fn config() -> SystemConfig {
    SystemConfig::default()
}

fn table() -> CompressionProfile {
    CompressionProfile::default_table()
}

fn splitmix(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Bandwidth optimum against the grid oracle: over 100 random instances with
/// 1-3 participants, the bisection T* and the grid-enumerated best finish
/// time sandwich each other within the bisection tolerance plus the grid's
/// discretization slack, in under a minute.
#[test]
fn bandwidth_optimum_matches_grid_oracle() {
    let cfg = config();
    let step = 1e-3;
    let started = Instant::now();
    let mut max_gap = 0.0f64;
    for trial in 0..100u64 {
        let n = 1 + (trial % 3) as usize;
        let spec = ScenarioSpec {
            num_devices: n,
            rng_seed: trial,
            ..Default::default()
        };
        let devices = harness::generate_scenario(&spec, &cfg);
        let decision = UploadDecision::all_ones(n);
        let (alloc, report) = solver::solve_bandwidth(&devices, &decision, &cfg).unwrap();
        let (_, best_t) = oracle::grid_bandwidth_oracle(&devices, &cfg, step).unwrap();

        // The oracle only evaluates feasible allocations, so it cannot beat
        // the continuum optimum by more than the bisection tolerance.
        assert!(
            best_t >= report.t_star * (1.0 - cfg.bisect_tol),
            "trial {trial}: oracle {best_t} beat T* {}",
            report.t_star
        );

        // Upper side: the enumerated grid point nearest the exact shares
        // bounds how far discretization can push the oracle above T*.
        let latent = resolved_latent_bits(&devices, &cfg);
        let mut grid_shares: Vec<f64> = alloc.shares[..n - 1]
            .iter()
            .map(|w| (w / step).floor().max(1.0) * step)
            .collect();
        grid_shares.push(1.0 - grid_shares.iter().sum::<f64>());
        assert!(
            grid_shares[n - 1] > 0.0,
            "trial {trial}: degenerate grid point"
        );
        let t_ub = devices
            .iter()
            .enumerate()
            .map(|(i, d)| {
                local_compute_latency(d, &cfg)
                    + latent[i] / (grid_shares[i] * cfg.bandwidth_hz * snr_log2(d, &cfg))
            })
            .fold(0.0f64, f64::max);
        assert!(
            best_t <= t_ub * (1.0 + 1e-12),
            "trial {trial}: oracle {best_t} above nearest-grid bound {t_ub}"
        );
        max_gap = max_gap.max((best_t - report.t_star).abs() / report.t_star);
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 60, "oracle comparison took {elapsed:?}");
    println!("[PASS] bandwidth optimum vs grid oracle: 100 instances, max |T_grid-T*|/T* = {max_gap:.3e}, {elapsed:.2?}");
}

/// Equal finish time: on 1000 random solves every participant finishes at T*
/// within 1e-8 relative, and the shares exhaust the unit budget within 1e-8.
#[test]
fn participants_finish_simultaneously_and_use_the_whole_band() {
    let cfg = config();
    let mut worst_finish = 0.0f64;
    let mut worst_budget = 0.0f64;
    for trial in 0..1000u64 {
        let n = 2 + (trial % 12) as usize;
        let spec = ScenarioSpec {
            num_devices: n,
            rng_seed: trial,
            ..Default::default()
        };
        let devices = harness::generate_scenario(&spec, &cfg);
        let decision = UploadDecision::all_ones(n);
        let (alloc, report) = solver::solve_bandwidth(&devices, &decision, &cfg).unwrap();
        let latent = resolved_latent_bits(&devices, &cfg);
        for (i, d) in devices.iter().enumerate() {
            let finish = local_compute_latency(d, &cfg)
                + latent[i] / (alloc.shares[i] * cfg.bandwidth_hz * snr_log2(d, &cfg));
            let rel = (finish - report.t_star).abs() / report.t_star;
            worst_finish = worst_finish.max(rel);
            assert!(
                rel <= 1e-8,
                "trial {trial} device {i}: finish off by {rel:.3e}"
            );
        }
        let total: f64 = alloc.shares.iter().sum();
        let budget_err = (total - 1.0).abs();
        worst_budget = worst_budget.max(budget_err);
        assert!(
            budget_err <= 1e-8,
            "trial {trial}: budget off by {budget_err:.3e}"
        );
    }
    println!("[PASS] equal finish time: 1000 solves, max finish dev {worst_finish:.3e}, max budget dev {worst_budget:.3e}");
}

/// Share monotonicity: improving one participant's channel gain or CPU by
/// 10% strictly shrinks its optimal share and the completion latency while
/// strictly growing every other share, on all 200 trials.
#[test]
fn better_devices_get_less_bandwidth() {
    let cfg = config();
    for trial in 0..200u64 {
        let n = 2 + (trial % 5) as usize;
        let spec = ScenarioSpec {
            num_devices: n,
            rng_seed: 10_000 + trial,
            ..Default::default()
        };
        let devices = harness::generate_scenario(&spec, &cfg);
        let decision = UploadDecision::all_ones(n);
        let (before, report_before) = solver::solve_bandwidth(&devices, &decision, &cfg).unwrap();

        let target = (splitmix(trial) % n as u64) as usize;
        let mut improved = devices.clone();
        if trial % 2 == 0 {
            improved[target].channel_gain *= 1.1;
        } else {
            improved[target].cpu_freq_hz *= 1.1;
        }
        let (after, report_after) = solver::solve_bandwidth(&improved, &decision, &cfg).unwrap();

        assert!(
            after.shares[target] < before.shares[target],
            "trial {trial}: improved device {target} share went {} -> {}",
            before.shares[target],
            after.shares[target]
        );
        assert!(
            report_after.t_star < report_before.t_star,
            "trial {trial}: T* did not drop"
        );
        for i in 0..n {
            if i != target {
                assert!(
                    after.shares[i] > before.shares[i],
                    "trial {trial}: bystander {i} share did not grow"
                );
            }
        }
    }
    println!(
        "[PASS] share monotonicity under 10% channel/CPU improvements: 200 trials, zero violations"
    );
}

/// Exhaustive optimality: on 50 random eight-device scenarios the exhaustive
/// decision search never loses to either benchmark or to greedy.
#[test]
fn exhaustive_search_dominates_benchmarks_and_greedy() {
    let cfg = config();
    let profile = table();
    let mut greedy_matches = 0;
    for seed in 0..50u64 {
        let spec = ScenarioSpec {
            num_devices: 8,
            rng_seed: seed,
            ..Default::default()
        };
        let devices = harness::generate_scenario(&spec, &cfg);
        let best = solver::solve_decision_exhaustive(&devices, &cfg, &profile).unwrap();
        let fully = solver::benchmark_fully_uploading(&devices, &cfg, &profile).unwrap();
        let random =
            solver::benchmark_randomly_uploading(&devices, &cfg, &profile, splitmix(seed)).unwrap();
        let greedy = solver::solve_decision_greedy(&devices, &cfg, &profile).unwrap();
        assert!(
            best.system_cost <= fully.system_cost,
            "seed {seed}: exhaustive {} > fully {}",
            best.system_cost,
            fully.system_cost
        );
        assert!(
            best.system_cost <= random.system_cost,
            "seed {seed}: exhaustive {} > random {}",
            best.system_cost,
            random.system_cost
        );
        assert!(
            best.system_cost <= greedy.system_cost,
            "seed {seed}: exhaustive {} > greedy {}",
            best.system_cost,
            greedy.system_cost
        );
        if (greedy.system_cost - best.system_cost).abs() <= 1e-12 * best.system_cost {
            greedy_matches += 1;
        }
    }
    println!("[PASS] exhaustive optimality on 50 M=8 scenarios; greedy matched the optimum on {greedy_matches}/50");
}

/// Dual implementation: the straight-line cost oracle and the cost model
/// agree within 1e-9 relative on 1000 random (scenario, decision) pairs.
#[test]
fn cost_model_matches_straight_line_reimplementation() {
    let cfg = config();
    let profile = table();
    let mut max_rel = 0.0f64;
    for trial in 0..1000u64 {
        let spec = ScenarioSpec {
            num_devices: 8,
            rng_seed: 20_000 + trial,
            ..Default::default()
        };
        let devices = harness::generate_scenario(&spec, &cfg);
        let mask = splitmix(trial) & 0xFF;
        let decision = UploadDecision::from_mask(mask, 8);
        // Alternate between the solved allocation and a plain equal split.
        let allocation = if decision.num_participants() == 0 {
            BandwidthAllocation::zeros(8)
        } else if trial % 2 == 0 {
            solver::solve_bandwidth(&devices, &decision, &cfg)
                .unwrap()
                .0
        } else {
            BandwidthAllocation::equal_split(&decision)
        };
        let model = physics::system_cost(&devices, &decision, &allocation, &cfg, &profile)
            .unwrap()
            .system_cost;
        let reimpl =
            oracle::brute_force_cost(&devices, &decision, &allocation, &cfg, &profile).unwrap();
        let rel = (model - reimpl).abs() / model.abs();
        max_rel = max_rel.max(rel);
        assert!(rel <= 1e-9, "trial {trial}: cost mismatch rel {rel:.3e}");
    }
    println!("[PASS] dual cost implementation: 1000 pairs, max relative deviation {max_rel:.3e}");
}

fn averaged_costs(records: &[harness::SweepRecord<f64>], scheme: Scheme) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.averaged && r.scheme == scheme)
        .map(|r| r.system_cost)
        .collect()
}

/// Benchmark-study trends at desk scale (100 seeds): averaged cost grows
/// with the device count and falls with the edge CPU frequency for all three
/// schemes, the proposed scheme dominating both benchmarks at every point,
/// within a ten-minute budget.
#[test]
fn cost_trends_over_device_count_and_edge_frequency() {
    let cfg = config(); // lambda = 4
    let profile = table();
    let spec = ScenarioSpec::default(); // M = 30 for the F sweep
    let seeds: Vec<u64> = (0..100).collect();
    let started = Instant::now();

    let m_values = [10.0, 20.0, 30.0, 40.0, 50.0];
    let m_records = harness::sweep(
        &spec,
        &cfg,
        &profile,
        SweepAxis::DeviceCount,
        &m_values,
        &seeds,
    )
    .unwrap();
    for scheme in [
        Scheme::Proposed,
        Scheme::FullyUploading,
        Scheme::RandomlyUploading,
    ] {
        let costs = averaged_costs(&m_records, scheme);
        assert_eq!(costs.len(), m_values.len());
        for pair in costs.windows(2) {
            assert!(
                pair[1] >= pair[0],
                "{scheme:?} cost not non-decreasing in device count: {costs:?}"
            );
        }
    }

    let f_values = [0.5e9, 1.0e9, 1.5e9, 2.0e9, 2.5e9, 3.0e9];
    let f_records = harness::sweep(
        &spec,
        &cfg,
        &profile,
        SweepAxis::EdgeFrequency,
        &f_values,
        &seeds,
    )
    .unwrap();
    for scheme in [
        Scheme::Proposed,
        Scheme::FullyUploading,
        Scheme::RandomlyUploading,
    ] {
        let costs = averaged_costs(&f_records, scheme);
        for pair in costs.windows(2) {
            assert!(
                pair[1] <= pair[0],
                "{scheme:?} cost not non-increasing in edge frequency: {costs:?}"
            );
        }
    }

    for records in [&m_records, &f_records] {
        let proposed = averaged_costs(records, Scheme::Proposed);
        let fully = averaged_costs(records, Scheme::FullyUploading);
        let random = averaged_costs(records, Scheme::RandomlyUploading);
        for i in 0..proposed.len() {
            assert!(
                proposed[i] <= fully[i],
                "proposed lost to fully at point {i}"
            );
            assert!(
                proposed[i] <= random[i],
                "proposed lost to random at point {i}"
            );
        }
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 600, "trend sweeps took {elapsed:?}");
    println!(
        "[PASS] device-count and edge-frequency trends with dominance, 100 seeds, {elapsed:.2?}"
    );
}

/// Compression tradeoff: error rates match the shipped table exactly,
/// averaged normalized cost never rises with the ratio, and the
/// accuracy-per-cost efficiency of the proposed scheme peaks at ratio 32.
#[test]
fn compression_tradeoff_and_efficiency_peak() {
    let cfg = config();
    let profile = table();
    let spec = ScenarioSpec::default();
    let seeds: Vec<u64> = (0..100).collect();
    let lambdas = [1.0, 4.0, 8.0, 16.0, 32.0, 64.0];

    let expected_error = [17.0, 23.0, 25.0, 26.0, 31.0, 36.0];
    for (lambda, want) in lambdas.iter().zip(expected_error) {
        let (accuracy, _) = profile.lookup(*lambda).unwrap();
        assert_eq!(100.0 - accuracy, want, "error rate at ratio {lambda}");
    }

    let records = harness::sweep(
        &spec,
        &cfg,
        &profile,
        SweepAxis::CompressionRatio,
        &lambdas,
        &seeds,
    )
    .unwrap();
    let proposed: Vec<&harness::SweepRecord<f64>> = records
        .iter()
        .filter(|r| r.averaged && r.scheme == Scheme::Proposed)
        .collect();
    assert_eq!(proposed.len(), lambdas.len());
    for pair in proposed.windows(2) {
        assert!(
            pair[1].normalized_cost <= pair[0].normalized_cost,
            "normalized cost rose with the compression ratio"
        );
    }
    let efficiencies: Vec<f64> = proposed.iter().map(|r| r.efficiency).collect();
    let argmax = efficiencies
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    assert_eq!(
        lambdas[argmax], 32.0,
        "efficiency peaked at ratio {} (values {efficiencies:?})",
        lambdas[argmax]
    );
    println!(
        "[PASS] compression tradeoff: error rates exact, cost non-increasing, efficiency peaks at 32 ({:?})",
        efficiencies.iter().map(|e| e.round()).collect::<Vec<_>>()
    );
}
