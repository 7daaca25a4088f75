//! Joint uploading-decision and bandwidth-allocation (JUDBA) solver and
//! simulation harness for edge training over a shared wireless uplink.
//!
//! Devices hold local datasets they compress into latent vectors. Each device
//! either uploads its vectors to the edge server for training (spending
//! transmit energy and competing for uplink bandwidth) or stays out and
//! fine-tunes the broadcast model locally instead. The library models the
//! energy and latency of both choices, solves the bandwidth split that
//! minimizes the round's completion latency for any fixed decision (all
//! participants finish at the same instant; the latency is found by
//! bisection), and searches the binary decision space for the weighted
//! energy/latency cost optimum. An experiment harness reproduces the
//! benchmark comparisons and compression-ratio tradeoff studies, and a brute
//! force oracle module independently verifies the solver and cost model.
//!
//! All numerics are generic over a [`Scalar`] (`f32` or `f64`) via
//! `num-traits`; the aliases at the crate root pin `f64`, the precision the
//! CLI and every shipped tolerance assume.
//!
//! ```
//! use judba_core::{harness, solver, CompressionProfile, ScenarioSpec, SystemConfig};
//!
//! let config = SystemConfig::default();
//! let profile = CompressionProfile::default_table();
//! let devices = harness::generate_scenario(&ScenarioSpec::new(12, 42), &config);
//! let solution = solver::solve_judba(&devices, &config, &profile).unwrap();
//! assert!(solution.decision.num_participants() <= 12);
//! assert!(solution.completion_latency_s > 0.0);
//! ```

// Validation deliberately writes `!(x > 0)` instead of `x <= 0`: the negated
// form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod physics;
pub mod solver;

mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision aliases for the common types. Generic forms live in
/// their modules, e.g. `model::DeviceProfile<S>`.
pub type DeviceProfile = model::DeviceProfile<f64>;
pub type SystemConfig = model::SystemConfig<f64>;
pub type CompressionProfile = model::CompressionProfile<f64>;
pub type CompressionRow = model::CompressionRow<f64>;
pub type BandwidthAllocation = model::BandwidthAllocation<f64>;
pub type EnergyBreakdown = model::EnergyBreakdown<f64>;
pub type Solution = model::Solution<f64>;
pub type BisectionReport = solver::BisectionReport<f64>;
pub type ScenarioSpec = harness::ScenarioSpec<f64>;
pub type PathLoss = harness::PathLoss<f64>;
pub type SweepRecord = harness::SweepRecord<f64>;
pub type SchemeRuns = harness::SchemeRuns<f64>;

pub use model::UploadDecision;
