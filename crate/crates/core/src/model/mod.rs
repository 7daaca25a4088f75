//! Domain types: device profiles, system configuration, the compression
//! profile table, decision/allocation vectors, and solution records.
//!
//! Everything here is immutable after construction and safe to share across
//! worker threads; no type has interior mutability.

mod text;

pub use text::{parse_kv, KvBag};

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// One IIoT device: compute speed, radio parameters, and local dataset size.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceProfile<S> {
    /// Index of the device within its scenario.
    pub id: usize,
    /// CPU frequency in cycles per second.
    pub cpu_freq_hz: S,
    /// Uplink transmit power in watts.
    pub tx_power_w: S,
    /// Linear channel power gain between the device and the base station.
    pub channel_gain: S,
    /// Number of raw data samples held by the device.
    pub num_samples: u64,
    /// Size of one raw data sample in bits.
    pub sample_bits: S,
}

impl<S: Scalar> DeviceProfile<S> {
    /// Checks the per-device invariants, reporting every violated field.
    pub fn validate(&self) -> Result<()> {
        let mut violations = Vec::new();
        let zero = S::zero();
        if !(self.cpu_freq_hz > zero) {
            violations.push(format!("device[{}].cpu_freq_hz must be > 0", self.id));
        }
        if !(self.tx_power_w > zero) {
            violations.push(format!("device[{}].tx_power_w must be > 0", self.id));
        }
        if !(self.channel_gain > zero) {
            violations.push(format!("device[{}].channel_gain must be > 0", self.id));
        }
        if self.num_samples < 1 {
            violations.push(format!("device[{}].num_samples must be >= 1", self.id));
        }
        if !(self.sample_bits > zero) {
            violations.push(format!("device[{}].sample_bits must be > 0", self.id));
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::ConfigInvalid { violations })
        }
    }
}

/// Global system constants: channel, powers, cost weights, compression ratio,
/// calibration constants for the energy sub-models, and solver controls.
///
/// The calibration constants (`kappa`, `cycles_per_image`, the three
/// per-sample cycle counts, `bs_tx_power_w`, `bits_per_parameter`) have no
/// published values; the defaults here were fixed by calibrating the shipped
/// compression-ratio study (see the harness module) and can all be overridden
/// through the config file.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig<S> {
    /// Total uplink channel bandwidth B in Hz.
    pub bandwidth_hz: S,
    /// White noise power N0 in watts.
    pub noise_w: S,
    /// Device idle power P_I in watts.
    pub idle_power_w: S,
    /// Device transmit power in watts, used when generating scenarios.
    pub tx_power_w: S,
    /// Raw bits per data sample, used when generating scenarios.
    pub sample_bits: S,
    /// Preference weight on energy; `1 - alpha` weighs completion latency.
    pub alpha: S,
    /// Autoencoder compression ratio (raw bits per latent bit), >= 1.
    pub compression_ratio: S,
    /// CPU cycles to encode one raw sample into its latent vector.
    pub cycles_per_image: S,
    /// Effective switched capacitance in J/(cycle * Hz^2).
    pub kappa: S,
    /// Edge-server CPU frequency F in cycles per second.
    pub edge_freq_hz: S,
    /// Edge-server cycles per sample for training the shared model.
    pub train_cycles_per_sample: S,
    /// Device cycles per sample for local fine-tuning of the downloaded model.
    pub finetune_cycles_per_sample: S,
    /// Device cycles per sample for local inference.
    pub inference_cycles_per_sample: S,
    /// Base-station broadcast power in watts (full-band model download).
    pub bs_tx_power_w: S,
    /// Bits per model parameter for the download payload.
    pub bits_per_parameter: u32,
    /// When set (default), all devices share one latent-vector size computed
    /// from the mean raw dataset size, matching the common-payload assumption
    /// the closed-form allocation is stated under.
    pub common_latent_size: bool,
    /// Largest device count for which the decision search enumerates all
    /// 2^M decision vectors; larger scenarios fall back to hill climbing.
    pub exhaustive_threshold: usize,
    /// Relative residual tolerance of the bandwidth bisection.
    pub bisect_tol: S,
    /// Iteration budget of the bandwidth bisection.
    pub bisect_max_iter: u32,
}

impl<S: Scalar> Default for SystemConfig<S> {
    fn default() -> Self {
        Self {
            bandwidth_hz: lit(10.0e6),
            noise_w: lit(7.9e-13),
            idle_power_w: lit(0.1),
            tx_power_w: lit(0.3),
            sample_bits: lit(800.0e3),
            alpha: lit(0.5),
            compression_ratio: lit(4.0),
            cycles_per_image: lit(1.0e7),
            kappa: lit(1.0e-27),
            edge_freq_hz: lit(2.5e9),
            train_cycles_per_sample: lit(1.0e7),
            finetune_cycles_per_sample: lit(4.0e8),
            inference_cycles_per_sample: lit(2.0e8),
            bs_tx_power_w: lit(1.0),
            bits_per_parameter: 32,
            common_latent_size: true,
            exhaustive_threshold: 12,
            bisect_tol: lit(1.0e-9),
            bisect_max_iter: 200,
        }
    }
}

impl<S: Scalar> SystemConfig<S> {
    /// Checks every invariant, reporting all violated fields at once.
    pub fn validate(&self) -> Result<()> {
        let zero = S::zero();
        let one = S::one();
        let mut violations = Vec::new();
        let mut require_positive = |name: &str, value: S| {
            if !(value > zero) {
                violations.push(format!("{name} must be > 0"));
            }
        };
        require_positive("bandwidth_hz", self.bandwidth_hz);
        require_positive("noise_w", self.noise_w);
        require_positive("idle_power_w", self.idle_power_w);
        require_positive("tx_power_w", self.tx_power_w);
        require_positive("sample_bits", self.sample_bits);
        require_positive("cycles_per_image", self.cycles_per_image);
        require_positive("kappa", self.kappa);
        require_positive("edge_freq_hz", self.edge_freq_hz);
        require_positive("bs_tx_power_w", self.bs_tx_power_w);
        if !(self.alpha >= zero && self.alpha <= one) {
            violations.push("alpha must lie in [0, 1]".to_string());
        }
        if !(self.compression_ratio >= one) {
            violations.push("compression_ratio must be >= 1".to_string());
        }
        if self.train_cycles_per_sample < zero
            || self.finetune_cycles_per_sample < zero
            || self.inference_cycles_per_sample < zero
        {
            violations.push("per-sample cycle counts must be >= 0".to_string());
        }
        if self.bits_per_parameter == 0 {
            violations.push("bits_per_parameter must be >= 1".to_string());
        }
        if self.exhaustive_threshold < 1 {
            violations.push("exhaustive_threshold must be >= 1".to_string());
        }
        if !(self.bisect_tol > zero && self.bisect_tol <= lit(1.0e-3)) {
            violations.push("bisect_tol must lie in (0, 1e-3]".to_string());
        }
        if self.bisect_max_iter == 0 {
            violations.push("bisect_max_iter must be >= 1".to_string());
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::ConfigInvalid { violations })
        }
    }
}

/// Validates a configuration and passes it through unchanged.
pub fn validate_config<S: Scalar>(config: SystemConfig<S>) -> Result<SystemConfig<S>> {
    config.validate()?;
    Ok(config)
}

/// One row of the compression-ratio table: ratio, achieved inference
/// accuracy, and the size of the model to be downloaded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressionRow<S> {
    pub lambda: S,
    pub accuracy_pct: S,
    pub model_params: S,
}

/// Lookup table mapping a compression ratio to measured CNN accuracy and
/// model size. Lookups are exact-match; ratios between rows are not
/// interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressionProfile<S> {
    pub rows: Vec<CompressionRow<S>>,
}

impl<S: Scalar> CompressionProfile<S> {
    pub fn new(rows: Vec<CompressionRow<S>>) -> Result<Self> {
        let profile = Self { rows };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<()> {
        let mut violations = Vec::new();
        if self.rows.is_empty() {
            violations.push("compression profile must have at least one row".to_string());
        }
        for pair in self.rows.windows(2) {
            if !(pair[1].lambda > pair[0].lambda) {
                violations.push(format!(
                    "profile lambdas must be strictly increasing ({} then {})",
                    pair[0].lambda, pair[1].lambda
                ));
            }
        }
        for row in &self.rows {
            if !(row.accuracy_pct > S::zero() && row.accuracy_pct <= lit(100.0)) {
                violations.push(format!(
                    "accuracy {}% at lambda {} is outside (0, 100]",
                    row.accuracy_pct, row.lambda
                ));
            }
            if !(row.model_params > S::zero()) {
                violations.push(format!("model_params at lambda {} must be > 0", row.lambda));
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::ConfigInvalid { violations })
        }
    }

    /// Exact-match lookup returning `(accuracy_pct, model_params)`.
    pub fn lookup(&self, lambda: S) -> Result<(S, S)> {
        self.rows
            .iter()
            .find(|row| row.lambda == lambda)
            .map(|row| (row.accuracy_pct, row.model_params))
            .ok_or_else(|| Error::UnknownRatio {
                lambda: lambda.to_f64().unwrap_or(f64::NAN),
            })
    }

    /// The compression table shipped with the crate, measured on a 10-class
    /// image-classification benchmark. The ratio-1 row is the uncompressed
    /// baseline.
    pub fn default_table() -> Self {
        let row = |lambda: f64, accuracy_pct: f64, model_params: f64| CompressionRow {
            lambda: lit(lambda),
            accuracy_pct: lit(accuracy_pct),
            model_params: lit(model_params),
        };
        Self {
            rows: vec![
                row(1.0, 83.0, 2798.25e3),
                row(4.0, 77.0, 619.18e3),
                row(8.0, 75.0, 272.11e3),
                row(16.0, 74.0, 131.75e3),
                row(32.0, 69.0, 34.31e3),
                row(64.0, 64.0, 33.45e3),
            ],
        }
    }
}

/// Exact-match lookup of `(accuracy_pct, model_params)` for a ratio.
pub fn lookup_compression<S: Scalar>(profile: &CompressionProfile<S>, lambda: S) -> Result<(S, S)> {
    profile.lookup(lambda)
}

/// Binary per-device uploading decision: `true` means the device uploads its
/// latent vectors and participates in edge training.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UploadDecision {
    pub rho: Vec<bool>,
}

impl UploadDecision {
    pub fn new(rho: Vec<bool>) -> Self {
        Self { rho }
    }

    /// Everyone uploads.
    pub fn all_ones(num_devices: usize) -> Self {
        Self {
            rho: vec![true; num_devices],
        }
    }

    /// Nobody uploads.
    pub fn all_zeros(num_devices: usize) -> Self {
        Self {
            rho: vec![false; num_devices],
        }
    }

    /// Decision vector from the low `num_devices` bits of `mask`
    /// (bit `i` is device `i`).
    pub fn from_mask(mask: u64, num_devices: usize) -> Self {
        Self {
            rho: (0..num_devices).map(|i| mask >> i & 1 == 1).collect(),
        }
    }

    pub fn num_devices(&self) -> usize {
        self.rho.len()
    }

    /// Number of participating devices.
    pub fn num_participants(&self) -> usize {
        self.rho.iter().filter(|&&r| r).count()
    }

    /// Indices of participating devices, in device order.
    pub fn participants(&self) -> impl Iterator<Item = usize> + '_ {
        self.rho
            .iter()
            .enumerate()
            .filter_map(|(i, &r)| r.then_some(i))
    }

    pub fn uploads(&self, device: usize) -> bool {
        self.rho[device]
    }

    /// Copy of the decision with one device's flag flipped.
    pub fn flipped(&self, device: usize) -> Self {
        let mut rho = self.rho.clone();
        rho[device] = !rho[device];
        Self { rho }
    }
}

/// Bandwidth shares aligned with device indices. Shares are fractions of the
/// total uplink bandwidth; non-participants hold exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthAllocation<S> {
    pub shares: Vec<S>,
}

impl<S: Scalar> BandwidthAllocation<S> {
    pub fn new(shares: Vec<S>) -> Self {
        Self { shares }
    }

    /// All-zero allocation for the no-upload degenerate case.
    pub fn zeros(num_devices: usize) -> Self {
        Self {
            shares: vec![S::zero(); num_devices],
        }
    }

    /// Equal split of the whole band among the decision's participants.
    pub fn equal_split(decision: &UploadDecision) -> Self {
        let n = decision.num_participants();
        let mut shares = vec![S::zero(); decision.num_devices()];
        if n > 0 {
            let share = S::one() / crate::scalar::count(n as u64);
            for i in decision.participants() {
                shares[i] = share;
            }
        }
        Self { shares }
    }

    pub fn share(&self, device: usize) -> S {
        self.shares[device]
    }

    /// Sum of the participants' shares.
    pub fn total(&self, decision: &UploadDecision) -> S {
        decision
            .participants()
            .fold(S::zero(), |acc, i| acc + self.shares[i])
    }

    /// Checks the allocation against a decision: shares in [0, 1], the total
    /// within `tol` of the unit budget, and exact zeros for non-participants.
    pub fn validate(&self, decision: &UploadDecision, tol: S) -> Result<()> {
        let mut violations = Vec::new();
        if self.shares.len() != decision.num_devices() {
            violations.push(format!(
                "allocation has {} shares for {} devices",
                self.shares.len(),
                decision.num_devices()
            ));
        } else {
            for (i, &w) in self.shares.iter().enumerate() {
                if !(w >= S::zero() && w <= S::one()) {
                    violations.push(format!("share[{i}] = {w} is outside [0, 1]"));
                }
                if !decision.uploads(i) && w != S::zero() {
                    violations.push(format!("non-participant {i} holds share {w}"));
                }
            }
            let total = self.total(decision);
            if total > S::one() + tol {
                violations.push(format!("shares sum to {total} > 1"));
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::ConfigInvalid { violations })
        }
    }
}

/// Per-device energy components in joules, plus their branch total.
///
/// For an uploading device the total is encode + transmit + idle + download +
/// inference; for a non-uploading device it is encode + idle + download +
/// fine-tune + inference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown<S> {
    pub encode_j: S,
    pub trans_j: S,
    pub idle_j: S,
    pub down_j: S,
    pub tune_j: S,
    pub inf_j: S,
    pub total_j: S,
}

impl<S: Scalar> EnergyBreakdown<S> {
    /// Transmit-versus-fine-tune energy gap that drives the upload decision.
    pub fn delta_e(&self) -> S {
        self.trans_j - self.tune_j
    }
}

/// A solved instance: the decision, the bandwidth shares, the common
/// completion latency, and the per-device energy and cost records.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<S> {
    pub decision: UploadDecision,
    pub allocation: BandwidthAllocation<S>,
    /// Completion latency shared by all devices (zero when nobody uploads).
    pub completion_latency_s: S,
    pub per_device_energy: Vec<EnergyBreakdown<S>>,
    /// Weighted-sum cost of each device.
    pub per_device_cost: Vec<S>,
    /// Sum of the per-device costs over all devices.
    pub system_cost: S,
}

impl<S: Scalar> Solution<S> {
    /// Total energy drawn by all devices, in joules.
    pub fn total_energy_j(&self) -> S {
        self.per_device_energy
            .iter()
            .fold(S::zero(), |acc, e| acc + e.total_j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table2_config() -> SystemConfig<f64> {
        SystemConfig::default()
    }

    #[test]
    fn table2_defaults_are_valid() {
        let config = table2_config();
        assert_eq!(config.bandwidth_hz, 10.0e6);
        assert_eq!(config.tx_power_w, 0.3);
        assert_eq!(config.idle_power_w, 0.1);
        assert_eq!(config.noise_w, 7.9e-13);
        assert_eq!(config.sample_bits, 800.0e3);
        assert_eq!(config.alpha, 0.5);
        let validated = validate_config(config.clone()).expect("defaults must validate");
        assert_eq!(validated, config);
    }

    #[test]
    fn alpha_out_of_range_is_rejected() {
        let config = SystemConfig::<f64> {
            alpha: 1.5,
            ..Default::default()
        };
        let err = validate_config(config).unwrap_err();
        match err {
            Error::ConfigInvalid { violations } => {
                assert!(
                    violations.iter().any(|v| v.contains("alpha")),
                    "{violations:?}"
                );
            }
            other => panic!("expected ConfigInvalid, got {other:?}"),
        }
    }

    #[test]
    fn zero_bandwidth_is_rejected() {
        let config = SystemConfig::<f64> {
            bandwidth_hz: 0.0,
            ..Default::default()
        };
        let err = validate_config(config).unwrap_err();
        match err {
            Error::ConfigInvalid { violations } => {
                assert!(
                    violations.iter().any(|v| v.contains("bandwidth_hz")),
                    "{violations:?}"
                );
            }
            other => panic!("expected ConfigInvalid, got {other:?}"),
        }
    }

    #[test]
    fn every_violation_is_reported() {
        let config = SystemConfig::<f64> {
            alpha: -0.1,
            bandwidth_hz: 0.0,
            bisect_tol: 1.0,
            ..Default::default()
        };
        match validate_config(config).unwrap_err() {
            Error::ConfigInvalid { violations } => {
                assert!(violations.iter().any(|v| v.contains("alpha")));
                assert!(violations.iter().any(|v| v.contains("bandwidth_hz")));
                assert!(violations.iter().any(|v| v.contains("bisect_tol")));
            }
            other => panic!("expected ConfigInvalid, got {other:?}"),
        }
    }

    #[test]
    fn lookup_matches_table_rows() {
        let profile = CompressionProfile::<f64>::default_table();
        assert_eq!(profile.lookup(32.0).unwrap(), (69.0, 34.31e3));
        assert_eq!(profile.lookup(1.0).unwrap(), (83.0, 2798.25e3));
        assert_eq!(
            lookup_compression(&profile, 16.0).unwrap(),
            (74.0, 131.75e3)
        );
    }

    #[test]
    fn lookup_absent_ratio_fails_without_interpolation() {
        let profile = CompressionProfile::<f64>::default_table();
        assert!(matches!(
            profile.lookup(5.0),
            Err(Error::UnknownRatio { .. })
        ));
    }

    #[test]
    fn lookup_is_pure() {
        let profile = CompressionProfile::<f64>::default_table();
        assert_eq!(profile.lookup(8.0).unwrap(), profile.lookup(8.0).unwrap());
    }

    #[test]
    fn shipped_table_accuracy_ratio_is_near_85_percent() {
        // Accuracy retained at ratio 32 relative to the uncompressed baseline.
        let profile = CompressionProfile::<f64>::default_table();
        let (acc32, params32) = profile.lookup(32.0).unwrap();
        let (acc1, params1) = profile.lookup(1.0).unwrap();
        let retained_pct = acc32 / acc1 * 100.0;
        assert!(
            (retained_pct - 85.0).abs() < 2.0,
            "retained accuracy {retained_pct:.2}% should be within 2 points of 85%"
        );
        // The ratio-32 model is roughly 1% of the baseline's parameter count.
        assert!(params32 / params1 < 0.02);
    }

    #[test]
    fn shipped_table_accuracy_is_non_increasing() {
        let profile = CompressionProfile::<f64>::default_table();
        for pair in profile.rows.windows(2) {
            assert!(pair[1].accuracy_pct <= pair[0].accuracy_pct);
        }
        profile.validate().unwrap();
    }

    #[test]
    fn profile_rejects_unsorted_lambdas() {
        let rows = vec![
            CompressionRow {
                lambda: 4.0,
                accuracy_pct: 77.0,
                model_params: 1.0,
            },
            CompressionRow {
                lambda: 4.0,
                accuracy_pct: 75.0,
                model_params: 1.0,
            },
        ];
        assert!(CompressionProfile::<f64>::new(rows).is_err());
    }

    #[test]
    fn decision_participants_and_mask() {
        let d = UploadDecision::from_mask(0b101, 3);
        assert_eq!(d.rho, vec![true, false, true]);
        assert_eq!(d.num_participants(), 2);
        assert_eq!(d.participants().collect::<Vec<_>>(), vec![0, 2]);
        assert!(UploadDecision::all_zeros(3).participants().next().is_none());
    }

    #[test]
    fn decision_lexicographic_order() {
        // [0, 1] precedes [1, 0]: tie-breaking relies on this ordering.
        let a = UploadDecision::new(vec![false, true]);
        let b = UploadDecision::new(vec![true, false]);
        assert!(a < b);
    }

    #[test]
    fn equal_split_allocation() {
        let decision = UploadDecision::from_mask(0b0111, 4);
        let alloc = BandwidthAllocation::<f64>::equal_split(&decision);
        assert_eq!(alloc.shares, vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]);
        alloc.validate(&decision, 1e-12).unwrap();
    }

    #[test]
    fn allocation_rejects_share_on_non_participant() {
        let decision = UploadDecision::from_mask(0b01, 2);
        let alloc = BandwidthAllocation::new(vec![0.5, 0.5]);
        assert!(alloc.validate(&decision, 1e-12).is_err());
    }

    #[test]
    fn device_validation_reports_all_fields() {
        let device = DeviceProfile::<f64> {
            id: 3,
            cpu_freq_hz: 0.0,
            tx_power_w: -1.0,
            channel_gain: 1e-10,
            num_samples: 0,
            sample_bits: 800e3,
        };
        match device.validate().unwrap_err() {
            Error::ConfigInvalid { violations } => {
                assert_eq!(violations.len(), 3, "{violations:?}");
                assert!(violations.iter().all(|v| v.contains("device[3]")));
            }
            other => panic!("expected ConfigInvalid, got {other:?}"),
        }
    }
}
