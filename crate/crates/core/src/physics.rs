//! Rate, latency, and energy models.
//!
//! The uplink is orthogonal-access over one shared band: a device holding a
//! bandwidth share `w` reaches `w * B * log2(1 + P*h/N0)` bits per second.
//! Before edge training starts, every participating device must encode its
//! raw samples locally and upload the resulting latent vectors, so the
//! completion latency is the max over participants of compute time plus
//! transmission time; the slowest device gates the whole round.
//!
//! Per-device energy has six components. Uploading devices pay for encoding,
//! transmission, idle waiting during edge training, model download, and local
//! inference; devices that stay out swap transmission for local fine-tuning
//! of the downloaded model. The compute-energy sub-models use the standard
//! switched-capacitance form `kappa * cycles * f^2`; the idle and download
//! terms charge the device idle power for the edge-training and broadcast
//! durations respectively.

use crate::error::{Error, Result};
use crate::model::{
    BandwidthAllocation, CompressionProfile, DeviceProfile, EnergyBreakdown, Solution,
    SystemConfig, UploadDecision,
};
use crate::scalar::{count, Scalar};

/// Latent-vector payload of one device in bits: `num_samples * sample_bits /
/// compression_ratio`. This is the raw per-device form; whether the solver
/// uses it or a scenario-wide common payload is decided by
/// [`resolved_latent_bits`].
pub fn latent_vector_size<S: Scalar>(device: &DeviceProfile<S>, config: &SystemConfig<S>) -> S {
    count::<S>(device.num_samples) * device.sample_bits / config.compression_ratio
}

/// Common latent-vector size shared by all devices: the mean raw dataset
/// size, compressed. With uniform `sample_bits` this is
/// `mean(num_samples) * sample_bits / compression_ratio`.
pub fn common_latent_bits<S: Scalar>(devices: &[DeviceProfile<S>], config: &SystemConfig<S>) -> S {
    let total = devices.iter().fold(S::zero(), |acc, d| {
        acc + count::<S>(d.num_samples) * d.sample_bits
    });
    total / count::<S>(devices.len() as u64) / config.compression_ratio
}

/// Per-device payload sizes with the `common_latent_size` flag applied.
pub fn resolved_latent_bits<S: Scalar>(
    devices: &[DeviceProfile<S>],
    config: &SystemConfig<S>,
) -> Vec<S> {
    if config.common_latent_size {
        let v = common_latent_bits(devices, config);
        vec![v; devices.len()]
    } else {
        devices
            .iter()
            .map(|d| latent_vector_size(d, config))
            .collect()
    }
}

/// Seconds a device spends encoding its samples: `num_samples *
/// cycles_per_image / cpu_freq_hz`.
pub fn local_compute_latency<S: Scalar>(device: &DeviceProfile<S>, config: &SystemConfig<S>) -> S {
    count::<S>(device.num_samples) * config.cycles_per_image / device.cpu_freq_hz
}

/// Uplink rate in bits per second at bandwidth share `share`.
pub fn achievable_rate<S: Scalar>(
    device: &DeviceProfile<S>,
    share: S,
    config: &SystemConfig<S>,
) -> S {
    share * config.bandwidth_hz * snr_log2(device, config)
}

/// `log2(1 + P*h/N0)` for the device's uplink.
pub fn snr_log2<S: Scalar>(device: &DeviceProfile<S>, config: &SystemConfig<S>) -> S {
    (S::one() + device.tx_power_w * device.channel_gain / config.noise_w).log2()
}

/// Seconds to push `latent_bits` through the device's share of the band.
pub fn transmission_seconds<S: Scalar>(
    latent_bits: S,
    device: &DeviceProfile<S>,
    share: S,
    config: &SystemConfig<S>,
) -> Result<S> {
    if share <= S::zero() {
        return Err(Error::ZeroBandwidth { device: device.id });
    }
    Ok(latent_bits / achievable_rate(device, share, config))
}

/// Uplink transmission delay for the device's own payload. Zero share is an
/// error: an infinite delay is never returned as a number.
pub fn transmission_latency<S: Scalar>(
    device: &DeviceProfile<S>,
    share: S,
    config: &SystemConfig<S>,
) -> Result<S> {
    transmission_seconds(latent_vector_size(device, config), device, share, config)
}

/// Completion latency: the max over participants of compute plus transmission
/// time. Zero when nobody participates.
pub fn completion_latency<S: Scalar>(
    devices: &[DeviceProfile<S>],
    decision: &UploadDecision,
    allocation: &BandwidthAllocation<S>,
    config: &SystemConfig<S>,
) -> Result<S> {
    let latent_bits = resolved_latent_bits(devices, config);
    let mut latest = S::zero();
    for i in decision.participants() {
        let device = &devices[i];
        let finish = local_compute_latency(device, config)
            + transmission_seconds(latent_bits[i], device, allocation.share(i), config)?;
        latest = latest.max(finish);
    }
    Ok(latest)
}

/// Scenario-level context the per-device energy model needs: how much data
/// the edge server trains on, the size of the model it broadcasts back, and
/// the common payload size when one is in force.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioTotals<S> {
    /// Total samples uploaded by participants.
    pub participant_samples: u64,
    /// Parameter count of the model at the configured compression ratio.
    pub model_params: S,
    /// Common latent-vector size, when `common_latent_size` is set.
    pub common_latent_bits: Option<S>,
}

impl<S: Scalar> ScenarioTotals<S> {
    pub fn compute(
        devices: &[DeviceProfile<S>],
        decision: &UploadDecision,
        config: &SystemConfig<S>,
        profile: &CompressionProfile<S>,
    ) -> Result<Self> {
        let (_, model_params) = profile.lookup(config.compression_ratio)?;
        let participant_samples = decision
            .participants()
            .map(|i| devices[i].num_samples)
            .sum();
        let common = config
            .common_latent_size
            .then(|| common_latent_bits(devices, config));
        Ok(Self {
            participant_samples,
            model_params,
            common_latent_bits: common,
        })
    }

    fn latent_bits_for(&self, device: &DeviceProfile<S>, config: &SystemConfig<S>) -> S {
        self.common_latent_bits
            .unwrap_or_else(|| latent_vector_size(device, config))
    }

    /// Seconds the edge server spends training on the uploaded samples.
    pub fn edge_train_seconds(&self, config: &SystemConfig<S>) -> S {
        config.train_cycles_per_sample * count::<S>(self.participant_samples) / config.edge_freq_hz
    }
}

fn switched_capacitance<S: Scalar>(
    cycles_per_sample: S,
    device: &DeviceProfile<S>,
    config: &SystemConfig<S>,
) -> S {
    config.kappa
        * cycles_per_sample
        * count::<S>(device.num_samples)
        * device.cpu_freq_hz
        * device.cpu_freq_hz
}

/// Seconds to receive the broadcast model over the full downlink band.
fn model_download_seconds<S: Scalar>(
    device: &DeviceProfile<S>,
    totals: &ScenarioTotals<S>,
    config: &SystemConfig<S>,
) -> S {
    let payload_bits = totals.model_params * count::<S>(u64::from(config.bits_per_parameter));
    let rate = config.bandwidth_hz
        * (S::one() + config.bs_tx_power_w * device.channel_gain / config.noise_w).log2();
    payload_bits / rate
}

/// Six-component energy account for one device under the given decision and
/// allocation. The branch total follows the device's own flag: uploading
/// devices pay transmission and no fine-tuning, and vice versa.
pub fn energy_breakdown<S: Scalar>(
    device: &DeviceProfile<S>,
    decision: &UploadDecision,
    allocation: &BandwidthAllocation<S>,
    totals: &ScenarioTotals<S>,
    config: &SystemConfig<S>,
) -> Result<EnergyBreakdown<S>> {
    let uploads = decision.uploads(device.id);
    let encode_j = switched_capacitance(config.cycles_per_image, device, config);
    let idle_j = config.idle_power_w * totals.edge_train_seconds(config);
    let down_j = config.idle_power_w * model_download_seconds(device, totals, config);
    let inf_j = switched_capacitance(config.inference_cycles_per_sample, device, config);
    let (trans_j, tune_j) = if uploads {
        let t_comm = transmission_seconds(
            totals.latent_bits_for(device, config),
            device,
            allocation.share(device.id),
            config,
        )?;
        (device.tx_power_w * t_comm, S::zero())
    } else {
        (
            S::zero(),
            switched_capacitance(config.finetune_cycles_per_sample, device, config),
        )
    };
    let mut breakdown = EnergyBreakdown {
        encode_j,
        trans_j,
        idle_j,
        down_j,
        tune_j,
        inf_j,
        total_j: S::zero(),
    };
    breakdown.total_j = device_energy(&breakdown, uploads);
    Ok(breakdown)
}

/// Total device energy selected by the upload flag: the uploading branch sum
/// when `uploads`, the fine-tuning branch sum otherwise.
pub fn device_energy<S: Scalar>(breakdown: &EnergyBreakdown<S>, uploads: bool) -> S {
    let shared = breakdown.encode_j + breakdown.idle_j + breakdown.down_j + breakdown.inf_j;
    if uploads {
        shared + breakdown.trans_j
    } else {
        shared + breakdown.tune_j
    }
}

/// Transmit-versus-fine-tune energy gap for a device offered share `share`:
/// positive means uploading costs more energy than fine-tuning would.
pub fn upload_energy_gap<S: Scalar>(
    device: &DeviceProfile<S>,
    share: S,
    totals: &ScenarioTotals<S>,
    config: &SystemConfig<S>,
) -> Result<S> {
    let t_comm = transmission_seconds(
        totals.latent_bits_for(device, config),
        device,
        share,
        config,
    )?;
    let trans = device.tx_power_w * t_comm;
    let tune = switched_capacitance(config.finetune_cycles_per_sample, device, config);
    Ok(trans - tune)
}

/// Evaluates the full cost model for a decision and allocation: per-device
/// weighted-sum costs `alpha * E_i + (1 - alpha) * T` and their sum over all
/// devices, participants or not.
pub fn system_cost<S: Scalar>(
    devices: &[DeviceProfile<S>],
    decision: &UploadDecision,
    allocation: &BandwidthAllocation<S>,
    config: &SystemConfig<S>,
    profile: &CompressionProfile<S>,
) -> Result<Solution<S>> {
    let totals = ScenarioTotals::compute(devices, decision, config, profile)?;
    let latency = completion_latency(devices, decision, allocation, config)?;
    let mut per_device_energy = Vec::with_capacity(devices.len());
    let mut per_device_cost = Vec::with_capacity(devices.len());
    let mut total = S::zero();
    for device in devices {
        let breakdown = energy_breakdown(device, decision, allocation, &totals, config)?;
        let energy = device_energy(&breakdown, decision.uploads(device.id));
        let cost = config.alpha * energy + (S::one() - config.alpha) * latency;
        per_device_energy.push(breakdown);
        per_device_cost.push(cost);
        total = total + cost;
    }
    Ok(Solution {
        decision: decision.clone(),
        allocation: allocation.clone(),
        completion_latency_s: latency,
        per_device_energy,
        per_device_cost,
        system_cost: total,
    })
}
