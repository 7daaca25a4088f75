//! Seeded scenario generation and the experiment sweeps.
//!
//! A scenario draws device CPU frequencies and dataset sizes uniformly from
//! configured ranges and places devices at uniform random distances, mapping
//! distance to channel gain through log-distance path loss
//! `h = g0 * (d0 / d)^theta`. Sweeps run the proposed solver and the two
//! benchmark schemes over an axis (device count, edge CPU frequency, or
//! compression ratio), per seed and averaged, and serialize the results as
//! CSV. Costs are reported both raw and normalized by the largest cost seen
//! in the sweep, and each record carries the accuracy-per-cost efficiency
//! metric used to pick a compression ratio.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{CompressionProfile, DeviceProfile, Solution, SystemConfig};
use crate::scalar::{lit, Scalar};
use crate::solver::{benchmark_fully_uploading, benchmark_randomly_uploading, solve_judba};

/// Log-distance path loss: gain `gain_at_reference` at `reference_m`, decaying
/// with `exponent`, over devices placed uniformly in `distance_range_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathLoss<S> {
    pub gain_at_reference: S,
    pub reference_m: S,
    pub exponent: S,
    pub distance_range_m: (S, S),
}

impl<S: Scalar> Default for PathLoss<S> {
    fn default() -> Self {
        Self {
            gain_at_reference: lit(1e-4),
            reference_m: lit(1.0),
            exponent: lit(3.0),
            distance_range_m: (lit(50.0), lit(300.0)),
        }
    }
}

impl<S: Scalar> PathLoss<S> {
    /// Channel gain at distance `d`: `g0 * (d0 / d)^theta`.
    pub fn gain_at(&self, distance_m: S) -> S {
        self.gain_at_reference * (self.reference_m / distance_m).powf(self.exponent)
    }
}

/// Recipe for drawing one random scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec<S> {
    pub num_devices: usize,
    pub freq_range_hz: (S, S),
    pub samples_range: (u64, u64),
    pub pathloss: PathLoss<S>,
    pub rng_seed: u64,
}

impl<S: Scalar> Default for ScenarioSpec<S> {
    fn default() -> Self {
        Self {
            num_devices: 30,
            freq_range_hz: (lit(0.1e9), lit(1.0e9)),
            samples_range: (50, 200),
            pathloss: PathLoss::default(),
            rng_seed: 0,
        }
    }
}

impl<S: Scalar> ScenarioSpec<S> {
    pub fn new(num_devices: usize, rng_seed: u64) -> Self {
        Self {
            num_devices,
            rng_seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut violations = Vec::new();
        if self.num_devices < 1 {
            violations.push("num_devices must be >= 1".to_string());
        }
        if self.freq_range_hz.0 > self.freq_range_hz.1 || !(self.freq_range_hz.0 > S::zero()) {
            violations.push("freq_range_hz must be positive with lo <= hi".to_string());
        }
        if self.samples_range.0 > self.samples_range.1 || self.samples_range.0 < 1 {
            violations.push("samples_range must have 1 <= lo <= hi".to_string());
        }
        if !(self.pathloss.gain_at_reference > S::zero()) {
            violations.push("pathloss_g0 must be > 0".to_string());
        }
        if !(self.pathloss.exponent > S::zero()) {
            violations.push("pathloss_exponent must be > 0".to_string());
        }
        if self.pathloss.distance_range_m.0 > self.pathloss.distance_range_m.1
            || !(self.pathloss.distance_range_m.0 > S::zero())
        {
            violations.push("distance_m range must be positive with lo <= hi".to_string());
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::ConfigInvalid { violations })
        }
    }

    /// Overrides the defaults with any scenario keys present in the bag.
    pub fn from_kv(bag: &mut crate::model::KvBag) -> Result<Self> {
        let mut spec = Self::default();
        let scalar = |key: &str, value: &str| -> Result<S> {
            let parsed: f64 = value
                .parse()
                .map_err(|_| Error::Parse(format!("{key}: `{value}` is not a number")))?;
            S::from_f64(parsed)
                .ok_or_else(|| Error::Parse(format!("{key}: `{value}` out of range")))
        };
        let int = |key: &str, value: &str| -> Result<u64> {
            value
                .parse()
                .map_err(|_| Error::Parse(format!("{key}: `{value}` is not an integer")))
        };
        if let Some(v) = bag.take("num_devices") {
            spec.num_devices = int("num_devices", &v)? as usize;
        }
        if let Some(v) = bag.take("freq_hz_lo") {
            spec.freq_range_hz.0 = scalar("freq_hz_lo", &v)?;
        }
        if let Some(v) = bag.take("freq_hz_hi") {
            spec.freq_range_hz.1 = scalar("freq_hz_hi", &v)?;
        }
        if let Some(v) = bag.take("samples_lo") {
            spec.samples_range.0 = int("samples_lo", &v)?;
        }
        if let Some(v) = bag.take("samples_hi") {
            spec.samples_range.1 = int("samples_hi", &v)?;
        }
        if let Some(v) = bag.take("pathloss_g0") {
            spec.pathloss.gain_at_reference = scalar("pathloss_g0", &v)?;
        }
        if let Some(v) = bag.take("pathloss_d0_m") {
            spec.pathloss.reference_m = scalar("pathloss_d0_m", &v)?;
        }
        if let Some(v) = bag.take("pathloss_exponent") {
            spec.pathloss.exponent = scalar("pathloss_exponent", &v)?;
        }
        if let Some(v) = bag.take("distance_m_lo") {
            spec.pathloss.distance_range_m.0 = scalar("distance_m_lo", &v)?;
        }
        if let Some(v) = bag.take("distance_m_hi") {
            spec.pathloss.distance_range_m.1 = scalar("distance_m_hi", &v)?;
        }
        if let Some(v) = bag.take("rng_seed") {
            spec.rng_seed = int("rng_seed", &v)?;
        }
        Ok(spec)
    }

    pub fn to_kv_string(&self) -> String {
        let f = |s: S| format!("{}", s.to_f64().expect("scalar fits in f64"));
        let mut out = String::new();
        out.push_str(&format!("num_devices = {}\n", self.num_devices));
        out.push_str(&format!("freq_hz_lo = {}\n", f(self.freq_range_hz.0)));
        out.push_str(&format!("freq_hz_hi = {}\n", f(self.freq_range_hz.1)));
        out.push_str(&format!("samples_lo = {}\n", self.samples_range.0));
        out.push_str(&format!("samples_hi = {}\n", self.samples_range.1));
        out.push_str(&format!(
            "pathloss_g0 = {}\n",
            f(self.pathloss.gain_at_reference)
        ));
        out.push_str(&format!(
            "pathloss_d0_m = {}\n",
            f(self.pathloss.reference_m)
        ));
        out.push_str(&format!(
            "pathloss_exponent = {}\n",
            f(self.pathloss.exponent)
        ));
        out.push_str(&format!(
            "distance_m_lo = {}\n",
            f(self.pathloss.distance_range_m.0)
        ));
        out.push_str(&format!(
            "distance_m_hi = {}\n",
            f(self.pathloss.distance_range_m.1)
        ));
        out.push_str(&format!("rng_seed = {}\n", self.rng_seed));
        out
    }
}

/// Draws a scenario deterministically from the spec's seed. Per device, the
/// draws are CPU frequency, then dataset size, then distance; transmit power
/// and sample size come from the config.
pub fn generate_scenario<S: Scalar>(
    spec: &ScenarioSpec<S>,
    config: &SystemConfig<S>,
) -> Vec<DeviceProfile<S>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let freq_lo = spec.freq_range_hz.0.to_f64().expect("freq fits f64");
    let freq_hi = spec.freq_range_hz.1.to_f64().expect("freq fits f64");
    let d_lo = spec
        .pathloss
        .distance_range_m
        .0
        .to_f64()
        .expect("distance fits f64");
    let d_hi = spec
        .pathloss
        .distance_range_m
        .1
        .to_f64()
        .expect("distance fits f64");
    (0..spec.num_devices)
        .map(|id| {
            let freq = if freq_lo < freq_hi {
                rng.random_range(freq_lo..freq_hi)
            } else {
                freq_lo
            };
            let samples = rng.random_range(spec.samples_range.0..=spec.samples_range.1);
            let distance = if d_lo < d_hi {
                rng.random_range(d_lo..d_hi)
            } else {
                d_lo
            };
            DeviceProfile {
                id,
                cpu_freq_hz: lit(freq),
                tx_power_w: config.tx_power_w,
                channel_gain: spec.pathloss.gain_at(lit(distance)),
                num_samples: samples,
                sample_bits: config.sample_bits,
            }
        })
        .collect()
}

/// Scheme identifiers as they appear in the CSV `scheme` column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Proposed,
    FullyUploading,
    RandomlyUploading,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::FullyUploading => "fully",
            Scheme::RandomlyUploading => "random",
        }
    }
}

/// Sweep axes as they appear in the CSV `axis_name` column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Number of devices, `M`.
    DeviceCount,
    /// Edge-server CPU frequency, `F`.
    EdgeFrequency,
    /// Compression ratio, `lambda`.
    CompressionRatio,
}

impl SweepAxis {
    pub fn label(self) -> &'static str {
        match self {
            SweepAxis::DeviceCount => "M",
            SweepAxis::EdgeFrequency => "F",
            SweepAxis::CompressionRatio => "lambda",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "M" => Ok(SweepAxis::DeviceCount),
            "F" => Ok(SweepAxis::EdgeFrequency),
            "lambda" => Ok(SweepAxis::CompressionRatio),
            other => Err(Error::Parse(format!(
                "axis must be one of M, F, lambda; got `{other}`"
            ))),
        }
    }
}

/// One result row: a scheme evaluated at one axis point, either for a single
/// seed or averaged across seeds (`averaged` set, `seed` empty).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord<S> {
    pub scheme: Scheme,
    pub axis_name: SweepAxis,
    pub axis_value: S,
    pub seed: Option<u64>,
    pub system_cost: S,
    pub normalized_cost: S,
    pub t_star_s: S,
    pub total_energy_j: S,
    pub accuracy_pct: S,
    pub efficiency: S,
    pub averaged: bool,
}

/// The three schemes run on one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeRuns<S> {
    pub proposed: Solution<S>,
    pub fully: Solution<S>,
    pub random: Solution<S>,
}

impl<S: Scalar> SchemeRuns<S> {
    pub fn get(&self, scheme: Scheme) -> &Solution<S> {
        match scheme {
            Scheme::Proposed => &self.proposed,
            Scheme::FullyUploading => &self.fully,
            Scheme::RandomlyUploading => &self.random,
        }
    }
}

/// Decorrelates the random-uploading decision stream from the scenario
/// generator, which consumes the raw seed.
fn rho_seed(seed: u64) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15
}

/// Runs the proposed solver and both benchmarks on one scenario.
pub fn run_schemes<S: Scalar>(
    devices: &[DeviceProfile<S>],
    config: &SystemConfig<S>,
    profile: &CompressionProfile<S>,
    seed: u64,
) -> Result<SchemeRuns<S>> {
    Ok(SchemeRuns {
        proposed: solve_judba(devices, config, profile)?,
        fully: benchmark_fully_uploading(devices, config, profile)?,
        random: benchmark_randomly_uploading(devices, config, profile, rho_seed(seed))?,
    })
}

const SCHEMES: [Scheme; 3] = [
    Scheme::Proposed,
    Scheme::FullyUploading,
    Scheme::RandomlyUploading,
];

/// Builds the three per-seed records for one cell. Normalized cost and
/// efficiency are left at zero until [`normalize`] and [`fill_efficiency`]
/// run over the whole sweep.
pub fn records_for_cell<S: Scalar>(
    axis: SweepAxis,
    axis_value: S,
    seed: u64,
    runs: &SchemeRuns<S>,
    accuracy_pct: S,
) -> Vec<SweepRecord<S>> {
    SCHEMES
        .iter()
        .map(|&scheme| {
            let solution = runs.get(scheme);
            SweepRecord {
                scheme,
                axis_name: axis,
                axis_value,
                seed: Some(seed),
                system_cost: solution.system_cost,
                normalized_cost: S::zero(),
                t_star_s: solution.completion_latency_s,
                total_energy_j: solution.total_energy_j(),
                accuracy_pct,
                efficiency: S::zero(),
                averaged: false,
            }
        })
        .collect()
}

/// Runs a full sweep: every (axis value, seed) cell through all three
/// schemes, plus per-value arithmetic means across seeds, normalized and with
/// efficiencies filled. Cells run in parallel; the output ordering and values
/// do not depend on the thread count.
pub fn sweep<S: Scalar>(
    base_spec: &ScenarioSpec<S>,
    config: &SystemConfig<S>,
    profile: &CompressionProfile<S>,
    axis: SweepAxis,
    values: &[S],
    seeds: &[u64],
) -> Result<Vec<SweepRecord<S>>> {
    if values.is_empty() || seeds.is_empty() {
        return Err(Error::EmptySweep);
    }
    base_spec.validate()?;
    config.validate()?;

    struct Cell<S> {
        spec: ScenarioSpec<S>,
        config: SystemConfig<S>,
        axis_value: S,
        seed: u64,
    }
    let mut cells = Vec::with_capacity(values.len() * seeds.len());
    for &value in values {
        for &seed in seeds {
            let mut spec = ScenarioSpec {
                rng_seed: seed,
                ..base_spec.clone()
            };
            let mut cell_config = config.clone();
            match axis {
                SweepAxis::DeviceCount => {
                    let as_f64 = value.to_f64().unwrap_or(f64::NAN);
                    if !(as_f64.fract() == 0.0 && as_f64 >= 1.0) {
                        return Err(Error::Parse(format!(
                            "M axis values must be positive integers, got {as_f64}"
                        )));
                    }
                    spec.num_devices = as_f64 as usize;
                }
                SweepAxis::EdgeFrequency => cell_config.edge_freq_hz = value,
                SweepAxis::CompressionRatio => cell_config.compression_ratio = value,
            }
            // Fail early on ratios missing from the table.
            profile.lookup(cell_config.compression_ratio)?;
            cells.push(Cell {
                spec,
                config: cell_config,
                axis_value: value,
                seed,
            });
        }
    }

    let per_cell: Vec<Vec<SweepRecord<S>>> = cells
        .par_iter()
        .map(|cell| {
            let devices = generate_scenario(&cell.spec, &cell.config);
            let runs = run_schemes(&devices, &cell.config, profile, cell.seed)?;
            let (accuracy, _) = profile.lookup(cell.config.compression_ratio)?;
            Ok(records_for_cell(
                axis,
                cell.axis_value,
                cell.seed,
                &runs,
                accuracy,
            ))
        })
        .collect::<Result<_>>()?;

    let mut records: Vec<SweepRecord<S>> = per_cell.into_iter().flatten().collect();

    // Averaged rows: arithmetic mean across seeds in fixed index order.
    let seeds_n = lit::<S>(seeds.len() as f64);
    let mut averaged = Vec::with_capacity(values.len() * SCHEMES.len());
    for &value in values {
        for &scheme in &SCHEMES {
            let mut cost = S::zero();
            let mut t_star = S::zero();
            let mut energy = S::zero();
            let mut accuracy = S::zero();
            for record in records
                .iter()
                .filter(|r| r.scheme == scheme && r.axis_value == value)
            {
                cost = cost + record.system_cost;
                t_star = t_star + record.t_star_s;
                energy = energy + record.total_energy_j;
                accuracy = record.accuracy_pct;
            }
            averaged.push(SweepRecord {
                scheme,
                axis_name: axis,
                axis_value: value,
                seed: None,
                system_cost: cost / seeds_n,
                normalized_cost: S::zero(),
                t_star_s: t_star / seeds_n,
                total_energy_j: energy / seeds_n,
                accuracy_pct: accuracy,
                efficiency: S::zero(),
                averaged: true,
            });
        }
    }
    records.extend(averaged);

    normalize(&mut records)?;
    fill_efficiency(&mut records)?;
    Ok(records)
}

/// Divides every record's cost by the largest cost in the set, so the most
/// expensive record maps to exactly 1.
pub fn normalize<S: Scalar>(records: &mut [SweepRecord<S>]) -> Result<()> {
    if records.is_empty() {
        return Err(Error::EmptySweep);
    }
    let max = records
        .iter()
        .map(|r| r.system_cost)
        .fold(S::neg_infinity(), |a, b| a.max(b));
    if !(max > S::zero()) {
        return Err(Error::ZeroCost);
    }
    for record in records.iter_mut() {
        record.normalized_cost = record.system_cost / max;
    }
    Ok(())
}

/// Accuracy-per-cost metric for choosing a compression ratio.
pub fn efficiency<S: Scalar>(accuracy_pct: S, system_cost: S) -> Result<S> {
    if !(system_cost > S::zero()) {
        return Err(Error::ZeroCost);
    }
    Ok(accuracy_pct / system_cost)
}

/// Axis values at which the averaged-cost ordering of two schemes flips,
/// e.g. where the fully-uploading benchmark starts losing to the random one
/// as the device count grows. Whether and where that happens depends on the
/// calibration constants, so it is reported rather than asserted.
pub fn crossover_points<S: Scalar>(records: &[SweepRecord<S>], a: Scheme, b: Scheme) -> Vec<S> {
    let costs_of = |scheme: Scheme| -> Vec<(S, S)> {
        records
            .iter()
            .filter(|r| r.averaged && r.scheme == scheme)
            .map(|r| (r.axis_value, r.system_cost))
            .collect()
    };
    let costs_a = costs_of(a);
    let costs_b = costs_of(b);
    let mut flips = Vec::new();
    let mut previous: Option<bool> = None;
    for ((value, cost_a), (_, cost_b)) in costs_a.iter().zip(&costs_b) {
        if cost_a == cost_b {
            continue;
        }
        let a_wins = cost_a < cost_b;
        if previous.is_some_and(|p| p != a_wins) {
            flips.push(*value);
        }
        previous = Some(a_wins);
    }
    flips
}

/// Fills every record's efficiency from its normalized cost.
pub fn fill_efficiency<S: Scalar>(records: &mut [SweepRecord<S>]) -> Result<()> {
    for record in records.iter_mut() {
        record.efficiency = efficiency(record.accuracy_pct, record.normalized_cost)?;
    }
    Ok(())
}

/// CSV header, exactly as written.
pub const CSV_HEADER: &str = "scheme,axis_name,axis_value,seed,system_cost,normalized_cost,\
                              t_star_s,total_energy_j,accuracy_pct,efficiency,averaged";

/// Serializes a float with nine significant digits.
fn fmt_sig9<S: Scalar>(value: S) -> String {
    format!("{:.8e}", value.to_f64().expect("value fits f64"))
}

/// Serializes records in the fixed CSV schema. Floats carry nine significant
/// digits; mean rows have an empty seed column and `averaged` set to 1.
pub fn records_to_csv<S: Scalar>(records: &[SweepRecord<S>]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let seed = r.seed.map(|s| s.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.scheme.label(),
            r.axis_name.label(),
            fmt_sig9(r.axis_value),
            seed,
            fmt_sig9(r.system_cost),
            fmt_sig9(r.normalized_cost),
            fmt_sig9(r.t_star_s),
            fmt_sig9(r.total_energy_j),
            fmt_sig9(r.accuracy_pct),
            fmt_sig9(r.efficiency),
            u8::from(r.averaged),
        ));
    }
    out
}
