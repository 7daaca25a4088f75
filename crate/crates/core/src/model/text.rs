//! Text form of the configuration and the compression-profile table.
//!
//! Config files are flat `key = value` lines with `#` comments. The key names
//! are exactly the `SystemConfig` field names. A compression profile comes
//! either inline through repeated `profile_row = lambda,accuracy_pct,params`
//! lines or from a separate CSV with the header
//! `lambda,accuracy_pct,model_params`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{CompressionProfile, CompressionRow, SystemConfig};

/// Parsed `key = value` lines, tracking which keys a consumer has taken so
/// leftovers (typos, keys for another layer) can be reported.
#[derive(Debug, Clone)]
pub struct KvBag {
    pairs: Vec<(String, String)>,
    used: Vec<bool>,
}

impl KvBag {
    pub fn new(pairs: Vec<(String, String)>) -> Self {
        let used = vec![false; pairs.len()];
        Self { pairs, used }
    }

    /// Takes the last value for `key`, marking every occurrence used.
    pub fn take(&mut self, key: &str) -> Option<String> {
        let mut found = None;
        for (i, (k, v)) in self.pairs.iter().enumerate() {
            if k == key {
                self.used[i] = true;
                found = Some(v.clone());
            }
        }
        found
    }

    /// Takes every value for `key`, in file order.
    pub fn take_all(&mut self, key: &str) -> Vec<String> {
        let mut values = Vec::new();
        for (i, (k, v)) in self.pairs.iter().enumerate() {
            if k == key {
                self.used[i] = true;
                values.push(v.clone());
            }
        }
        values
    }

    /// Keys nobody consumed.
    pub fn leftovers(&self) -> Vec<String> {
        self.pairs
            .iter()
            .zip(&self.used)
            .filter(|(_, &used)| !used)
            .map(|((k, _), _)| k.clone())
            .collect()
    }
}

/// Parses `key = value` text. Blank lines and `#` comments are skipped.
pub fn parse_kv(text: &str) -> Result<KvBag> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Parse(format!("line {}: empty key", lineno + 1)));
        }
        pairs.push((key.to_string(), value.trim().to_string()));
    }
    Ok(KvBag::new(pairs))
}

fn parse_scalar<S: Scalar>(key: &str, value: &str) -> Result<S> {
    let parsed: f64 = value
        .parse()
        .map_err(|_| Error::Parse(format!("{key}: `{value}` is not a number")))?;
    S::from_f64(parsed).ok_or_else(|| Error::Parse(format!("{key}: `{value}` out of range")))
}

fn parse_int<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("{key}: `{value}` is not an integer")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "on" => Ok(true),
        "false" | "0" | "off" => Ok(false),
        other => Err(Error::Parse(format!("{key}: `{other}` is not a boolean"))),
    }
}

fn fmt_scalar<S: Scalar>(value: S) -> String {
    // f64 Display prints the shortest representation that parses back to the
    // same value, which is what the round-trip contract needs.
    format!("{}", value.to_f64().expect("scalar fits in f64"))
}

impl<S: Scalar> SystemConfig<S> {
    /// Overrides the defaults with any keys present in the bag.
    pub fn from_kv(bag: &mut KvBag) -> Result<Self> {
        let mut config = Self::default();
        macro_rules! scalar_field {
            ($field:ident) => {
                if let Some(v) = bag.take(stringify!($field)) {
                    config.$field = parse_scalar(stringify!($field), &v)?;
                }
            };
        }
        scalar_field!(bandwidth_hz);
        scalar_field!(noise_w);
        scalar_field!(idle_power_w);
        scalar_field!(tx_power_w);
        scalar_field!(sample_bits);
        scalar_field!(alpha);
        scalar_field!(compression_ratio);
        scalar_field!(cycles_per_image);
        scalar_field!(kappa);
        scalar_field!(edge_freq_hz);
        scalar_field!(train_cycles_per_sample);
        scalar_field!(finetune_cycles_per_sample);
        scalar_field!(inference_cycles_per_sample);
        scalar_field!(bs_tx_power_w);
        scalar_field!(bisect_tol);
        if let Some(v) = bag.take("bits_per_parameter") {
            config.bits_per_parameter = parse_int("bits_per_parameter", &v)?;
        }
        if let Some(v) = bag.take("common_latent_size") {
            config.common_latent_size = parse_bool("common_latent_size", &v)?;
        }
        if let Some(v) = bag.take("exhaustive_threshold") {
            config.exhaustive_threshold = parse_int("exhaustive_threshold", &v)?;
        }
        if let Some(v) = bag.take("bisect_max_iter") {
            config.bisect_max_iter = parse_int("bisect_max_iter", &v)?;
        }
        Ok(config)
    }

    /// Parses a full config text, requiring it to validate.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut bag = parse_kv(text)?;
        let config = Self::from_kv(&mut bag)?;
        config.validate()?;
        Ok(config)
    }

    /// Serializes every field as `key = value` lines.
    pub fn to_kv_string(&self) -> String {
        let mut out = String::new();
        macro_rules! scalar_line {
            ($field:ident) => {
                out.push_str(&format!(
                    "{} = {}\n",
                    stringify!($field),
                    fmt_scalar(self.$field)
                ));
            };
        }
        scalar_line!(bandwidth_hz);
        scalar_line!(noise_w);
        scalar_line!(idle_power_w);
        scalar_line!(tx_power_w);
        scalar_line!(sample_bits);
        scalar_line!(alpha);
        scalar_line!(compression_ratio);
        scalar_line!(cycles_per_image);
        scalar_line!(kappa);
        scalar_line!(edge_freq_hz);
        scalar_line!(train_cycles_per_sample);
        scalar_line!(finetune_cycles_per_sample);
        scalar_line!(inference_cycles_per_sample);
        scalar_line!(bs_tx_power_w);
        out.push_str(&format!(
            "bits_per_parameter = {}\n",
            self.bits_per_parameter
        ));
        out.push_str(&format!(
            "common_latent_size = {}\n",
            self.common_latent_size
        ));
        out.push_str(&format!(
            "exhaustive_threshold = {}\n",
            self.exhaustive_threshold
        ));
        out.push_str(&format!("bisect_tol = {}\n", fmt_scalar(self.bisect_tol)));
        out.push_str(&format!("bisect_max_iter = {}\n", self.bisect_max_iter));
        out
    }
}

pub(crate) const PROFILE_CSV_HEADER: &str = "lambda,accuracy_pct,model_params";

fn parse_row<S: Scalar>(line: &str, context: &str) -> Result<CompressionRow<S>> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != 3 {
        return Err(Error::Parse(format!(
            "{context}: expected `lambda,accuracy_pct,model_params`, got `{line}`"
        )));
    }
    Ok(CompressionRow {
        lambda: parse_scalar("lambda", fields[0])?,
        accuracy_pct: parse_scalar("accuracy_pct", fields[1])?,
        model_params: parse_scalar("model_params", fields[2])?,
    })
}

impl<S: Scalar> CompressionProfile<S> {
    /// Parses the three-column CSV form, header included.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("profile CSV is empty".to_string()))?;
        if header.trim() != PROFILE_CSV_HEADER {
            return Err(Error::Parse(format!(
                "profile CSV header must be `{PROFILE_CSV_HEADER}`, got `{}`",
                header.trim()
            )));
        }
        let rows = lines
            .enumerate()
            .map(|(i, line)| parse_row(line, &format!("profile row {}", i + 1)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    /// Builds a profile from inline `profile_row` values taken out of a
    /// config bag. Returns `None` when the config has no inline rows.
    pub fn from_inline_rows(bag: &mut KvBag) -> Result<Option<Self>> {
        let values = bag.take_all("profile_row");
        if values.is_empty() {
            return Ok(None);
        }
        let rows = values
            .iter()
            .map(|v| parse_row(v, "profile_row"))
            .collect::<Result<Vec<_>>>()?;
        Ok(Some(Self::new(rows)?))
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(PROFILE_CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{}\n",
                fmt_scalar(row.lambda),
                fmt_scalar(row.accuracy_pct),
                fmt_scalar(row.model_params)
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_field_by_field() {
        let config = SystemConfig::<f64> {
            bandwidth_hz: 12.5e6,
            noise_w: 3.17e-13,
            alpha: 0.35,
            compression_ratio: 16.0,
            bisect_tol: 5.5e-10,
            bits_per_parameter: 16,
            common_latent_size: false,
            exhaustive_threshold: 9,
            ..Default::default()
        };
        let text = config.to_kv_string();
        let parsed = SystemConfig::<f64>::from_kv_str(&text).unwrap();
        assert_eq!(parsed, config);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "\n# a comment\nalpha = 0.25  # trailing comment\n\nbandwidth_hz = 2e7\n";
        let config = SystemConfig::<f64>::from_kv_str(text).unwrap();
        assert_eq!(config.alpha, 0.25);
        assert_eq!(config.bandwidth_hz, 2e7);
        assert_eq!(config.noise_w, SystemConfig::<f64>::default().noise_w);
    }

    #[test]
    fn malformed_line_is_a_parse_error() {
        assert!(matches!(
            SystemConfig::<f64>::from_kv_str("alpha 0.5"),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn invalid_parsed_config_is_rejected() {
        assert!(matches!(
            SystemConfig::<f64>::from_kv_str("alpha = 2.0"),
            Err(Error::ConfigInvalid { .. })
        ));
    }

    #[test]
    fn leftover_keys_are_visible() {
        let mut bag = parse_kv("alpha = 0.5\nnot_a_key = 1\n").unwrap();
        let _ = SystemConfig::<f64>::from_kv(&mut bag).unwrap();
        assert_eq!(bag.leftovers(), vec!["not_a_key".to_string()]);
    }

    proptest::proptest! {
        /// Serialize -> parse -> validate returns the identical config,
        /// field by field, for arbitrary valid settings.
        #[test]
        fn any_valid_config_round_trips(
            bandwidth_mhz in 0.1f64..1000.0,
            noise in 1e-15f64..1e-10,
            alpha in 0.0f64..=1.0,
            lambda in 1.0f64..128.0,
            kappa in 1e-29f64..1e-25,
            tol_exp in -9.0f64..-3.0,
            bits in 1u32..64,
            threshold in 1usize..20,
            common in proptest::bool::ANY,
        ) {
            let config = SystemConfig::<f64> {
                bandwidth_hz: bandwidth_mhz * 1e6,
                noise_w: noise,
                alpha,
                compression_ratio: lambda,
                kappa,
                bisect_tol: 10f64.powf(tol_exp),
                bits_per_parameter: bits,
                exhaustive_threshold: threshold,
                common_latent_size: common,
                ..Default::default()
            };
            config.validate().unwrap();
            let parsed = SystemConfig::<f64>::from_kv_str(&config.to_kv_string()).unwrap();
            proptest::prop_assert_eq!(parsed, config);
        }
    }

    #[test]
    fn profile_csv_round_trips() {
        let table = CompressionProfile::<f64>::default_table();
        let text = table.to_csv_string();
        assert!(text.starts_with("lambda,accuracy_pct,model_params\n"));
        let parsed = CompressionProfile::<f64>::from_csv_str(&text).unwrap();
        assert_eq!(parsed, table);
    }

    #[test]
    fn profile_csv_rejects_wrong_header() {
        assert!(CompressionProfile::<f64>::from_csv_str("a,b,c\n1,83,2798250\n").is_err());
    }

    #[test]
    fn inline_profile_rows() {
        let mut bag = parse_kv("profile_row = 1,83,2798250\nprofile_row = 32,69,34310\n").unwrap();
        let profile = CompressionProfile::<f64>::from_inline_rows(&mut bag)
            .unwrap()
            .expect("rows present");
        assert_eq!(profile.rows.len(), 2);
        assert_eq!(profile.lookup(32.0).unwrap(), (69.0, 34310.0));
        assert!(bag.leftovers().is_empty());
    }
}
