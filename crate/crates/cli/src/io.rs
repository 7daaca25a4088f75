//! Config loading and atomic file output.

use std::path::Path;

use judba_core::model::parse_kv;
use judba_core::{CompressionProfile, ScenarioSpec, SystemConfig};

use crate::Failure;

/// Everything a command needs from one config file.
pub struct LoadedConfig {
    pub system: SystemConfig,
    pub spec: ScenarioSpec,
    pub profile: CompressionProfile,
}

impl Default for LoadedConfig {
    fn default() -> Self {
        Self {
            system: SystemConfig::default(),
            spec: ScenarioSpec::default(),
            profile: CompressionProfile::default_table(),
        }
    }
}

/// Reads a config file: system keys, scenario keys, and the compression
/// profile (inline `profile_row` lines or a `compression_profile = <csv>`
/// reference resolved relative to the config file). Unknown keys are
/// rejected. A missing path yields the shipped defaults.
pub fn load_config(path: Option<&Path>) -> Result<LoadedConfig, Failure> {
    let Some(path) = path else {
        return Ok(LoadedConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut bag = parse_kv(&text)?;
    let system = SystemConfig::from_kv(&mut bag)?;
    let spec = ScenarioSpec::from_kv(&mut bag)?;

    let profile = if let Some(csv_path) = bag.take("compression_profile") {
        let resolved = path.parent().unwrap_or(Path::new(".")).join(&csv_path);
        let csv = std::fs::read_to_string(&resolved).map_err(|e| {
            Failure::usage(format!("cannot read profile {}: {e}", resolved.display()))
        })?;
        CompressionProfile::from_csv_str(&csv)?
    } else if let Some(inline) = CompressionProfile::from_inline_rows(&mut bag)? {
        inline
    } else {
        CompressionProfile::default_table()
    };

    let leftovers = bag.leftovers();
    if !leftovers.is_empty() {
        return Err(Failure::usage(format!(
            "unknown config keys: {}",
            leftovers.join(", ")
        )));
    }
    system.validate()?;
    spec.validate()?;
    Ok(LoadedConfig {
        system,
        spec,
        profile,
    })
}

/// Writes a file atomically: temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(dir) => dir.join(format!(
            ".{}.tmp-{}",
            path.file_name().and_then(|n| n.to_str()).unwrap_or("out"),
            std::process::id()
        )),
        None => std::path::PathBuf::from(format!(".judba-tmp-{}", std::process::id())),
    };
    std::fs::write(&tmp, contents)
        .map_err(|e| Failure::solver(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Failure::solver(format!(
            "cannot move output into place at {}: {e}",
            path.display()
        ))
    })
}
