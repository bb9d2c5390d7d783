//! Run configuration files.
//!
//! A TOML document whose keys are all optional; unset parameters take the
//! calibrated defaults and unknown keys are rejected.
//!
//! ```toml
//! runs = 200
//! seed = 7
//! drivers = "builtin"
//! out = "results"
//!
//! [export]
//! snapshot_years = [1960, 2100]
//!
//! [params.landscape]
//! p = 0.5
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::demand::{BuiltinCurves, Drivers};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::scenario::{PolicyKind, PolicySpec};

/// Driver source keyword selecting the built-in curves.
pub const BUILTIN: &str = "builtin";

/// Optional outputs beyond the ensemble time series.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExportFlags {
    /// Years at which the landscape of the first run is written out.
    pub snapshot_years: Vec<i32>,
    /// Write every run's record to `runs.csv`.
    pub per_run_records: bool,
    /// Write `timeseries_<id>.csv` for every scenario.
    pub scenario_timeseries: bool,
}

/// Demand-reduction sweep settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub grid: Vec<f64>,
    /// Policies combined with every demand reduction.
    pub base: Vec<PolicySpec>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            grid: (0..=10).map(|i| f64::from(i) / 10.0).collect(),
            base: vec![PolicySpec::default_for(PolicyKind::OrganicCropExpansion)],
        }
    }
}

/// Portfolio enumeration settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PortfolioConfig {
    pub pool: Vec<PolicySpec>,
    pub top: usize,
}

impl Default for PortfolioConfig {
    fn default() -> Self {
        Self {
            pool: PolicyKind::ALL.into_iter().map(PolicySpec::default_for).collect(),
            top: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub runs: usize,
    pub seed: u64,
    /// Driver CSV path, or `builtin`.
    pub drivers: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<PathBuf>,
    pub out: PathBuf,
    pub export: ExportFlags,
    pub sweep: SweepConfig,
    pub portfolio: PortfolioConfig,
    /// Shape of the built-in driver curves.
    pub builtin_drivers: BuiltinCurves,
    pub params: ModelParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            runs: 500,
            seed: 42,
            drivers: BUILTIN.to_string(),
            scenario: None,
            out: PathBuf::from("out"),
            export: ExportFlags::default(),
            sweep: SweepConfig::default(),
            portfolio: PortfolioConfig::default(),
            builtin_drivers: BuiltinCurves::default(),
            params: ModelParams::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::config("runs must be at least 1"));
        }
        for spec in self.sweep.base.iter().chain(&self.portfolio.pool) {
            spec.validate()?;
        }
        self.params.validate()
    }

    /// Drivers named by the configuration.
    pub fn load_drivers(&self) -> Result<Drivers> {
        if self.drivers == BUILTIN {
            Ok(self.builtin_drivers.build())
        } else {
            Drivers::read_csv(Path::new(&self.drivers))
        }
    }

    /// The effective configuration as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}

/// Parse a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cfg: RunConfig = toml::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_all_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.params.production.k, 0.2);
        assert_eq!(cfg.params.land.zeta_plus_m, 500.0);
    }

    #[test]
    fn single_override() {
        let cfg = parse_config("[params.landscape]\np = 0.5\n").unwrap();
        let mut expected = ModelParams::default();
        expected.landscape.p = 0.5;
        assert_eq!(cfg.params, expected);
    }

    #[test]
    fn unknown_key_named() {
        let err = parse_config("[params.land]\nzeta_plus_x = 1.0\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("zeta_plus_x"), "{err}");
    }

    #[test]
    fn parse_error_has_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "runs = 5\nseed = = 3\n").unwrap();
        let err = load_config(&path).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn zero_runs_rejected() {
        assert!(parse_config("runs = 0").is_err());
    }

    #[test]
    fn round_trip() {
        let mut cfg = parse_config("runs = 3\nscenario = \"s.toml\"\n[params.demand]\nalpha_m = 0.25\n").unwrap();
        cfg.export.snapshot_years = vec![1960, 2050];
        cfg.params.landscape.eps_min = 1e-6;
        let text = cfg.to_toml();
        assert_eq!(parse_config(&text).unwrap(), cfg);
        assert_eq!(parse_config(&RunConfig::default().to_toml()).unwrap(), RunConfig::default());
    }
}
