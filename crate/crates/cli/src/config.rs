use std::path::Path;

use clap::Args;
use evcharge_core::charge_model::{DEFAULT_SIGMA, DEFAULT_WINDOW_MINUTES};
use evcharge_core::simulator::SimConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterOptions {
    pub k: usize,
    pub k_min: usize,
    pub k_max: usize,
    /// K-means restarts per k; the lowest sum of squares wins.
    pub restarts: usize,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        Self {
            k: 3,
            k_min: 1,
            k_max: 8,
            restarts: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    pub sigma: f64,
    pub window_minutes: u32,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            sigma: DEFAULT_SIGMA,
            window_minutes: DEFAULT_WINDOW_MINUTES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateOptions {
    pub runs_per_vehicle: usize,
    /// Held-out vehicles replay their own logged days, so no warm-up by
    /// default.
    pub warmup_days: usize,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            runs_per_vehicle: 20,
            warmup_days: 0,
        }
    }
}

/// Everything a run can be configured with. Read from TOML, then overridden
/// by flags. `sim.seed` always follows the top-level `seed`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub sim: SimConfig,
    pub cluster: ClusterOptions,
    pub fit: FitOptions,
    pub validate: ValidateOptions,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::config(format!("config {}: {e}", path.display())))
    }

    pub fn finish(mut self, seed: Option<u64>) -> CliResult<Self> {
        if let Some(s) = seed {
            self.seed = s;
        }
        self.sim.seed = self.seed;
        self.sim.validate()?;
        if !(self.fit.sigma >= 0.0) {
            return Err(CliError::config("fit.sigma must be non-negative"));
        }
        if self.cluster.k == 0 || self.cluster.restarts == 0 {
            return Err(CliError::config("cluster.k and cluster.restarts must be positive"));
        }
        Ok(self)
    }
}

/// Flags mirroring [`SimConfig`]; each one overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct SimFlags {
    /// Charger power drawn from the grid (kW).
    #[arg(long)]
    pub charger_kw: Option<f64>,
    /// Fraction of grid energy that reaches the battery.
    #[arg(long)]
    pub efficiency: Option<f64>,
    /// Usable battery capacity (kWh).
    #[arg(long)]
    pub battery_kwh: Option<f64>,
    /// Energy use for journeys without a logged reading.
    #[arg(long)]
    pub kwh_per_mile: Option<f64>,
    /// State of charge at the start of each sequence.
    #[arg(long)]
    pub initial_soc: Option<f64>,
    /// Monte Carlo runs.
    #[arg(long)]
    pub n_runs: Option<usize>,
    /// Vehicles per run.
    #[arg(long)]
    pub sample_size: Option<usize>,
    /// Days simulated before the measured one.
    #[arg(long)]
    pub warmup_days: Option<usize>,
}

impl SimFlags {
    pub fn apply(&self, sim: &mut SimConfig) {
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = self.$f { sim.$f = v; })*};
        }
        set!(charger_kw, efficiency, battery_kwh, kwh_per_mile, initial_soc, n_runs, sample_size, warmup_days);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let mut cfg: RunConfig = toml::from_str("seed = 4\n[sim]\nn_runs = 10\ncharger_kw = 7.0\n").unwrap();
        let flags = SimFlags {
            n_runs: Some(3),
            ..SimFlags::default()
        };
        flags.apply(&mut cfg.sim);
        let cfg = cfg.finish(None).unwrap();
        assert_eq!((cfg.sim.n_runs, cfg.sim.charger_kw, cfg.sim.seed), (3, 7.0, 4));
        assert_eq!(cfg.fit.sigma, DEFAULT_SIGMA);
        assert_eq!(RunConfig::default().finish(Some(9)).unwrap().sim.seed, 9);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("[sim]\ncharger = 3\n").is_err());
        assert!(toml::from_str::<RunConfig>("sed = 3\n").is_err());
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let mut cfg = RunConfig::default();
        cfg.sim.efficiency = 1.5;
        assert_eq!(cfg.finish(None).unwrap_err().exit_code(), 1);
    }
}
