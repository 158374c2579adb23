use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Charger, battery and Monte Carlo settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Grid-side charger rating, kW.
    pub charger_kw: f64,
    /// Fraction of grid energy that reaches the battery.
    pub efficiency: f64,
    pub battery_kwh: f64,
    /// Consumption used when a journey carries no measured energy.
    pub kwh_per_mile: f64,
    pub initial_soc: f64,
    pub n_runs: usize,
    pub seed: u64,
    /// Draw a fresh vehicle sample for every run.
    pub resample_vehicles: bool,
    pub sample_size: usize,
    /// Times each day is simulated before the recorded one, so that the
    /// recorded day starts from a realistic SOC and overnight charges carry in.
    pub warmup_days: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            charger_kw: 3.5,
            efficiency: 0.9,
            battery_kwh: 24.0,
            kwh_per_mile: 0.3,
            initial_soc: 1.0,
            n_runs: 200,
            seed: 0,
            resample_vehicles: false,
            sample_size: 50,
            warmup_days: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.charger_kw > 0.0 && self.charger_kw.is_finite()) {
            return Err(Error::config("charger_kw must be positive"));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::config("efficiency must lie in (0, 1]"));
        }
        if !(self.battery_kwh > 0.0 && self.battery_kwh.is_finite()) {
            return Err(Error::config("battery_kwh must be positive"));
        }
        if !(self.kwh_per_mile >= 0.0 && self.kwh_per_mile.is_finite()) {
            return Err(Error::config("kwh_per_mile must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.initial_soc) {
            return Err(Error::config("initial_soc must lie in [0, 1]"));
        }
        if self.n_runs == 0 {
            return Err(Error::config("n_runs must be at least 1"));
        }
        if self.sample_size == 0 {
            return Err(Error::config("sample_size must be at least 1"));
        }
        Ok(())
    }

    /// kWh per hour delivered into the battery while charging.
    pub fn battery_rate_kw(&self) -> f64 {
        self.charger_kw * self.efficiency
    }
}
