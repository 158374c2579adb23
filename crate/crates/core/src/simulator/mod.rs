//! Monte Carlo replay of vehicle-days through a charging model.
//!
//! Time advances through each day event by event: journey ends, journey
//! starts and the 48 slot boundaries. Charging is non-preemptible except by
//! the next departure, the grid supplies `charger_kw` and the battery receives
//! `charger_kw * efficiency`, and partial slots are credited with their
//! time-averaged power.

mod config;
mod distribution;
mod engine;
mod monte_carlo;

use crate::clustering::Cluster;
use crate::ingest::DayType;

pub use config::SimConfig;
pub use distribution::{quantile_sorted, LoadDistribution, SlotStats, PROFILE_HEADER};
pub use engine::{
    finalize_open_charge, simulate_naive, simulate_vehicle_day, ActiveCharge, ChargeStart, DayOutcome,
    NaiveDecider, VehicleSimState,
};
pub use monte_carlo::{
    choose_fixed_set, monte_carlo, monte_carlo_resampled, run_configured, simulate_sequence, SequenceOutcome,
    SimModel,
};

/// Probability that a charge starts at a decision point.
pub trait ChargeDecider: Sync {
    /// Decision taken when a journey ends in `slot`. `cluster` is `None` for
    /// days that could not be labeled.
    fn after_journey(
        &self,
        day_type: DayType,
        slot: usize,
        cluster: Option<Cluster>,
        soc_state: usize,
        is_final: bool,
    ) -> f64;

    /// Decision taken at the start of `slot` while parked and idle.
    fn independent(&self, day_type: DayType, slot: usize, soc_state: usize) -> f64;
}
