//! Conditional charging probabilities.
//!
//! Observed charges are split into *after-journey* charges (starting within a
//! short window of a journey end) and *independent* ones. Two tables are then
//! estimated by counting:
//!
//! * after-journey: `P(charge | day type, slot, cluster, SOC state)`, with one
//!   opportunity per journey end;
//! * independent: `P(charge | day type, slot, SOC state)`, with one
//!   opportunity per half-hour slot in which the vehicle sits at home, is not
//!   charging, and has no journey ending.
//!
//! Both are smoothed with a Gaussian filter over (slot, SOC state), the slot
//! axis wrapping at midnight.

mod classify;
mod fit;
mod smooth;
mod tables;

pub use classify::{classify_charges, ChargeKind, ChargeLabel, Classification, JourneyRef, DEFAULT_WINDOW_MINUTES};
pub use fit::{fit_posteriors, fit_posteriors_detailed, FitDiagnostics};
pub use smooth::{smooth_table, smooth_tables, DEFAULT_SIGMA};
pub use tables::{discretize_soc, PosteriorTables, SOC_STATES};
