//! Stochastic model of uncontrolled residential EV charging.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`ingest`] parses travel-survey and trial CSV files (or synthesizes a
//!    fleet) into [`ingest::VehicleDay`] records and charge logs.
//! 2. [`clustering`] turns each vehicle-day into a normalized half-hourly
//!    velocity profile and groups days into usage modes with K-means.
//! 3. [`charge_model`] estimates the probability that a charge starts,
//!    conditioned on day type, time slot, usage cluster and state of charge.
//! 4. [`simulator`] replays survey vehicle-days through those tables in a
//!    seeded Monte Carlo loop, and [`analysis`] turns the resulting load
//!    distributions into validation metrics and ADMD estimates.
//!
//! Monte Carlo runs, elbow restarts and per-region batches run on rayon when
//! the `parallel` feature is enabled (the default). Results are identical
//! with and without it.

pub mod analysis;
pub mod charge_model;
pub mod clustering;
pub mod error;
pub mod ingest;
pub mod par;
pub mod seed;
pub mod simulator;
pub mod time;

pub use error::{Error, Result};
