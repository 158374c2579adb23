use std::path::PathBuf;

use clap::Args;
use evcharge_core::analysis::{leave_one_out_validate, ValidationConfig};
use evcharge_core::ingest::ParseReport;
use serde::Serialize;

use crate::config::{RunConfig, SimFlags};
use crate::error::{internal, CliResult};
use crate::inputs;
use crate::manifest::Run;

#[derive(Debug, Clone, Args, Serialize)]
pub struct ValidateArgs {
    #[arg(long)]
    pub journeys: PathBuf,
    #[arg(long)]
    pub charges: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Stochastic replays of each held-out vehicle.
    #[arg(long)]
    pub runs_per_vehicle: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    pub sim: SimFlags,
}

impl ValidateArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        cfg.fit.sigma = self.sigma.unwrap_or(cfg.fit.sigma);
        cfg.validate.runs_per_vehicle = self.runs_per_vehicle.unwrap_or(cfg.validate.runs_per_vehicle);
        cfg.validate.warmup_days = self.sim.warmup_days.unwrap_or(cfg.validate.warmup_days);
    }
}

pub fn run(args: &ValidateArgs, cfg: &RunConfig, run: &mut Run) -> CliResult<serde_json::Value> {
    let mut report = ParseReport::default();
    let (days, charges) = inputs::trial(run, &args.journeys, &args.charges, &mut report)?;
    let clusters = inputs::clusters(run, &args.model)?;

    let vcfg = ValidationConfig {
        sim: evcharge_core::simulator::SimConfig {
            warmup_days: cfg.validate.warmup_days,
            ..cfg.sim.clone()
        },
        sigma: cfg.fit.sigma,
        window_minutes: cfg.fit.window_minutes,
        runs_per_vehicle: cfg.validate.runs_per_vehicle,
    };
    let result = leave_one_out_validate(&days, &charges, &clusters, &vcfg)?;
    run.write_text("validation.json", &(result.to_json() + "\n"))?;
    run.write_text("parse_report.json", &(report.to_json() + "\n"))?;
    let a = &result.all_days;
    eprintln!(
        "validate: {} vehicles, start-time MAPE {:.1} (model) vs {:.1} (naive)",
        result.vehicles, a.start_mape_model, a.start_mape_naive
    );
    serde_json::to_value(args).map_err(internal)
}
