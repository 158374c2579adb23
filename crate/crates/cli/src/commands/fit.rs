use std::path::PathBuf;

use clap::Args;
use evcharge_core::charge_model::{classify_charges, fit_posteriors_detailed, FitDiagnostics};
use evcharge_core::ingest::{infer_soc_traces, ParseReport};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{internal, CliResult};
use crate::inputs;
use crate::manifest::Run;

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    /// Trial journeys CSV (with energy_kwh).
    #[arg(long)]
    pub journeys: PathBuf,
    /// Trial charge log CSV.
    #[arg(long)]
    pub charges: PathBuf,
    /// Cluster model JSON written by `cluster`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub window_minutes: Option<u32>,
}

impl FitArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        cfg.fit.sigma = self.sigma.unwrap_or(cfg.fit.sigma);
        cfg.fit.window_minutes = self.window_minutes.unwrap_or(cfg.fit.window_minutes);
    }
}

#[derive(Serialize)]
struct FitReport {
    charges: usize,
    after_final_fraction: f64,
    after_any_fraction: f64,
    /// Vehicles whose inferred SOC had to be clamped at zero.
    inconsistent_vehicles: Vec<String>,
    diagnostics: FitDiagnostics,
}

pub fn run(args: &FitArgs, cfg: &RunConfig, run: &mut Run) -> CliResult<serde_json::Value> {
    let mut report = ParseReport::default();
    let (days, charges) = inputs::trial(run, &args.journeys, &args.charges, &mut report)?;
    let clusters = inputs::clusters(run, &args.model)?;

    let cls = classify_charges(&days, &charges, cfg.fit.window_minutes);
    let traces = infer_soc_traces(&days, &charges, cfg.sim.battery_kwh, cfg.sim.initial_soc)?;
    let (tables, diagnostics) = fit_posteriors_detailed(&days, &charges, &cls, &clusters, &traces, cfg.fit.sigma)?;
    for w in &diagnostics.warnings {
        eprintln!("warning: {w}");
    }

    run.write_text("posteriors.json", &(tables.to_json() + "\n"))?;
    run.write("heatmap_after_journey.csv", |w| tables.write_after_journey_heatmap(w).map_err(internal))?;
    run.write("heatmap_independent.csv", |w| tables.write_independent_heatmap(w).map_err(internal))?;
    run.write_json(
        "fit_report.json",
        &FitReport {
            charges: charges.len(),
            after_final_fraction: cls.after_final_fraction,
            after_any_fraction: cls.after_any_fraction,
            inconsistent_vehicles: traces.iter().filter(|t| t.inconsistent).map(|t| t.vehicle_id.clone()).collect(),
            diagnostics,
        },
    )?;
    run.write_text("parse_report.json", &(report.to_json() + "\n"))?;
    eprintln!(
        "fit: {} charges, {:.0}% after a final journey, {:.0}% after any journey",
        charges.len(),
        cls.after_final_fraction * 100.0,
        cls.after_any_fraction * 100.0
    );
    serde_json::to_value(args).map_err(internal)
}
