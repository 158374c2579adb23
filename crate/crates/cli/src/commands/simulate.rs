use std::path::PathBuf;

use clap::Args;
use evcharge_core::ingest::{DayType, ParseReport, VehicleDay};
use evcharge_core::simulator::{choose_fixed_set, monte_carlo, monte_carlo_resampled, LoadDistribution, SimModel};
use serde::Serialize;

use crate::config::{RunConfig, SimFlags};
use crate::error::{internal, CliError, CliResult};
use crate::inputs;
use crate::manifest::Run;

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    /// Travel survey CSV supplying the vehicle-days.
    #[arg(long)]
    pub survey: PathBuf,
    /// Cluster model JSON; required with --tables.
    #[arg(long, requires = "tables")]
    pub model: Option<PathBuf>,
    /// Posterior tables JSON; enables the stochastic model.
    #[arg(long, requires = "model")]
    pub tables: Option<PathBuf>,
    /// Also run the charge-after-final-journey baseline.
    #[arg(long)]
    pub naive: bool,
    /// Simulate one fixed sample of vehicles (the default mode).
    #[arg(long)]
    pub fixed_set: bool,
    /// Draw a fresh vehicle sample for every run.
    #[arg(long)]
    pub resample: bool,
    /// Keep only vehicle-days with this day index.
    #[arg(long)]
    pub day_index: Option<u32>,
    /// Keep only weekday or weekend vehicle-days.
    #[arg(long)]
    pub day_type: Option<DayType>,
    /// Also write every run's aggregate profile.
    #[arg(long)]
    pub dump_runs: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub sim: SimFlags,
}

#[derive(Serialize)]
struct ScenarioSummary {
    scenario: String,
    profile: String,
    vehicles: usize,
    n_runs: usize,
    peak_mean_kw: f64,
    peak_slot: usize,
    daily_mean_kwh: f64,
}

fn summarize(name: &str, vehicles: usize, d: &LoadDistribution) -> ScenarioSummary {
    let mean = d.mean_profile();
    let peak_slot = (0..mean.len()).fold(0, |b, t| if mean[t] > mean[b] { t } else { b });
    ScenarioSummary {
        scenario: name.to_string(),
        profile: format!("profile_{name}.csv"),
        vehicles,
        n_runs: d.n_runs,
        peak_mean_kw: mean[peak_slot],
        peak_slot,
        daily_mean_kwh: mean.iter().sum::<f64>() * 0.5,
    }
}

pub fn run(args: &SimulateArgs, cfg: &RunConfig, run: &mut Run) -> CliResult<serde_json::Value> {
    let sim = &cfg.sim;
    let mut report = ParseReport::default();
    let days = inputs::survey(run, &args.survey, &mut report)?;
    let pool: Vec<VehicleDay> = days
        .into_iter()
        .filter(|d| args.day_index.is_none_or(|i| d.day_index == i))
        .filter(|d| args.day_type.is_none_or(|t| d.day_type == t))
        .collect();
    if pool.is_empty() {
        return Err(CliError::data("no vehicle-days match the day filters"));
    }

    let fitted = match (&args.model, &args.tables) {
        (Some(m), Some(t)) => {
            let clusters = inputs::clusters(run, m)?;
            let tables = inputs::tables(run, t)?;
            if tables.n_clusters != clusters.k() {
                return Err(CliError::data(format!(
                    "tables are fitted for k = {} but the cluster model has k = {}",
                    tables.n_clusters,
                    clusters.k()
                )));
            }
            Some((clusters, tables))
        }
        _ => None,
    };
    let mut models: Vec<(&str, SimModel)> = Vec::new();
    if let Some((c, t)) = &fitted {
        models.push(("stochastic", SimModel::stochastic(c, t)));
    }
    if args.naive {
        models.push(("naive", SimModel::naive()));
    }
    if models.is_empty() {
        return Err(CliError::config("nothing to simulate: pass --model and --tables, or --naive"));
    }
    let fixed_mode = args.fixed_set || !args.resample;

    let fixed = if fixed_mode {
        if pool.len() > sim.sample_size {
            choose_fixed_set(&pool, sim)?
        } else {
            pool.clone()
        }
    } else {
        Vec::new()
    };
    let mut summaries = Vec::new();
    for (name, model) in &models {
        let mut scenarios = Vec::new();
        if fixed_mode {
            scenarios.push((format!("{name}_fixed"), fixed.len(), monte_carlo(&fixed, model, sim)?));
        }
        if args.resample {
            scenarios.push((format!("{name}_resampled"), sim.sample_size, monte_carlo_resampled(&pool, model, sim)?));
        }
        for (scenario, vehicles, dist) in scenarios {
            run.write(&format!("profile_{scenario}.csv"), |w| dist.write_csv(w).map_err(internal))?;
            if args.dump_runs {
                run.write(&format!("runs_{scenario}.csv"), |w| dist.write_runs_csv(w).map_err(internal))?;
            }
            let s = summarize(&scenario, vehicles, &dist);
            eprintln!(
                "simulate: {scenario}: peak mean {:.2} kW in slot {}",
                s.peak_mean_kw, s.peak_slot
            );
            summaries.push(s);
        }
    }
    run.write_json("simulate_summary.json", &summaries)?;
    run.write_text("parse_report.json", &(report.to_json() + "\n"))?;
    serde_json::to_value(args).map_err(internal)
}
