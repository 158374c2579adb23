use std::path::PathBuf;

use clap::Args;
use evcharge_core::ingest::{synthesize_fleet, write_charges, write_labels, write_survey, write_trial_journeys, SynthSpec};
use evcharge_core::seed::derive_seed;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{internal, CliResult};
use crate::manifest::Run;

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    /// Fleet specification (TOML). The built-in example fleet is used when
    /// omitted.
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

pub fn run(args: &SynthArgs, cfg: &RunConfig, run: &mut Run) -> CliResult<serde_json::Value> {
    let spec = match &args.spec {
        Some(p) => {
            run.input(p)?;
            SynthSpec::load(p)?
        }
        None => SynthSpec::example(),
    };
    let mut trial = spec.trial_spec()?;
    trial.id_prefix = format!("t{}", spec.id_prefix);

    let survey = synthesize_fleet(&spec, derive_seed(cfg.seed, "synth-survey", &[]))?;
    let logged = synthesize_fleet(&trial, derive_seed(cfg.seed, "synth-trial", &[]))?;

    run.write("survey.csv", |w| write_survey(w, &survey.days).map_err(internal))?;
    run.write("trial_journeys.csv", |w| write_trial_journeys(w, &logged.days, None).map_err(internal))?;
    run.write("trial_charges.csv", |w| write_charges(w, &logged.charges).map_err(internal))?;
    let labels: Vec<_> = survey.labels.iter().chain(&logged.labels).cloned().collect();
    run.write("labels.csv", |w| write_labels(w, &labels).map_err(internal))?;

    eprintln!(
        "synth: {} survey vehicle-days, {} trial vehicle-days, {} trial charges",
        survey.days.len(),
        logged.days.len(),
        logged.charges.len()
    );
    Ok(serde_json::json!({
        "spec_file": args.spec,
        "spec": spec,
    }))
}
