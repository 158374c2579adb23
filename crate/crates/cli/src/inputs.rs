use std::path::Path;

use evcharge_core::charge_model::PosteriorTables;
use evcharge_core::clustering::ClusterSet;
use evcharge_core::ingest::{parse_survey, parse_trial, ChargeEvent, ParseConfig, ParseReport, VehicleDay};

use crate::error::{CliError, CliResult};
use crate::manifest::Run;

fn note_issues(what: &Path, report: &ParseReport) {
    if !report.errors.is_empty() {
        eprintln!(
            "warning: {}: skipped {} malformed row(s); see parse_report.json",
            what.display(),
            report.errors.len()
        );
    }
}

pub fn survey(run: &mut Run, path: &Path, report: &mut ParseReport) -> CliResult<Vec<VehicleDay>> {
    run.input(path)?;
    let (days, r) = parse_survey(path, &ParseConfig::default())?;
    note_issues(path, &r);
    report.merge(r);
    if days.is_empty() {
        return Err(CliError::data(format!("{} holds no vehicle-days", path.display())));
    }
    Ok(days)
}

pub fn trial(
    run: &mut Run,
    journeys: &Path,
    charges: &Path,
    report: &mut ParseReport,
) -> CliResult<(Vec<VehicleDay>, Vec<ChargeEvent>)> {
    run.input(journeys)?;
    run.input(charges)?;
    let (days, events, r) = parse_trial(journeys, charges, &ParseConfig::default())?;
    note_issues(journeys, &r);
    report.merge(r);
    if days.is_empty() {
        return Err(CliError::data(format!("{} holds no vehicle-days", journeys.display())));
    }
    Ok((days, events))
}

pub fn clusters(run: &mut Run, path: &Path) -> CliResult<ClusterSet> {
    run.input(path)?;
    Ok(ClusterSet::load(path)?)
}

pub fn tables(run: &mut Run, path: &Path) -> CliResult<PosteriorTables> {
    run.input(path)?;
    Ok(PosteriorTables::load(path)?)
}
