use std::path::{Path, PathBuf};

use clap::Args;
use evcharge_core::analysis::{regional_batch, BaselineProfile, Region, RegionFailure};
use evcharge_core::ingest::{ParseReport, VehicleDay};
use evcharge_core::simulator::SimModel;
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, SimFlags};
use crate::error::{internal, CliError, CliResult};
use crate::inputs;
use crate::manifest::Run;

#[derive(Debug, Clone, Args, Serialize)]
pub struct AdmdArgs {
    /// Region list (TOML, one `[[region]]` table per region).
    #[arg(long)]
    pub regions: PathBuf,
    #[arg(long, requires = "tables")]
    pub model: Option<PathBuf>,
    #[arg(long, requires = "model")]
    pub tables: Option<PathBuf>,
    /// Use the charge-after-final-journey model instead of fitted tables.
    #[arg(long, conflicts_with = "tables")]
    pub naive: bool,
    /// Flat-rate household profile; the bundled one is used when omitted.
    #[arg(long)]
    pub baseline_flat: Option<PathBuf>,
    /// Economy 7 household profile; the bundled one is used when omitted.
    #[arg(long)]
    pub baseline_e7: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub sim: SimFlags,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionFile {
    region: Vec<RegionEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionEntry {
    id: String,
    /// Relative paths resolve against the region file's directory.
    survey: PathBuf,
    day_index: Option<u32>,
    e7_share: f64,
    annual_kwh: f64,
    n_households: Option<usize>,
}

fn load_regions(path: &Path) -> CliResult<Vec<RegionEntry>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read regions file {}: {e}", path.display())))?;
    let file: RegionFile =
        toml::from_str(&text).map_err(|e| CliError::config(format!("regions file {}: {e}", path.display())))?;
    let mut seen = std::collections::BTreeSet::new();
    for r in &file.region {
        if !seen.insert(r.id.as_str()) {
            return Err(CliError::config(format!("region id {:?} appears twice", r.id)));
        }
    }
    Ok(file.region)
}

fn baseline(run: &mut Run, path: Option<&PathBuf>, bundled: fn() -> BaselineProfile) -> CliResult<BaselineProfile> {
    match path {
        Some(p) => {
            run.input(p)?;
            Ok(BaselineProfile::load(p)?)
        }
        None => Ok(bundled()),
    }
}

#[derive(Serialize)]
struct AdmdSummary<'a> {
    day_type: String,
    season: &'a str,
    reports: &'a [evcharge_core::analysis::AdmdReport],
    failures: &'a [RegionFailure],
}

pub fn run(args: &AdmdArgs, cfg: &RunConfig, run: &mut Run) -> CliResult<serde_json::Value> {
    let entries = load_regions(&args.regions)?;
    run.input(&args.regions)?;
    let flat = baseline(run, args.baseline_flat.as_ref(), BaselineProfile::bundled_flat)?;
    let e7 = baseline(run, args.baseline_e7.as_ref(), BaselineProfile::bundled_e7)?;

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
    let model = match &fitted {
        Some((c, t)) => SimModel::stochastic(c, t),
        None if args.naive => SimModel::naive(),
        None => return Err(CliError::config("pass --model and --tables, or --naive")),
    };

    let base_dir = args.regions.parent().unwrap_or(Path::new("")).to_path_buf();
    let mut report = ParseReport::default();
    let mut regions = Vec::new();
    let mut failures = Vec::new();
    for e in entries {
        let survey = base_dir.join(&e.survey);
        let pool: CliResult<Vec<VehicleDay>> = inputs::survey(run, &survey, &mut report).map(|days| {
            days.into_iter()
                .filter(|d| match e.day_index {
                    Some(i) => d.day_index == i,
                    None => d.day_type == flat.day_type,
                })
                .collect()
        });
        match pool {
            Ok(pool) if !pool.is_empty() => regions.push(Region {
                id: e.id,
                pool,
                e7_share: e.e7_share,
                annual_kwh: e.annual_kwh,
                n_households: e.n_households.unwrap_or(cfg.sim.sample_size),
            }),
            Ok(_) => failures.push(RegionFailure {
                region: e.id,
                message: format!("{} has no vehicle-days matching the day filter", survey.display()),
            }),
            Err(err) => failures.push(RegionFailure {
                region: e.id,
                message: err.to_string(),
            }),
        }
    }

    let mut batch = regional_batch(&regions, &flat, &e7, &model, &cfg.sim);
    batch.failures.extend(failures);
    batch.failures.sort_by(|a, b| a.region.cmp(&b.region));
    for f in &batch.failures {
        eprintln!("warning: region {}: {}", f.region, f.message);
    }

    run.write("admd.csv", |w| batch.write_csv(w).map_err(internal))?;
    run.write_json(
        "admd_report.json",
        &AdmdSummary {
            day_type: flat.day_type.to_string(),
            season: &flat.season,
            reports: &batch.reports,
            failures: &batch.failures,
        },
    )?;
    run.write_text("parse_report.json", &(report.to_json() + "\n"))?;
    eprintln!(
        "admd: {} region(s) ranked, {} failed",
        batch.reports.len(),
        batch.failures.len()
    );
    serde_json::to_value(args).map_err(internal)
}
