use std::path::PathBuf;

use clap::Args;
use evcharge_core::clustering::*;
use evcharge_core::ingest::{DayType, ParseReport};
use evcharge_core::seed::derive_seed;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{internal, CliError, CliResult};
use crate::inputs;
use crate::manifest::Run;

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClusterArgs {
    /// Travel survey CSV.
    #[arg(long)]
    pub survey: PathBuf,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub k_min: Option<usize>,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
}

impl ClusterArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        let c = &mut cfg.cluster;
        c.k = self.k.unwrap_or(c.k);
        c.k_min = self.k_min.unwrap_or(c.k_min);
        c.k_max = self.k_max.unwrap_or(c.k_max);
        c.restarts = self.restarts.unwrap_or(c.restarts);
    }
}

#[derive(Serialize)]
struct DayTypeSummary {
    day_type: DayType,
    points: usize,
    sum_of_squares: f64,
    elbow_k: Option<usize>,
}

fn best_fit(points: &[FeatureVector], dt: DayType, k: usize, restarts: usize, root: u64) -> CliResult<(ClusterModel, f64)> {
    let mut best: Option<(ClusterModel, f64)> = None;
    for r in 0..restarts {
        let seed = derive_seed(root, "cluster", &[dt.index() as u64, r as u64]);
        let m = kmeans_fit(points, dt, k, seed, DEFAULT_MAX_ITER, DEFAULT_TOL)?;
        let sos = sum_of_squares(&m, points);
        if best.as_ref().is_none_or(|(_, b)| sos < *b) {
            best = Some((m, sos));
        }
    }
    best.ok_or_else(|| CliError::config("restarts must be positive"))
}

pub fn run(args: &ClusterArgs, cfg: &RunConfig, run: &mut Run) -> CliResult<serde_json::Value> {
    let opts = &cfg.cluster;
    let mut report = ParseReport::default();
    let days = inputs::survey(run, &args.survey, &mut report)?;

    let mut models = Vec::new();
    let mut summaries = Vec::new();
    let mut elbow_rows = Vec::new();
    for dt in DayType::ALL {
        let points = features_for(&days, dt);
        if points.is_empty() {
            return Err(CliError::data(format!("no used {dt} days to cluster")));
        }
        let (model, sos) = best_fit(&points, dt, opts.k, opts.restarts, cfg.seed)?;
        let k_max = opts.k_max.min(points.len());
        let scan = if opts.k_min <= k_max {
            elbow_scan(&points, dt, opts.k_min, k_max, opts.restarts, derive_seed(cfg.seed, "elbow", &[dt.index() as u64]))?
        } else {
            Vec::new()
        };
        elbow_rows.extend(scan.iter().map(|p| (dt, p.k, p.sos)));
        summaries.push(DayTypeSummary {
            day_type: dt,
            points: points.len(),
            sum_of_squares: sos,
            elbow_k: elbow_k(&scan),
        });
        models.push(model);
    }
    let weekend = models.pop().expect("two day types");
    let weekday = models.pop().expect("two day types");
    let set = ClusterSet::new(weekday, weekend)?;
    let k = set.k();
    let labeled = set.label_days(&days);

    run.write_text("cluster_model.json", &(set.to_json() + "\n"))?;
    run.write("elbow.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["day_type", "k", "sos"]).map_err(internal)?;
        for (dt, k, sos) in &elbow_rows {
            c.write_record([dt.to_string(), k.to_string(), sos.to_string()]).map_err(internal)?;
        }
        c.flush().map_err(internal)
    })?;
    run.write("composition.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["day_of_week", "state", "share"]).map_err(internal)?;
        for r in weekly_composition(k, &labeled) {
            c.write_record([r.day_of_week.to_string(), r.state, r.share.to_string()]).map_err(internal)?;
        }
        c.flush().map_err(internal)
    })?;
    let (all, weekdays) = transition_matrices(k, &labeled);
    run.write("transitions.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["scope", "from", "to", "count", "probability"]).map_err(internal)?;
        for (scope, m) in [("all", &all), ("weekday", &weekdays)] {
            let names = m.state_names();
            for (i, from) in names.iter().enumerate() {
                for (j, to) in names.iter().enumerate() {
                    c.write_record([
                        scope.to_string(),
                        from.clone(),
                        to.clone(),
                        m.counts[i][j].to_string(),
                        m.probs[i][j].to_string(),
                    ])
                    .map_err(internal)?;
                }
            }
        }
        c.flush().map_err(internal)
    })?;
    run.write("profiles.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["day_type", "cluster", "n_days", "slot", "mean_mph", "p05_mph", "p95_mph", "centroid"])
            .map_err(internal)?;
        for p in cluster_profiles(&set, &days) {
            for t in 0..p.mean_mph.len() {
                c.write_record([
                    p.day_type.to_string(),
                    p.cluster.to_string(),
                    p.n_days.to_string(),
                    t.to_string(),
                    p.mean_mph[t].to_string(),
                    p.p05_mph[t].to_string(),
                    p.p95_mph[t].to_string(),
                    p.centroid[t].to_string(),
                ])
                .map_err(internal)?;
            }
        }
        c.flush().map_err(internal)
    })?;
    run.write("day_labels.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["vehicle_id", "day_index", "day_type", "state"]).map_err(internal)?;
        for d in &labeled {
            c.write_record([d.vehicle_id.clone(), d.day_index.to_string(), d.day_type.to_string(), d.state.to_string()])
                .map_err(internal)?;
        }
        c.flush().map_err(internal)
    })?;
    run.write_json("cluster_report.json", &summaries)?;
    run.write_text("parse_report.json", &(report.to_json() + "\n"))?;

    for s in &summaries {
        eprintln!(
            "cluster: {} {} days, k = {k}, elbow suggests {:?}",
            s.points, s.day_type, s.elbow_k
        );
    }
    serde_json::to_value(args).map_err(internal)
}
