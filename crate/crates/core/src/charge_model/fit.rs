use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::classify::{ChargeKind, Classification};
use super::smooth::smooth_tables;
use super::tables::{soc_bin, PosteriorTables};
use crate::clustering::{ClusterSet, DayState};
use crate::error::{Error, Result};
use crate::ingest::{group_by_vehicle, ChargeEvent, SocTrace, VehicleDay};
use crate::par;
use crate::time::{self, SLOTS_PER_DAY, SLOT_MINUTES};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub vehicles: usize,
    pub after_journey_charges: u64,
    pub independent_charges: u64,
    /// Independent charges that began in a slot that is not an independent
    /// opportunity (a journey ended in it, or the vehicle was away or already
    /// charging at its start).
    pub unplaced_independent: u64,
    pub warnings: Vec<String>,
}

struct Counts {
    after_opp: Vec<u64>,
    after_hit: Vec<u64>,
    ind_opp: Vec<u64>,
    ind_hit: Vec<u64>,
    unplaced: u64,
}

impl Counts {
    fn new(t: &PosteriorTables) -> Self {
        Self {
            after_opp: vec![0; t.after_journey.len()],
            after_hit: vec![0; t.after_journey.len()],
            ind_opp: vec![0; t.independent.len()],
            ind_hit: vec![0; t.independent.len()],
            unplaced: 0,
        }
    }

    fn add(&mut self, o: &Counts) {
        for (a, b) in [
            (&mut self.after_opp, &o.after_opp),
            (&mut self.after_hit, &o.after_hit),
            (&mut self.ind_opp, &o.ind_opp),
            (&mut self.ind_hit, &o.ind_hit),
        ] {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        self.unplaced += o.unplaced;
    }
}

/// Estimates both posterior tables by counting, then smooths them with
/// `sigma`.
pub fn fit_posteriors(
    days: &[VehicleDay],
    charges: &[ChargeEvent],
    classification: &Classification,
    clusters: &ClusterSet,
    traces: &[SocTrace],
    sigma: f64,
) -> Result<PosteriorTables> {
    fit_posteriors_detailed(days, charges, classification, clusters, traces, sigma).map(|r| r.0)
}

pub fn fit_posteriors_detailed(
    days: &[VehicleDay],
    charges: &[ChargeEvent],
    classification: &Classification,
    clusters: &ClusterSet,
    traces: &[SocTrace],
    sigma: f64,
) -> Result<(PosteriorTables, FitDiagnostics)> {
    if !(sigma >= 0.0) {
        return Err(Error::config("sigma must be non-negative"));
    }
    if classification.labels.len() != charges.len() {
        return Err(Error::data("classification does not match the charge list"));
    }
    let trace_of: HashMap<&str, &SocTrace> =
        traces.iter().map(|t| (t.vehicle_id.as_str(), t)).collect();

    // per-vehicle charge intervals, matched journeys and independent starts
    let mut charges_of: HashMap<&str, Vec<(i64, i64)>> = HashMap::new();
    let mut matched: HashMap<&str, HashSet<(u32, usize)>> = HashMap::new();
    let mut indep_starts: HashMap<&str, Vec<i64>> = HashMap::new();
    for (c, label) in charges.iter().zip(&classification.labels) {
        let v = c.vehicle_id.as_str();
        charges_of.entry(v).or_default().push((c.abs_start(), c.abs_end()));
        match (&label.kind, &label.matched_journey) {
            (ChargeKind::AfterJourney, Some(j)) => {
                matched.entry(v).or_default().insert((j.day_index, j.index));
            }
            _ => indep_starts.entry(v).or_default().push(c.abs_start()),
        }
    }

    let template = PosteriorTables::zeros(clusters.k());
    let groups = group_by_vehicle(days);
    let empty_set = HashSet::new();
    let per_vehicle = par::map_slice(&groups, |(vehicle, vdays)| -> Result<Counts> {
        let trace = trace_of.get(vehicle).ok_or_else(|| {
            Error::data(format!("no SOC trace for vehicle `{vehicle}`"))
        })?;
        let mut intervals = charges_of.get(vehicle).cloned().unwrap_or_default();
        intervals.sort_unstable();
        let prefix_max_end: Vec<i64> = intervals
            .iter()
            .scan(i64::MIN, |m, &(_, e)| {
                *m = (*m).max(e);
                Some(*m)
            })
            .collect();
        let charging_at = |b: i64| {
            let n = intervals.partition_point(|&(s, _)| s < b);
            n > 0 && prefix_max_end[n - 1] > b
        };
        let mut starts = indep_starts.get(vehicle).cloned().unwrap_or_default();
        starts.sort_unstable();
        let hits = matched.get(vehicle).unwrap_or(&empty_set);

        let mut counts = Counts::new(&template);
        let mut placed = 0u64;
        for day in vdays {
            let d = day.day_type.index();
            if let DayState::Used(k) = clusters.classify(day) {
                for (i, j) in day.journeys.iter().enumerate() {
                    let t = time::slot_of(j.end_minute);
                    let s = soc_bin(trace.soc_after_journey(j.abs_end()));
                    let cell = template.after_index(d, t, k.index(), s);
                    counts.after_opp[cell] += 1;
                    if hits.contains(&(day.day_index, i)) {
                        counts.after_hit[cell] += 1;
                    }
                }
            }
            let ends = day.journey_end_slots();
            for t in 0..SLOTS_PER_DAY {
                let minute = time::slot_start(t);
                let b = time::absolute(day.day_index, minute);
                if ends[t] || day.is_traveling_at(minute) || charging_at(b) {
                    continue;
                }
                let s = soc_bin(trace.soc_at_boundary(b));
                let cell = template.independent_index(d, t, s);
                counts.ind_opp[cell] += 1;
                let lo = starts.partition_point(|&x| x < b);
                let hi = starts.partition_point(|&x| x < b + SLOT_MINUTES as i64);
                if hi > lo {
                    counts.ind_hit[cell] += 1;
                    placed += (hi - lo) as u64;
                }
            }
        }
        let observed_days: HashSet<u32> = vdays.iter().map(|d| d.day_index).collect();
        let in_scope = starts
            .iter()
            .filter(|&&s| observed_days.contains(&(s.div_euclid(1440) as u32)))
            .count() as u64;
        counts.unplaced = in_scope.saturating_sub(placed);
        Ok(counts)
    });

    let mut total = Counts::new(&template);
    for c in per_vehicle {
        total.add(&c?);
    }

    let mut tables = template;
    let ratio = |hit: u64, opp: u64| if opp == 0 { 0.0 } else { hit as f64 / opp as f64 };
    for i in 0..tables.after_journey.len() {
        tables.after_journey[i] = ratio(total.after_hit[i], total.after_opp[i]);
    }
    for i in 0..tables.independent.len() {
        tables.independent[i] = ratio(total.ind_hit[i], total.ind_opp[i]);
    }
    tables.after_opportunities = total.after_opp;
    tables.after_charges = total.after_hit;
    tables.independent_opportunities = total.ind_opp;
    tables.independent_charges = total.ind_hit;

    let mut diag = FitDiagnostics {
        vehicles: groups.len(),
        after_journey_charges: tables.after_charges.iter().sum(),
        independent_charges: tables.independent_charges.iter().sum(),
        unplaced_independent: total.unplaced,
        warnings: Vec::new(),
    };
    if charges.is_empty() {
        diag.warnings
            .push("no charge events: all probabilities are zero".to_string());
    }
    if diag.unplaced_independent > 0 {
        diag.warnings.push(format!(
            "{} independent charges started outside an independent opportunity",
            diag.unplaced_independent
        ));
    }

    let tables = if sigma > 0.0 {
        smooth_tables(&tables, sigma)
    } else {
        tables
    };
    Ok((tables, diag))
}
