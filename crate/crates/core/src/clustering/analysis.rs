use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{speed_profile, ClusterModel, ClusterSet, DayState, LabeledDay, TransitionMatrix};
use crate::error::{Error, Result};
use crate::ingest::{DayType, VehicleDay};
use crate::time::SLOTS_PER_DAY;

/// Builds the all-days and weekday-only transition matrices. Only pairs of
/// consecutive calendar days of the same vehicle are counted.
pub fn transition_matrices(k: usize, labeled: &[LabeledDay]) -> (TransitionMatrix, TransitionMatrix) {
    let mut by_vehicle: BTreeMap<&str, Vec<&LabeledDay>> = BTreeMap::new();
    for d in labeled {
        by_vehicle.entry(&d.vehicle_id).or_default().push(d);
    }
    let mut all = Vec::new();
    let mut weekday = Vec::new();
    for days in by_vehicle.values_mut() {
        days.sort_by_key(|d| d.day_index);
        for w in days.windows(2) {
            if w[1].day_index != w[0].day_index + 1 {
                continue;
            }
            all.push((w[0].state, w[1].state));
            if w[0].day_type == DayType::Weekday && w[1].day_type == DayType::Weekday {
                weekday.push((w[0].state, w[1].state));
            }
        }
    }
    (
        TransitionMatrix::from_pairs(k, all),
        TransitionMatrix::from_pairs(k, weekday),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionRow {
    /// 0 = Monday … 6 = Sunday.
    pub day_of_week: u32,
    pub state: String,
    pub share: f64,
}

/// Share of each state on each day of the week.
pub fn weekly_composition(k: usize, labeled: &[LabeledDay]) -> Vec<CompositionRow> {
    let mut counts = vec![vec![0u64; k + 1]; 7];
    for d in labeled {
        counts[(d.day_index % 7) as usize][d.state.state_index(k)] += 1;
    }
    let mut rows = Vec::new();
    for (dow, row) in counts.iter().enumerate() {
        let total: u64 = row.iter().sum();
        if total == 0 {
            continue;
        }
        for (i, &c) in row.iter().enumerate() {
            let state = if i == k { "U".to_string() } else { (i + 1).to_string() };
            rows.push(CompositionRow {
                day_of_week: dow as u32,
                state,
                share: c as f64 / total as f64,
            });
        }
    }
    rows
}

/// Per-cluster raw speed statistics alongside the normalized centroid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterProfile {
    pub day_type: DayType,
    pub cluster: usize,
    pub n_days: usize,
    pub mean_mph: Vec<f64>,
    pub p05_mph: Vec<f64>,
    pub p95_mph: Vec<f64>,
    pub centroid: Vec<f64>,
}

/// Average un-normalized speed profile of each cluster with a 90% band.
/// These differ from the centroids because raw profiles are averaged before
/// any normalization.
pub fn cluster_profiles(set: &ClusterSet, days: &[VehicleDay]) -> Vec<ClusterProfile> {
    let k = set.k();
    let mut out = Vec::new();
    for dt in DayType::ALL {
        let mut members: Vec<Vec<[f64; SLOTS_PER_DAY]>> = vec![Vec::new(); k];
        for d in days.iter().filter(|d| d.day_type == dt) {
            if let DayState::Used(c) = set.classify(d) {
                members[c.index()].push(speed_profile(d));
            }
        }
        for (c, profiles) in members.into_iter().enumerate() {
            let n = profiles.len();
            let mut mean = vec![0.0; SLOTS_PER_DAY];
            let mut p05 = vec![0.0; SLOTS_PER_DAY];
            let mut p95 = vec![0.0; SLOTS_PER_DAY];
            if n > 0 {
                for slot in 0..SLOTS_PER_DAY {
                    let mut col: Vec<f64> = profiles.iter().map(|p| p[slot]).collect();
                    mean[slot] = col.iter().sum::<f64>() / n as f64;
                    col.sort_by(f64::total_cmp);
                    p05[slot] = crate::simulator::quantile_sorted(&col, 0.05);
                    p95[slot] = crate::simulator::quantile_sorted(&col, 0.95);
                }
            }
            out.push(ClusterProfile {
                day_type: dt,
                cluster: c + 1,
                n_days: n,
                mean_mph: mean,
                p05_mph: p05,
                p95_mph: p95,
                centroid: set.model(dt).centroids[c].clone(),
            });
        }
    }
    out
}

/// Cluster shares and distances of one dataset under a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub n_days: usize,
    /// Shares of clusters `1..=k` then `U`.
    pub shares: Vec<f64>,
    /// Mean daily miles of the days in each cluster (0 when empty).
    pub cluster_mean_miles: Vec<f64>,
    /// Mean daily miles over all days, unused days included.
    pub mean_daily_miles: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetComparison {
    pub day_type: DayType,
    pub k: usize,
    pub a: DatasetSummary,
    pub b: DatasetSummary,
    /// `b.mean_daily_miles / a.mean_daily_miles`.
    pub distance_ratio: f64,
}

fn summarize(model: &ClusterModel, days: &[&VehicleDay]) -> DatasetSummary {
    let k = model.k;
    let mut counts = vec![0usize; k + 1];
    let mut miles = vec![0.0; k + 1];
    for d in days {
        let idx = match super::build_feature_vector(d).vector() {
            Some(v) => model.assign(v).index(),
            None => k,
        };
        counts[idx] += 1;
        miles[idx] += d.total_distance();
    }
    let n = days.len();
    DatasetSummary {
        n_days: n,
        shares: counts.iter().map(|&c| c as f64 / n as f64).collect(),
        cluster_mean_miles: (0..k)
            .map(|i| if counts[i] > 0 { miles[i] / counts[i] as f64 } else { 0.0 })
            .collect(),
        mean_daily_miles: miles.iter().sum::<f64>() / n as f64,
    }
}

/// Classifies two datasets under one model (restricted to the model's day
/// type) and compares their composition and distances.
pub fn compare_datasets(
    model: &ClusterModel,
    days_a: &[VehicleDay],
    days_b: &[VehicleDay],
) -> Result<DatasetComparison> {
    let a: Vec<&VehicleDay> = days_a.iter().filter(|d| d.day_type == model.day_type).collect();
    let b: Vec<&VehicleDay> = days_b.iter().filter(|d| d.day_type == model.day_type).collect();
    if a.is_empty() || b.is_empty() {
        return Err(Error::data(format!(
            "cannot compare datasets: one has no {} days",
            model.day_type
        )));
    }
    let a = summarize(model, &a);
    let b = summarize(model, &b);
    if a.mean_daily_miles <= 0.0 {
        return Err(Error::data("reference dataset has zero total distance"));
    }
    Ok(DatasetComparison {
        day_type: model.day_type,
        k: model.k,
        distance_ratio: b.mean_daily_miles / a.mean_daily_miles,
        a,
        b,
    })
}
