use serde::{Deserialize, Serialize};

use super::feature::FeatureVector;
use super::kmeans::{kmeans_fit, sum_of_squares, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::ingest::DayType;
use crate::{par, seed};

pub const MAX_ELBOW_K: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElbowPoint {
    pub k: usize,
    pub sos: f64,
}

/// Best sum of squares over `seeds_per_k` restarts for every k in
/// `k_min..=k_max`. Restart seeds are derived from `root_seed`, so the scan is
/// reproducible and independent of scheduling.
pub fn elbow_scan(
    points: &[FeatureVector],
    day_type: DayType,
    k_min: usize,
    k_max: usize,
    seeds_per_k: usize,
    root_seed: u64,
) -> Result<Vec<ElbowPoint>> {
    if k_min < 1 || k_max > MAX_ELBOW_K || k_min > k_max {
        return Err(Error::config(format!(
            "elbow range [{k_min}, {k_max}] must lie within [1, {MAX_ELBOW_K}]"
        )));
    }
    if seeds_per_k == 0 {
        return Err(Error::config("seeds_per_k must be at least 1"));
    }
    let jobs: Vec<(usize, usize)> = (k_min..=k_max)
        .flat_map(|k| (0..seeds_per_k).map(move |s| (k, s)))
        .collect();
    let results = par::map_slice(&jobs, |&(k, s)| {
        let seed = seed::derive_seed(root_seed, "elbow", &[k as u64, s as u64]);
        kmeans_fit(points, day_type, k, seed, DEFAULT_MAX_ITER, DEFAULT_TOL)
            .map(|m| sum_of_squares(&m, points))
    });

    let mut out: Vec<ElbowPoint> = Vec::new();
    for (&(k, _), sos) in jobs.iter().zip(results) {
        let sos = sos?;
        match out.last_mut() {
            Some(p) if p.k == k => p.sos = p.sos.min(sos),
            _ => out.push(ElbowPoint { k, sos }),
        }
    }
    Ok(out)
}

/// k with the largest discrete second difference `S(k−1) − 2S(k) + S(k+1)`.
/// Needs at least three consecutive points; reported, never applied.
pub fn elbow_k(scan: &[ElbowPoint]) -> Option<usize> {
    scan.windows(3)
        .filter(|w| w[0].k + 1 == w[1].k && w[1].k + 1 == w[2].k)
        .map(|w| (w[1].k, w[0].sos - 2.0 * w[1].sos + w[2].sos))
        .fold(None, |best: Option<(usize, f64)>, (k, c)| match best {
            Some((_, bc)) if bc >= c => best,
            _ => Some((k, c)),
        })
        .map(|(k, _)| k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::SLOTS_PER_DAY;

    fn cloud(center: &[usize], n: usize, jitter: usize) -> Vec<FeatureVector> {
        (0..n)
            .map(|i| {
                let mut v = [0.0; SLOTS_PER_DAY];
                for &c in center {
                    v[c] += 1.0;
                }
                v[(center[0] + 1 + i % jitter) % SLOTS_PER_DAY] += 0.05;
                FeatureVector::normalized(v).unwrap()
            })
            .collect()
    }

    #[test]
    fn three_clouds_bend_at_three() {
        let mut pts = cloud(&[16, 35], 40, 3);
        pts.extend(cloud(&[20], 40, 3));
        pts.extend(cloud(&[38], 40, 3));
        let scan = elbow_scan(&pts, DayType::Weekday, 1, 6, 4, 9).unwrap();
        assert_eq!(scan.len(), 6);
        assert!(scan.windows(2).all(|w| w[0].k < w[1].k));
        assert_eq!(elbow_k(&scan), Some(3));
    }

    #[test]
    fn single_k_range() {
        let pts = cloud(&[10], 5, 2);
        let scan = elbow_scan(&pts, DayType::Weekday, 1, 1, 2, 0).unwrap();
        assert_eq!(scan.len(), 1);
        assert_eq!(elbow_k(&scan), None);
    }

    #[test]
    fn range_is_checked() {
        let pts = cloud(&[10], 5, 2);
        assert!(elbow_scan(&pts, DayType::Weekday, 0, 3, 1, 0).is_err());
        assert!(elbow_scan(&pts, DayType::Weekday, 1, 13, 1, 0).is_err());
    }
}
