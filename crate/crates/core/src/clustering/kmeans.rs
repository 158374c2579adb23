use rand::Rng;
use serde::{Deserialize, Serialize};

use super::feature::FeatureVector;
use crate::error::{Error, Result};
use crate::ingest::DayType;
use crate::seed;
use crate::time::SLOTS_PER_DAY;

pub const DEFAULT_MAX_ITER: usize = 300;
pub const DEFAULT_TOL: f64 = 1e-6;

/// Usage cluster, stored zero-based. Files and reports show the one-based
/// [`label`](Cluster::label).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cluster(usize);

impl Cluster {
    pub fn from_index(index: usize) -> Self {
        Cluster(index)
    }

    /// From a one-based label. Panics on 0.
    pub fn from_label(label: usize) -> Self {
        assert!(label >= 1, "cluster labels start at 1");
        Cluster(label - 1)
    }

    pub fn index(self) -> usize {
        self.0
    }

    pub fn label(self) -> usize {
        self.0 + 1
    }
}

impl std::fmt::Display for Cluster {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Fitted K-means centroids for one day type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub day_type: DayType,
    pub k: usize,
    pub centroids: Vec<Vec<f64>>,
}

/// A fit together with its convergence history.
#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub model: ClusterModel,
    pub iterations: usize,
    pub converged: bool,
    /// Sum of squares after each assignment step.
    pub sos_history: Vec<f64>,
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid; the lowest index wins ties.
pub(crate) fn nearest(centroids: &[Vec<f64>], v: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(c, v);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

impl ClusterModel {
    pub fn assign(&self, v: &FeatureVector) -> Cluster {
        Cluster(nearest(&self.centroids, v.values()).0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.centroids.len() != self.k {
            return Err(Error::data("cluster model: centroid count does not match k"));
        }
        if self.centroids.iter().any(|c| c.len() != SLOTS_PER_DAY) {
            return Err(Error::data("cluster model: centroids must have 48 entries"));
        }
        Ok(())
    }
}

/// Label of the nearest centroid by Euclidean distance.
pub fn assign(model: &ClusterModel, v: &FeatureVector) -> Cluster {
    model.assign(v)
}

/// Σ ‖x − nearest centroid‖² over `points`.
pub fn sum_of_squares(model: &ClusterModel, points: &[FeatureVector]) -> f64 {
    points
        .iter()
        .map(|p| nearest(&model.centroids, p.values()).1)
        .sum()
}

fn distinct_count(points: &[FeatureVector]) -> usize {
    let mut keys: Vec<[u64; SLOTS_PER_DAY]> =
        points.iter().map(|p| p.values().map(f64::to_bits)).collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

/// k-means++ seeding.
fn plus_plus<R: Rng>(points: &[FeatureVector], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut centroids = vec![points[rng.random_range(0..points.len())].values().to_vec()];
    let mut d2: Vec<f64> = points
        .iter()
        .map(|p| sq_dist(p.values(), &centroids[0]))
        .collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = d2.iter().rposition(|&d| d > 0.0).unwrap_or(0);
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if acc > target && d > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..points.len())
        };
        let c = points[pick].values().to_vec();
        for (slot, p) in d2.iter_mut().zip(points) {
            *slot = slot.min(sq_dist(p.values(), &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Fits `k` clusters with Lloyd iterations from k-means++ seeds.
///
/// Iteration stops once assignments no longer change (an exact centroid
/// fixed point), once no centroid moves by `tol` or more, or after
/// `max_iter` updates. Empty clusters are reseeded from the point farthest
/// from its own centroid.
pub fn kmeans_fit(
    points: &[FeatureVector],
    day_type: DayType,
    k: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<ClusterModel> {
    kmeans_fit_detailed(points, day_type, k, seed, max_iter, tol).map(|f| f.model)
}

pub fn kmeans_fit_detailed(
    points: &[FeatureVector],
    day_type: DayType,
    k: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<KMeansFit> {
    if points.is_empty() {
        return Err(Error::data("k-means needs at least one point"));
    }
    if k == 0 {
        return Err(Error::config("k must be at least 1"));
    }
    let distinct = distinct_count(points);
    if k > distinct {
        return Err(Error::data(format!(
            "k = {k} exceeds the {distinct} distinct points available"
        )));
    }
    let mut rng = seed::stream(seed, "kmeans-init", &[k as u64]);
    let init = plus_plus(points, k, &mut rng);
    kmeans_refine(points, day_type, init, max_iter, tol)
}

/// Runs Lloyd iterations from the given centroids.
pub fn kmeans_refine(
    points: &[FeatureVector],
    day_type: DayType,
    mut centroids: Vec<Vec<f64>>,
    max_iter: usize,
    tol: f64,
) -> Result<KMeansFit> {
    let k = centroids.len();
    if k == 0 || points.is_empty() {
        return Err(Error::data("k-means needs centroids and points"));
    }
    let assign_all = |centroids: &[Vec<f64>]| -> (Vec<usize>, Vec<f64>) {
        points
            .iter()
            .map(|p| nearest(centroids, p.values()))
            .unzip()
    };

    let (mut labels, mut dists) = assign_all(&centroids);
    let mut history = vec![dists.iter().sum()];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iter {
        iterations += 1;
        let mut sums = vec![vec![0.0; SLOTS_PER_DAY]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(p.values()) {
                *s += v;
            }
        }
        let mut next: Vec<Vec<f64>> = sums
            .into_iter()
            .zip(&counts)
            .map(|(s, &n)| {
                if n == 0 {
                    s
                } else {
                    s.into_iter().map(|v| v / n as f64).collect()
                }
            })
            .collect();
        let mut reseeded = false;
        for c in 0..k {
            if counts[c] == 0 {
                reseeded = true;
                // reseed from the point farthest from its current centroid
                let (far, _) = dists
                    .iter()
                    .enumerate()
                    .fold((0, -1.0), |best, (i, &d)| if d > best.1 { (i, d) } else { best });
                next[c] = points[far].values().to_vec();
                dists[far] = 0.0;
            }
        }
        let movement = centroids
            .iter()
            .zip(&next)
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = next;

        let (new_labels, new_dists) = assign_all(&centroids);
        history.push(new_dists.iter().sum());
        let stable = new_labels == labels;
        labels = new_labels;
        dists = new_dists;
        // a reseed leaves the other centroids one update behind
        if !reseeded && (stable || movement < tol) {
            converged = true;
            break;
        }
    }

    Ok(KMeansFit {
        model: ClusterModel {
            day_type,
            k,
            centroids,
        },
        iterations,
        converged,
        sos_history: history,
    })
}
