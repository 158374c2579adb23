use super::tables::{PosteriorTables, SOC_STATES};
use crate::time::SLOTS_PER_DAY;

/// Smoothing width in grid cells.
pub const DEFAULT_SIGMA: f64 = 1.0;

fn weights(sigma: f64, max_radius: usize) -> Vec<f64> {
    let radius = ((3.0 * sigma).ceil() as usize).min(max_radius);
    (0..=radius)
        .map(|d| (-((d * d) as f64) / (2.0 * sigma * sigma)).exp())
        .collect()
}

/// Gaussian filter over one 48×6 slice laid out `[t][s]`.
///
/// The kernel is truncated at 3σ. The time axis wraps around midnight (the
/// radius is capped at 23 slots so no offset is counted twice); the SOC axis
/// is truncated at its ends and the remaining weights renormalized. Constant
/// slices are therefore left unchanged, and `sigma = 0` is the identity.
pub fn smooth_table(values: &[f64], sigma: f64) -> Vec<f64> {
    assert_eq!(values.len(), SLOTS_PER_DAY * SOC_STATES);
    assert!(sigma >= 0.0, "sigma must be non-negative");
    if sigma == 0.0 {
        return values.to_vec();
    }
    let wt = weights(sigma, SLOTS_PER_DAY / 2 - 1);
    let ws = weights(sigma, SOC_STATES - 1);
    let rt = wt.len() as isize - 1;
    let rs = ws.len() as isize - 1;
    let t_norm: f64 = wt[0] + 2.0 * wt[1..].iter().sum::<f64>();

    let n = SLOTS_PER_DAY as isize;
    let mut along_t = vec![0.0; values.len()];
    for t in 0..SLOTS_PER_DAY {
        for s in 0..SOC_STATES {
            let mut acc = 0.0;
            for dt in -rt..=rt {
                let src = (t as isize + dt).rem_euclid(n) as usize;
                acc += wt[dt.unsigned_abs()] * values[src * SOC_STATES + s];
            }
            along_t[t * SOC_STATES + s] = acc / t_norm;
        }
    }

    let mut out = vec![0.0; values.len()];
    for t in 0..SLOTS_PER_DAY {
        for s in 0..SOC_STATES as isize {
            let mut acc = 0.0;
            let mut norm = 0.0;
            for ds in -rs..=rs {
                let src = s + ds;
                if src < 0 || src >= SOC_STATES as isize {
                    continue;
                }
                let w = ws[ds.unsigned_abs()];
                acc += w * along_t[t * SOC_STATES + src as usize];
                norm += w;
            }
            out[t * SOC_STATES + s as usize] = (acc / norm).clamp(0.0, 1.0);
        }
    }
    out
}

/// Applies [`smooth_table`] to every (day type, cluster) slice of the
/// after-journey table and every day-type slice of the independent table.
/// Count tables are carried over untouched.
pub fn smooth_tables(tables: &PosteriorTables, sigma: f64) -> PosteriorTables {
    let mut out = tables.clone();
    out.sigma = sigma;
    let slice = SLOTS_PER_DAY * SOC_STATES;
    let k = tables.n_clusters;
    for d in 0..tables.day_types {
        for c in 0..k {
            let mut grid = vec![0.0; slice];
            for t in 0..SLOTS_PER_DAY {
                for s in 0..SOC_STATES {
                    grid[t * SOC_STATES + s] = tables.after_journey[tables.after_index(d, t, c, s)];
                }
            }
            let sm = smooth_table(&grid, sigma);
            for t in 0..SLOTS_PER_DAY {
                for s in 0..SOC_STATES {
                    let i = tables.after_index(d, t, c, s);
                    out.after_journey[i] = sm[t * SOC_STATES + s];
                }
            }
        }
        let start = tables.independent_index(d, 0, 0);
        let sm = smooth_table(&tables.independent[start..start + slice], sigma);
        out.independent[start..start + slice].copy_from_slice(&sm);
    }
    out
}
