use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::DayType;
use crate::time::SLOTS_PER_DAY;

pub const PROFILE_HEADER: [&str; 4] = ["slot", "mean_kw", "p05_kw", "p95_kw"];

/// Linear-interpolation quantile of an ascending slice.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let h = q.clamp(0.0, 1.0) * (n - 1) as f64;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotStats {
    pub slot: usize,
    pub mean_kw: f64,
    pub p05_kw: f64,
    pub p95_kw: f64,
    /// Sample standard deviation across runs.
    pub sd_kw: f64,
}

/// Per-slot summary of aggregate charging power over Monte Carlo runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadDistribution {
    pub slots: Vec<SlotStats>,
    pub n_runs: usize,
    /// Day type of the simulated days when they all share one.
    pub day_type: Option<DayType>,
    /// Aggregate profile of every run, in run order.
    #[serde(with = "crate::time::slot_arrays")]
    pub runs: Vec<[f64; SLOTS_PER_DAY]>,
}

impl LoadDistribution {
    pub fn from_runs(runs: Vec<[f64; SLOTS_PER_DAY]>, day_type: Option<DayType>) -> Self {
        let n = runs.len();
        let slots = (0..SLOTS_PER_DAY)
            .map(|t| {
                let mut col: Vec<f64> = runs.iter().map(|r| r[t]).collect();
                let mean = if n == 0 { 0.0 } else { col.iter().sum::<f64>() / n as f64 };
                let sd = if n < 2 {
                    0.0
                } else {
                    (col.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
                };
                col.sort_by(f64::total_cmp);
                SlotStats {
                    slot: t,
                    mean_kw: mean,
                    p05_kw: if n == 0 { 0.0 } else { quantile_sorted(&col, 0.05) },
                    p95_kw: if n == 0 { 0.0 } else { quantile_sorted(&col, 0.95) },
                    sd_kw: sd,
                }
            })
            .collect();
        Self {
            slots,
            n_runs: n,
            day_type,
            runs,
        }
    }

    pub fn mean_profile(&self) -> [f64; SLOTS_PER_DAY] {
        let mut out = [0.0; SLOTS_PER_DAY];
        for s in &self.slots {
            out[s.slot] = s.mean_kw;
        }
        out
    }

    /// Largest slot mean.
    pub fn peak_mean_kw(&self) -> f64 {
        self.slots.iter().map(|s| s.mean_kw).fold(0.0, f64::max)
    }

    /// Standard error of the slot mean.
    pub fn standard_error(&self, slot: usize) -> f64 {
        self.slots[slot].sd_kw / (self.n_runs as f64).sqrt()
    }

    /// `slot,mean_kw,p05_kw,p95_kw`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(PROFILE_HEADER)?;
        for s in &self.slots {
            w.write_record([
                s.slot.to_string(),
                s.mean_kw.to_string(),
                s.p05_kw.to_string(),
                s.p95_kw.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// One row per run: `run,slot_0,...,slot_47`.
    pub fn write_runs_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["run".to_string()];
        header.extend((0..SLOTS_PER_DAY).map(|t| format!("slot_{t}")));
        w.write_record(&header)?;
        for (i, r) in self.runs.iter().enumerate() {
            let mut row = vec![i.to_string()];
            row.extend(r.iter().map(f64::to_string));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a profile written by [`write_csv`](Self::write_csv). Run
    /// samples are not restored.
    pub fn read_csv<R: std::io::Read>(input: R, day_type: Option<DayType>) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        if r.headers()?.iter().ne(PROFILE_HEADER) {
            return Err(Error::data("profile CSV: unexpected header"));
        }
        let mut slots = Vec::with_capacity(SLOTS_PER_DAY);
        for rec in r.deserialize::<(usize, f64, f64, f64)>() {
            let (slot, mean_kw, p05_kw, p95_kw) = rec?;
            slots.push(SlotStats {
                slot,
                mean_kw,
                p05_kw,
                p95_kw,
                sd_kw: f64::NAN,
            });
        }
        if slots.len() != SLOTS_PER_DAY || slots.iter().enumerate().any(|(i, s)| s.slot != i) {
            return Err(Error::data("profile CSV: expected slots 0..47 in order"));
        }
        Ok(Self {
            slots,
            n_runs: 0,
            day_type,
            runs: Vec::new(),
        })
    }
}
