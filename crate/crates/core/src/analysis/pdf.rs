use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::SLOTS_PER_DAY;

/// A distribution over the 48 half-hour slots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotPdf(#[serde(with = "crate::time::slot_array")] [f64; SLOTS_PER_DAY]);

impl SlotPdf {
    /// Normalizes non-negative weights. All-zero weights are an error.
    pub fn from_weights(weights: &[f64; SLOTS_PER_DAY]) -> Result<Self> {
        if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::data("slot weights must be finite and non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::data("cannot build a distribution from zero weight"));
        }
        let mut out = [0.0; SLOTS_PER_DAY];
        for (o, w) in out.iter_mut().zip(weights) {
            *o = w / total;
        }
        Ok(SlotPdf(out))
    }

    pub fn values(&self) -> &[f64; SLOTS_PER_DAY] {
        &self.0
    }
}

/// Histogram of event slots, normalized.
pub fn start_time_pdf(slots: impl IntoIterator<Item = usize>) -> Result<SlotPdf> {
    let mut counts = [0.0; SLOTS_PER_DAY];
    let mut n = 0usize;
    for s in slots {
        if s >= SLOTS_PER_DAY {
            return Err(Error::data(format!("slot {s} out of range")));
        }
        counts[s] += 1.0;
        n += 1;
    }
    if n == 0 {
        return Err(Error::data("start-time distribution needs at least one event"));
    }
    SlotPdf::from_weights(&counts)
}

/// Mean absolute percentage error over the slots where `observed` is
/// positive. Slots with no observed mass are left out because the relative
/// error is undefined there.
pub fn mape(predicted: &SlotPdf, observed: &SlotPdf) -> Result<f64> {
    mape_raw(predicted.values(), observed.values())
}

pub(crate) fn mape_raw(predicted: &[f64], observed: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    let mut n = 0usize;
    for (p, o) in predicted.iter().zip(observed) {
        if *o > 0.0 {
            acc += (p - o).abs() / o;
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::data("observed distribution is all zero"));
    }
    Ok(acc / n as f64 * 100.0)
}
