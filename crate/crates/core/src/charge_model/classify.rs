use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::ingest::{ChargeEvent, VehicleDay};

pub const DEFAULT_WINDOW_MINUTES: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChargeKind {
    AfterJourney,
    Independent,
}

/// Identifies a journey by vehicle, day and position within the day.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct JourneyRef {
    pub vehicle_id: String,
    pub day_index: u32,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeLabel {
    /// Position of the charge in the slice passed to [`classify_charges`].
    pub charge: usize,
    pub kind: ChargeKind,
    pub matched_journey: Option<JourneyRef>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub window_minutes: u32,
    pub labels: Vec<ChargeLabel>,
    /// Share of charges starting within the window after a day's last journey.
    pub after_final_fraction: f64,
    /// Share of charges starting within the window after any journey.
    pub after_any_fraction: f64,
}

struct End {
    abs: i64,
    journey: JourneyRef,
    is_final: bool,
}

/// Labels every charge. A charge starting between 0 and `window_minutes`
/// (inclusive) after some journey end of the same vehicle is after-journey,
/// matched to the latest such journey; every other charge is independent.
pub fn classify_charges(
    days: &[VehicleDay],
    charges: &[ChargeEvent],
    window_minutes: u32,
) -> Classification {
    let mut ends: HashMap<&str, Vec<End>> = HashMap::new();
    for day in days {
        let n = day.journeys.len();
        let list = ends.entry(&day.vehicle_id).or_default();
        for (i, j) in day.journeys.iter().enumerate() {
            list.push(End {
                abs: j.abs_end(),
                journey: JourneyRef {
                    vehicle_id: day.vehicle_id.clone(),
                    day_index: day.day_index,
                    index: i,
                },
                is_final: i + 1 == n,
            });
        }
    }
    for list in ends.values_mut() {
        list.sort_by_key(|e| e.abs);
    }

    let window = window_minutes as i64;
    let mut after_final = 0usize;
    let mut labels = Vec::with_capacity(charges.len());
    for (ci, c) in charges.iter().enumerate() {
        let start = c.abs_start();
        let candidates: &[End] = ends
            .get(c.vehicle_id.as_str())
            .map(|l| {
                let hi = l.partition_point(|e| e.abs <= start);
                let lo = l.partition_point(|e| e.abs < start - window);
                &l[lo..hi]
            })
            .unwrap_or(&[]);
        if candidates.iter().any(|e| e.is_final) {
            after_final += 1;
        }
        let label = match candidates.last() {
            Some(e) => ChargeLabel {
                charge: ci,
                kind: ChargeKind::AfterJourney,
                matched_journey: Some(e.journey.clone()),
            },
            None => ChargeLabel {
                charge: ci,
                kind: ChargeKind::Independent,
                matched_journey: None,
            },
        };
        labels.push(label);
    }
    let n = charges.len().max(1) as f64;
    let after_any = labels
        .iter()
        .filter(|l| l.kind == ChargeKind::AfterJourney)
        .count();
    Classification {
        window_minutes,
        labels,
        after_final_fraction: after_final as f64 / n,
        after_any_fraction: after_any as f64 / n,
    }
}
