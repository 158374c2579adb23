//! Canonical vehicle-use records and the readers that produce them.
//!
//! Survey and trial files share one journey schema (trial files add an
//! `energy_kwh` column); charge logs have their own schema. Parsing never
//! aborts on a bad row: each rejected row lands in a [`ParseReport`] with its
//! line number, and only unreadable files or wrong headers are fatal.

mod csvio;
mod report;
mod soc;
mod synth;

use serde::{Deserialize, Serialize};

use crate::time::{self, MINUTES_PER_DAY, SLOTS_PER_DAY};

pub use csvio::{
    parse_charges, parse_survey, parse_survey_reader, parse_trial, parse_trial_journeys_reader,
    parse_charges_reader, write_charges, write_survey, write_trial_journeys, ParseConfig,
    CHARGES_HEADER, SURVEY_HEADER, TRIAL_JOURNEYS_HEADER,
};
pub use report::{ParseReport, RowIssue};
pub use soc::{infer_soc_trace, infer_soc_traces, SampleKind, SocSample, SocTrace};
pub use synth::{
    synthesize_fleet, write_labels, ArchetypeSpec, ChargingPolicy, JourneyTemplate, LabelRecord,
    SynthSpec, SyntheticFleet, TrialOverrides, LABELS_HEADER,
};

/// Weekday/weekend split. Day index 0 is a Monday.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DayType {
    Weekday,
    Weekend,
}

impl DayType {
    pub const ALL: [DayType; 2] = [DayType::Weekday, DayType::Weekend];

    pub fn from_day_index(day_index: u32) -> Self {
        if day_index % 7 >= 5 {
            DayType::Weekend
        } else {
            DayType::Weekday
        }
    }

    /// 0 for weekdays, 1 for weekends; the `d` axis of the posterior tables.
    pub fn index(self) -> usize {
        match self {
            DayType::Weekday => 0,
            DayType::Weekend => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DayType::Weekday => "weekday",
            DayType::Weekend => "weekend",
        }
    }
}

impl std::fmt::Display for DayType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for DayType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "weekday" => Ok(DayType::Weekday),
            "weekend" => Ok(DayType::Weekend),
            other => Err(format!("unknown day type `{other}`")),
        }
    }
}

/// One trip, confined to a single day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Journey {
    pub vehicle_id: String,
    pub day_index: u32,
    /// Minutes from midnight, `[0, 1440)`.
    pub start_minute: u32,
    /// Minutes from midnight, `(start_minute, 1440]`.
    pub end_minute: u32,
    /// Miles.
    pub distance: f64,
    /// kWh drawn from the battery. Only trial data records it.
    pub energy_used: Option<f64>,
}

impl Journey {
    pub fn duration_minutes(&self) -> u32 {
        self.end_minute - self.start_minute
    }

    /// Energy drawn from the battery, falling back to a per-mile rate when the
    /// journey carries no measurement.
    pub fn energy_kwh(&self, kwh_per_mile: f64) -> f64 {
        self.energy_used.unwrap_or(self.distance * kwh_per_mile)
    }

    pub fn abs_start(&self) -> i64 {
        time::absolute(self.day_index, self.start_minute)
    }

    pub fn abs_end(&self) -> i64 {
        time::absolute(self.day_index, self.end_minute)
    }

    /// Whether the vehicle is on the road at `minute` (start inclusive,
    /// end exclusive).
    pub fn covers(&self, minute: u32) -> bool {
        self.start_minute <= minute && minute < self.end_minute
    }
}

/// One vehicle's journeys on one calendar day. An empty journey list means
/// the vehicle was observed but unused.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleDay {
    pub vehicle_id: String,
    pub day_index: u32,
    pub day_type: DayType,
    pub journeys: Vec<Journey>,
}

impl VehicleDay {
    pub fn new(vehicle_id: impl Into<String>, day_index: u32, journeys: Vec<Journey>) -> Self {
        Self {
            vehicle_id: vehicle_id.into(),
            day_index,
            day_type: DayType::from_day_index(day_index),
            journeys,
        }
    }

    pub fn is_unused(&self) -> bool {
        self.journeys.is_empty()
    }

    pub fn total_distance(&self) -> f64 {
        self.journeys.iter().map(|j| j.distance).sum()
    }

    pub fn final_journey(&self) -> Option<&Journey> {
        self.journeys.last()
    }

    pub fn is_traveling_at(&self, minute: u32) -> bool {
        self.journeys.iter().any(|j| j.covers(minute))
    }

    /// Slots in which at least one journey ends.
    pub fn journey_end_slots(&self) -> [bool; SLOTS_PER_DAY] {
        let mut ends = [false; SLOTS_PER_DAY];
        for j in &self.journeys {
            ends[time::slot_of(j.end_minute)] = true;
        }
        ends
    }

    /// Checks the ordering and bounds invariants.
    pub fn validate(&self) -> Result<(), String> {
        let mut prev_end = 0;
        for (i, j) in self.journeys.iter().enumerate() {
            if j.vehicle_id != self.vehicle_id || j.day_index != self.day_index {
                return Err(format!("journey {i} belongs to another vehicle-day"));
            }
            if j.end_minute <= j.start_minute || j.end_minute > MINUTES_PER_DAY {
                return Err(format!("journey {i} has invalid times"));
            }
            if i > 0 && j.start_minute < prev_end {
                return Err(format!("journey {i} overlaps its predecessor"));
            }
            prev_end = j.end_minute;
        }
        Ok(())
    }
}

/// A logged charge. `end_minute` is counted from midnight of `day_index` and
/// may exceed 1440 when the charge runs past midnight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeEvent {
    pub vehicle_id: String,
    pub day_index: u32,
    pub start_minute: u32,
    pub end_minute: u32,
    pub soc_start: f64,
    pub soc_end: f64,
}

impl ChargeEvent {
    pub fn abs_start(&self) -> i64 {
        time::absolute(self.day_index, self.start_minute)
    }

    pub fn abs_end(&self) -> i64 {
        time::absolute(self.day_index, self.end_minute)
    }

    /// Whether a charge that began strictly before `abs_minute` is still in
    /// progress at that instant.
    pub fn in_progress_at(&self, abs_minute: i64) -> bool {
        self.abs_start() < abs_minute && abs_minute < self.abs_end()
    }
}

/// Groups vehicle-days by vehicle, preserving day order.
pub fn group_by_vehicle(days: &[VehicleDay]) -> Vec<(&str, Vec<&VehicleDay>)> {
    let mut map: std::collections::BTreeMap<&str, Vec<&VehicleDay>> = Default::default();
    for d in days {
        map.entry(d.vehicle_id.as_str()).or_default().push(d);
    }
    map.into_iter()
        .map(|(v, mut ds)| {
            ds.sort_by_key(|d| d.day_index);
            (v, ds)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn week_starts_on_monday() {
        let types: Vec<_> = (0..8).map(DayType::from_day_index).collect();
        assert_eq!(types[0], DayType::Weekday);
        assert_eq!(types[4], DayType::Weekday);
        assert_eq!(types[5], DayType::Weekend);
        assert_eq!(types[6], DayType::Weekend);
        assert_eq!(types[7], DayType::Weekday);
    }

    #[test]
    fn journey_coverage_is_half_open() {
        let j = Journey {
            vehicle_id: "a".into(),
            day_index: 0,
            start_minute: 60,
            end_minute: 90,
            distance: 1.0,
            energy_used: None,
        };
        assert!(j.covers(60));
        assert!(j.covers(89));
        assert!(!j.covers(90));
        assert_eq!(j.energy_kwh(0.25), 0.25);
    }
}
