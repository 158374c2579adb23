use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ChargeEvent, VehicleDay};
use crate::error::{Error, Result};
use crate::time;

/// What happened at a trace sample. The declaration order is the tie-break
/// order for events sharing a minute: a charge interrupted by a departure ends
/// before the departure, and an arrival is recorded before a charge that
/// starts on arrival.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    Initial,
    ChargeEnd,
    JourneyEnd,
    JourneyStart,
    ChargeStart,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SocSample {
    pub day_index: u32,
    /// Minutes from midnight of `day_index`; may exceed 1440 for a charge that
    /// ends after midnight.
    pub minute: u32,
    pub kind: SampleKind,
    pub soc: f64,
}

impl SocSample {
    fn key(&self) -> (i64, SampleKind) {
        (time::absolute(self.day_index, self.minute), self.kind)
    }
}

/// Piecewise-constant SOC history of one vehicle, with a sample at every
/// journey and charge boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocTrace {
    pub vehicle_id: String,
    pub samples: Vec<SocSample>,
    /// Set when an inferred SOC went negative and was clamped to zero.
    pub inconsistent: bool,
    pub clamp_count: usize,
    /// Largest gap between the inferred SOC and the logged `soc_start` at a
    /// charge start.
    pub max_snap_gap: f64,
}

impl SocTrace {
    /// SOC after every event at or before `abs_minute` whose kind sorts at or
    /// before `upto`.
    pub fn soc_at(&self, abs_minute: i64, upto: SampleKind) -> f64 {
        let n = self
            .samples
            .partition_point(|s| s.key() <= (abs_minute, upto));
        match n {
            0 => self.samples.first().map(|s| s.soc).unwrap_or(1.0),
            n => self.samples[n - 1].soc,
        }
    }

    /// SOC just after the journey ending at `abs_minute` has been accounted.
    pub fn soc_after_journey(&self, abs_minute: i64) -> f64 {
        self.soc_at(abs_minute, SampleKind::JourneyEnd)
    }

    /// SOC seen by a charge decision at a slot boundary: completed charges and
    /// arrivals at that instant count, a charge starting at it does not.
    pub fn soc_at_boundary(&self, abs_minute: i64) -> f64 {
        self.soc_at(abs_minute, SampleKind::JourneyStart)
    }
}

/// Reconstructs one vehicle's SOC history from its journeys (each carrying
/// `energy_used`) and its charge log, starting from `initial_soc`.
///
/// Journeys lower SOC by `energy_used / battery_kwh` at their end; charge
/// boundaries snap SOC to the logged values.
pub fn infer_soc_trace(
    vehicle_id: &str,
    days: &[&VehicleDay],
    charges: &[&ChargeEvent],
    battery_kwh: f64,
    initial_soc: f64,
) -> Result<SocTrace> {
    if !(battery_kwh > 0.0) {
        return Err(Error::config("battery_kwh must be positive"));
    }
    if !(0.0..=1.0).contains(&initial_soc) {
        return Err(Error::config("initial_soc must lie in [0, 1]"));
    }

    enum Ev {
        Start,
        End(f64),
        Snap(f64),
    }
    let mut events: Vec<(SocSample, Ev)> = Vec::new();
    let mut push = |day_index, minute, kind, ev| {
        events.push((
            SocSample {
                day_index,
                minute,
                kind,
                soc: 0.0,
            },
            ev,
        ))
    };
    for day in days {
        for j in &day.journeys {
            let energy = j.energy_used.ok_or_else(|| {
                Error::data(format!(
                    "journey of `{}` on day {} at minute {} has no energy_kwh",
                    j.vehicle_id, j.day_index, j.start_minute
                ))
            })?;
            push(j.day_index, j.start_minute, SampleKind::JourneyStart, Ev::Start);
            push(j.day_index, j.end_minute, SampleKind::JourneyEnd, Ev::End(energy));
        }
    }
    for c in charges {
        push(c.day_index, c.start_minute, SampleKind::ChargeStart, Ev::Snap(c.soc_start));
        push(c.day_index, c.end_minute, SampleKind::ChargeEnd, Ev::Snap(c.soc_end));
    }
    events.sort_by(|a, b| a.0.key().cmp(&b.0.key()));

    let origin = days
        .iter()
        .map(|d| (d.day_index, 0))
        .chain(events.first().map(|e| (e.0.day_index, e.0.minute)))
        .min_by_key(|&(d, m)| time::absolute(d, m));

    let mut trace = SocTrace {
        vehicle_id: vehicle_id.to_string(),
        samples: Vec::with_capacity(events.len() + 1),
        inconsistent: false,
        clamp_count: 0,
        max_snap_gap: 0.0,
    };
    if let Some((day_index, minute)) = origin {
        trace.samples.push(SocSample {
            day_index,
            minute,
            kind: SampleKind::Initial,
            soc: initial_soc,
        });
    }

    let mut soc = initial_soc;
    for (mut sample, ev) in events {
        match ev {
            Ev::Start => {}
            Ev::End(energy) => {
                soc -= energy / battery_kwh;
                if soc < 0.0 {
                    soc = 0.0;
                    trace.inconsistent = true;
                    trace.clamp_count += 1;
                }
            }
            Ev::Snap(logged) => {
                if sample.kind == SampleKind::ChargeStart {
                    trace.max_snap_gap = trace.max_snap_gap.max((soc - logged).abs());
                }
                soc = logged;
            }
        }
        sample.soc = soc;
        trace.samples.push(sample);
    }
    Ok(trace)
}

/// Runs [`infer_soc_trace`] for every vehicle present in `days` or `charges`,
/// in vehicle-id order.
pub fn infer_soc_traces(
    days: &[VehicleDay],
    charges: &[ChargeEvent],
    battery_kwh: f64,
    initial_soc: f64,
) -> Result<Vec<SocTrace>> {
    let mut by_vehicle: BTreeMap<&str, (Vec<&VehicleDay>, Vec<&ChargeEvent>)> = BTreeMap::new();
    for d in days {
        by_vehicle.entry(&d.vehicle_id).or_default().0.push(d);
    }
    for c in charges {
        by_vehicle.entry(&c.vehicle_id).or_default().1.push(c);
    }
    by_vehicle
        .into_iter()
        .map(|(v, (ds, cs))| infer_soc_trace(v, &ds, &cs, battery_kwh, initial_soc))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Journey;

    fn day_with(energy: f64) -> VehicleDay {
        VehicleDay::new(
            "v",
            0,
            vec![Journey {
                vehicle_id: "v".into(),
                day_index: 0,
                start_minute: 480,
                end_minute: 540,
                distance: 20.0,
                energy_used: Some(energy),
            }],
        )
    }

    #[test]
    fn journey_lowers_soc() {
        let d = day_with(6.0);
        let t = infer_soc_trace("v", &[&d], &[], 24.0, 1.0).unwrap();
        assert_eq!(t.soc_after_journey(540), 0.75);
        assert_eq!(t.soc_at_boundary(539), 1.0);
        assert!(!t.inconsistent);
    }

    #[test]
    fn idle_vehicle_has_constant_trace() {
        let d = VehicleDay::new("v", 0, vec![]);
        let t = infer_soc_trace("v", &[&d], &[], 24.0, 1.0).unwrap();
        assert_eq!(t.samples.len(), 1);
        assert_eq!(t.soc_at_boundary(700), 1.0);
    }

    #[test]
    fn consistent_logs_leave_no_gap() {
        let d = day_with(6.0);
        let c = ChargeEvent {
            vehicle_id: "v".into(),
            day_index: 0,
            start_minute: 540,
            end_minute: 1000,
            soc_start: 0.75,
            soc_end: 1.0,
        };
        let t = infer_soc_trace("v", &[&d], &[&c], 24.0, 1.0).unwrap();
        assert_eq!(t.max_snap_gap, 0.0);
        assert!(!t.inconsistent);
        let kinds: Vec<_> = t.samples.iter().map(|s| s.kind).collect();
        assert_eq!(
            kinds,
            vec![
                SampleKind::Initial,
                SampleKind::JourneyStart,
                SampleKind::JourneyEnd,
                SampleKind::ChargeStart,
                SampleKind::ChargeEnd
            ]
        );
        assert_eq!(t.soc_at_boundary(1000), 1.0);
        assert_eq!(t.soc_at_boundary(990), 0.75);
    }

    #[test]
    fn overdraw_clamps_and_flags() {
        let d = day_with(30.0);
        let t = infer_soc_trace("v", &[&d], &[], 24.0, 1.0).unwrap();
        assert_eq!(t.soc_after_journey(540), 0.0);
        assert!(t.inconsistent);
        assert_eq!(t.clamp_count, 1);
    }

    #[test]
    fn missing_energy_is_a_data_error() {
        let mut d = day_with(1.0);
        d.journeys[0].energy_used = None;
        assert!(infer_soc_trace("v", &[&d], &[], 24.0, 1.0).is_err());
    }
}
