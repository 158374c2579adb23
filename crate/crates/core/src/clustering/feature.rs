use crate::ingest::VehicleDay;
use crate::time::{SLOTS_PER_DAY, SLOT_MINUTES};

/// A normalized half-hourly velocity profile: 48 non-negative values summing
/// to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector([f64; SLOTS_PER_DAY]);

impl FeatureVector {
    /// Scales `raw` to unit sum. Returns `None` for an all-zero profile or any
    /// negative or non-finite entry.
    pub fn normalized(raw: [f64; SLOTS_PER_DAY]) -> Option<Self> {
        if raw.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return None;
        }
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            return None;
        }
        Some(Self(raw.map(|v| v / total)))
    }

    pub fn values(&self) -> &[f64; SLOTS_PER_DAY] {
        &self.0
    }
}

/// Outcome of featurizing a day. Unused days carry no profile and are kept
/// out of clustering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DayFeature {
    Used(FeatureVector),
    Unused,
}

impl DayFeature {
    pub fn vector(&self) -> Option<&FeatureVector> {
        match self {
            DayFeature::Used(v) => Some(v),
            DayFeature::Unused => None,
        }
    }
}

/// Average speed (mph) in each half-hour slot, assuming every journey is
/// driven at constant speed. A journey contributes its speed weighted by the
/// fraction of the slot it occupies.
pub fn speed_profile(day: &VehicleDay) -> [f64; SLOTS_PER_DAY] {
    let mut profile = [0.0; SLOTS_PER_DAY];
    for j in &day.journeys {
        let minutes = j.duration_minutes();
        if minutes == 0 {
            continue;
        }
        let mph = j.distance / (minutes as f64 / 60.0);
        let first = (j.start_minute / SLOT_MINUTES) as usize;
        for (slot, cell) in profile.iter_mut().enumerate().skip(first) {
            let lo = slot as u32 * SLOT_MINUTES;
            let hi = lo + SLOT_MINUTES;
            if lo >= j.end_minute {
                break;
            }
            let overlap = hi.min(j.end_minute) - lo.max(j.start_minute);
            *cell += mph * overlap as f64 / SLOT_MINUTES as f64;
        }
    }
    profile
}

pub fn build_feature_vector(day: &VehicleDay) -> DayFeature {
    match FeatureVector::normalized(speed_profile(day)) {
        Some(v) => DayFeature::Used(v),
        None => DayFeature::Unused,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Journey;
    use proptest::prelude::*;

    fn day(trips: &[(u32, u32, f64)]) -> VehicleDay {
        let journeys = trips
            .iter()
            .map(|&(s, e, d)| Journey {
                vehicle_id: "v".into(),
                day_index: 0,
                start_minute: s,
                end_minute: e,
                distance: d,
                energy_used: None,
            })
            .collect();
        VehicleDay::new("v", 0, journeys)
    }

    #[test]
    fn unused_day_has_no_vector() {
        assert_eq!(build_feature_vector(&day(&[])), DayFeature::Unused);
    }

    #[test]
    fn hour_long_trip_fills_two_slots() {
        let f = build_feature_vector(&day(&[(540, 600, 30.0)]));
        let v = f.vector().unwrap().values();
        assert_eq!(v[18], 0.5);
        assert_eq!(v[19], 0.5);
        assert_eq!(v.iter().filter(|x| **x != 0.0).count(), 2);
        assert_eq!(speed_profile(&day(&[(540, 600, 30.0)]))[18], 30.0);
    }

    #[test]
    fn straddling_trip_is_split_by_overlap() {
        let f = build_feature_vector(&day(&[(555, 585, 10.0)]));
        let v = f.vector().unwrap().values();
        assert_eq!(v[18], 0.5);
        assert_eq!(v[19], 0.5);
    }

    proptest! {
        #[test]
        fn normalized_and_scale_invariant(
            trips in prop::collection::vec((0u32..1400, 1u32..40, 0.1f64..50.0), 1..5),
            scale in 0.01f64..100.0,
        ) {
            // lay trips end to end so they never overlap
            let mut t = 0;
            let mut list = Vec::new();
            for (gap, dur, dist) in trips {
                let s = (t + gap % 200).min(1430);
                let e = (s + dur).min(1440);
                if e <= s { break; }
                list.push((s, e, dist));
                t = e;
            }
            prop_assume!(!list.is_empty());
            let a = build_feature_vector(&day(&list));
            let scaled: Vec<_> = list.iter().map(|&(s, e, d)| (s, e, d * scale)).collect();
            let b = build_feature_vector(&day(&scaled));
            let va = a.vector().unwrap().values();
            let vb = b.vector().unwrap().values();
            prop_assert!((va.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(va.iter().all(|x| *x >= 0.0));
            for (x, y) in va.iter().zip(vb) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
