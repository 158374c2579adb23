//! Half-hour slot arithmetic shared by every module.

pub const MINUTES_PER_DAY: u32 = 1440;
pub const SLOT_MINUTES: u32 = 30;
pub const SLOTS_PER_DAY: usize = 48;
pub const SLOT_HOURS: f64 = 0.5;

/// Slot containing `minute`. Minute 1440 (the end-of-day boundary) maps to the
/// last slot so that a journey ending exactly at midnight belongs to the day
/// it was driven on.
pub fn slot_of(minute: u32) -> usize {
    ((minute / SLOT_MINUTES) as usize).min(SLOTS_PER_DAY - 1)
}

/// Start minute of slot `t`.
pub fn slot_start(t: usize) -> u32 {
    t as u32 * SLOT_MINUTES
}

/// Absolute minute counted from day 0, minute 0.
pub fn absolute(day_index: u32, minute: u32) -> i64 {
    day_index as i64 * MINUTES_PER_DAY as i64 + minute as i64
}

/// Serde adapter for one value per slot.
pub(crate) mod slot_array {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::SLOTS_PER_DAY;

    pub fn serialize<S: Serializer>(v: &[f64; SLOTS_PER_DAY], s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[f64; SLOTS_PER_DAY], D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        let n = v.len();
        v.try_into().map_err(|_| D::Error::invalid_length(n, &"48 slot values"))
    }
}

/// Serde adapter for a list of per-slot arrays.
pub(crate) mod slot_arrays {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::SLOTS_PER_DAY;

    pub fn serialize<S: Serializer>(v: &[[f64; SLOTS_PER_DAY]], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<&[f64]> = v.iter().map(|r| r.as_slice()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<[f64; SLOTS_PER_DAY]>, D::Error> {
        Vec::<Vec<f64>>::deserialize(d)?
            .into_iter()
            .map(|r| {
                let n = r.len();
                r.try_into().map_err(|_| D::Error::invalid_length(n, &"48 slot values"))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slot_edges() {
        assert_eq!(slot_of(0), 0);
        assert_eq!(slot_of(29), 0);
        assert_eq!(slot_of(30), 1);
        assert_eq!(slot_of(1439), 47);
        assert_eq!(slot_of(1440), 47);
        assert_eq!(slot_start(36), 1080);
    }
}
