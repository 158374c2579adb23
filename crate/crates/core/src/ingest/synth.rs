//! Seeded synthetic fleets standing in for survey and trial data.
//!
//! Each vehicle-day independently picks an archetype (or stays unused); every
//! journey template of the archetype then yields one journey with normally
//! distributed start, duration and distance. Charges come from running the
//! simulator over the generated days with a known [`ChargingPolicy`], so the
//! policy can be recovered from the output.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{ChargeEvent, DayType, Journey, VehicleDay};
use crate::clustering::Cluster;
use crate::error::{Error, Result};
use crate::seed;
use crate::simulator::{simulate_sequence, ChargeDecider, SimConfig, SimModel};
use crate::time::MINUTES_PER_DAY;

pub const LABELS_HEADER: [&str; 3] = ["vehicle_id", "day_index", "archetype"];

const WEIGHT_TOL: f64 = 1e-9;
const MIN_DURATION: f64 = 5.0;
const MIN_DISTANCE: f64 = 0.5;
const MIN_GAP: u32 = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JourneyTemplate {
    pub start_minute: f64,
    #[serde(default)]
    pub start_sd: f64,
    /// Minutes.
    pub duration: f64,
    #[serde(default)]
    pub duration_sd: f64,
    /// Miles.
    pub distance: f64,
    #[serde(default)]
    pub distance_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchetypeSpec {
    pub name: String,
    pub weight: f64,
    #[serde(rename = "journey")]
    pub journeys: Vec<JourneyTemplate>,
}

/// Ground-truth charging behaviour, indexed by SOC state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChargingPolicy {
    pub after_journey: [f64; 6],
    pub independent: [f64; 6],
    /// Slots in which independent charging can start.
    #[serde(default)]
    pub independent_slots: Vec<usize>,
    /// Restrict after-journey charging to the last journey of the day.
    #[serde(default)]
    pub after_final_only: bool,
}

impl ChargingPolicy {
    /// The "charge after the last journey" rule.
    pub fn naive() -> Self {
        Self {
            after_journey: [1.0; 6],
            independent: [0.0; 6],
            independent_slots: Vec::new(),
            after_final_only: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self
            .after_journey
            .iter()
            .chain(&self.independent)
            .any(|p| !(0.0..=1.0).contains(p))
        {
            return Err(Error::config("policy probabilities must lie in [0, 1]"));
        }
        if self.independent_slots.iter().any(|&t| t >= 48) {
            return Err(Error::config("independent_slots must lie in 0..48"));
        }
        Ok(())
    }

    /// True after-journey probability for a cell.
    pub fn after_journey_probability(&self, soc_state: usize) -> f64 {
        self.after_journey[soc_state]
    }

    /// True independent probability for a cell.
    pub fn independent_probability(&self, slot: usize, soc_state: usize) -> f64 {
        if self.independent_slots.contains(&slot) {
            self.independent[soc_state]
        } else {
            0.0
        }
    }
}

impl ChargeDecider for ChargingPolicy {
    fn after_journey(&self, _: DayType, _: usize, _: Option<Cluster>, soc_state: usize, is_final: bool) -> f64 {
        if self.after_final_only && !is_final {
            0.0
        } else {
            self.after_journey[soc_state]
        }
    }

    fn independent(&self, _: DayType, slot: usize, soc_state: usize) -> f64 {
        self.independent_probability(slot, soc_state)
    }
}

/// Replacement values applied when generating the trial fleet.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialOverrides {
    pub n_vehicles: Option<usize>,
    pub n_days: Option<u32>,
    /// Weekday archetype weights, in archetype order.
    pub weights: Option<Vec<f64>>,
    pub weekend_weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub n_vehicles: usize,
    pub n_days: u32,
    #[serde(default)]
    pub start_day: u32,
    #[serde(default)]
    pub unused_prob: f64,
    #[serde(default = "defaults::kwh_per_mile")]
    pub kwh_per_mile: f64,
    #[serde(default = "defaults::battery_kwh")]
    pub battery_kwh: f64,
    #[serde(default = "defaults::charger_kw")]
    pub charger_kw: f64,
    #[serde(default = "defaults::efficiency")]
    pub efficiency: f64,
    #[serde(default = "defaults::id_prefix")]
    pub id_prefix: String,
    #[serde(rename = "archetype")]
    pub archetypes: Vec<ArchetypeSpec>,
    /// Used on weekends; the weekday archetypes apply when empty.
    #[serde(default, rename = "weekend_archetype")]
    pub weekend_archetypes: Vec<ArchetypeSpec>,
    pub policy: ChargingPolicy,
    #[serde(default)]
    pub trial: TrialOverrides,
}

mod defaults {
    pub fn kwh_per_mile() -> f64 {
        0.3
    }
    pub fn battery_kwh() -> f64 {
        24.0
    }
    pub fn charger_kw() -> f64 {
        3.5
    }
    pub fn efficiency() -> f64 {
        0.9
    }
    pub fn id_prefix() -> String {
        "v".into()
    }
}

/// Hidden archetype of one generated vehicle-day; `U` marks an unused day.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub vehicle_id: String,
    pub day_index: u32,
    pub archetype: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticFleet {
    pub days: Vec<VehicleDay>,
    pub charges: Vec<ChargeEvent>,
    pub labels: Vec<LabelRecord>,
}

fn check_weights(archetypes: &[ArchetypeSpec], what: &str) -> Result<()> {
    if archetypes.iter().any(|a| !(a.weight >= 0.0)) {
        return Err(Error::config(format!("{what} weights must be non-negative")));
    }
    let sum: f64 = archetypes.iter().map(|a| a.weight).sum();
    if (sum - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::config(format!("{what} weights sum to {sum}, not 1")));
    }
    Ok(())
}

fn reweight(archetypes: &mut [ArchetypeSpec], weights: &[f64], what: &str) -> Result<()> {
    if weights.len() != archetypes.len() {
        return Err(Error::config(format!(
            "{what}: {} weights given for {} archetypes",
            weights.len(),
            archetypes.len()
        )));
    }
    for (a, &w) in archetypes.iter_mut().zip(weights) {
        a.weight = w;
    }
    Ok(())
}

impl SynthSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::config(format!("synthesis spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.archetypes.is_empty() {
            return Err(Error::config("at least one archetype is required"));
        }
        check_weights(&self.archetypes, "archetype")?;
        if !self.weekend_archetypes.is_empty() {
            check_weights(&self.weekend_archetypes, "weekend archetype")?;
        }
        for a in self.archetypes.iter().chain(&self.weekend_archetypes) {
            if a.journeys.is_empty() {
                return Err(Error::config(format!("archetype `{}` has no journeys", a.name)));
            }
            if a.name == "U" {
                return Err(Error::config("archetype name `U` is reserved for unused days"));
            }
            for j in &a.journeys {
                let sds = [j.start_sd, j.duration_sd, j.distance_sd];
                if sds.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
                    return Err(Error::config(format!("archetype `{}`: negative spread", a.name)));
                }
                if !(j.duration > 0.0 && j.distance > 0.0) {
                    return Err(Error::config(format!(
                        "archetype `{}`: duration and distance must be positive",
                        a.name
                    )));
                }
            }
        }
        if !(0.0..=1.0).contains(&self.unused_prob) {
            return Err(Error::config("unused_prob must lie in [0, 1]"));
        }
        if self.n_vehicles == 0 || self.n_days == 0 {
            return Err(Error::config("n_vehicles and n_days must be positive"));
        }
        self.policy.validate()?;
        self.sim_config().validate()
    }

    /// Simulator settings matching the spec's vehicles.
    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            charger_kw: self.charger_kw,
            efficiency: self.efficiency,
            battery_kwh: self.battery_kwh,
            kwh_per_mile: self.kwh_per_mile,
            initial_soc: 1.0,
            ..SimConfig::default()
        }
    }

    /// The spec with the `[trial]` overrides applied.
    pub fn trial_spec(&self) -> Result<Self> {
        let mut s = self.clone();
        if let Some(n) = self.trial.n_vehicles {
            s.n_vehicles = n;
        }
        if let Some(n) = self.trial.n_days {
            s.n_days = n;
        }
        if let Some(w) = &self.trial.weights {
            reweight(&mut s.archetypes, w, "trial weights")?;
        }
        if let Some(w) = &self.trial.weekend_weights {
            if s.weekend_archetypes.is_empty() {
                return Err(Error::config("trial weekend_weights given without weekend archetypes"));
            }
            reweight(&mut s.weekend_archetypes, w, "trial weekend_weights")?;
        }
        s.trial = TrialOverrides::default();
        s.validate()?;
        Ok(s)
    }

    /// Three weekday modes (commuting, morning, evening) and two weekend
    /// modes. Independent charging is timer-like, spread over 00:00 to 04:00.
    pub fn example() -> Self {
        let j = |start: f64, duration: f64, distance: f64| JourneyTemplate {
            start_minute: start,
            start_sd: 15.0,
            duration,
            duration_sd: 5.0,
            distance,
            distance_sd: 2.0,
        };
        let arch = |name: &str, weight: f64, journeys| ArchetypeSpec {
            name: name.into(),
            weight,
            journeys,
        };
        Self {
            n_vehicles: 60,
            n_days: 14,
            start_day: 0,
            unused_prob: 0.12,
            kwh_per_mile: 0.3,
            battery_kwh: 24.0,
            charger_kw: 3.5,
            efficiency: 0.9,
            id_prefix: "v".into(),
            archetypes: vec![
                arch("commuter", 0.4, vec![j(470.0, 40.0, 14.0), j(1050.0, 45.0, 14.0)]),
                arch("morning", 0.3, vec![j(570.0, 35.0, 9.0), j(720.0, 35.0, 9.0)]),
                arch("evening", 0.3, vec![j(1140.0, 35.0, 10.0), j(1290.0, 35.0, 10.0)]),
            ],
            weekend_archetypes: vec![
                arch("daytrip", 0.5, vec![j(630.0, 60.0, 25.0), j(960.0, 60.0, 25.0)]),
                arch("errands", 0.5, vec![j(810.0, 25.0, 6.0), j(900.0, 25.0, 6.0)]),
            ],
            policy: ChargingPolicy {
                after_journey: [0.9, 0.75, 0.55, 0.4, 0.25, 0.1],
                independent: [0.35, 0.3, 0.25, 0.2, 0.15, 0.0],
                independent_slots: (0..8).collect(),
                after_final_only: false,
            },
            trial: TrialOverrides::default(),
        }
    }
}

fn pick<'a, R: Rng>(archetypes: &'a [ArchetypeSpec], rng: &mut R) -> &'a ArchetypeSpec {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for a in archetypes {
        acc += a.weight;
        if u < acc {
            return a;
        }
    }
    archetypes.iter().rev().find(|a| a.weight > 0.0).unwrap_or(&archetypes[0])
}

fn normal<R: Rng>(mean: f64, sd: f64, rng: &mut R) -> f64 {
    Normal::new(mean, sd).expect("validated spread").sample(rng)
}

fn generate_journeys<R: Rng>(vehicle_id: &str, day_index: u32, a: &ArchetypeSpec, rng: &mut R) -> Vec<Journey> {
    let mut out: Vec<Journey> = Vec::with_capacity(a.journeys.len());
    for t in &a.journeys {
        let start = normal(t.start_minute, t.start_sd, rng).round().clamp(0.0, 1439.0) as u32;
        let duration = normal(t.duration, t.duration_sd, rng).round().max(MIN_DURATION) as u32;
        let distance = (normal(t.distance, t.distance_sd, rng).max(MIN_DISTANCE) * 100.0).round() / 100.0;
        let start = match out.last() {
            Some(prev) => start.max(prev.end_minute + MIN_GAP),
            None => start,
        };
        if start >= MINUTES_PER_DAY - 1 {
            break;
        }
        out.push(Journey {
            vehicle_id: vehicle_id.to_string(),
            day_index,
            start_minute: start,
            end_minute: (start + duration).min(MINUTES_PER_DAY - 1),
            distance,
            energy_used: None,
        });
    }
    out
}

/// Generates a fleet: `n_vehicles` vehicles observed for `n_days`
/// consecutive days from `start_day`, their charge logs under the spec's
/// policy, and the hidden archetype labels.
pub fn synthesize_fleet(spec: &SynthSpec, seed_value: u64) -> Result<SyntheticFleet> {
    spec.validate()?;
    let cfg = spec.sim_config();
    let width = spec.n_vehicles.saturating_sub(1).to_string().len().max(3);
    let mut days = Vec::with_capacity(spec.n_vehicles * spec.n_days as usize);
    let mut labels = Vec::with_capacity(days.capacity());
    let mut charges = Vec::new();
    let policy = SimModel::custom(&spec.policy, None);

    for v in 0..spec.n_vehicles {
        let id = format!("{}{:0width$}", spec.id_prefix, v);
        let first = days.len();
        for offset in 0..spec.n_days {
            let day_index = spec.start_day + offset;
            let mut rng = seed::stream(seed_value, "synth-day", &[v as u64, day_index as u64]);
            let weekend = DayType::from_day_index(day_index) == DayType::Weekend;
            let pool = if weekend && !spec.weekend_archetypes.is_empty() {
                &spec.weekend_archetypes
            } else {
                &spec.archetypes
            };
            let (journeys, label) = if rng.random::<f64>() < spec.unused_prob {
                (Vec::new(), "U".to_string())
            } else {
                let a = pick(pool, &mut rng);
                let mut js = generate_journeys(&id, day_index, a, &mut rng);
                for j in &mut js {
                    j.energy_used = Some(j.distance * spec.kwh_per_mile);
                }
                (js, a.name.clone())
            };
            labels.push(LabelRecord {
                vehicle_id: id.clone(),
                day_index,
                archetype: label,
            });
            days.push(VehicleDay::new(id.clone(), day_index, journeys));
        }
        let seq: Vec<&VehicleDay> = days[first..].iter().collect();
        let mut rng = seed::stream(seed_value, "synth-charge", &[v as u64]);
        charges.extend(simulate_sequence(&seq, &policy, &cfg, &mut rng).events);
    }
    Ok(SyntheticFleet { days, charges, labels })
}

pub fn write_labels<W: Write>(out: W, labels: &[LabelRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LABELS_HEADER)?;
    for l in labels {
        w.write_record([l.vehicle_id.as_str(), &l.day_index.to_string(), l.archetype.as_str()])?;
    }
    w.flush()?;
    Ok(())
}
