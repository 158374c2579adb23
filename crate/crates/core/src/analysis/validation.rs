use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::pdf::{mape_raw, start_time_pdf};
use crate::charge_model::{classify_charges, fit_posteriors, ChargeLabel, Classification, DEFAULT_SIGMA, DEFAULT_WINDOW_MINUTES};
use crate::clustering::ClusterSet;
use crate::error::{Error, Result};
use crate::ingest::{group_by_vehicle, infer_soc_traces, ChargeEvent, DayType, VehicleDay};
use crate::par;
use crate::seed;
use crate::simulator::{simulate_sequence, SequenceOutcome, SimConfig, SimModel};
use crate::time::{self, SLOTS_PER_DAY, SLOT_HOURS, SLOT_MINUTES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidationConfig {
    pub sim: SimConfig,
    pub sigma: f64,
    pub window_minutes: u32,
    /// Stochastic replays of each held-out vehicle.
    pub runs_per_vehicle: usize,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            sim: SimConfig {
                warmup_days: 0,
                ..SimConfig::default()
            },
            sigma: DEFAULT_SIGMA,
            window_minutes: DEFAULT_WINDOW_MINUTES,
            runs_per_vehicle: 20,
        }
    }
}

/// Start-time and power-profile errors of both models against observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapeSet {
    pub observed_charges: usize,
    pub start_mape_model: f64,
    pub start_mape_naive: f64,
    pub power_mape_model: f64,
    pub power_mape_naive: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleValidation {
    pub vehicle_id: String,
    pub observed_charges: usize,
    pub start_mape_model: Option<f64>,
    pub start_mape_naive: Option<f64>,
    /// Share of this vehicle's charges matched in timing by some replay.
    pub timing_hit_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub vehicles: usize,
    pub runs_per_vehicle: usize,
    pub weekday: Option<MapeSet>,
    pub all_days: MapeSet,
    /// Share of observed charges for which some replay started a charge in
    /// the same or an adjacent slot of the same day.
    pub timing_hit_rate: f64,
    pub per_vehicle: Vec<VehicleValidation>,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Accumulated observations for one day-type filter.
#[derive(Clone)]
struct Tally {
    obs_starts: [f64; SLOTS_PER_DAY],
    obs_power: [f64; SLOTS_PER_DAY],
    model_starts: [f64; SLOTS_PER_DAY],
    model_power: [f64; SLOTS_PER_DAY],
    naive_starts: [f64; SLOTS_PER_DAY],
    naive_power: [f64; SLOTS_PER_DAY],
    n_obs: usize,
}

impl Tally {
    fn new() -> Self {
        Self {
            obs_starts: [0.0; SLOTS_PER_DAY],
            obs_power: [0.0; SLOTS_PER_DAY],
            model_starts: [0.0; SLOTS_PER_DAY],
            model_power: [0.0; SLOTS_PER_DAY],
            naive_starts: [0.0; SLOTS_PER_DAY],
            naive_power: [0.0; SLOTS_PER_DAY],
            n_obs: 0,
        }
    }

    fn add(&mut self, o: &Tally) {
        for (a, b) in [
            (&mut self.obs_starts, &o.obs_starts),
            (&mut self.obs_power, &o.obs_power),
            (&mut self.model_starts, &o.model_starts),
            (&mut self.model_power, &o.model_power),
            (&mut self.naive_starts, &o.naive_starts),
            (&mut self.naive_power, &o.naive_power),
        ] {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        self.n_obs += o.n_obs;
    }

    fn mapes(&self) -> Result<MapeSet> {
        let norm = |v: &[f64; SLOTS_PER_DAY]| -> Vec<f64> {
            let s: f64 = v.iter().sum();
            v.iter().map(|x| if s > 0.0 { x / s } else { 0.0 }).collect()
        };
        let obs_s = norm(&self.obs_starts);
        let obs_p = norm(&self.obs_power);
        Ok(MapeSet {
            observed_charges: self.n_obs,
            start_mape_model: mape_raw(&norm(&self.model_starts), &obs_s)?,
            start_mape_naive: mape_raw(&norm(&self.naive_starts), &obs_s)?,
            power_mape_model: mape_raw(&norm(&self.model_power), &obs_p)?,
            power_mape_naive: mape_raw(&norm(&self.naive_power), &obs_p)?,
        })
    }
}

/// Grid power of a logged charge spread over absolute slots: the charger
/// runs at full power until the logged SOC gain is delivered.
fn observed_power(c: &ChargeEvent, cfg: &SimConfig, mut add: impl FnMut(i64, f64)) {
    let grid_kwh = (c.soc_end - c.soc_start) * cfg.battery_kwh / cfg.efficiency;
    let minutes = (grid_kwh / cfg.charger_kw * 60.0).min((c.end_minute - c.start_minute) as f64);
    let from = c.abs_start() as f64;
    let to = from + minutes;
    let slot_len = SLOT_MINUTES as f64;
    let mut s = (from / slot_len).floor() as i64;
    while (s as f64) * slot_len < to {
        let lo = s as f64 * slot_len;
        let overlap = (lo + slot_len).min(to) - lo.max(from);
        if overlap > 0.0 {
            add(s, cfg.charger_kw * overlap / 60.0 / SLOT_HOURS);
        }
        s += 1;
    }
}

fn day_type_of_abs_slot(abs_slot: i64) -> DayType {
    DayType::from_day_index(abs_slot.div_euclid(SLOTS_PER_DAY as i64) as u32)
}

fn abs_slot(day_index: u32, minute: u32) -> i64 {
    time::absolute(day_index, minute).div_euclid(SLOT_MINUTES as i64)
}

struct HeldOut {
    tallies: [Tally; 2],
    vehicle: VehicleValidation,
    hits: usize,
    note: Option<String>,
}

/// Leave-one-out validation: each vehicle's charging is predicted from
/// tables fitted on every other vehicle, and compared with what it logged.
pub fn leave_one_out_validate(
    days: &[VehicleDay],
    charges: &[ChargeEvent],
    clusters: &ClusterSet,
    cfg: &ValidationConfig,
) -> Result<ValidationReport> {
    cfg.sim.validate()?;
    if cfg.runs_per_vehicle == 0 {
        return Err(Error::config("runs_per_vehicle must be at least 1"));
    }
    let groups = group_by_vehicle(days);
    if groups.len() < 2 {
        return Err(Error::data("leave-one-out validation needs at least two vehicles"));
    }
    let traces = infer_soc_traces(days, charges, cfg.sim.battery_kwh, cfg.sim.initial_soc)?;
    let classification = classify_charges(days, charges, cfg.window_minutes);

    let held = par::map_range(groups.len(), |gi| -> Result<HeldOut> {
        let (vehicle, vdays) = &groups[gi];
        let own: Vec<&ChargeEvent> = charges.iter().filter(|c| c.vehicle_id == *vehicle).collect();
        let mut out = HeldOut {
            tallies: [Tally::new(), Tally::new()],
            vehicle: VehicleValidation {
                vehicle_id: vehicle.to_string(),
                observed_charges: own.len(),
                start_mape_model: None,
                start_mape_naive: None,
                timing_hit_rate: 0.0,
            },
            hits: 0,
            note: None,
        };
        if own.is_empty() {
            out.note = Some(format!("vehicle `{vehicle}` has no observed charges; skipped"));
            return Ok(out);
        }

        let train_days: Vec<VehicleDay> = days.iter().filter(|d| d.vehicle_id != *vehicle).cloned().collect();
        let mut train_charges = Vec::new();
        let mut labels: Vec<ChargeLabel> = Vec::new();
        for (c, l) in charges.iter().zip(&classification.labels) {
            if c.vehicle_id != *vehicle {
                labels.push(ChargeLabel {
                    charge: train_charges.len(),
                    ..l.clone()
                });
                train_charges.push(c.clone());
            }
        }
        let train_class = Classification {
            labels,
            ..classification.clone()
        };
        let train_traces: Vec<_> = traces.iter().filter(|t| t.vehicle_id != *vehicle).cloned().collect();
        let tables = fit_posteriors(&train_days, &train_charges, &train_class, clusters, &train_traces, cfg.sigma)?;

        let model = SimModel::stochastic(clusters, &tables);
        let naive = SimModel::naive();
        let observed_days: HashSet<u32> = vdays.iter().map(|d| d.day_index).collect();

        // observation
        for c in &own {
            if !observed_days.contains(&c.day_index) {
                continue;
            }
            let tally = &mut out.tallies[DayType::from_day_index(c.day_index).index()];
            tally.obs_starts[time::slot_of(c.start_minute)] += 1.0;
            tally.n_obs += 1;
            observed_power(c, &cfg.sim, |s, kw| {
                let day = s.div_euclid(SLOTS_PER_DAY as i64) as u32;
                if observed_days.contains(&day) {
                    out.tallies[day_type_of_abs_slot(s).index()].obs_power[s.rem_euclid(SLOTS_PER_DAY as i64) as usize] += kw;
                }
            });
        }

        let record = |tallies: &mut [Tally; 2], seq: &SequenceOutcome, weight: f64, naive: bool, starts: &mut HashSet<i64>| {
            for (day, o) in vdays.iter().zip(&seq.days) {
                let t = &mut tallies[day.day_type.index()];
                let (st, pw) = if naive {
                    (&mut t.naive_starts, &mut t.naive_power)
                } else {
                    (&mut t.model_starts, &mut t.model_power)
                };
                for s in &o.starts {
                    st[s.slot] += weight;
                    starts.insert(abs_slot(day.day_index, s.minute));
                }
                for (a, p) in pw.iter_mut().zip(o.profile) {
                    *a += weight * p;
                }
            }
        };

        let weight = 1.0 / cfg.runs_per_vehicle as f64;
        let mut model_starts = HashSet::new();
        for run in 0..cfg.runs_per_vehicle {
            let mut rng = seed::stream(cfg.sim.seed, "loo", &[gi as u64, run as u64]);
            let seq = simulate_sequence(vdays, &model, &cfg.sim, &mut rng);
            record(&mut out.tallies, &seq, weight, false, &mut model_starts);
        }
        let mut rng = seed::stream(cfg.sim.seed, "loo-naive", &[gi as u64]);
        let seq = simulate_sequence(vdays, &naive, &cfg.sim, &mut rng);
        record(&mut out.tallies, &seq, 1.0, true, &mut HashSet::new());

        let mut hits = 0;
        let mut own_slots = Vec::new();
        for c in own.iter().filter(|c| observed_days.contains(&c.day_index)) {
            let s = abs_slot(c.day_index, c.start_minute);
            own_slots.push(time::slot_of(c.start_minute));
            if (s - 1..=s + 1).any(|x| model_starts.contains(&x)) {
                hits += 1;
            }
        }
        out.hits = hits;
        out.vehicle.timing_hit_rate = if own_slots.is_empty() { 0.0 } else { hits as f64 / own_slots.len() as f64 };
        if !own_slots.is_empty() {
            let mut both = out.tallies[0].clone();
            both.add(&out.tallies[1]);
            let obs = start_time_pdf(own_slots)?;
            let norm = |v: &[f64; SLOTS_PER_DAY]| {
                let s: f64 = v.iter().sum();
                v.iter().map(|x| if s > 0.0 { x / s } else { 0.0 }).collect::<Vec<_>>()
            };
            out.vehicle.start_mape_model = mape_raw(&norm(&both.model_starts), obs.values()).ok();
            out.vehicle.start_mape_naive = mape_raw(&norm(&both.naive_starts), obs.values()).ok();
        }
        Ok(out)
    });

    let mut totals = [Tally::new(), Tally::new()];
    let mut per_vehicle = Vec::new();
    let mut notes = Vec::new();
    let mut hits = 0;
    for h in held {
        let h = h?;
        totals[0].add(&h.tallies[0]);
        totals[1].add(&h.tallies[1]);
        hits += h.hits;
        notes.extend(h.note);
        per_vehicle.push(h.vehicle);
    }
    let mut all = totals[0].clone();
    all.add(&totals[1]);
    if all.n_obs == 0 {
        return Err(Error::data("no observed charges fall on observed days"));
    }
    let weekday = if totals[0].n_obs > 0 {
        Some(totals[0].mapes()?)
    } else {
        notes.push("no weekday charges observed".to_string());
        None
    };
    Ok(ValidationReport {
        vehicles: groups.len(),
        runs_per_vehicle: cfg.runs_per_vehicle,
        weekday,
        all_days: all.mapes()?,
        timing_hit_rate: hits as f64 / all.n_obs as f64,
        per_vehicle,
        notes,
    })
}
