use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ChargeDecider, SimConfig};
use crate::charge_model::ChargeKind;
use crate::charge_model::SOC_STATES;
use crate::clustering::Cluster;
use crate::ingest::{ChargeEvent, VehicleDay};
use crate::time::{self, MINUTES_PER_DAY, SLOTS_PER_DAY, SLOT_HOURS, SLOT_MINUTES};

fn soc_state(soc: f64) -> usize {
    ((soc * SOC_STATES as f64).floor().max(0.0) as usize).min(SOC_STATES - 1)
}

/// Draws against `p`. Certain outcomes consume no randomness.
fn draw<R: Rng + ?Sized>(p: f64, rng: &mut R) -> bool {
    if p <= 0.0 {
        false
    } else if p >= 1.0 {
        true
    } else {
        rng.random::<f64>() < p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveCharge {
    pub day_index: u32,
    /// Position of the starting day in the simulated sequence.
    pub start_pos: u32,
    pub start_minute: u32,
    pub soc_start: f64,
}

/// State carried from one simulated day to the next.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleSimState {
    pub soc: f64,
    pub charging: Option<ActiveCharge>,
    /// Set once a journey needed more energy than the battery held.
    pub inconsistent: bool,
    pub clamp_count: usize,
    pub days_simulated: u32,
}

impl VehicleSimState {
    pub fn new(initial_soc: f64) -> Self {
        Self {
            soc: initial_soc,
            charging: None,
            inconsistent: false,
            clamp_count: 0,
            days_simulated: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChargeStart {
    pub minute: u32,
    pub slot: usize,
    pub kind: ChargeKind,
}

/// Result of simulating one vehicle-day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayOutcome {
    /// Mean grid power per slot, kW.
    #[serde(with = "crate::time::slot_array")]
    pub profile: [f64; SLOTS_PER_DAY],
    /// Every successful charge draw, including ones made at full SOC that
    /// deliver nothing.
    pub starts: Vec<ChargeStart>,
    /// Charges that finished during this day.
    pub completed: Vec<ChargeEvent>,
    pub grid_kwh: f64,
    pub battery_kwh: f64,
}

impl Default for DayOutcome {
    fn default() -> Self {
        Self {
            profile: [0.0; SLOTS_PER_DAY],
            starts: Vec::new(),
            completed: Vec::new(),
            grid_kwh: 0.0,
            battery_kwh: 0.0,
        }
    }
}

struct Day<'a> {
    vehicle_id: &'a str,
    cfg: &'a SimConfig,
    kwh: [f64; SLOTS_PER_DAY],
    out: DayOutcome,
}

impl Day<'_> {
    fn deposit(&mut self, from: f64, to: f64) {
        let kw = self.cfg.charger_kw;
        let first = (from / SLOT_MINUTES as f64).floor() as usize;
        for t in first..SLOTS_PER_DAY {
            let lo = time::slot_start(t) as f64;
            let hi = lo + SLOT_MINUTES as f64;
            if lo >= to {
                break;
            }
            let overlap = hi.min(to) - lo.max(from);
            if overlap > 0.0 {
                self.kwh[t] += kw * overlap / 60.0;
            }
        }
        self.out.grid_kwh += kw * (to - from) / 60.0;
    }

    /// Charges from `from` to `to` (minutes into the day).
    fn advance(&mut self, vs: &mut VehicleSimState, from: f64, to: f64) {
        if vs.charging.is_none() || to <= from {
            return;
        }
        let b = self.cfg.battery_kwh;
        let hours_to_full = (1.0 - vs.soc) * b / self.cfg.battery_rate_kw();
        let full_at = from + hours_to_full * 60.0;
        if full_at <= to {
            self.deposit(from, full_at);
            self.out.battery_kwh += (1.0 - vs.soc) * b;
            vs.soc = 1.0;
            self.finish(vs, full_at);
        } else {
            self.deposit(from, to);
            let gained = self.cfg.battery_rate_kw() * (to - from) / 60.0;
            let next = (vs.soc + gained / b).min(1.0);
            self.out.battery_kwh += (next - vs.soc) * b;
            vs.soc = next;
        }
    }

    fn finish(&mut self, vs: &mut VehicleSimState, end: f64) {
        if let Some(ch) = vs.charging.take() {
            let end_rel = (vs.days_simulated - ch.start_pos) as f64 * MINUTES_PER_DAY as f64 + end;
            if end_rel > ch.start_minute as f64 {
                self.out
                    .completed
                    .push(log_event(self.vehicle_id, &ch, end_rel.ceil() as u32, vs.soc));
            }
        }
    }

    fn start(&mut self, vs: &mut VehicleSimState, day: &VehicleDay, minute: u32, kind: ChargeKind) {
        self.out.starts.push(ChargeStart {
            minute,
            slot: time::slot_of(minute),
            kind,
        });
        if vs.soc < 1.0 {
            vs.charging = Some(ActiveCharge {
                day_index: day.day_index,
                start_pos: vs.days_simulated,
                start_minute: minute,
                soc_start: vs.soc,
            });
        }
    }
}

fn log_event(vehicle_id: &str, ch: &ActiveCharge, end_minute: u32, soc_end: f64) -> ChargeEvent {
    let (mut day_index, mut start_minute, mut end_minute) = (ch.day_index, ch.start_minute, end_minute);
    if start_minute >= MINUTES_PER_DAY {
        day_index += 1;
        start_minute -= MINUTES_PER_DAY;
        end_minute -= MINUTES_PER_DAY;
    }
    ChargeEvent {
        vehicle_id: vehicle_id.to_string(),
        day_index,
        start_minute,
        end_minute,
        soc_start: ch.soc_start,
        soc_end,
    }
}

/// Simulates one vehicle-day, updating `vs` in place.
///
/// Each journey end lowers SOC by the journey's energy and then draws an
/// after-journey charge; at each slot boundary where the vehicle is parked,
/// not charging, and no journey ends within the slot, an independent charge
/// is drawn. A charge runs at `charger_kw` from the grid until the battery is
/// full or the vehicle next departs, and a charge still running at midnight
/// carries into the next call.
pub fn simulate_vehicle_day<R: Rng + ?Sized>(
    day: &VehicleDay,
    cluster: Option<Cluster>,
    vs: &mut VehicleSimState,
    decider: &dyn ChargeDecider,
    cfg: &SimConfig,
    rng: &mut R,
) -> DayOutcome {
    const END: u8 = 0;
    const START: u8 = 1;
    const BOUNDARY: u8 = 2;

    let mut events: Vec<(u32, u8, usize)> = Vec::with_capacity(SLOTS_PER_DAY + 2 * day.journeys.len());
    for (i, j) in day.journeys.iter().enumerate() {
        events.push((j.end_minute, END, i));
        events.push((j.start_minute, START, i));
    }
    events.extend((0..SLOTS_PER_DAY).map(|t| (time::slot_start(t), BOUNDARY, t)));
    events.sort_unstable();

    let ends = day.journey_end_slots();
    let last = day.journeys.len().wrapping_sub(1);
    let mut sim = Day {
        vehicle_id: &day.vehicle_id,
        cfg,
        kwh: [0.0; SLOTS_PER_DAY],
        out: DayOutcome::default(),
    };
    let mut cursor = 0.0;
    for (minute, kind, idx) in events {
        sim.advance(vs, cursor, minute as f64);
        cursor = cursor.max(minute as f64);
        match kind {
            END => {
                let j = &day.journeys[idx];
                vs.soc -= j.energy_kwh(cfg.kwh_per_mile) / cfg.battery_kwh;
                if vs.soc < 0.0 {
                    vs.soc = 0.0;
                    vs.inconsistent = true;
                    vs.clamp_count += 1;
                }
                if vs.charging.is_none() {
                    let p = decider.after_journey(
                        day.day_type,
                        time::slot_of(minute),
                        cluster,
                        soc_state(vs.soc),
                        idx == last,
                    );
                    if draw(p, rng) {
                        sim.start(vs, day, minute, ChargeKind::AfterJourney);
                    }
                }
            }
            START => sim.finish(vs, minute as f64),
            _ => {
                if ends[idx] || vs.charging.is_some() || day.is_traveling_at(minute) {
                    continue;
                }
                let p = decider.independent(day.day_type, idx, soc_state(vs.soc));
                if draw(p, rng) {
                    sim.start(vs, day, minute, ChargeKind::Independent);
                }
            }
        }
    }
    sim.advance(vs, cursor, MINUTES_PER_DAY as f64);
    vs.days_simulated += 1;

    let mut out = sim.out;
    for (p, e) in out.profile.iter_mut().zip(sim.kwh) {
        *p = e / SLOT_HOURS;
    }
    out
}

/// Closes a charge left open at the end of a simulated sequence, as if it
/// had run on uninterrupted until the battery was full.
pub fn finalize_open_charge(vehicle_id: &str, vs: &mut VehicleSimState, cfg: &SimConfig) -> Option<ChargeEvent> {
    let ch = vs.charging.take()?;
    let minutes = (1.0 - vs.soc) * cfg.battery_kwh / cfg.battery_rate_kw() * 60.0;
    let end_rel = (vs.days_simulated - ch.start_pos) as f64 * MINUTES_PER_DAY as f64 + minutes;
    vs.soc = 1.0;
    (end_rel > ch.start_minute as f64).then(|| log_event(vehicle_id, &ch, end_rel.ceil() as u32, 1.0))
}

/// Always charges after the last journey of the day and never otherwise.
#[derive(Debug, Clone, Copy, Default)]
pub struct NaiveDecider;

impl ChargeDecider for NaiveDecider {
    fn after_journey(&self, _: crate::ingest::DayType, _: usize, _: Option<Cluster>, _: usize, is_final: bool) -> f64 {
        if is_final {
            1.0
        } else {
            0.0
        }
    }

    fn independent(&self, _: crate::ingest::DayType, _: usize, _: usize) -> f64 {
        0.0
    }
}

/// The baseline model: charging starts at the end of the final journey and
/// runs until the battery is full or the vehicle is next used.
pub fn simulate_naive(day: &VehicleDay, vs: &mut VehicleSimState, cfg: &SimConfig) -> DayOutcome {
    // the naive decider never draws, so any generator will do
    let mut rng = crate::seed::stream(0, "naive", &[]);
    simulate_vehicle_day(day, None, vs, &NaiveDecider, cfg, &mut rng)
}
