use rand::seq::index;

use super::engine::{finalize_open_charge, simulate_vehicle_day, DayOutcome, NaiveDecider, VehicleSimState};
use super::{ChargeDecider, LoadDistribution, SimConfig};
use crate::charge_model::PosteriorTables;
use crate::clustering::{Cluster, ClusterSet};
use crate::error::{Error, Result};
use crate::ingest::{ChargeEvent, DayType, VehicleDay};
use crate::par;
use crate::seed;
use crate::time::SLOTS_PER_DAY;

/// A charge decider together with the cluster models that label days for it.
#[derive(Clone, Copy)]
pub struct SimModel<'a> {
    pub decider: &'a dyn ChargeDecider,
    pub clusters: Option<&'a ClusterSet>,
}

static NAIVE: NaiveDecider = NaiveDecider;

impl<'a> SimModel<'a> {
    pub fn stochastic(clusters: &'a ClusterSet, tables: &'a PosteriorTables) -> Self {
        Self {
            decider: tables,
            clusters: Some(clusters),
        }
    }

    pub fn naive() -> SimModel<'static> {
        SimModel {
            decider: &NAIVE,
            clusters: None,
        }
    }

    pub fn custom(decider: &'a dyn ChargeDecider, clusters: Option<&'a ClusterSet>) -> Self {
        Self { decider, clusters }
    }

    pub fn cluster_of(&self, day: &VehicleDay) -> Option<Cluster> {
        self.clusters.and_then(|c| c.classify(day).cluster())
    }
}

/// Simulates consecutive days of one vehicle with SOC carried across
/// midnight.
#[derive(Debug, Clone)]
pub struct SequenceOutcome {
    pub days: Vec<DayOutcome>,
    /// Every charge with positive duration, in start order. A charge still
    /// running after the last day is closed as if left to finish.
    pub events: Vec<ChargeEvent>,
    pub state: VehicleSimState,
}

pub fn simulate_sequence<R: rand::Rng + ?Sized>(
    days: &[&VehicleDay],
    model: &SimModel,
    cfg: &SimConfig,
    rng: &mut R,
) -> SequenceOutcome {
    let mut vs = VehicleSimState::new(cfg.initial_soc);
    let mut outcomes = Vec::with_capacity(days.len());
    let mut events = Vec::new();
    for day in days {
        let out = simulate_vehicle_day(day, model.cluster_of(day), &mut vs, model.decider, cfg, rng);
        events.extend(out.completed.iter().cloned());
        outcomes.push(out);
    }
    if let Some(day) = days.last() {
        events.extend(finalize_open_charge(&day.vehicle_id, &mut vs, cfg));
    }
    SequenceOutcome {
        days: outcomes,
        events,
        state: vs,
    }
}

/// The recorded day of one vehicle in one run, after `warmup_days` repeats.
fn simulate_unit(day: &VehicleDay, cluster: Option<Cluster>, model: &SimModel, cfg: &SimConfig, run: usize, vehicle: usize) -> DayOutcome {
    let mut rng = seed::stream(cfg.seed, "mc", &[run as u64, vehicle as u64]);
    let mut vs = VehicleSimState::new(cfg.initial_soc);
    for _ in 0..cfg.warmup_days {
        simulate_vehicle_day(day, cluster, &mut vs, model.decider, cfg, &mut rng);
    }
    simulate_vehicle_day(day, cluster, &mut vs, model.decider, cfg, &mut rng)
}

fn common_day_type<'a>(days: impl IntoIterator<Item = &'a VehicleDay>) -> Option<DayType> {
    let mut it = days.into_iter().map(|d| d.day_type);
    let first = it.next()?;
    it.all(|d| d == first).then_some(first)
}

/// Runs `cfg.n_runs` simulations of a fixed set of vehicle-days (one per
/// vehicle) and aggregates their power per slot.
///
/// Every (run, vehicle) pair owns an RNG stream derived from `cfg.seed`, so
/// the result does not depend on how runs are scheduled.
pub fn monte_carlo(days: &[VehicleDay], model: &SimModel, cfg: &SimConfig) -> Result<LoadDistribution> {
    cfg.validate()?;
    let clusters: Vec<Option<Cluster>> = days.iter().map(|d| model.cluster_of(d)).collect();
    let runs = par::map_range(cfg.n_runs, |run| {
        let mut agg = [0.0; SLOTS_PER_DAY];
        for (v, day) in days.iter().enumerate() {
            let out = simulate_unit(day, clusters[v], model, cfg, run, v);
            for (a, p) in agg.iter_mut().zip(out.profile) {
                *a += p;
            }
        }
        agg
    });
    Ok(LoadDistribution::from_runs(runs, common_day_type(days)))
}

/// Like [`monte_carlo`], but each run draws `cfg.sample_size` vehicle-days
/// from `pool` without replacement, so vehicle use varies between runs too.
pub fn monte_carlo_resampled(pool: &[VehicleDay], model: &SimModel, cfg: &SimConfig) -> Result<LoadDistribution> {
    cfg.validate()?;
    if pool.len() < cfg.sample_size {
        return Err(Error::config(format!(
            "pool of {} vehicle-days is smaller than sample_size {}",
            pool.len(),
            cfg.sample_size
        )));
    }
    let clusters: Vec<Option<Cluster>> = pool.iter().map(|d| model.cluster_of(d)).collect();
    let runs = par::map_range(cfg.n_runs, |run| {
        let mut pick = seed::stream(cfg.seed, "mc-sample", &[run as u64]);
        let mut agg = [0.0; SLOTS_PER_DAY];
        for v in index::sample(&mut pick, pool.len(), cfg.sample_size) {
            let out = simulate_unit(&pool[v], clusters[v], model, cfg, run, v);
            for (a, p) in agg.iter_mut().zip(out.profile) {
                *a += p;
            }
        }
        agg
    });
    Ok(LoadDistribution::from_runs(runs, common_day_type(pool)))
}

/// Draws one fixed sample of `cfg.sample_size` vehicle-days, in pool order.
pub fn choose_fixed_set(pool: &[VehicleDay], cfg: &SimConfig) -> Result<Vec<VehicleDay>> {
    if pool.len() < cfg.sample_size {
        return Err(Error::config(format!(
            "pool of {} vehicle-days is smaller than sample_size {}",
            pool.len(),
            cfg.sample_size
        )));
    }
    let mut rng = seed::stream(cfg.seed, "fixed-set", &[]);
    let mut picked = index::sample(&mut rng, pool.len(), cfg.sample_size).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| pool[i].clone()).collect())
}

/// Dispatches on `cfg.resample_vehicles`.
pub fn run_configured(pool: &[VehicleDay], model: &SimModel, cfg: &SimConfig) -> Result<LoadDistribution> {
    if cfg.resample_vehicles {
        monte_carlo_resampled(pool, model, cfg)
    } else {
        monte_carlo(pool, model, cfg)
    }
}
