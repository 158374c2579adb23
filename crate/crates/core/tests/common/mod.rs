//! Fixtures shared by the integration tests and the acceptance harness.
#![allow(dead_code)]

use evcharge_core::charge_model::{
    classify_charges, fit_posteriors, ChargeKind, Classification, PosteriorTables, DEFAULT_WINDOW_MINUTES,
};
use evcharge_core::clustering::{
    features_for, kmeans_fit, ClusterModel, ClusterSet, FeatureVector, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use evcharge_core::ingest::{
    infer_soc_traces, synthesize_fleet, ChargeEvent, ChargingPolicy, DayType, Journey, SynthSpec, SyntheticFleet,
    VehicleDay,
};
use rand::Rng;

pub const BATTERY_KWH: f64 = 24.0;
pub const WINDOW: i64 = 10;

pub fn journey(v: &str, day: u32, start: u32, end: u32, kwh: f64) -> Journey {
    Journey {
        vehicle_id: v.into(),
        day_index: day,
        start_minute: start,
        end_minute: end,
        distance: kwh / 0.3,
        energy_used: Some(kwh),
    }
}

pub fn charge(v: &str, day: u32, start: u32, end: u32, soc_start: f64, soc_end: f64) -> ChargeEvent {
    ChargeEvent {
        vehicle_id: v.into(),
        day_index: day,
        start_minute: start,
        end_minute: end,
        soc_start,
        soc_end,
    }
}

fn bump(lo: usize, hi: usize) -> Vec<f64> {
    let mut raw = [0.0; 48];
    for v in &mut raw[lo..hi] {
        *v = 1.0;
    }
    FeatureVector::normalized(raw).unwrap().values().to_vec()
}

/// Morning, midday and evening centroids for both day types.
pub fn three_mode_clusters() -> ClusterSet {
    let model = |day_type| ClusterModel {
        day_type,
        k: 3,
        centroids: vec![bump(12, 20), bump(20, 30), bump(32, 48)],
    };
    ClusterSet::new(model(DayType::Weekday), model(DayType::Weekend)).unwrap()
}

/// Five vehicles over Friday, Saturday and Sunday (days 4 to 6). The charges
/// cover the awkward cases: the inclusive window edge, a charge just outside
/// it, a charge cut short by departure, charges running past midnight, two
/// independent charges in one slot, a charge after the observed range, and
/// a journey ending on a slot boundary.
pub fn handcrafted() -> (Vec<VehicleDay>, Vec<ChargeEvent>) {
    let days = vec![
        VehicleDay::new("a", 4, vec![journey("a", 4, 480, 520, 4.0), journey("a", 4, 1050, 1100, 4.5)]),
        VehicleDay::new("a", 5, vec![]),
        VehicleDay::new("a", 6, vec![journey("a", 6, 600, 660, 6.0)]),
        VehicleDay::new(
            "b",
            4,
            vec![
                journey("b", 4, 470, 510, 3.0),
                journey("b", 4, 590, 620, 2.0),
                journey("b", 4, 1200, 1230, 2.0),
            ],
        ),
        VehicleDay::new("b", 5, vec![]),
        VehicleDay::new("b", 6, vec![journey("b", 6, 700, 730, 1.5)]),
        VehicleDay::new("c", 4, vec![journey("c", 4, 1300, 1390, 9.0)]),
        VehicleDay::new("c", 5, vec![]),
        VehicleDay::new("c", 6, vec![]),
        VehicleDay::new(
            "d",
            4,
            vec![
                journey("d", 4, 420, 450, 2.5),
                journey("d", 4, 455, 470, 1.0),
                journey("d", 4, 1000, 1020, 2.0),
            ],
        ),
        VehicleDay::new("d", 5, vec![journey("d", 5, 600, 700, 12.0), journey("d", 5, 800, 900, 7.0)]),
        VehicleDay::new("d", 6, vec![journey("d", 6, 1400, 1435, 3.0)]),
        VehicleDay::new("e", 4, vec![]),
        VehicleDay::new("e", 5, vec![journey("e", 5, 540, 560, 1.0), journey("e", 5, 580, 600, 14.0)]),
        VehicleDay::new("e", 6, vec![journey("e", 6, 30, 60, 2.0)]),
    ];
    let charges = vec![
        charge("a", 4, 1105, 1300, 0.646, 1.0),
        charge("a", 6, 1380, 1500, 0.75, 1.0),
        charge("b", 4, 520, 590, 0.875, 0.95),
        charge("b", 5, 0, 45, 0.8, 0.95),
        charge("b", 6, 741, 800, 0.88, 1.0),
        charge("c", 4, 1395, 1560, 0.625, 1.0),
        charge("c", 6, 0, 10, 0.97, 0.99),
        charge("c", 6, 20, 25, 0.99, 1.0),
        charge("d", 4, 475, 500, 0.85, 0.9),
        charge("d", 5, 905, 1000, 0.1, 0.45),
        charge("d", 7, 3, 60, 0.75, 1.0),
        charge("e", 5, 560, 580, 0.96, 0.99),
        charge("e", 5, 610, 700, 0.4, 0.7),
        charge("e", 6, 120, 200, 0.6, 0.9),
    ];
    (days, charges)
}

fn bin(soc: f64) -> usize {
    ((soc * 6.0) as usize).min(5)
}

/// Opportunity and charge counts of both tables, laid out like the fitted
/// tables: `[d][t][k][s]` and `[d][t][s]`.
pub struct BruteCounts {
    pub after: Vec<(u64, u64)>,
    pub independent: Vec<(u64, u64)>,
}

impl BruteCounts {
    pub fn after_p(&self, i: usize) -> f64 {
        ratio(self.after[i])
    }

    pub fn independent_p(&self, i: usize) -> f64 {
        ratio(self.independent[i])
    }
}

fn ratio((opp, hit): (u64, u64)) -> f64 {
    if opp == 0 {
        0.0
    } else {
        hit as f64 / opp as f64
    }
}

/// Counts by walking every vehicle's timeline minute by minute. At a given
/// minute the order is: charge ends, journey ends, journey starts, the slot
/// boundary reading, charge starts.
pub fn brute_force_counts(
    days: &[VehicleDay],
    charges: &[ChargeEvent],
    clusters: &ClusterSet,
    k: usize,
    initial_soc: f64,
) -> BruteCounts {
    let mut after = vec![(0u64, 0u64); 2 * 48 * k * 6];
    let mut independent = vec![(0u64, 0u64); 2 * 48 * 6];

    let mut vehicles: Vec<&str> = days.iter().map(|d| d.vehicle_id.as_str()).collect();
    vehicles.sort();
    vehicles.dedup();
    for v in vehicles {
        let vdays: Vec<&VehicleDay> = days.iter().filter(|d| d.vehicle_id == v).collect();
        let vch: Vec<&ChargeEvent> = charges.iter().filter(|c| c.vehicle_id == v).collect();
        let abs = |day: u32, m: u32| day as i64 * 1440 + m as i64;
        let journeys: Vec<&Journey> = vdays.iter().flat_map(|d| &d.journeys).collect();

        // classification: latest journey end at most WINDOW minutes before
        let mut matched: Vec<(u32, u32)> = Vec::new();
        let mut indep_starts: Vec<i64> = Vec::new();
        for c in &vch {
            let s = abs(c.day_index, c.start_minute);
            let best = journeys
                .iter()
                .filter(|j| {
                    let gap = s - abs(j.day_index, j.end_minute);
                    (0..=WINDOW).contains(&gap)
                })
                .max_by_key(|j| abs(j.day_index, j.end_minute));
            match best {
                Some(j) => matched.push((j.day_index, j.end_minute)),
                None => indep_starts.push(s),
            }
        }

        let first = vdays.iter().map(|d| d.day_index).min().unwrap();
        let last = vdays.iter().map(|d| d.day_index).max().unwrap();
        let mut soc = initial_soc;
        let mut after_soc: Vec<((u32, u32), f64)> = Vec::new();
        let mut boundary_soc: Vec<(i64, f64)> = Vec::new();
        for m in abs(first, 0)..abs(last + 2, 0) {
            for c in &vch {
                if abs(c.day_index, c.end_minute) == m {
                    soc = c.soc_end;
                }
            }
            for j in &journeys {
                if abs(j.day_index, j.end_minute) == m {
                    soc = (soc - j.energy_used.unwrap() / BATTERY_KWH).max(0.0);
                    after_soc.push(((j.day_index, j.end_minute), soc));
                }
            }
            if m % 30 == 0 {
                boundary_soc.push((m, soc));
            }
            for c in &vch {
                if abs(c.day_index, c.start_minute) == m {
                    soc = c.soc_start;
                }
            }
        }
        let soc_after = |key: (u32, u32)| after_soc.iter().find(|(k, _)| *k == key).unwrap().1;
        let soc_boundary = |m: i64| boundary_soc.iter().find(|(b, _)| *b == m).unwrap().1;

        for day in &vdays {
            let d = if day.day_index % 7 < 5 { 0 } else { 1 };
            if let Some(cluster) = clusters.classify(day).cluster() {
                for j in &day.journeys {
                    let t = (j.end_minute / 30).min(47) as usize;
                    let s = bin(soc_after((j.day_index, j.end_minute)));
                    let cell = ((d * 48 + t) * k + cluster.index()) * 6 + s;
                    after[cell].0 += 1;
                    if matched.contains(&(j.day_index, j.end_minute)) {
                        after[cell].1 += 1;
                    }
                }
            }
            for t in 0..48u32 {
                let b = abs(day.day_index, 30 * t);
                let journey_ends_here = day.journeys.iter().any(|j| (j.end_minute / 30).min(47) == t);
                let away = day.journeys.iter().any(|j| j.start_minute <= 30 * t && 30 * t < j.end_minute);
                let charging = vch
                    .iter()
                    .any(|c| abs(c.day_index, c.start_minute) < b && b < abs(c.day_index, c.end_minute));
                if journey_ends_here || away || charging {
                    continue;
                }
                let s = bin(soc_boundary(b));
                let cell = (d * 48 + t as usize) * 6 + s;
                independent[cell].0 += 1;
                if indep_starts.iter().any(|&x| b <= x && x < b + 30) {
                    independent[cell].1 += 1;
                }
            }
        }
    }
    BruteCounts { after, independent }
}

/// A random vehicle-day with up to four non-overlapping journeys.
pub fn random_day<R: Rng>(rng: &mut R, vehicle: &str, day_index: u32) -> VehicleDay {
    let n = rng.random_range(0..=4);
    let mut cursor = rng.random_range(0..600u32);
    let mut journeys = Vec::new();
    for _ in 0..n {
        let start = cursor + rng.random_range(0..240);
        let end = start + rng.random_range(5..120);
        if end >= 1440 {
            break;
        }
        let miles: f64 = rng.random_range(0.5..40.0);
        journeys.push(Journey {
            vehicle_id: vehicle.into(),
            day_index,
            start_minute: start,
            end_minute: end,
            distance: miles,
            energy_used: None,
        });
        cursor = end;
    }
    VehicleDay::new(vehicle, day_index, journeys)
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, k - 1);
            out.push(q);
        }
    }
    out
}

/// Fraction of items whose cluster maps onto their true class under the best
/// one-to-one relabelling.
pub fn best_permutation_accuracy(assigned: &[usize], truth: &[usize], k: usize) -> f64 {
    assert_eq!(assigned.len(), truth.len());
    let mut confusion = vec![vec![0usize; k]; k];
    for (&a, &t) in assigned.iter().zip(truth) {
        confusion[t][a] += 1;
    }
    let best = permutations(k)
        .iter()
        .map(|p| (0..k).map(|t| confusion[t][p[t]]).sum::<usize>())
        .max()
        .unwrap_or(0);
    best as f64 / truth.len().max(1) as f64
}

/// A synthetic trial with everything fitted from it.
pub struct FittedFleet {
    pub spec: SynthSpec,
    pub fleet: SyntheticFleet,
    pub clusters: ClusterSet,
    pub tables: PosteriorTables,
    pub classification: Classification,
}

/// Synthesizes the example fleet at the given size, clusters it with k = 3
/// and fits the tables with the given smoothing.
pub fn fit_example_fleet(n_vehicles: usize, n_days: u32, seed: u64, sigma: f64) -> FittedFleet {
    let spec = SynthSpec {
        n_vehicles,
        n_days,
        ..SynthSpec::example()
    };
    let fleet = synthesize_fleet(&spec, seed).unwrap();
    let fit = |dt| kmeans_fit(&features_for(&fleet.days, dt), dt, 3, 1, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
    let clusters = ClusterSet::new(fit(DayType::Weekday), fit(DayType::Weekend)).unwrap();
    let classification = classify_charges(&fleet.days, &fleet.charges, DEFAULT_WINDOW_MINUTES);
    let traces = infer_soc_traces(&fleet.days, &fleet.charges, spec.battery_kwh, 1.0).unwrap();
    let tables = fit_posteriors(&fleet.days, &fleet.charges, &classification, &clusters, &traces, sigma).unwrap();
    FittedFleet {
        spec,
        fleet,
        clusters,
        tables,
        classification,
    }
}

impl FittedFleet {
    pub fn independent_share(&self) -> f64 {
        let labels = &self.classification.labels;
        labels.iter().filter(|l| l.kind == ChargeKind::Independent).count() as f64 / labels.len().max(1) as f64
    }
}

/// Comparison of fitted cells against the generating policy.
#[derive(Debug)]
pub struct CellCheck {
    pub cells: usize,
    pub worst_z: f64,
    pub failures: Vec<String>,
}

fn check_cell(out: &mut CellCheck, name: String, hits: u64, opp: u64, p: f64, max_z: f64) {
    out.cells += 1;
    let observed = hits as f64 / opp as f64;
    if p <= 0.0 || p >= 1.0 {
        if observed != p {
            out.failures.push(format!("{name}: {hits}/{opp} but p = {p}"));
        }
        return;
    }
    let z = (observed - p) / (p * (1.0 - p) / opp as f64).sqrt();
    out.worst_z = out.worst_z.max(z.abs());
    if z.abs() > max_z {
        out.failures.push(format!("{name}: {hits}/{opp} against p = {p}, z = {z:.2}"));
    }
}

/// Every unsmoothed cell with at least `min_opportunities` must sit within
/// `max_z` binomial standard errors of the true probability; cells whose
/// true probability is 0 or 1 must match exactly.
pub fn check_against_policy(tables: &PosteriorTables, policy: &ChargingPolicy, min_opportunities: u64, max_z: f64) -> CellCheck {
    let mut out = CellCheck {
        cells: 0,
        worst_z: 0.0,
        failures: Vec::new(),
    };
    for d in 0..tables.day_types {
        for t in 0..tables.slots {
            for s in 0..tables.soc_states {
                for k in 0..tables.n_clusters {
                    let i = tables.after_index(d, t, k, s);
                    let opp = tables.after_opportunities[i];
                    if opp >= min_opportunities {
                        let name = format!("after[{d}][{t}][{k}][{s}]");
                        check_cell(&mut out, name, tables.after_charges[i], opp, policy.after_journey[s], max_z);
                    }
                }
                let i = tables.independent_index(d, t, s);
                let opp = tables.independent_opportunities[i];
                if opp >= min_opportunities {
                    let name = format!("independent[{d}][{t}][{s}]");
                    let p = policy.independent_probability(t, s);
                    check_cell(&mut out, name, tables.independent_charges[i], opp, p, max_z);
                }
            }
        }
    }
    out
}
