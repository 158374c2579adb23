mod common;

use common::*;
use evcharge_core::analysis::start_time_pdf;
use evcharge_core::charge_model::PosteriorTables;
use evcharge_core::clustering::Cluster;
use evcharge_core::ingest::{Journey, VehicleDay};
use evcharge_core::seed;
use evcharge_core::simulator::*;
use evcharge_core::time::slot_of;
use proptest::prelude::*;
use rand::Rng;

fn random_tables(seed_value: u64) -> PosteriorTables {
    let mut rng = seed::stream(seed_value, "tables", &[]);
    let mut t = PosteriorTables::zeros(3);
    for p in &mut t.after_journey {
        *p = rng.random();
    }
    for p in &mut t.independent {
        *p = rng.random::<f64>() * 0.2;
    }
    t
}

#[test]
fn energy_is_conserved_on_every_vehicle_day() {
    let cfg = SimConfig::default();
    assert_eq!((cfg.charger_kw, cfg.efficiency, cfg.battery_kwh), (3.5, 0.9, 24.0));
    let tables = random_tables(1);
    let mut rng = seed::stream(2, "energy", &[]);
    let mut charged_days = 0;
    for i in 0..10_000u32 {
        let day = random_day(&mut rng, "v", i % 14);
        let mut vs = VehicleSimState::new(rng.random_range(0.0..=1.0));
        let cluster = Some(Cluster::from_index((i % 3) as usize));
        // half the days start with a charge carried over from the night before
        for _ in 0..(i % 2) {
            simulate_vehicle_day(&day, cluster, &mut vs, &tables, &cfg, &mut rng);
        }
        let out = simulate_vehicle_day(&day, cluster, &mut vs, &tables, &cfg, &mut rng);
        assert!(
            (out.grid_kwh * cfg.efficiency - out.battery_kwh).abs() < 1e-6,
            "day {i}: grid {} battery {}",
            out.grid_kwh,
            out.battery_kwh
        );
        let profile_kwh: f64 = out.profile.iter().sum::<f64>() * 0.5;
        assert!((profile_kwh - out.grid_kwh).abs() < 1e-6);
        assert!(out.profile.iter().all(|&p| (0.0..=cfg.charger_kw + 1e-9).contains(&p)));
        assert!((0.0..=1.0).contains(&vs.soc));
        charged_days += usize::from(out.grid_kwh > 0.0);
    }
    assert!(charged_days > 2_000, "only {charged_days} days charged");
}

fn arb_day(vehicle: &'static str) -> impl Strategy<Value = VehicleDay> {
    (0u32..14, prop::collection::vec((0u32..1380, 5u32..90, 0.5f64..60.0), 0..5)).prop_map(move |(d, raw)| {
        let mut journeys: Vec<Journey> = Vec::new();
        let mut cursor = 0;
        let mut starts: Vec<_> = raw;
        starts.sort_by_key(|r| r.0);
        for (start, dur, miles) in starts {
            let start = start.max(cursor);
            let end = start + dur;
            if end > 1439 {
                break;
            }
            journeys.push(Journey {
                vehicle_id: vehicle.into(),
                day_index: d,
                start_minute: start,
                end_minute: end,
                distance: miles,
                energy_used: None,
            });
            cursor = end;
        }
        VehicleDay::new(vehicle, d, journeys)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn naive_start_pdf_is_final_journey_end_pdf(days in prop::collection::vec(arb_day("v"), 1..40)) {
        let cfg = SimConfig::default();
        let mut naive_slots = Vec::new();
        let mut final_slots = Vec::new();
        let mut vs = VehicleSimState::new(1.0);
        for d in &days {
            let out = simulate_naive(d, &mut vs, &cfg);
            naive_slots.extend(out.starts.iter().map(|s| s.slot));
            final_slots.extend(d.final_journey().map(|j| slot_of(j.end_minute)));
        }
        prop_assert_eq!(naive_slots.len(), final_slots.len());
        if !final_slots.is_empty() {
            let a = start_time_pdf(naive_slots).unwrap();
            let b = start_time_pdf(final_slots).unwrap();
            prop_assert_eq!(a.values(), b.values());
        }
    }

    #[test]
    fn final_journey_tables_reproduce_the_naive_aggregate(
        shapes in prop::collection::vec((0usize..3, 1u32..300, 1u32..600, 0.5f64..50.0), 1..30),
        warmup in 0usize..3,
        seed_value in any::<u64>(),
    ) {
        // earlier journeys end before noon, final journeys after, so the
        // final-journey states are exactly the cells with t >= 24
        let days: Vec<VehicleDay> = shapes
            .iter()
            .enumerate()
            .map(|(i, &(n, gap, late, miles))| {
                let id = format!("v{i}");
                let mut js = Vec::new();
                for e in 0..n {
                    let start = 300 + 120 * e as u32;
                    js.push(journey(&id, 2, start, start + 30, miles * 0.1));
                }
                let start = 720 + late.min(650) + gap % 30;
                js.push(journey(&id, 2, start, start + 20, miles * 0.3));
                VehicleDay::new(id, 2, js)
            })
            .collect();
        let clusters = three_mode_clusters();
        let mut tables = PosteriorTables::zeros(3);
        for d in 0..2 {
            for t in 24..48 {
                for k in 0..3 {
                    for s in 0..6 {
                        let i = tables.after_index(d, t, k, s);
                        tables.after_journey[i] = 1.0;
                    }
                }
            }
        }
        let cfg = SimConfig { n_runs: 3, seed: seed_value, warmup_days: warmup, ..SimConfig::default() };
        let stochastic = monte_carlo(&days, &SimModel::stochastic(&clusters, &tables), &cfg).unwrap();
        let naive = monte_carlo(&days, &SimModel::naive(), &cfg).unwrap();
        prop_assert_eq!(&stochastic.runs, &naive.runs);
        prop_assert_eq!(stochastic.mean_profile(), naive.mean_profile());
    }
}

fn pool(n: usize, seed_value: u64) -> Vec<VehicleDay> {
    let mut rng = seed::stream(seed_value, "pool", &[]);
    (0..n).map(|v| random_day(&mut rng, &format!("v{v}"), 2)).collect()
}

#[test]
fn monte_carlo_follows_the_documented_stream_scheme() {
    let days = pool(12, 4);
    let clusters = three_mode_clusters();
    let tables = random_tables(5);
    let model = SimModel::stochastic(&clusters, &tables);
    let cfg = SimConfig { n_runs: 16, seed: 99, warmup_days: 1, ..SimConfig::default() };
    let dist = monte_carlo(&days, &model, &cfg).unwrap();
    for run in 0..cfg.n_runs {
        let mut agg = [0.0; 48];
        for (v, day) in days.iter().enumerate() {
            let mut rng = seed::stream(cfg.seed, "mc", &[run as u64, v as u64]);
            let mut vs = VehicleSimState::new(cfg.initial_soc);
            let k = clusters.classify(day).cluster();
            simulate_vehicle_day(day, k, &mut vs, &tables, &cfg, &mut rng);
            let out = simulate_vehicle_day(day, k, &mut vs, &tables, &cfg, &mut rng);
            for (a, p) in agg.iter_mut().zip(out.profile) {
                *a += p;
            }
        }
        assert_eq!(dist.runs[run], agg, "run {run}");
    }
}

#[cfg(feature = "parallel")]
#[test]
fn thread_count_does_not_change_results() {
    let days = pool(30, 6);
    let clusters = three_mode_clusters();
    let tables = random_tables(7);
    let model = SimModel::stochastic(&clusters, &tables);
    let cfg = SimConfig { n_runs: 40, seed: 3, sample_size: 10, ..SimConfig::default() };
    let run_with = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| (monte_carlo(&days, &model, &cfg).unwrap(), monte_carlo_resampled(&days, &model, &cfg).unwrap()))
    };
    let one = run_with(1);
    for threads in [2, 4, 7] {
        assert_eq!(run_with(threads), one);
    }
}

#[test]
fn standard_error_shrinks_with_runs() {
    let days = pool(40, 8);
    let clusters = three_mode_clusters();
    let tables = random_tables(9);
    let model = SimModel::stochastic(&clusters, &tables);
    let se = |n| {
        let cfg = SimConfig { n_runs: n, seed: 11, ..SimConfig::default() };
        monte_carlo(&days, &model, &cfg).unwrap().standard_error(36)
    };
    let (a, b) = (se(100), se(400));
    assert!(a > 0.0);
    let ratio = a / b;
    assert!((ratio / 2.0 - 1.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn resampling_adds_variance() {
    let big = pool(400, 10);
    let clusters = three_mode_clusters();
    let tables = random_tables(12);
    let model = SimModel::stochastic(&clusters, &tables);
    let cfg = SimConfig { n_runs: 1000, seed: 13, sample_size: 50, ..SimConfig::default() };
    let fixed = choose_fixed_set(&big, &cfg).unwrap();
    assert_eq!(fixed.len(), 50);
    let fixed_dist = monte_carlo(&fixed, &model, &cfg).unwrap();
    let resampled = monte_carlo_resampled(&big, &model, &cfg).unwrap();
    let wider = (0..48)
        .filter(|&t| resampled.slots[t].sd_kw >= fixed_dist.slots[t].sd_kw)
        .count();
    assert!(wider as f64 >= 0.9 * 48.0, "only {wider} of 48 slots");
    assert!(monte_carlo_resampled(&big[..49], &model, &cfg).is_err());
}
