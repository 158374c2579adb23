mod common;

use std::time::Instant;

use common::*;
use evcharge_core::charge_model::{classify_charges, fit_posteriors, fit_posteriors_detailed, ChargeKind, PosteriorTables};
use evcharge_core::clustering::ClusterSet;
use evcharge_core::ingest::{infer_soc_traces, ChargeEvent, ChargingPolicy, VehicleDay};
use evcharge_core::seed;
use evcharge_core::simulator::{simulate_sequence, SimConfig, SimModel};
use proptest::prelude::*;

fn fit(days: &[VehicleDay], charges: &[ChargeEvent], clusters: &ClusterSet) -> PosteriorTables {
    let cls = classify_charges(days, charges, WINDOW as u32);
    let traces = infer_soc_traces(days, charges, BATTERY_KWH, 1.0).unwrap();
    fit_posteriors(days, charges, &cls, clusters, &traces, 0.0).unwrap()
}

fn assert_matches_oracle(tables: &PosteriorTables, oracle: &BruteCounts) {
    assert_eq!(tables.after_journey.len(), 1728);
    assert_eq!(tables.independent.len(), 576);
    for i in 0..1728 {
        assert_eq!(
            (tables.after_opportunities[i], tables.after_charges[i]),
            oracle.after[i],
            "after-journey cell {i}"
        );
        assert_eq!(tables.after_journey[i], oracle.after_p(i), "after-journey cell {i}");
    }
    for i in 0..576 {
        assert_eq!(
            (tables.independent_opportunities[i], tables.independent_charges[i]),
            oracle.independent[i],
            "independent cell {i}"
        );
        assert_eq!(tables.independent[i], oracle.independent_p(i), "independent cell {i}");
    }
}

#[test]
fn handcrafted_fleet_matches_brute_force() {
    let started = Instant::now();
    let (days, charges) = handcrafted();
    let clusters = three_mode_clusters();
    let tables = fit(&days, &charges, &clusters);
    let oracle = brute_force_counts(&days, &charges, &clusters, 3, 1.0);
    assert_matches_oracle(&tables, &oracle);
    assert!(started.elapsed().as_secs_f64() < 1.0);

    // the dataset is not trivially empty
    assert_eq!(tables.after_opportunities.iter().sum::<u64>(), 17);
    assert_eq!(tables.after_charges.iter().sum::<u64>(), 8);
    assert!(tables.independent_charges.iter().sum::<u64>() >= 4);
}

#[test]
fn handcrafted_classification_and_diagnostics() {
    let (days, charges) = handcrafted();
    let cls = classify_charges(&days, &charges, 10);
    let after = cls.labels.iter().filter(|l| l.kind == ChargeKind::AfterJourney).count();
    assert_eq!(after, 8);
    // exactly ten minutes counts, eleven does not
    assert_eq!(cls.labels[2].kind, ChargeKind::AfterJourney);
    assert_eq!(cls.labels[4].kind, ChargeKind::Independent);
    // matched to the latest journey end
    assert_eq!(cls.labels[8].matched_journey.as_ref().unwrap().index, 1);

    let traces = infer_soc_traces(&days, &charges, BATTERY_KWH, 1.0).unwrap();
    let (_, diag) = fit_posteriors_detailed(&days, &charges, &cls, &three_mode_clusters(), &traces, 0.0).unwrap();
    // the charge eleven minutes after a journey began in that journey's slot
    assert_eq!(diag.unplaced_independent, 1);
    assert_eq!(diag.vehicles, 5);
}

#[test]
fn smoothing_keeps_counts() {
    let (days, charges) = handcrafted();
    let clusters = three_mode_clusters();
    let cls = classify_charges(&days, &charges, 10);
    let traces = infer_soc_traces(&days, &charges, BATTERY_KWH, 1.0).unwrap();
    let raw = fit_posteriors(&days, &charges, &cls, &clusters, &traces, 0.0).unwrap();
    let smooth = fit_posteriors(&days, &charges, &cls, &clusters, &traces, 1.0).unwrap();
    assert_eq!(raw.after_opportunities, smooth.after_opportunities);
    assert_eq!(raw.independent_charges, smooth.independent_charges);
    assert_ne!(raw.after_journey, smooth.after_journey);
    assert!(smooth.after_journey.iter().chain(&smooth.independent).all(|p| (0.0..=1.0).contains(p)));
}

fn random_fleet(seed_value: u64, vehicles: usize, n_days: u32, policy: &ChargingPolicy) -> (Vec<VehicleDay>, Vec<ChargeEvent>) {
    let mut rng = seed::stream(seed_value, "oracle-fleet", &[]);
    let cfg = SimConfig::default();
    let model = SimModel::custom(policy, None);
    let mut days = Vec::new();
    let mut charges = Vec::new();
    for v in 0..vehicles {
        let id = format!("v{v}");
        let first = days.len();
        for d in 0..n_days {
            let mut day = random_day(&mut rng, &id, 3 + d);
            for j in &mut day.journeys {
                j.energy_used = Some(j.distance * cfg.kwh_per_mile);
            }
            days.push(day);
        }
        let seq: Vec<&VehicleDay> = days[first..].iter().collect();
        charges.extend(simulate_sequence(&seq, &model, &cfg, &mut rng).events);
    }
    (days, charges)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_fleets_match_brute_force(
        seed_value in any::<u64>(),
        aj in prop::array::uniform6(0.0f64..1.0),
        ind in prop::array::uniform6(0.0f64..0.3),
        slots in prop::collection::vec(0usize..48, 1..12),
    ) {
        let policy = ChargingPolicy {
            after_journey: aj,
            independent: ind,
            independent_slots: slots,
            after_final_only: false,
        };
        let (days, charges) = random_fleet(seed_value, 4, 4, &policy);
        let clusters = three_mode_clusters();
        let tables = fit(&days, &charges, &clusters);
        let oracle = brute_force_counts(&days, &charges, &clusters, 3, 1.0);
        assert_matches_oracle(&tables, &oracle);
    }
}
