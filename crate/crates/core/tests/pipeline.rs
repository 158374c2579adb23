mod common;

use common::best_permutation_accuracy;
use evcharge_core::charge_model::{classify_charges, fit_posteriors, DEFAULT_WINDOW_MINUTES};
use evcharge_core::clustering::*;
use evcharge_core::ingest::*;

fn weekday_spec(n_vehicles: usize) -> SynthSpec {
    SynthSpec {
        n_vehicles,
        n_days: 5,
        start_day: 0,
        unused_prob: 0.0,
        ..SynthSpec::example()
    }
}

#[test]
fn archetype_frequencies_follow_the_weights() {
    let fleet = synthesize_fleet(&weekday_spec(2000), 21).unwrap();
    let n = fleet.labels.len() as f64;
    for (name, w) in [("commuter", 0.4), ("morning", 0.3), ("evening", 0.3)] {
        let share = fleet.labels.iter().filter(|l| l.archetype == name).count() as f64 / n;
        assert!((share - w).abs() < 0.02, "{name}: {share}");
    }
}

#[test]
fn unused_share_and_weekend_modes() {
    let spec = SynthSpec {
        n_vehicles: 300,
        ..SynthSpec::example()
    };
    let fleet = synthesize_fleet(&spec, 4).unwrap();
    let unused = fleet.labels.iter().filter(|l| l.archetype == "U").count() as f64 / fleet.labels.len() as f64;
    assert!((unused - spec.unused_prob).abs() < 0.02, "{unused}");
    for (l, d) in fleet.labels.iter().zip(&fleet.days) {
        assert_eq!(l.archetype == "U", d.is_unused());
        let weekend = ["daytrip", "errands"].contains(&l.archetype.as_str());
        if !d.is_unused() {
            assert_eq!(weekend, d.day_type == DayType::Weekend);
        }
    }
}

#[test]
fn synthetic_trial_survives_csv() {
    let spec = SynthSpec {
        n_vehicles: 12,
        ..SynthSpec::example()
    };
    let fleet = synthesize_fleet(&spec, 8).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let jpath = dir.path().join("journeys.csv");
    let cpath = dir.path().join("charges.csv");
    write_trial_journeys(std::fs::File::create(&jpath).unwrap(), &fleet.days, None).unwrap();
    write_charges(std::fs::File::create(&cpath).unwrap(), &fleet.charges).unwrap();
    let (days, charges, report) = parse_trial(&jpath, &cpath, &ParseConfig::default()).unwrap();
    assert!(report.is_clean(), "{}", report.to_json());
    assert_eq!(days, fleet.days);
    assert_eq!(charges, fleet.charges);

    let mut survey = Vec::new();
    write_survey(&mut survey, &fleet.days).unwrap();
    let (sdays, _) = parse_survey_reader(survey.as_slice(), &ParseConfig::default()).unwrap();
    assert_eq!(sdays.len(), fleet.days.len());
    assert!(sdays.iter().flat_map(|d| &d.journeys).all(|j| j.energy_used.is_none()));
}

#[test]
fn kmeans_recovers_the_archetypes() {
    let fleet = synthesize_fleet(&weekday_spec(300), 5).unwrap();
    let names = ["commuter", "morning", "evening"];
    let points = features_for(&fleet.days, DayType::Weekday);
    assert_eq!(points.len(), 1500);
    let model = kmeans_fit(&points, DayType::Weekday, 3, 1, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
    let assigned: Vec<usize> = points.iter().map(|p| model.assign(p).index()).collect();
    let truth: Vec<usize> = fleet
        .labels
        .iter()
        .map(|l| names.iter().position(|n| *n == l.archetype).unwrap())
        .collect();
    assert!(best_permutation_accuracy(&assigned, &truth, 3) >= 0.95);

    let scan = elbow_scan(&points, DayType::Weekday, 1, 8, 3, 2).unwrap();
    assert!(scan.windows(2).all(|w| w[1].sos <= w[0].sos + 1e-9));
    assert_eq!(elbow_k(&scan), Some(3));
}

#[test]
fn midnight_policy_peaks_at_midnight() {
    let spec = SynthSpec {
        n_vehicles: 80,
        n_days: 14,
        policy: ChargingPolicy {
            after_journey: [0.5; 6],
            independent: [0.6, 0.6, 0.6, 0.6, 0.6, 0.0],
            independent_slots: vec![0],
            after_final_only: false,
        },
        ..SynthSpec::example()
    };
    let fleet = synthesize_fleet(&spec, 3).unwrap();
    let set = ClusterSet::new(
        kmeans_fit(&features_for(&fleet.days, DayType::Weekday), DayType::Weekday, 3, 1, 300, 1e-6).unwrap(),
        kmeans_fit(&features_for(&fleet.days, DayType::Weekend), DayType::Weekend, 3, 1, 300, 1e-6).unwrap(),
    )
    .unwrap();
    let cls = classify_charges(&fleet.days, &fleet.charges, DEFAULT_WINDOW_MINUTES);
    let traces = infer_soc_traces(&fleet.days, &fleet.charges, spec.battery_kwh, 1.0).unwrap();
    let tables = fit_posteriors(&fleet.days, &fleet.charges, &cls, &set, &traces, 0.0).unwrap();
    for d in 0..2 {
        let by_slot: Vec<f64> = (0..48)
            .map(|t| (0..6).map(|s| tables.independent[tables.independent_index(d, t, s)]).sum())
            .collect();
        let peak = (0..48).max_by(|&a, &b| by_slot[a].total_cmp(&by_slot[b])).unwrap();
        assert_eq!(peak, 0, "day type {d}");
        assert!(by_slot[1..].iter().all(|&v| v == 0.0));
    }
}
