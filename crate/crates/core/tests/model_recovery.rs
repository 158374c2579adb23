mod common;

use common::{check_against_policy, fit_example_fleet};
use evcharge_core::analysis::{leave_one_out_validate, ValidationConfig};
use evcharge_core::charge_model::DEFAULT_SIGMA;
use evcharge_core::simulator::{monte_carlo, SimConfig, SimModel};

#[test]
fn fitted_cells_recover_the_generating_policy() {
    let f = fit_example_fleet(200, 28, 5, 0.0);
    assert!(f.independent_share() >= 0.3, "{}", f.independent_share());
    let check = check_against_policy(&f.tables, &f.spec.policy, 100, 3.0);
    assert!(check.cells >= 100, "only {} well-populated cells", check.cells);
    assert!(check.failures.is_empty(), "{:#?}", check.failures);
}

#[test]
fn a_wrong_policy_is_rejected() {
    // The check has power: shifting every after-journey probability by 0.1
    // must fail somewhere.
    let f = fit_example_fleet(200, 28, 5, 0.0);
    let mut wrong = f.spec.policy.clone();
    for p in &mut wrong.after_journey {
        *p += if *p < 0.5 { 0.1 } else { -0.1 };
    }
    assert!(!check_against_policy(&f.tables, &wrong, 100, 3.0).failures.is_empty());
}

#[test]
fn leave_one_out_beats_the_naive_model() {
    let f = fit_example_fleet(30, 14, 9, DEFAULT_SIGMA);
    assert!(f.independent_share() >= 0.3);
    let report = leave_one_out_validate(&f.fleet.days, &f.fleet.charges, &f.clusters, &ValidationConfig::default()).unwrap();
    assert_eq!(report.vehicles, 30);
    let a = &report.all_days;
    assert!(a.start_mape_model < a.start_mape_naive, "{a:?}");
    assert!(a.power_mape_model < a.power_mape_naive, "{a:?}");
}

#[test]
fn stochastic_peak_is_below_the_naive_peak() {
    let f = fit_example_fleet(200, 28, 5, DEFAULT_SIGMA);
    let pool: Vec<_> = f
        .fleet
        .days
        .iter()
        .filter(|d| d.day_index == 2 && d.vehicle_id.as_str() < "v050")
        .cloned()
        .collect();
    assert_eq!(pool.len(), 50);
    let cfg = SimConfig {
        n_runs: 1000,
        seed: 3,
        ..SimConfig::default()
    };
    let stochastic = monte_carlo(&pool, &SimModel::stochastic(&f.clusters, &f.tables), &cfg).unwrap();
    let naive = monte_carlo(&pool, &SimModel::naive(), &cfg).unwrap();
    assert!(
        stochastic.peak_mean_kw() <= naive.peak_mean_kw(),
        "{} > {}",
        stochastic.peak_mean_kw(),
        naive.peak_mean_kw()
    );
}
