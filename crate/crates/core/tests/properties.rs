use estimand_lab::analysis_sets::{build_sets, randomization_balance_check, AnalysisSet};
use estimand_lab::dgp::{simulate_population, ScenarioConfig};
use estimand_lab::estimand::{EstimandSpec, IceKind, Strategy};
use estimand_lab::estimators::{estimate_hypothetical, ols_fit, Formula};
use estimand_lab::montecarlo::{replicate, GapSummary};
use estimand_lab::oracle::oracle_estimand;
use estimand_lab::potential_outcomes::derive_all;
use proptest::prelude::*;

#[test]
fn randomized_itts_is_balanced_at_large_n() {
    let cfg = ScenarioConfig { n: 100_000, ..Default::default() };
    let balanced = (0..100u64)
        .filter(|&seed| {
            let pop = simulate_population::<f64>(&cfg.with_seed(seed)).unwrap();
            let report = randomization_balance_check(&derive_all(&pop), AnalysisSet::Itts, 0.1).unwrap();
            report.max_abs_smd() < 0.02
        })
        .count();
    assert!(balanced >= 99, "{balanced} of 100 seeds balanced");
}

#[test]
fn deviation_on_arm_and_confounder_unbalances_pps() {
    let cfg = ScenarioConfig {
        n: 20_000,
        deviation_mechanism: Some(vec![-1.0, 1.0, 1.5, 0.0, 0.0]),
        ..Default::default()
    };
    let records = derive_all(&simulate_population::<f64>(&cfg).unwrap());
    let pps = randomization_balance_check(&records, AnalysisSet::Pps, 0.1).unwrap();
    assert!(pps.rows[0].flagged, "{:?}", pps.rows[0]);
    let itts = randomization_balance_check(&records, AnalysisSet::Itts, 0.1).unwrap();
    assert!(!itts.any_flagged());
}

fn hypothetical_gap(therapy_rate: Option<f64>) -> GapSummary {
    let logit = |p: f64| (p / (1.0 - p)).ln();
    let cfg = ScenarioConfig {
        n: 1000,
        seed: 5,
        delta_m: -1.5,
        m_logit: therapy_rate.map(|p| vec![logit(p), 0.5, 0.6, 0.0]),
        ..Default::default()
    };
    let spec = EstimandSpec::with_policies("h", &[(IceKind::ConcomitantTherapy, Strategy::Hypothetical)]);
    let pairs = replicate::<f64, _, _>(&cfg, 200, |rep, pop, records| {
        let oracle = oracle_estimand(pop, &spec).ok()?.value;
        Some((estimate_hypothetical(records, 20, rep).ok()?.point, oracle))
    })
    .unwrap();
    GapSummary::from_pairs(&pairs)
}

#[test]
fn hypothetical_imputation_is_consistent_across_event_rates() {
    for rate in [Some(0.3), Some(0.1), None] {
        let g = hypothetical_gap(rate);
        assert_eq!(g.failures, 0);
        assert!(g.within_3se(), "rate {rate:?}: {g:?}");
    }
}

#[test]
fn no_events_means_no_imputation() {
    let cfg = ScenarioConfig { n: 500, ..Default::default() };
    let records = derive_all(&simulate_population::<f64>(&cfg).unwrap());
    let h = estimate_hypothetical(&records, 20, 1).unwrap();
    let ols = ols_fit(&records, Formula::ADJUSTED).unwrap();
    assert_eq!(h.point, ols.treatment_effect());
    assert_eq!(h.n_imputations, 0);
}

#[test]
fn generic_over_precision() {
    let cfg = ScenarioConfig { n: 2000, ..Default::default() };
    let wide = derive_all(&simulate_population::<f64>(&cfg).unwrap());
    let narrow = derive_all(&simulate_population::<f32>(&cfg).unwrap());
    let a = ols_fit(&wide, Formula::ADJUSTED).unwrap().treatment_effect();
    let b = ols_fit(&narrow, Formula::ADJUSTED).unwrap().treatment_effect();
    assert!((a - f64::from(b)).abs() < 1e-3, "{a} vs {b}");
}

fn coefficients(k: usize) -> impl proptest::strategy::Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-2.0..2.0f64, k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sets_are_nested(
        seed in any::<u64>(),
        m in proptest::option::of(coefficients(4)),
        death in proptest::option::of(coefficients(4)),
        tol in proptest::option::of(coefficients(4)),
        deviation in proptest::option::of(coefficients(5)),
        withdraw_prob in 0.0..1.0f64,
        undosed_prob in 0.0..0.5f64,
    ) {
        let cfg = ScenarioConfig {
            n: 200,
            seed,
            m_logit: m,
            death_logit: death,
            tol_logit: tol,
            withdraw_prob,
            deviation_mechanism: deviation,
            undosed_prob,
            ..Default::default()
        };
        let records = derive_all(&simulate_population::<f64>(&cfg).unwrap());
        for (m, r) in build_sets(&records).iter().zip(&records) {
            prop_assert!(m.is_nested(), "{:?}", r.set_flags);
        }
    }
}
