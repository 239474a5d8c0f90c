//! Ground-truth estimand values computed from the latent table, where both
//! potential worlds of every participant are known.
//!
//! Values are finite-population means over the simulated cohort. For each
//! participant and each treatment the endpoint the estimand refers to is
//! resolved from the ICE pattern under that treatment and the declared
//! strategies; the participant contributes the within-participant
//! difference, and is dropped entirely if either world has no value
//! (while-on-treatment with no assessment before the event).

use crate::error::{Error, Result};
use crate::estimand::{EstimandSpec, IceKind, Strategy, StrategyTag};
use crate::potential_outcomes::{arm_index, stratum_of, Assessment, IceCase, PotentialParticipant};
use crate::scalar::{lit, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct EstimandValue<T> {
    pub value: T,
    pub strategy: StrategyTag,
    pub population_size_used: usize,
    pub endpoint_used: Assessment,
}

/// Intercurrent event that affects the endpoint at `at`, given the case.
pub(crate) fn ice_at(case: IceCase, at: Assessment) -> Option<IceKind> {
    match (case, at) {
        (IceCase::None, _) => None,
        (IceCase::Case1, Assessment::T2) => Some(IceKind::ConcomitantTherapy),
        (IceCase::Case1, Assessment::T1) => None,
        (IceCase::Case2, _) => Some(IceKind::Death),
        (IceCase::Case3, Assessment::T2) => Some(IceKind::Death),
        (IceCase::Case3, Assessment::T1) => None,
        (IceCase::Case4, _) => Some(IceKind::Withdrawal),
    }
}

/// Second-assessment value in the world the concomitant-therapy strategy defines.
fn therapy_world<T: Real>(p: &PotentialParticipant<T>, i: usize, spec: &EstimandSpec) -> Option<T> {
    if !p.m_under[i] {
        return Some(p.y2_free[i]);
    }
    match spec.policy(IceKind::ConcomitantTherapy) {
        Strategy::Hypothetical | Strategy::Confounder => Some(p.y2_free[i]),
        Strategy::Composite { worst } => Some(lit(worst)),
        Strategy::WhileOnTreatment => Some(p.y1_under[i]),
        Strategy::TreatmentPolicy | Strategy::PrincipalStratum(_) => Some(p.y2_under[i]),
    }
}

/// Endpoint of participant `p` on treatment `x` as the estimand defines it;
/// `None` when the estimand has no value for that world.
pub fn resolved_endpoint<T: Real>(p: &PotentialParticipant<T>, x: bool, spec: &EstimandSpec) -> Option<T> {
    let i = arm_index(x);
    let at = spec.endpoint.at;
    let case = p.case_under(x);
    let latent = || match at {
        Assessment::T1 => Some(p.y1_under[i]),
        Assessment::T2 => therapy_world(p, i, spec),
    };
    match ice_at(case, at) {
        None | Some(IceKind::ConcomitantTherapy) => latent(),
        Some(kind) => match spec.policy(kind) {
            Strategy::Composite { worst } => Some(lit(worst)),
            Strategy::WhileOnTreatment => {
                (case == IceCase::Case3 && at == Assessment::T2).then_some(p.y1_under[i])
            }
            Strategy::TreatmentPolicy
            | Strategy::Hypothetical
            | Strategy::Confounder
            | Strategy::PrincipalStratum(_) => latent(),
        },
    }
}

/// Exact estimand value over the latent population.
pub fn oracle_estimand<T: Real>(pop: &[PotentialParticipant<T>], spec: &EstimandSpec) -> Result<EstimandValue<T>> {
    if pop.is_empty() {
        return Err(Error::EstimandUndefined("empty population".into()));
    }
    let stratum = spec.stratum();
    let mut sum = T::zero();
    let mut used = 0usize;
    let mut in_stratum = 0usize;
    for p in pop {
        if stratum.is_some_and(|s| stratum_of(p) != s) {
            continue;
        }
        in_stratum += 1;
        if let (Some(y0), Some(y1)) = (resolved_endpoint(p, false, spec), resolved_endpoint(p, true, spec)) {
            sum = sum + (y1 - y0);
            used += 1;
        }
    }
    if in_stratum == 0 {
        let s = stratum.expect("only a stratum restriction can empty a non-empty population");
        return Err(Error::EstimandUndefined(format!("no participants in stratum {s}")));
    }
    if used == 0 {
        return Err(Error::EstimandUndefined(
            "no participant has an endpoint under both treatments".into(),
        ));
    }
    Ok(EstimandValue {
        value: sum / lit(used as f64),
        strategy: spec.strategy_tag(),
        population_size_used: used,
        endpoint_used: spec.endpoint.at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::{simulate_population, ScenarioConfig};
    use crate::estimand::{EstimandSpec, Population};
    use crate::potential_outcomes::fixtures::plain;
    use crate::potential_outcomes::{individual_effect, DeathTime, PrincipalStratum};

    fn spec(p: &[(IceKind, Strategy)]) -> EstimandSpec {
        EstimandSpec::with_policies("t", p)
    }

    fn hypothetical() -> EstimandSpec {
        spec(&[
            (IceKind::ConcomitantTherapy, Strategy::Hypothetical),
            (IceKind::Death, Strategy::Hypothetical),
        ])
    }

    fn composite() -> EstimandSpec {
        spec(&[(IceKind::Death, Strategy::Composite { worst: 10.0 })])
    }

    fn principal() -> EstimandSpec {
        let mut s = spec(&[(IceKind::Withdrawal, Strategy::PrincipalStratum(PrincipalStratum::P1))]);
        s.population = Population::Stratum(PrincipalStratum::P1);
        s
    }

    #[test]
    fn constant_effect() {
        let pop: Vec<_> = (0..5).map(|i| plain(i, i % 2 == 0, [1.0, 3.0], [4.0, 6.0])).collect();
        let v = oracle_estimand(&pop, &hypothetical()).unwrap();
        assert_eq!(v.value, 2.0);
        assert_eq!(v.population_size_used, 5);
    }

    #[test]
    fn composite_hand_table() {
        // Six participants, two deaths: #2 dies under control, #5 under treatment.
        let y2 = [[3.0, 5.0], [4.0, 4.0], [6.0, 5.5], [2.0, 4.5], [7.0, 9.0], [1.0, 1.0]];
        let mut pop: Vec<_> = y2.iter().enumerate().map(|(i, &y)| plain(i, true, [0.0; 2], y)).collect();
        pop[1].death_under[0] = DeathTime::ByT2BeforeT1;
        pop[4].death_under[1] = DeathTime::BetweenT1T2;
        let v = oracle_estimand(&pop, &composite()).unwrap();
        // diffs: 2, 4-10, -0.5, 2.5, 10-7, 0  => 1.0 / 6
        let expect = (2.0 - 6.0 - 0.5 + 2.5 + 3.0 + 0.0) / 6.0;
        assert!((v.value - expect).abs() < 1e-15);
        // hypothetical ignores the deaths
        let h = oracle_estimand(&pop, &hypothetical()).unwrap();
        assert!((h.value - 6.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn while_on_treatment_pairs_and_excludes() {
        let mut a = plain(1, true, [2.0, 3.0], [4.0, 6.0]);
        a.death_under[1] = DeathTime::BetweenT1T2;
        let mut b = plain(2, true, [2.0, 3.0], [4.0, 6.0]);
        b.death_under[0] = DeathTime::ByT2BeforeT1;
        let c = plain(3, false, [2.0, 3.0], [4.0, 7.0]);
        let s = spec(&[(IceKind::Death, Strategy::WhileOnTreatment)]);
        let v = oracle_estimand(&[a, b, c], &s).unwrap();
        // a: 3 - 4; b dropped; c: 7 - 4
        assert_eq!(v.population_size_used, 2);
        assert_eq!(v.value, 1.0);
    }

    #[test]
    fn all_p1_equals_hypothetical() {
        let cfg = ScenarioConfig { n: 400, ..ScenarioConfig::default() };
        let pop = simulate_population::<f64>(&cfg).unwrap();
        let a = oracle_estimand(&pop, &principal()).unwrap().value;
        let b = oracle_estimand(&pop, &hypothetical()).unwrap().value;
        assert_eq!(a, b);
    }

    #[test]
    fn empty_stratum_is_undefined() {
        let mut pop = vec![plain(1, true, [0.0; 2], [1.0, 2.0])];
        pop[0].t_under = [true, false];
        assert!(matches!(oracle_estimand(&pop, &principal()), Err(Error::EstimandUndefined(_))));
        assert!(oracle_estimand::<f64>(&[], &hypothetical()).is_err());
    }

    fn ice_rich(seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            n: 3000,
            seed,
            delta_m: 1.5,
            m_logit: Some(vec![-1.0, 1.0, 0.4, 0.0]),
            death_logit: Some(vec![-2.0, -0.5, 0.3, 0.2]),
            tol_logit: Some(vec![1.5, -1.0, 0.4, 0.0]),
            withdraw_prob: 0.5,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn hypothetical_invariant_to_ice_rates() {
        let calm = ScenarioConfig { n: 3000, ..ScenarioConfig::default() };
        let a = oracle_estimand(&simulate_population::<f64>(&calm).unwrap(), &hypothetical()).unwrap();
        let b = oracle_estimand(&simulate_population::<f64>(&ice_rich(42)).unwrap(), &hypothetical()).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn composite_equals_hypothetical_without_deaths() {
        let cfg = ScenarioConfig { death_logit: None, m_logit: None, ..ice_rich(7) };
        let pop = simulate_population::<f64>(&cfg).unwrap();
        assert_eq!(
            oracle_estimand(&pop, &composite()).unwrap().value,
            oracle_estimand(&pop, &hypothetical()).unwrap().value
        );
    }

    #[test]
    fn treatment_policy_equals_hypothetical_without_therapy_effect() {
        let cfg = ScenarioConfig { delta_m: 0.0, death_logit: None, ..ice_rich(9) };
        let pop = simulate_population::<f64>(&cfg).unwrap();
        let tp = oracle_estimand(&pop, &spec(&[])).unwrap().value;
        assert_eq!(tp, oracle_estimand(&pop, &hypothetical()).unwrap().value);
        let cf = spec(&[(IceKind::ConcomitantTherapy, Strategy::Confounder)]);
        assert_eq!(oracle_estimand(&pop, &cf).unwrap().value, tp);
    }

    #[test]
    fn principal_oracle_is_p1_mean_of_individual_effects() {
        let cfg = ScenarioConfig { death_logit: None, ..ice_rich(11) };
        let pop = simulate_population::<f64>(&cfg).unwrap();
        let p1: Vec<_> = pop.iter().filter(|p| stratum_of(*p) == PrincipalStratum::P1).collect();
        let mut sum = 0.0;
        for p in &p1 {
            sum += individual_effect(p, Assessment::T2);
        }
        let v = oracle_estimand(&pop, &principal()).unwrap();
        assert_eq!(v.population_size_used, p1.len());
        assert_eq!(v.value, sum / p1.len() as f64);
    }
}
