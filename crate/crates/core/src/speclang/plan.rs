use crate::error::{Error, Result};
use crate::estimand::{EstimandSpec, IceKind, Population, Strategy, StrategyKind, StrategyTag};
use crate::estimators::{AnalysisTarget, EstimatorSelector};
use crate::potential_outcomes::PrincipalStratum;

/// Executable form of an estimand: what the oracle computes and which
/// estimator, with which record transformations, targets it.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisPlan {
    pub oracle: StrategyTag,
    pub selector: EstimatorSelector,
    pub target: AnalysisTarget,
    /// Record transformations in the order they are applied.
    pub steps: Vec<StrategyKind>,
}

pub fn plan_of(spec: &EstimandSpec) -> Result<AnalysisPlan> {
    if let Some(s) = spec.stratum() {
        if s != PrincipalStratum::P1 {
            return Err(Error::Plan(format!(
                "only the tolerate_both stratum is identified under monotone tolerability, not {}",
                s.long_name()
            )));
        }
    }
    if matches!(spec.population, Population::Stratum(_)) {
        match spec.policy(IceKind::Withdrawal) {
            Strategy::TreatmentPolicy | Strategy::PrincipalStratum(_) => {}
            other => {
                return Err(Error::Plan(format!(
                    "withdrawal policy {} conflicts with the stratum population: tolerators never withdraw",
                    other.kind()
                )))
            }
        }
    }
    let target = AnalysisTarget::from_spec(spec);
    let tag = spec.strategy_tag();
    let steps: Vec<StrategyKind> =
        tag.kinds().iter().copied().filter(|k| *k != StrategyKind::TreatmentPolicy).collect();
    let selector = if tag.is_single() {
        EstimatorSelector::for_single(tag.kinds()[0], &target)
    } else {
        EstimatorSelector::Pipeline
    };
    Ok(AnalysisPlan { oracle: tag, selector, target, steps })
}
