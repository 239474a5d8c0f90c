//! Observed-data estimators, one per intercurrent-event strategy, plus a
//! percentile bootstrap.
//!
//! All six estimators are thin wrappers over one analysis engine driven by an
//! [`AnalysisTarget`]; specs combining several strategies run the same engine.

use std::collections::BTreeMap;

use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

pub mod bootstrap;
pub mod imputation;
pub mod linalg;
pub mod logistic;
pub mod ols;
mod pipeline;
pub mod principal;

pub use bootstrap::bootstrap_ci;
pub use ols::{fit, ols_fit, DesignMatrix, Formula, OlsFit};

use crate::analysis_sets::AnalysisSet;
use crate::error::Result;
use crate::estimand::{EstimandSpec, IceKind, Population, Strategy, StrategyKind, StrategyTag};
use crate::potential_outcomes::{Assessment, ObservedRecord, PrincipalStratum};
use crate::scalar::{lit, widen, Real};

pub const DEFAULT_IMPUTATIONS: usize = 20;
pub const DEFAULT_WORST: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateResult<T> {
    pub point: T,
    pub std_error: T,
    pub ci_low: T,
    pub ci_high: T,
    pub n_used: usize,
    /// 0 when no value was imputed.
    pub n_imputations: usize,
    pub strategy: StrategyTag,
}

/// Two-sided critical value; t reference when `dof` is given.
pub fn critical_value(level: f64, dof: Option<f64>) -> f64 {
    let q = 0.5 + level / 2.0;
    match dof {
        Some(d) if d.is_finite() => StudentsT::new(0.0, 1.0, d).expect("positive dof").inverse_cdf(q),
        _ => Normal::standard().inverse_cdf(q),
    }
}

impl<T: Real> EstimateResult<T> {
    pub(crate) fn from_variance(
        point: T,
        variance: T,
        dof: Option<f64>,
        level: f64,
        n_used: usize,
        n_imputations: usize,
        strategy: StrategyTag,
    ) -> Self {
        let std_error = variance.max(T::zero()).sqrt();
        let half = std_error * lit(critical_value(level, dof));
        EstimateResult {
            point,
            std_error,
            ci_low: point - half,
            ci_high: point + half,
            n_used,
            n_imputations,
            strategy,
        }
    }

    pub fn covers(&self, truth: T) -> bool {
        self.ci_low <= truth && truth <= self.ci_high
    }

    pub fn to_f64(&self) -> EstimateResult<f64> {
        EstimateResult {
            point: widen(self.point),
            std_error: widen(self.std_error),
            ci_low: widen(self.ci_low),
            ci_high: widen(self.ci_high),
            n_used: self.n_used,
            n_imputations: self.n_imputations,
            strategy: self.strategy.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimatorOptions {
    pub n_imputations: usize,
    /// Confidence level of the Wald (or Rubin t) interval.
    pub level: f64,
    /// Seed of the imputation stream.
    pub seed: u64,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        EstimatorOptions { n_imputations: DEFAULT_IMPUTATIONS, level: 0.95, seed: 0 }
    }
}

/// What the analysis engine does to the observed records.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisTarget {
    pub at: Assessment,
    pub policies: BTreeMap<IceKind, Strategy>,
    /// Principal stratum restriction, implemented by principal-score weighting.
    pub stratum: Option<PrincipalStratum>,
    /// Analysis set the records are restricted to before anything else.
    pub set: Option<AnalysisSet>,
    /// Adds an indicator for endpoints taken at the first assessment.
    pub adjust_time: bool,
    pub strategy: StrategyTag,
}

impl AnalysisTarget {
    /// Target implied by a spec. Time adjustment is on whenever a
    /// while-on-treatment policy is present.
    pub fn from_spec(spec: &EstimandSpec) -> Self {
        let adjust_time = spec.ice_policies.values().any(|s| *s == Strategy::WhileOnTreatment);
        AnalysisTarget {
            at: spec.endpoint.at,
            policies: spec.ice_policies.clone(),
            stratum: spec.stratum(),
            set: match spec.population {
                Population::AnalysisSet(s) => Some(s),
                _ => None,
            },
            adjust_time,
            strategy: spec.strategy_tag(),
        }
    }

    fn single(policies: &[(IceKind, Strategy)]) -> Self {
        Self::from_spec(&EstimandSpec::with_policies("", policies))
    }

    pub fn policy(&self, kind: IceKind) -> Strategy {
        self.policies.get(&kind).copied().unwrap_or(Strategy::TreatmentPolicy)
    }

    pub fn therapy_adjusted(&self) -> bool {
        self.policies.values().any(|s| *s == Strategy::Confounder)
    }

    pub fn treatment_policy() -> Self {
        Self::single(&[])
    }

    pub fn hypothetical() -> Self {
        Self::single(&[
            (IceKind::ConcomitantTherapy, Strategy::Hypothetical),
            (IceKind::Death, Strategy::Hypothetical),
        ])
    }

    pub fn composite(worst: f64) -> Self {
        Self::single(&[(IceKind::Death, Strategy::Composite { worst })])
    }

    pub fn while_on_treatment(adjust_time: bool) -> Self {
        let mut t = Self::single(&[(IceKind::Death, Strategy::WhileOnTreatment)]);
        t.adjust_time = adjust_time;
        t
    }

    pub fn principal_stratum() -> Self {
        let mut spec = EstimandSpec::with_policies(
            "",
            &[(IceKind::Withdrawal, Strategy::PrincipalStratum(PrincipalStratum::P1))],
        );
        spec.population = Population::Stratum(PrincipalStratum::P1);
        Self::from_spec(&spec)
    }

    pub fn confounder_adjusted() -> Self {
        Self::single(&[(IceKind::ConcomitantTherapy, Strategy::Confounder)])
    }
}

/// Named single-strategy estimator, or the general pipeline for specs that
/// combine strategies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EstimatorSelector {
    TreatmentPolicy,
    Hypothetical,
    Composite { worst: f64 },
    WhileOnTreatment { adjust_time: bool },
    PrincipalStratum,
    ConfounderAdjusted,
    Pipeline,
}

impl EstimatorSelector {
    pub fn name(&self) -> &'static str {
        match self {
            EstimatorSelector::TreatmentPolicy => "estimate_treatment_policy",
            EstimatorSelector::Hypothetical => "estimate_hypothetical",
            EstimatorSelector::Composite { .. } => "estimate_composite",
            EstimatorSelector::WhileOnTreatment { .. } => "estimate_while_on_treatment",
            EstimatorSelector::PrincipalStratum => "estimate_principal_stratum",
            EstimatorSelector::ConfounderAdjusted => "estimate_confounder_adjusted",
            EstimatorSelector::Pipeline => "pipeline",
        }
    }

    /// Selector for a target whose only non-trivial strategy is `kind`.
    pub fn for_single(kind: StrategyKind, target: &AnalysisTarget) -> Self {
        match kind {
            StrategyKind::TreatmentPolicy => EstimatorSelector::TreatmentPolicy,
            StrategyKind::Hypothetical => EstimatorSelector::Hypothetical,
            StrategyKind::Composite => {
                let worst = target
                    .policies
                    .values()
                    .find_map(|s| match s {
                        Strategy::Composite { worst } => Some(*worst),
                        _ => None,
                    })
                    .unwrap_or(DEFAULT_WORST);
                EstimatorSelector::Composite { worst }
            }
            StrategyKind::WhileOnTreatment => EstimatorSelector::WhileOnTreatment { adjust_time: target.adjust_time },
            StrategyKind::PrincipalStratum => EstimatorSelector::PrincipalStratum,
            StrategyKind::ConfounderAdjusted => EstimatorSelector::ConfounderAdjusted,
        }
    }
}

/// Runs the analysis engine on `records` for `target`.
pub fn estimate<T: Real>(
    records: &[ObservedRecord<T>],
    target: &AnalysisTarget,
    opts: &EstimatorOptions,
) -> Result<EstimateResult<T>> {
    match target.set {
        Some(set) => {
            let kept: Vec<ObservedRecord<T>> =
                records.iter().filter(|r| set.contains(&r.set_flags)).cloned().collect();
            pipeline::run(&kept, target, opts)
        }
        None => pipeline::run(records, target, opts),
    }
}

/// Regression of the second-assessment endpoint on treatment and confounders,
/// ignoring concomitant therapy; deaths and withdrawals drop out.
pub fn estimate_treatment_policy<T: Real>(records: &[ObservedRecord<T>]) -> Result<EstimateResult<T>> {
    estimate(records, &AnalysisTarget::treatment_policy(), &EstimatorOptions::default())
}

/// Sets endpoints after concomitant therapy or death missing, imputes them
/// from arm-specific regressions and pools with Rubin's rules.
pub fn estimate_hypothetical<T: Real>(
    records: &[ObservedRecord<T>],
    n_imputations: usize,
    seed: u64,
) -> Result<EstimateResult<T>> {
    let opts = EstimatorOptions { n_imputations, seed, ..Default::default() };
    estimate(records, &AnalysisTarget::hypothetical(), &opts)
}

/// Deaths recoded to `worst` before the regression.
pub fn estimate_composite<T: Real>(records: &[ObservedRecord<T>], worst: f64) -> Result<EstimateResult<T>> {
    estimate(records, &AnalysisTarget::composite(worst), &EstimatorOptions::default())
}

/// Last assessment before death; participants with none drop out.
pub fn estimate_while_on_treatment<T: Real>(
    records: &[ObservedRecord<T>],
    adjust_time: bool,
) -> Result<EstimateResult<T>> {
    estimate(records, &AnalysisTarget::while_on_treatment(adjust_time), &EstimatorOptions::default())
}

/// Effect among those who would tolerate both treatments, by principal-score
/// weighting of control-arm tolerators. Assumes monotone tolerability and
/// principal ignorability given the confounders.
pub fn estimate_principal_stratum<T: Real>(records: &[ObservedRecord<T>]) -> Result<EstimateResult<T>> {
    estimate(records, &AnalysisTarget::principal_stratum(), &EstimatorOptions::default())
}

/// Treatment-policy regression with concomitant therapy as an extra covariate.
pub fn estimate_confounder_adjusted<T: Real>(records: &[ObservedRecord<T>]) -> Result<EstimateResult<T>> {
    estimate(records, &AnalysisTarget::confounder_adjusted(), &EstimatorOptions::default())
}
