//! The analysis engine every strategy runs through.
//!
//! Records pass through the fixed composition order: composite recoding,
//! while-on-treatment substitution, hypothetical imputation, stratum
//! weighting, regression adjustment. Single-strategy estimators are this
//! engine with one non-trivial policy.

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;

use super::imputation::{draw_parameters, pool, ModelDraw};
use super::ols::{bool_to, confounder_name, fit, DesignMatrix, OlsFit, THERAPY, TIME, TREATMENT};
use super::principal::principal_weights;
use super::{AnalysisTarget, EstimateResult, EstimatorOptions};
use crate::dgp::{stream_rng, IMPUTATION_STREAM};
use crate::error::{Error, Result};
use crate::estimand::Strategy;
use crate::oracle::ice_at;
use crate::potential_outcomes::{Assessment, ObservedRecord};
use crate::scalar::{lit, Real};

const AUX: &str = "y1";

/// Endpoint status of one record after recoding and selection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Value<T> {
    /// Observed at the target assessment and used as is.
    Observed(T),
    /// Replaced by the composite worst value.
    Recoded(T),
    /// Earlier assessment substituted (while on treatment).
    Earlier(T),
    /// Set missing for imputation.
    Impute,
    /// Unavailable and not imputed; the record drops out.
    Missing,
}

impl<T: Copy> Value<T> {
    fn known(self) -> Option<T> {
        match self {
            Value::Observed(v) | Value::Recoded(v) | Value::Earlier(v) => Some(v),
            Value::Impute | Value::Missing => None,
        }
    }
}

pub(crate) fn prepare<T: Real>(rec: &ObservedRecord<T>, target: &AnalysisTarget) -> Value<T> {
    let at = target.at;
    let observed = || rec.endpoint(at).map_or(Value::Missing, Value::Observed);
    let Some(kind) = ice_at(rec.case, at) else {
        return observed();
    };
    match target.policy(kind) {
        Strategy::Composite { worst } => Value::Recoded(lit(worst)),
        Strategy::WhileOnTreatment => match (at, rec.y1_obs) {
            (Assessment::T2, Some(y1)) => Value::Earlier(y1),
            _ => Value::Missing,
        },
        Strategy::Hypothetical => Value::Impute,
        Strategy::TreatmentPolicy | Strategy::Confounder | Strategy::PrincipalStratum(_) => observed(),
    }
}

fn feature<T: Real>(rec: &ObservedRecord<T>, name: &str) -> T {
    match name {
        "intercept" => T::one(),
        AUX => rec.y1_obs.expect("auxiliary model only used when y1 is observed"),
        c => {
            let j: usize = c[1..].parse().expect("imputation columns are intercept, c<j> or y1");
            rec.c[j - 1]
        }
    }
}

/// Per-arm imputation regressions: with the first assessment as an
/// auxiliary covariate, and without it.
struct ImputationModels<T> {
    fits: BTreeMap<(bool, bool), OlsFit<T>>,
}

impl<T: Real> ImputationModels<T> {
    fn key(rec: &ObservedRecord<T>, at: Assessment) -> (bool, bool) {
        (rec.x_obs, at == Assessment::T2 && rec.y1_obs.is_some())
    }

    fn fit(records: &[ObservedRecord<T>], values: &[Value<T>], at: Assessment) -> Result<Self> {
        let mut needed: Vec<(bool, bool)> = records
            .iter()
            .zip(values)
            .filter(|(_, v)| matches!(v, Value::Impute))
            .map(|(r, _)| Self::key(r, at))
            .collect();
        needed.sort();
        needed.dedup();
        let mut fits = BTreeMap::new();
        for (arm, with_aux) in needed {
            let reference: Vec<(&ObservedRecord<T>, T)> = records
                .iter()
                .zip(values)
                .filter_map(|(r, v)| match v {
                    Value::Observed(y) if r.x_obs == arm && (!with_aux || r.y1_obs.is_some()) => Some((r, *y)),
                    _ => None,
                })
                .collect();
            let arm_name = if arm { "experimental" } else { "control" };
            if reference.is_empty() {
                return Err(Error::Inestimable(format!("no ICE-free records in the {arm_name} arm to impute from")));
            }
            let k = reference[0].0.c.len();
            let mut d = DesignMatrix::with_intercept(reference.len());
            for j in 0..k {
                d.push(confounder_name(j), reference.iter().map(|(r, _)| r.c[j]).collect());
            }
            let y: Vec<T> = reference.iter().map(|(_, y)| *y).collect();
            let mut result = Err(Error::SingularDesign { column: AUX.into() });
            if with_aux {
                let mut with = d.clone();
                with.push(AUX, reference.iter().map(|(r, _)| r.y1_obs.unwrap()).collect());
                result = fit(&with, &y, None);
            }
            // A first assessment collinear with the confounders adds nothing.
            if matches!(&result, Err(Error::SingularDesign { column }) if column == AUX) {
                result = fit(&d, &y, None);
            }
            let f = result.map_err(|e| match e {
                Error::InsufficientData { available, required } => Error::Inestimable(format!(
                    "{available} ICE-free records in the {arm_name} arm, imputation model needs {required}"
                )),
                other => other,
            })?;
            fits.insert((arm, with_aux), f);
        }
        Ok(ImputationModels { fits })
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> BTreeMap<(bool, bool), (Vec<String>, ModelDraw<T>)> {
        self.fits
            .iter()
            .map(|(key, f)| (*key, (f.names.clone(), draw_parameters(f, rng))))
            .collect()
    }
}

struct Analysis<T> {
    point: T,
    variance: T,
    n_used: usize,
}

fn analyze<T: Real>(
    records: &[ObservedRecord<T>],
    values: &[Option<T>],
    earlier: &[bool],
    weights: Option<&[Option<T>]>,
    target: &AnalysisTarget,
) -> Result<Analysis<T>> {
    let used: Vec<usize> = (0..records.len())
        .filter(|&i| values[i].is_some() && weights.is_none_or(|w| w[i].is_some()))
        .collect();
    let n = used.len();
    let mut d = DesignMatrix::with_intercept(n);
    d.push(TREATMENT, used.iter().map(|&i| bool_to(records[i].x_obs)).collect());
    let k = records.first().map_or(0, |r| r.c.len());
    for j in 0..k {
        d.push(confounder_name(j), used.iter().map(|&i| records[i].c[j]).collect());
    }
    if target.therapy_adjusted() {
        d.push(THERAPY, used.iter().map(|&i| bool_to(records[i].m_obs)).collect());
    }
    if target.adjust_time {
        d.push(TIME, used.iter().map(|&i| bool_to(earlier[i])).collect());
    }
    let y: Vec<T> = used.iter().map(|&i| values[i].unwrap()).collect();
    let w: Option<Vec<T>> = weights.map(|w| used.iter().map(|&i| w[i].unwrap()).collect());
    let f = fit(&d, &y, w.as_deref())?;
    let j = f.index_of(TREATMENT).unwrap();
    Ok(Analysis { point: f.coefficients[j], variance: f.covariance[j * f.p() + j], n_used: n })
}

pub(crate) fn run<T: Real>(
    records: &[ObservedRecord<T>],
    target: &AnalysisTarget,
    opts: &EstimatorOptions,
) -> Result<EstimateResult<T>> {
    let values: Vec<Value<T>> = records.iter().map(|r| prepare(r, target)).collect();
    let earlier: Vec<bool> = values.iter().map(|v| matches!(v, Value::Earlier(_))).collect();
    let weights = match target.stratum {
        Some(_) => Some(principal_weights(records)?.0),
        None => None,
    };
    let tag = target.strategy.clone();

    if !values.iter().any(|v| matches!(v, Value::Impute)) {
        let known: Vec<Option<T>> = values.iter().map(|v| v.known()).collect();
        let a = analyze(records, &known, &earlier, weights.as_deref(), target)?;
        return Ok(EstimateResult::from_variance(a.point, a.variance, None, opts.level, a.n_used, 0, tag));
    }

    if opts.n_imputations == 0 {
        return Err(Error::InvalidArgument("n_imputations must be at least 1".into()));
    }
    let models = ImputationModels::fit(records, &values, target.at)?;
    let mut rng = stream_rng(opts.seed, IMPUTATION_STREAM);
    let mut results = Vec::with_capacity(opts.n_imputations);
    let mut n_used = 0;
    for _ in 0..opts.n_imputations {
        let draws = models.draw(&mut rng);
        let completed: Vec<Option<T>> = records
            .iter()
            .zip(&values)
            .map(|(r, v)| match v {
                Value::Impute => {
                    let (names, draw) = &draws[&ImputationModels::key(r, target.at)];
                    Some(draw.impute(names.iter().map(|n| feature(r, n)), &mut rng))
                }
                other => other.known(),
            })
            .collect();
        let a = analyze(records, &completed, &earlier, weights.as_deref(), target)?;
        n_used = a.n_used;
        results.push((a.point, a.variance));
    }
    let pooled = pool(&results);
    Ok(EstimateResult::from_variance(
        pooled.point,
        pooled.total,
        pooled.dof,
        opts.level,
        n_used,
        opts.n_imputations,
        tag,
    ))
}
