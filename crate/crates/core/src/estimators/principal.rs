//! Principal-score weights for the tolerate-both stratum.
//!
//! Under monotonicity (tolerating the experimental treatment implies
//! tolerating control) experimental-arm tolerators are exactly the P1
//! stratum, while control-arm tolerators mix P1 and P3. With principal
//! ignorability, a control tolerator with confounders `c` belongs to P1 with
//! probability `e1(c) / e0(c)`, where `e_x(c) = P(T = 1 | arm x, c)`; that
//! ratio is its weight.

use super::logistic::{fit_logistic, LogisticFit};
use super::ols::{confounder_name, DesignMatrix};
use crate::error::{Error, Result};
use crate::potential_outcomes::ObservedRecord;
use crate::scalar::Real;

/// Tolerability model of one arm; `None` when everyone in the arm tolerates.
fn score_model<T: Real>(arm: &[&ObservedRecord<T>]) -> Result<Option<LogisticFit<T>>> {
    if arm.iter().all(|r| r.t_obs) {
        return Ok(None);
    }
    let k = arm[0].c.len();
    let mut d = DesignMatrix::with_intercept(arm.len());
    for j in 0..k {
        d.push(confounder_name(j), arm.iter().map(|r| r.c[j]).collect());
    }
    let t: Vec<bool> = arm.iter().map(|r| r.t_obs).collect();
    fit_logistic(&d, &t).map(Some)
}

fn score<T: Real>(model: &Option<LogisticFit<T>>, c: &[T]) -> T {
    match model {
        None => T::one(),
        Some(m) => m.probability(std::iter::once(T::one()).chain(c.iter().copied())),
    }
}

/// Summary of the stratum decomposition behind the weights.
#[derive(Clone, Debug, PartialEq)]
pub struct StratumShares {
    /// Estimated share of P1: experimental-arm tolerability rate.
    pub p1: f64,
    /// Estimated share of P1 or P3: control-arm tolerability rate.
    pub p1_or_p3: f64,
}

/// Weight per record: `None` for records outside the analysis (non-tolerators
/// or never dosed), 1 for experimental tolerators, the clamped score ratio
/// for control tolerators.
pub fn principal_weights<T: Real>(records: &[ObservedRecord<T>]) -> Result<(Vec<Option<T>>, StratumShares)> {
    let dosed = |x: bool| -> Vec<&ObservedRecord<T>> {
        records.iter().filter(|r| r.set_flags.any_dose && r.x_obs == x).collect()
    };
    let (arm0, arm1) = (dosed(false), dosed(true));
    let tol = |a: &[&ObservedRecord<T>]| a.iter().filter(|r| r.t_obs).count();
    let (tol0, tol1) = (tol(&arm0), tol(&arm1));
    if tol0 == 0 || tol1 == 0 {
        return Err(Error::Inestimable(format!(
            "no tolerators in the {} arm",
            if tol1 == 0 { "experimental" } else { "control" }
        )));
    }
    let p1 = tol1 as f64 / arm1.len() as f64;
    let p13 = tol0 as f64 / arm0.len() as f64;
    if p1 <= 0.0 {
        return Err(Error::MonotonicityViolation("estimated P1 share is not positive".into()));
    }
    if p1 > p13 {
        // Sampling noise can push the ratio above one when P3 is empty; only
        // a clear excess contradicts monotonicity.
        let se = (p1 * (1.0 - p1) / arm1.len() as f64 + p13 * (1.0 - p13) / arm0.len() as f64).sqrt();
        if p1 - p13 > 3.0 * se {
            return Err(Error::MonotonicityViolation(format!(
                "implied P1 mixture weight {:.4} exceeds 1 (experimental tolerability {p1:.4} > control {p13:.4})",
                p1 / p13
            )));
        }
    }
    let (m0, m1) = (score_model(&arm0)?, score_model(&arm1)?);
    let weights = records
        .iter()
        .map(|r| {
            if !r.set_flags.any_dose || !r.t_obs {
                None
            } else if r.x_obs {
                Some(T::one())
            } else {
                let ratio = score(&m1, &r.c) / score(&m0, &r.c);
                Some(ratio.max(T::zero()).min(T::one()))
            }
        })
        .collect();
    Ok((weights, StratumShares { p1, p1_or_p3: p13 }))
}
