//! Logistic regression by Newton-Raphson (IRLS).

use super::linalg::{cholesky, cholesky_solve};
use super::ols::DesignMatrix;
use crate::error::{Error, Result};
use crate::scalar::{lit, logistic, Real};

const MAX_ITER: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct LogisticFit<T> {
    pub names: Vec<String>,
    pub coefficients: Vec<T>,
    pub iterations: usize,
}

impl<T: Real> LogisticFit<T> {
    pub fn probability(&self, row: impl IntoIterator<Item = T>) -> T {
        logistic(row.into_iter().zip(&self.coefficients).map(|(x, b)| x * *b).sum::<T>())
    }
}

/// Maximum-likelihood fit of `P(y = 1) = logistic(X b)`.
///
/// Fails with [`Error::Inestimable`] when the outcome is constant or the
/// iterations diverge (complete separation).
pub fn fit_logistic<T: Real>(design: &DesignMatrix<T>, y: &[bool]) -> Result<LogisticFit<T>> {
    let n = design.rows();
    let p = design.columns.len();
    assert_eq!(y.len(), n);
    let ones = y.iter().filter(|&&v| v).count();
    if ones == 0 || ones == n {
        return Err(Error::Inestimable("logistic outcome is constant".into()));
    }
    let mut beta = vec![T::zero(); p];
    let tol: T = lit(1e-10);
    for it in 1..=MAX_ITER {
        let mut info = vec![T::zero(); p * p];
        let mut score = vec![T::zero(); p];
        for (i, &yi) in y.iter().enumerate() {
            let eta: T = (0..p).map(|a| design.columns[a][i] * beta[a]).sum();
            let pr = logistic(eta);
            let wi = pr * (T::one() - pr);
            let resid = if yi { T::one() - pr } else { -pr };
            for a in 0..p {
                let xa = design.columns[a][i];
                score[a] = score[a] + xa * resid;
                for b in 0..=a {
                    info[a * p + b] = info[a * p + b] + wi * xa * design.columns[b][i];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                info[b * p + a] = info[a * p + b];
            }
        }
        let l = cholesky(&info, p, T::rank_tolerance()).map_err(|j| {
            Error::Inestimable(format!("logistic information singular at `{}`", design.names[j]))
        })?;
        let step = cholesky_solve(&l, p, &score);
        let mut biggest = T::zero();
        for (b, s) in beta.iter_mut().zip(&step) {
            *b = *b + *s;
            biggest = biggest.max(s.abs());
        }
        if beta.iter().any(|b| !b.is_finite()) {
            break;
        }
        if biggest < tol {
            return Ok(LogisticFit { names: design.names.clone(), coefficients: beta, iterations: it });
        }
    }
    Err(Error::Inestimable("logistic regression did not converge (separation?)".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_closed_form_for_single_binary_covariate() {
        // With one binary covariate the MLE reproduces the cell proportions:
        // P(y|x=0) = 2/8, P(y|x=1) = 6/8.
        let x: Vec<f64> = (0..16).map(|i| if i < 8 { 0.0 } else { 1.0 }).collect();
        let y: Vec<bool> = (0..16).map(|i| matches!(i, 0 | 1 | 8..=13)).collect();
        let mut d = DesignMatrix::with_intercept(16);
        d.push("x", x);
        let f = fit_logistic(&d, &y).unwrap();
        assert!((f.probability([1.0, 0.0]) - 0.25).abs() < 1e-10);
        assert!((f.probability([1.0, 1.0]) - 0.75).abs() < 1e-10);
        assert!((f.coefficients[0] - (1.0f64 / 3.0).ln()).abs() < 1e-9);
    }

    #[test]
    fn separation_and_constant_outcomes_fail() {
        let mut d = DesignMatrix::with_intercept(6);
        d.push("x", vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        let sep = [false, false, false, true, true, true];
        assert!(fit_logistic(&d, &sep).is_err());
        assert!(fit_logistic(&d, &[true; 6]).is_err());
    }
}
