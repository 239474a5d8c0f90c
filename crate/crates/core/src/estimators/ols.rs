//! Least squares through the normal equations.

use log::warn;

use super::linalg::{cholesky, cholesky_inverse, cholesky_solve, matmul};
use crate::error::{Error, Result};
use crate::potential_outcomes::ObservedRecord;
use crate::scalar::{lit, Real};

pub const INTERCEPT: &str = "intercept";
pub const TREATMENT: &str = "treatment";
pub const THERAPY: &str = "m";
pub const TIME: &str = "time_t1";

/// Confounder column name (`c1`, `c2`, ...).
pub fn confounder_name(j: usize) -> String {
    format!("c{}", j + 1)
}

/// Column-major design matrix with named columns. Column 0 is the intercept.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignMatrix<T> {
    pub names: Vec<String>,
    pub columns: Vec<Vec<T>>,
}

impl<T: Real> DesignMatrix<T> {
    pub fn with_intercept(rows: usize) -> Self {
        DesignMatrix { names: vec![INTERCEPT.to_string()], columns: vec![vec![T::one(); rows]] }
    }

    pub fn push(&mut self, name: impl Into<String>, column: Vec<T>) {
        debug_assert_eq!(column.len(), self.rows());
        self.names.push(name.into());
        self.columns.push(column);
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = T> + '_ {
        self.columns.iter().map(move |c| c[i])
    }
}

/// Fitted linear model.
#[derive(Clone, Debug, PartialEq)]
pub struct OlsFit<T> {
    pub names: Vec<String>,
    pub coefficients: Vec<T>,
    /// Residual variance estimate (`RSS / (n - p)` when unweighted).
    pub residual_variance: T,
    /// `(X' W X)^-1`, row-major.
    pub bread: Vec<T>,
    /// Coefficient covariance, row-major.
    pub covariance: Vec<T>,
    pub n: usize,
    /// Zero-variance columns removed before fitting.
    pub dropped: Vec<String>,
}

impl<T: Real> OlsFit<T> {
    pub fn p(&self) -> usize {
        self.coefficients.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn coefficient(&self, name: &str) -> Option<T> {
        self.index_of(name).map(|j| self.coefficients[j])
    }

    pub fn std_error(&self, name: &str) -> Option<T> {
        let p = self.p();
        self.index_of(name).map(|j| self.covariance[j * p + j].max(T::zero()).sqrt())
    }

    /// Coefficient of the treatment column.
    pub fn treatment_effect(&self) -> T {
        self.coefficient(TREATMENT).expect("design always carries a treatment column")
    }

    /// Linear prediction for a row given in the fitted column order.
    pub fn predict(&self, row: impl IntoIterator<Item = T>) -> T {
        row.into_iter().zip(&self.coefficients).map(|(x, b)| x * *b).sum()
    }
}

fn is_constant<T: Real>(col: &[T]) -> bool {
    col.windows(2).all(|w| w[0] == w[1])
}

/// Fits `y ~ design`, optionally with non-negative case weights.
///
/// Constant columns other than the intercept are dropped with a warning,
/// except the treatment column, which is an error. A column collinear with
/// earlier ones is a [`Error::SingularDesign`] naming it.
pub fn fit<T: Real>(design: &DesignMatrix<T>, y: &[T], weights: Option<&[T]>) -> Result<OlsFit<T>> {
    let n = design.rows();
    assert_eq!(y.len(), n, "response length must match design rows");
    let mut names = Vec::new();
    let mut cols: Vec<&[T]> = Vec::new();
    let mut dropped = Vec::new();
    for (j, (name, col)) in design.names.iter().zip(&design.columns).enumerate() {
        if j > 0 && n > 0 && is_constant(col) {
            if name == TREATMENT {
                return Err(Error::SingularDesign { column: name.clone() });
            }
            warn!("dropping zero-variance column `{name}`");
            dropped.push(name.clone());
            continue;
        }
        names.push(name.clone());
        cols.push(col);
    }
    let p = cols.len();
    if n < p + 1 {
        return Err(Error::InsufficientData { available: n, required: p + 1 });
    }

    let w = |i: usize| weights.map_or(T::one(), |w| w[i]);
    let mut xtwx = vec![T::zero(); p * p];
    let mut xtw2x = vec![T::zero(); p * p];
    let mut xtwy = vec![T::zero(); p];
    for i in 0..n {
        let wi = w(i);
        for a in 0..p {
            let xa = cols[a][i];
            xtwy[a] = xtwy[a] + wi * xa * y[i];
            for b in 0..=a {
                let v = xa * cols[b][i];
                xtwx[a * p + b] = xtwx[a * p + b] + wi * v;
                xtw2x[a * p + b] = xtw2x[a * p + b] + wi * wi * v;
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            xtwx[b * p + a] = xtwx[a * p + b];
            xtw2x[b * p + a] = xtw2x[a * p + b];
        }
    }
    let l = cholesky(&xtwx, p, T::rank_tolerance())
        .map_err(|j| Error::SingularDesign { column: names[j].clone() })?;
    let beta = cholesky_solve(&l, p, &xtwy);
    let bread = cholesky_inverse(&l, p);

    let mut wrss = T::zero();
    let mut wsum = T::zero();
    for i in 0..n {
        let fitted: T = (0..p).map(|a| cols[a][i] * beta[a]).sum();
        let e = y[i] - fitted;
        wrss = wrss + w(i) * e * e;
        wsum = wsum + w(i);
    }
    let nf: T = lit(n as f64);
    let dof: T = lit((n - p) as f64);
    let residual_variance = if weights.is_none() {
        wrss / dof
    } else if wsum > T::zero() {
        wrss / wsum * nf / dof
    } else {
        T::zero()
    };
    let covariance = if weights.is_none() {
        bread.iter().map(|&v| v * residual_variance).collect()
    } else {
        matmul(&matmul(&bread, &xtw2x, p), &bread, p)
            .into_iter()
            .map(|v| v * residual_variance)
            .collect()
    };
    Ok(OlsFit { names, coefficients: beta, residual_variance, bread, covariance, n, dropped })
}

/// Covariates entering an outcome regression besides intercept and treatment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Formula {
    pub confounders: bool,
    pub therapy: bool,
}

impl Formula {
    pub const ADJUSTED: Formula = Formula { confounders: true, therapy: false };
    pub const UNADJUSTED: Formula = Formula { confounders: false, therapy: false };
    pub const WITH_THERAPY: Formula = Formula { confounders: true, therapy: true };
}

/// Regression of the second-assessment endpoint on treatment and the
/// selected covariates, over records where that endpoint is present.
pub fn ols_fit<T: Real>(records: &[ObservedRecord<T>], formula: Formula) -> Result<OlsFit<T>> {
    let used: Vec<_> = records.iter().filter(|r| r.y2_obs.is_some()).collect();
    let mut d = DesignMatrix::with_intercept(used.len());
    d.push(TREATMENT, used.iter().map(|r| bool_to(r.x_obs)).collect());
    if formula.confounders {
        let k = used.first().map_or(0, |r| r.c.len());
        for j in 0..k {
            d.push(confounder_name(j), used.iter().map(|r| r.c[j]).collect());
        }
    }
    if formula.therapy {
        d.push(THERAPY, used.iter().map(|r| bool_to(r.m_obs)).collect());
    }
    let y: Vec<T> = used.iter().map(|r| r.y2_obs.unwrap()).collect();
    fit(&d, &y, None)
}

#[inline]
pub fn bool_to<T: Real>(b: bool) -> T {
    if b {
        T::one()
    } else {
        T::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential_outcomes::{DeathTime, IceCase, SetFlags};

    fn rec(x: bool, c: f64, y2: Option<f64>) -> ObservedRecord<f64> {
        ObservedRecord {
            id: 0,
            c: vec![c],
            r_obs: x,
            x_obs: x,
            m_obs: false,
            death_obs: DeathTime::None,
            t_obs: true,
            y1_obs: y2,
            y2_obs: y2,
            case: IceCase::None,
            set_flags: SetFlags::default(),
        }
    }

    /// Normal-equation residual `X'(y - X b)` relative to `X'y`.
    fn normal_equation_residual(d: &DesignMatrix<f64>, y: &[f64], f: &OlsFit<f64>) -> f64 {
        let kept: Vec<&Vec<f64>> = f
            .names
            .iter()
            .map(|n| &d.columns[d.names.iter().position(|m| m == n).unwrap()])
            .collect();
        let mut worst: f64 = 0.0;
        for col in &kept {
            let mut g = 0.0;
            let mut scale = 0.0;
            for i in 0..y.len() {
                let fitted = f.predict(kept.iter().map(|c| c[i]));
                g += col[i] * (y[i] - fitted);
                scale += (col[i] * y[i]).abs();
            }
            worst = worst.max(g.abs() / scale.max(1.0));
        }
        worst
    }

    #[test]
    fn recovers_noiseless_coefficients() {
        let recs: Vec<_> = (0..12)
            .map(|i| {
                let x = i % 3 == 0;
                let c = i as f64 * 0.37 - 2.0;
                rec(x, c, Some(1.0 + 2.0 * if x { 1.0 } else { 0.0 } + 0.5 * c))
            })
            .collect();
        let f = ols_fit(&recs, Formula::ADJUSTED).unwrap();
        for (b, e) in f.coefficients.iter().zip([1.0, 2.0, 0.5]) {
            assert!((b - e).abs() < 1e-10, "{b} vs {e}");
        }
        assert!(f.residual_variance < 1e-20);
    }

    #[test]
    fn constant_treatment_is_singular() {
        let recs: Vec<_> = (0..6).map(|i| rec(true, i as f64, Some(i as f64))).collect();
        assert_eq!(
            ols_fit(&recs, Formula::ADJUSTED).unwrap_err(),
            Error::SingularDesign { column: TREATMENT.into() }
        );
    }

    #[test]
    fn hand_solved_five_records() {
        // y on (1, x, c):
        //   x = 0,0,1,1,1   c = 0,1,0,1,2   y = 1,2,4,4,7
        // X'X = [[5,3,4],[3,3,3],[4,3,6]], X'y = [18,15,20].
        // Elimination: b0 + b1 + b2 = 5, 2 b0 + b2 = 3, b0 + 3 b2 = 5
        //   => b = (0.8, 2.8, 1.4).
        let data = [(false, 0.0, 1.0), (false, 1.0, 2.0), (true, 0.0, 4.0), (true, 1.0, 4.0), (true, 2.0, 7.0)];
        let recs: Vec<_> = data.iter().map(|&(x, c, y)| rec(x, c, Some(y))).collect();
        let f = ols_fit(&recs, Formula::ADJUSTED).unwrap();
        for (b, e) in f.coefficients.iter().zip([0.8, 2.8, 1.4]) {
            assert!((b - e).abs() < 1e-12, "{b} vs {e}");
        }
        // fitted 0.8, 2.2, 3.6, 5.0, 6.4 -> RSS 1.6 over 5 - 3 dof
        assert!((f.residual_variance - 0.8).abs() < 1e-12);
    }

    #[test]
    fn drops_zero_variance_covariate_and_names_collinear_one() {
        let n = 10;
        let mut d = DesignMatrix::with_intercept(n);
        d.push(TREATMENT, (0..n).map(|i| (i % 2) as f64).collect());
        d.push("flat", vec![3.0; n]);
        d.push("c1", (0..n).map(|i| i as f64).collect());
        let y: Vec<f64> = (0..n).map(|i| i as f64 * 0.5 + (i % 2) as f64).collect();
        let f = fit(&d, &y, None).unwrap();
        assert_eq!(f.dropped, vec!["flat".to_string()]);
        assert_eq!(f.names, vec![INTERCEPT, TREATMENT, "c1"]);
        assert!(normal_equation_residual(&d, &y, &f) < 1e-8);

        d.push("c1_twice", (0..n).map(|i| 2.0 * i as f64).collect());
        assert_eq!(fit(&d, &y, None).unwrap_err(), Error::SingularDesign { column: "c1_twice".into() });
    }

    #[test]
    fn too_few_rows() {
        let recs: Vec<_> = [(false, 0.0), (true, 1.0), (true, 0.5)]
            .iter()
            .map(|&(x, c)| rec(x, c, Some(c)))
            .collect();
        assert!(matches!(ols_fit(&recs, Formula::ADJUSTED), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn unit_weights_match_unweighted_fit() {
        let n = 40;
        let mut d = DesignMatrix::with_intercept(n);
        d.push(TREATMENT, (0..n).map(|i| (i % 2) as f64).collect());
        d.push("c1", (0..n).map(|i| ((i * 7) % 11) as f64).collect());
        let y: Vec<f64> = (0..n).map(|i| ((i * 13) % 17) as f64).collect();
        let a = fit(&d, &y, None).unwrap();
        let b = fit(&d, &y, Some(&vec![1.0; n])).unwrap();
        assert_eq!(a.coefficients, b.coefficients);
        for (u, v) in a.covariance.iter().zip(&b.covariance) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn works_in_single_precision() {
        let recs: Vec<ObservedRecord<f32>> = (0..20)
            .map(|i| {
                let x = i % 2 == 0;
                let c = i as f32 * 0.1;
                ObservedRecord {
                    id: i,
                    c: vec![c],
                    r_obs: x,
                    x_obs: x,
                    m_obs: false,
                    death_obs: DeathTime::None,
                    t_obs: true,
                    y1_obs: None,
                    y2_obs: Some(1.0 + if x { 2.0 } else { 0.0 } + 0.5 * c),
                    case: IceCase::None,
                    set_flags: SetFlags::default(),
                }
            })
            .collect();
        let f = ols_fit(&recs, Formula::ADJUSTED).unwrap();
        assert!((f.treatment_effect() - 2.0).abs() < 1e-4);
    }
}
