//! Arm-specific regression imputation and multiple-imputation pooling.

use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use super::linalg::cholesky;
use super::ols::OlsFit;
use crate::scalar::{lit, widen, Real};

/// One posterior draw of an imputation model's coefficients and residual
/// standard deviation, taken under the usual noninformative prior:
/// `sigma*^2 = s^2 (n - p) / chi2(n - p)` and
/// `beta* ~ N(beta_hat, sigma*^2 (X'X)^-1)`.
#[derive(Clone, Debug)]
pub struct ModelDraw<T> {
    pub coefficients: Vec<T>,
    pub sigma: T,
}

pub fn draw_parameters<T: Real>(fit: &OlsFit<T>, rng: &mut ChaCha8Rng) -> ModelDraw<T> {
    let p = fit.p();
    let dof = (fit.n - p) as f64;
    let chi: f64 = ChiSquared::new(dof).expect("positive dof").sample(rng);
    let z: Vec<f64> = (0..p).map(|_| StandardNormal.sample(rng)).collect();
    let s2 = widen(fit.residual_variance).max(0.0);
    if s2 == 0.0 {
        return ModelDraw { coefficients: fit.coefficients.clone(), sigma: T::zero() };
    }
    let sigma = (s2 * dof / chi).sqrt();
    let l = cholesky(&fit.bread, p, T::zero()).expect("bread of a successful fit is positive definite");
    let coefficients = (0..p)
        .map(|i| {
            let shift: f64 = (0..=i).map(|k| widen(l[i * p + k]) * z[k]).sum();
            fit.coefficients[i] + lit::<T>(sigma * shift)
        })
        .collect();
    ModelDraw { coefficients, sigma: lit(sigma) }
}

impl<T: Real> ModelDraw<T> {
    /// Prediction plus a normal residual draw.
    pub fn impute(&self, row: impl IntoIterator<Item = T>, rng: &mut ChaCha8Rng) -> T {
        let mean: T = row.into_iter().zip(&self.coefficients).map(|(x, b)| x * *b).sum();
        let e: f64 = StandardNormal.sample(rng);
        if self.sigma == T::zero() {
            mean
        } else {
            mean + self.sigma * lit(e)
        }
    }
}

/// Pooled estimate across completed datasets.
#[derive(Clone, Debug, PartialEq)]
pub struct Pooled<T> {
    pub point: T,
    pub within: T,
    pub between: T,
    pub total: T,
    /// Reference degrees of freedom; `None` means use the normal distribution.
    pub dof: Option<f64>,
}

/// Combines per-imputation `(estimate, variance)` pairs: the pooled point is
/// the mean, total variance `W + (1 + 1/m) B`, and the reference t
/// distribution has `(m - 1) (1 + W / ((1 + 1/m) B))^2` degrees of freedom.
pub fn pool<T: Real>(results: &[(T, T)]) -> Pooled<T> {
    let m = results.len();
    assert!(m > 0, "pooling needs at least one completed dataset");
    let mf: T = lit(m as f64);
    let point = results.iter().map(|r| r.0).sum::<T>() / mf;
    let within = results.iter().map(|r| r.1).sum::<T>() / mf;
    let between = if m > 1 {
        results.iter().map(|r| (r.0 - point) * (r.0 - point)).sum::<T>() / lit((m - 1) as f64)
    } else {
        T::zero()
    };
    let inflate = T::one() + T::one() / mf;
    let total = within + inflate * between;
    let dof = if m > 1 && between > T::zero() {
        let ratio = widen(within) / (widen(inflate) * widen(between));
        Some((m as f64 - 1.0) * (1.0 + ratio).powi(2))
    } else {
        None
    };
    Pooled { point, within, between, total, dof }
}
