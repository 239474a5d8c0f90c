//! Small dense symmetric solvers for normal equations. Matrices are
//! row-major `p x p` slices; `p` is the number of regression columns, so
//! everything here is tiny.

use crate::scalar::Real;

/// Cholesky factor `L` (row-major, lower triangle) of a symmetric positive
/// definite matrix. On failure returns the index of the first pivot whose
/// squared residual falls below `tol` times the diagonal entry, i.e. the
/// first column numerically dependent on the ones before it.
pub fn cholesky<T: Real>(a: &[T], p: usize, tol: T) -> Result<Vec<T>, usize> {
    debug_assert_eq!(a.len(), p * p);
    let mut l = vec![T::zero(); p * p];
    for j in 0..p {
        let mut d = a[j * p + j];
        for k in 0..j {
            d = d - l[j * p + k] * l[j * p + k];
        }
        // NaN pivots fail both comparisons.
        let pivot_ok = d > tol * a[j * p + j] && a[j * p + j] > T::zero();
        if !pivot_ok {
            return Err(j);
        }
        let djj = d.sqrt();
        l[j * p + j] = djj;
        for i in (j + 1)..p {
            let mut s = a[i * p + j];
            for k in 0..j {
                s = s - l[i * p + k] * l[j * p + k];
            }
            l[i * p + j] = s / djj;
        }
    }
    Ok(l)
}

/// Solves `L L' x = b` given the Cholesky factor.
pub fn cholesky_solve<T: Real>(l: &[T], p: usize, b: &[T]) -> Vec<T> {
    let mut z = b.to_vec();
    for i in 0..p {
        let mut s = z[i];
        for k in 0..i {
            s = s - l[i * p + k] * z[k];
        }
        z[i] = s / l[i * p + i];
    }
    for i in (0..p).rev() {
        let mut s = z[i];
        for k in (i + 1)..p {
            s = s - l[k * p + i] * z[k];
        }
        z[i] = s / l[i * p + i];
    }
    z
}

/// Inverse of `L L'`.
pub fn cholesky_inverse<T: Real>(l: &[T], p: usize) -> Vec<T> {
    let mut inv = vec![T::zero(); p * p];
    let mut e = vec![T::zero(); p];
    for j in 0..p {
        e.iter_mut().for_each(|v| *v = T::zero());
        e[j] = T::one();
        let col = cholesky_solve(l, p, &e);
        for i in 0..p {
            inv[i * p + j] = col[i];
        }
    }
    // symmetrize rounding noise
    for i in 0..p {
        for j in (i + 1)..p {
            let m = (inv[i * p + j] + inv[j * p + i]) / (T::one() + T::one());
            inv[i * p + j] = m;
            inv[j * p + i] = m;
        }
    }
    inv
}

/// `A B` for row-major `p x p` matrices.
pub fn matmul<T: Real>(a: &[T], b: &[T], p: usize) -> Vec<T> {
    let mut out = vec![T::zero(); p * p];
    for i in 0..p {
        for k in 0..p {
            let aik = a[i * p + k];
            for j in 0..p {
                out[i * p + j] = out[i * p + j] + aik * b[k * p + j];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_spd_system() {
        let a = [4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0];
        let l = cholesky(&a, 3, 1e-12).unwrap();
        let x = cholesky_solve(&l, 3, &[1.0, 2.0, 3.0]);
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| a[i * 3 + j] * x[j]).sum();
            assert!((r - [1.0, 2.0, 3.0][i]).abs() < 1e-12);
        }
        let inv = cholesky_inverse(&l, 3);
        let id = matmul(&a, &inv, 3);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((id[i * 3 + j] - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reports_dependent_column() {
        // third column = first + second
        let a = [1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 2.0];
        assert_eq!(cholesky(&a, 3, 1e-12), Err(2));
    }
}
