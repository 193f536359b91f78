//! Small dense helpers shared by the geometry pipelines.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::jets::Scalar;

/// Solves `A X = B` for a row-major `n×n` matrix `a` and `n×m` right-hand
/// side `b` by Gaussian elimination with partial pivoting on the values.
/// Works for jets as well as reals.
pub fn solve_scalar<S: Scalar>(a: &[S], n: usize, b: &[S], m: usize, what: &str) -> Result<Vec<S>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n * m);
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    let scale = a.iter().fold(0.0f64, |s, x| s.max(x.value().abs())).max(f64::MIN_POSITIVE);

    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i * n + col]
                    .value()
                    .abs()
                    .total_cmp(&a[j * n + col].value().abs())
            })
            .expect("non-empty range");
        if a[pivot * n + col].value().abs() <= 1e-14 * scale {
            return Err(Error::SingularMatrix(what.to_string()));
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            for k in 0..m {
                b.swap(col * m + k, pivot * m + k);
            }
        }
        let inv = a[col * n + col].lift(1.0).checked_div(&a[col * n + col], what)?;
        for row in (col + 1)..n {
            let factor = a[row * n + col].clone() * inv.clone();
            for k in col..n {
                let t = factor.clone() * a[col * n + k].clone();
                a[row * n + k] = a[row * n + k].clone() - t;
            }
            for k in 0..m {
                let t = factor.clone() * b[col * m + k].clone();
                b[row * m + k] = b[row * m + k].clone() - t;
            }
        }
    }

    let mut x: Vec<Option<S>> = vec![None; n * m];
    for row in (0..n).rev() {
        let inv = a[row * n + row].lift(1.0).checked_div(&a[row * n + row], what)?;
        for k in 0..m {
            let mut acc = b[row * m + k].clone();
            for c in (row + 1)..n {
                let xc = x[c * m + k].clone().expect("solved");
                acc = acc - a[row * n + c].clone() * xc;
            }
            x[row * m + k] = Some(acc * inv.clone());
        }
    }
    Ok(x.into_iter().map(|v| v.expect("solved")).collect())
}

/// Standard block symplectic matrix `[[0, I], [-I, 0]]` of size `2n`.
pub fn standard_symplectic(n: usize) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        w[(i, n + i)] = 1.0;
        w[(n + i, i)] = -1.0;
    }
    w
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

pub fn max_abs_slice(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// Inverse of a small matrix, failing on numerical singularity.
pub fn inverse(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    m.clone()
        .try_inverse()
        .filter(|inv| inv.iter().all(|x| x.is_finite()))
        .ok_or_else(|| Error::SingularMatrix(what.to_string()))
}
