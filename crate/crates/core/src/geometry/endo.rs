//! The endomorphisms `Y ↦ (∇^l R)(X, Y; X, …, X) X` at a point.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::curvature::CurvatureStack;

/// `entries[l]` is the matrix of `∇^l_X Π` at the base point, where
/// `Π = R(X, ·)X` along the geodesic with initial velocity `X`.
#[derive(Debug, Clone)]
pub struct EndoList {
    pub entries: Vec<DMatrix<f64>>,
    pub direction: Vec<f64>,
    pub point: Vec<f64>,
    pub omega: DMatrix<f64>,
}

impl EndoList {
    pub fn dim(&self) -> usize {
        self.omega.nrows()
    }

    /// Highest derivative order `L` held.
    pub fn order(&self) -> usize {
        self.entries.len() - 1
    }

    /// Builds a list directly from matrices, e.g. for algebraic tests.
    pub fn from_entries(entries: Vec<DMatrix<f64>>, omega: DMatrix<f64>) -> Self {
        let d = omega.nrows();
        EndoList {
            entries,
            direction: vec![0.0; d],
            point: vec![0.0; d],
            omega,
        }
    }
}

/// Contracts the trailing index of a flattened tensor with `x`.
fn contract_last(t: &[f64], d: usize, x: &[f64]) -> Vec<f64> {
    t.chunks_exact(d)
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

/// `∇^l_X Π` for `l = 0..=L`.
pub fn pi_derivatives(stack: &CurvatureStack, x: &[f64], l_max: usize) -> Result<EndoList> {
    let d = stack.dim();
    if x.len() != d {
        return Err(Error::DimensionMismatch(x.len(), d));
    }
    if l_max > stack.order() {
        return Err(Error::InsufficientOrder {
            needed: l_max,
            available: stack.order(),
        });
    }
    let mut entries = Vec::with_capacity(l_max + 1);
    for l in 0..=l_max {
        // (a, i, b, k, s_1..s_l): contract s_l, …, s_1 and k with X, then i.
        let mut t = stack.level(l).to_vec();
        for _ in 0..=l {
            t = contract_last(&t, d, x);
        }
        // t is now indexed (a, i, b)
        let mut m = DMatrix::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                m[(a, b)] = (0..d).map(|i| x[i] * t[(a * d + i) * d + b]).sum();
            }
        }
        entries.push(m);
    }
    Ok(EndoList {
        entries,
        direction: x.to_vec(),
        point: stack.point().to_vec(),
        omega: stack.omega().clone(),
    })
}

fn norm(x: &[f64]) -> f64 {
    DVector::from_column_slice(x).norm()
}

fn nabla_ricci_of(stack: &CurvatureStack) -> Result<&[f64]> {
    stack.nabla_ricci().ok_or(Error::InsufficientOrder {
        needed: 1,
        available: 0,
    })
}

/// `max_X |(∇_X r)(X,X)| / (1 + ‖X‖³ ‖∇r‖)`; zero for preferred connections.
pub fn preferred_residual(stack: &CurvatureStack, directions: &[Vec<f64>]) -> Result<f64> {
    let d = stack.dim();
    let nr = nabla_ricci_of(stack)?;
    let scale = crate::linalg::max_abs_slice(nr);
    let mut worst = 0.0f64;
    for x in directions {
        if x.len() != d {
            return Err(Error::DimensionMismatch(x.len(), d));
        }
        let mut v = 0.0;
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    v += nr[(a * d + b) * d + c] * x[a] * x[b] * x[c];
                }
            }
        }
        worst = worst.max(v.abs() / (1.0 + norm(x).powi(3) * scale));
    }
    Ok(worst)
}

/// The same quantity computed as `|tr ∇_X Π|`, with the same normalization.
pub fn preferred_trace_residual(stack: &CurvatureStack, directions: &[Vec<f64>]) -> Result<f64> {
    let scale = crate::linalg::max_abs_slice(nabla_ricci_of(stack)?);
    let mut worst = 0.0f64;
    for x in directions {
        let endos = pi_derivatives(stack, x, 1)?;
        let tr = endos.entries[1].trace();
        worst = worst.max(tr.abs() / (1.0 + norm(x).powi(3) * scale));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::curvature_stack;
    use crate::models::{build_model, ModelSpec};

    #[test]
    fn pi_is_homogeneous_in_x() {
        let m = build_model(&ModelSpec::Polynomial { n: 1, seed: 3, scale: 0.6 }).unwrap();
        let s = curvature_stack(&m, &[0.1, 0.2], 2).unwrap();
        let x = [0.4, -0.7];
        let x2: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let a = pi_derivatives(&s, &x, 2).unwrap();
        let b = pi_derivatives(&s, &x2, 2).unwrap();
        for l in 0..=2 {
            let factor = 2f64.powi(l as i32 + 2);
            let diff = crate::linalg::max_abs(&(&a.entries[l] * factor - &b.entries[l]));
            assert!(diff < 1e-12, "level {l}: {diff}");
        }
        // Π_X X = R(X, X)X = 0.
        let px = &a.entries[0] * DVector::from_column_slice(&x);
        assert!(px.amax() < 1e-13);
    }

    #[test]
    fn preferred_forms_agree() {
        let m = build_model(&ModelSpec::Polynomial { n: 1, seed: 6, scale: 0.6 }).unwrap();
        let s = curvature_stack(&m, &[0.1, 0.2], 1).unwrap();
        let dirs = vec![vec![0.3, 0.9], vec![-1.0, 0.2]];
        let a = preferred_residual(&s, &dirs).unwrap();
        let b = preferred_trace_residual(&s, &dirs).unwrap();
        assert!(a > 1e-4);
        assert!((a - b).abs() < 1e-12 * (1.0 + a));
    }

    #[test]
    fn order_and_dimension_errors() {
        let m = build_model(&ModelSpec::Flat { n: 1 }).unwrap();
        let s = curvature_stack(&m, &[0.0, 0.0], 1).unwrap();
        assert!(matches!(pi_derivatives(&s, &[1.0, 0.0], 2), Err(Error::InsufficientOrder { .. })));
        assert!(matches!(pi_derivatives(&s, &[1.0], 1), Err(Error::DimensionMismatch(1, 2))));
    }
}
