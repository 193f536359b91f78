//! Chart-level description of a Fedosov manifold.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::jets::{Jet, Scalar};

/// Christoffel symbols and symplectic-form components at a point.
///
/// `gamma[k*d*d + i*d + j]` is `Γ^k_{ij}` (so `∇_{∂_i}∂_j = Γ^k_{ij} ∂_k`) and
/// `omega[i*d + j]` is `ω_{ij} = ω(∂_i, ∂_j)`.
#[derive(Debug, Clone)]
pub struct ChartValues<S> {
    pub dim: usize,
    pub gamma: Vec<S>,
    pub omega: Vec<S>,
}

impl<S> ChartValues<S> {
    pub fn gamma(&self, k: usize, i: usize, j: usize) -> &S {
        let d = self.dim;
        &self.gamma[k * d * d + i * d + j]
    }

    pub fn omega(&self, i: usize, j: usize) -> &S {
        &self.omega[i * self.dim + j]
    }
}

impl<S: Scalar> ChartValues<S> {
    /// Pointwise values (constant terms of jets).
    pub fn values(&self) -> ChartValues<f64> {
        ChartValues {
            dim: self.dim,
            gamma: self.gamma.iter().map(Scalar::value).collect(),
            omega: self.omega.iter().map(Scalar::value).collect(),
        }
    }
}

impl ChartValues<f64> {
    pub fn omega_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.omega)
    }
}

/// A coordinate chart of a symplectic manifold with a symplectic connection.
///
/// Implementations must be reentrant: evaluation at distinct points from
/// several threads needs no synchronization.
pub trait ChartModel: Send + Sync {
    fn dim(&self) -> usize;

    fn name(&self) -> String;

    fn contains(&self, p: &[f64]) -> bool;

    /// Christoffel symbols and ω at `p`.
    fn eval(&self, p: &[f64]) -> Result<ChartValues<f64>> {
        Ok(self.eval_jets(p, 0)?.values())
    }

    /// Taylor expansions (order at least `order`) of Γ and ω around `p`.
    fn eval_jets(&self, p: &[f64], order: usize) -> Result<ChartValues<Jet>>;
}

/// Rejects points of the wrong dimension or outside the model's domain.
pub fn check_point(model: &dyn ChartModel, p: &[f64]) -> Result<()> {
    if p.len() != model.dim() {
        return Err(Error::InvalidArgument(format!(
            "point has {} coordinates, model `{}` has dimension {}",
            p.len(),
            model.name(),
            model.dim()
        )));
    }
    if !model.contains(p) {
        return Err(Error::OutsideDomain { point: p.to_vec() });
    }
    Ok(())
}

/// Γ-contraction `Γ^k_{ij} u^i v^j`.
pub fn contract_gamma(gamma: &[f64], d: usize, u: &[f64], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; d];
    for (k, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for i in 0..d {
            if u[i] == 0.0 {
                continue;
            }
            let row = &gamma[k * d * d + i * d..k * d * d + (i + 1) * d];
            let inner: f64 = row.iter().zip(v).map(|(g, x)| g * x).sum();
            acc += u[i] * inner;
        }
        *o = acc;
    }
    out
}
