//! Curvature and its covariant derivatives from jets of the Christoffel symbols.
//!
//! Sign conventions: `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_{[X,Y]}Z`, stored as
//! `R^l_{ijk}` with `R(∂_i,∂_j)∂_k = R^l_{ijk} ∂_l`. With this sign a Jacobi
//! field along a geodesic with velocity `X` obeys `∇²_X Z = R(X,Z)X`.
//! Ricci is `r(Z,T) = tr(Y ↦ R(Z,Y)T)` and the Ricci endomorphism `ρ` is fixed
//! by `r(u,v) = ω(u, ρv)`.
//!
//! Tensor components are flattened row-major: the upper index first, then the
//! lower indices in order, with each new covariant derivative slot appended
//! last. `∇^m R` therefore has `d^(4+m)` components indexed by
//! `(l, i, j, k, s_1, …, s_m)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::model::{check_point, ChartModel, ChartValues};
use crate::jets::{Jet, Scalar};
use crate::linalg::{max_abs_slice, solve_scalar};

/// `∇^m R` for `m = 0..=M` at a point, with Ricci data.
#[derive(Debug, Clone)]
pub struct CurvatureStack {
    dim: usize,
    point: Vec<f64>,
    levels: Vec<Vec<f64>>,
    omega: DMatrix<f64>,
    ricci: DMatrix<f64>,
    rho: DMatrix<f64>,
    nabla_ricci: Option<Vec<f64>>,
}

impl CurvatureStack {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    /// Highest covariant derivative order `M` held.
    pub fn order(&self) -> usize {
        self.levels.len() - 1
    }

    /// Flat components of `∇^m R`.
    pub fn level(&self, m: usize) -> &[f64] {
        &self.levels[m]
    }

    /// Component `(∇^m R)^l_{ijk; s_1…s_m}` for `index = [l, i, j, k, s_1, …]`.
    pub fn component(&self, m: usize, index: &[usize]) -> f64 {
        assert_eq!(index.len(), 4 + m);
        let flat = index.iter().fold(0, |acc, &x| acc * self.dim + x);
        self.levels[m][flat]
    }

    pub fn level_norm(&self, m: usize) -> f64 {
        max_abs_slice(&self.levels[m])
    }

    pub fn omega(&self) -> &DMatrix<f64> {
        &self.omega
    }

    /// Ricci tensor `r_{ab}`.
    pub fn ricci(&self) -> &DMatrix<f64> {
        &self.ricci
    }

    /// Ricci endomorphism, `r(u,v) = ω(u, ρv)`.
    pub fn rho(&self) -> &DMatrix<f64> {
        &self.rho
    }

    /// `(∇_c r)_{ab}` flattened as `(a, b, c)`; present when `M ≥ 1`.
    pub fn nabla_ricci(&self) -> Option<&[f64]> {
        self.nabla_ricci.as_deref()
    }
}

/// `R^l_{ijk}` from jets of Γ; the result has one order less than `gamma`.
pub fn riemann_jets(gamma: &[Jet], d: usize) -> Result<Vec<Jet>> {
    let g = |k: usize, i: usize, j: usize| &gamma[k * d * d + i * d + j];
    let mut out = Vec::with_capacity(d * d * d * d);
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mut r = &g(l, j, k).derivative(i)? - &g(l, i, k).derivative(j)?;
                    for m in 0..d {
                        r.add_product(1.0, g(l, i, m), g(m, j, k));
                        r.add_product(-1.0, g(l, j, m), g(m, i, k));
                    }
                    out.push(r);
                }
            }
        }
    }
    Ok(out)
}

/// Same as [`riemann_jets`] from plain Γ values and first derivatives
/// `dgamma[(k*d*d + i*d + j)*d + s] = ∂_s Γ^k_{ij}`.
pub fn riemann_values(gamma: &[f64], dgamma: &[f64], d: usize) -> Vec<f64> {
    let g = |k: usize, i: usize, j: usize| gamma[k * d * d + i * d + j];
    let dg = |k: usize, i: usize, j: usize, s: usize| dgamma[(k * d * d + i * d + j) * d + s];
    let mut out = vec![0.0; d * d * d * d];
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mut r = dg(l, j, k, i) - dg(l, i, k, j);
                    for m in 0..d {
                        r += g(l, i, m) * g(m, j, k) - g(l, j, m) * g(m, i, k);
                    }
                    out[((l * d + i) * d + j) * d + k] = r;
                }
            }
        }
    }
    out
}

/// Covariant derivative of a tensor field with `upper` contravariant indices
/// (stored first) and `lower` covariant ones; the derivative index is appended.
pub fn covariant_derivative(
    field: &[Jet],
    upper: usize,
    lower: usize,
    gamma: &[Jet],
    d: usize,
) -> Result<Vec<Jet>> {
    let rank = upper + lower;
    assert_eq!(field.len(), d.pow(rank as u32));
    let g = |k: usize, i: usize, j: usize| &gamma[k * d * d + i * d + j];
    let zero: Vec<bool> = field.iter().map(|j| j.max_abs() == 0.0).collect();
    let strides: Vec<usize> = (0..rank).map(|q| d.pow((rank - 1 - q) as u32)).collect();

    let mut out = Vec::with_capacity(field.len() * d);
    let mut digits = vec![0usize; rank];
    for idx in 0..field.len() {
        let mut rem = idx;
        for q in 0..rank {
            digits[q] = rem / strides[q];
            rem %= strides[q];
        }
        for s in 0..d {
            let mut acc = field[idx].derivative(s)?;
            for q in 0..rank {
                let base = idx - digits[q] * strides[q];
                for mu in 0..d {
                    let other = base + mu * strides[q];
                    if zero[other] {
                        continue;
                    }
                    if q < upper {
                        acc.add_product(1.0, g(digits[q], s, mu), &field[other]);
                    } else {
                        acc.add_product(-1.0, g(mu, s, digits[q]), &field[other]);
                    }
                }
            }
            out.push(acc);
        }
    }
    Ok(out)
}

/// Jet-valued curvature data around a point.
pub struct CurvatureField {
    pub dim: usize,
    pub chart: ChartValues<Jet>,
    /// `levels[m]` holds `∇^m R` as jets of order `levels_order - m`.
    pub levels: Vec<Vec<Jet>>,
}

impl CurvatureField {
    /// Builds `∇^m R` for `m ≤ max_level`, keeping `spare` extra jet orders
    /// on the top level.
    pub fn new(model: &dyn ChartModel, p: &[f64], max_level: usize, spare: usize) -> Result<Self> {
        check_point(model, p)?;
        let d = model.dim();
        let chart = model.eval_jets(p, max_level + 1 + spare)?;
        let gamma: Vec<Jet> = chart
            .gamma
            .iter()
            .map(|j| j.truncate(max_level + 1 + spare))
            .collect();
        let mut levels = vec![riemann_jets(&gamma, d)?];
        for m in 0..max_level {
            let next = covariant_derivative(&levels[m], 1, 3 + m, &gamma, d)?;
            levels.push(next);
        }
        Ok(CurvatureField { dim: d, chart, levels })
    }

    /// Ricci tensor jets `r_{ab}`.
    pub fn ricci(&self) -> Vec<Jet> {
        let d = self.dim;
        let r = &self.levels[0];
        let mut out = Vec::with_capacity(d * d);
        for a in 0..d {
            for b in 0..d {
                let mut acc = r[((0 * d + a) * d + 0) * d + b].clone();
                for j in 1..d {
                    acc = &acc + &r[((j * d + a) * d + j) * d + b];
                }
                out.push(acc);
            }
        }
        out
    }

    /// Ricci endomorphism jets `ρ^a_b` with `r = ω(·, ρ·)`.
    pub fn rho(&self) -> Result<Vec<Jet>> {
        let d = self.dim;
        let r = self.ricci();
        let order = r[0].order();
        let omega: Vec<Jet> = self.chart.omega.iter().map(|j| j.truncate(order)).collect();
        solve_scalar(&omega, d, &r, d, "symplectic form")
    }
}

/// `∇^m R` for `m = 0..=max_level` at `p`.
pub fn curvature_stack(model: &dyn ChartModel, p: &[f64], max_level: usize) -> Result<CurvatureStack> {
    let field = CurvatureField::new(model, p, max_level, 0)?;
    let d = field.dim;
    let levels: Vec<Vec<f64>> = field
        .levels
        .iter()
        .map(|lvl| lvl.iter().map(Scalar::value).collect())
        .collect();
    let omega = DMatrix::from_row_slice(d, d, &field.chart.omega.iter().map(Scalar::value).collect::<Vec<_>>());

    let ricci_vals: Vec<f64> = field.ricci().iter().map(Scalar::value).collect();
    let ricci = DMatrix::from_row_slice(d, d, &ricci_vals);
    let omega_inv = omega.clone().try_inverse().ok_or_else(|| Error::SingularOmega {
        point: p.to_vec(),
        det: omega.determinant(),
    })?;
    let rho = &omega_inv * &ricci;

    let nabla_ricci = (max_level >= 1).then(|| {
        let nr = &levels[1];
        let mut out = vec![0.0; d * d * d];
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    out[(a * d + b) * d + c] = (0..d)
                        .map(|j| nr[(((j * d + a) * d + j) * d + b) * d + c])
                        .sum();
                }
            }
        }
        out
    });

    Ok(CurvatureStack {
        dim: d,
        point: p.to_vec(),
        levels,
        omega,
        ricci,
        rho,
        nabla_ricci,
    })
}
