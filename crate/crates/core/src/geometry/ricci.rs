//! Ricci-type curvature: the `E + W` split, the `U, f, K` diagnostics and
//! the identities Ricci-type connections force on the `Π` derivatives.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::curvature::{covariant_derivative, CurvatureField, CurvatureStack};
use crate::geometry::endo::EndoList;
use crate::geometry::model::ChartModel;
use crate::jets::{Jet, Scalar};
use crate::linalg::{max_abs, max_abs_slice, solve_scalar};
use crate::qrecursion::symplectic_adjoint;

/// The Ricci-built part `E` of the curvature and the size of `W = R − E`.
#[derive(Debug, Clone)]
pub struct RicciSplit {
    /// `E^l_{ijk}` in the same layout as `R`.
    pub e: Vec<f64>,
    /// `max |W| / (1 + max |R|)`.
    pub w_residual: f64,
}

fn require_dim4(d: usize, what: &str) -> Result<()> {
    if d < 4 {
        return Err(Error::UnsupportedDimension {
            dim: d,
            reason: format!("{what} needs dimension at least 4"),
        });
    }
    Ok(())
}

/// Splits `R = E + W` where
/// `E(X,Y)Z = c[2ω(X,Y)ρZ + ω(X,Z)ρY − ω(Y,Z)ρX + ω(X,ρZ)Y − ω(Y,ρZ)X]`,
/// `c = 1/(2(n+1))`.
pub fn ricci_type_split(stack: &CurvatureStack) -> Result<RicciSplit> {
    let d = stack.dim();
    require_dim4(d, "the Ricci-type split")?;
    let n = (d / 2) as f64;
    let c = 1.0 / (2.0 * (n + 1.0));
    let w = stack.omega();
    let rho = stack.rho();
    let r = stack.ricci();
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let curv = stack.level(0);
    let mut e = vec![0.0; d * d * d * d];
    let mut worst = 0.0f64;
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let v = c
                        * (2.0 * w[(i, j)] * rho[(l, k)] + w[(i, k)] * rho[(l, j)]
                            - w[(j, k)] * rho[(l, i)]
                            + r[(i, k)] * delta(l, j)
                            - r[(j, k)] * delta(l, i));
                    let idx = ((l * d + i) * d + j) * d + k;
                    e[idx] = v;
                    worst = worst.max((curv[idx] - v).abs());
                }
            }
        }
    }
    Ok(RicciSplit {
        e,
        w_residual: worst / (1.0 + max_abs_slice(curv)),
    })
}

/// `max |R^l_{ijk} − ω_{ij} ρ^l_k| / (1 + max |R|)`; zero on every surface.
pub fn surface_curvature_residual(stack: &CurvatureStack) -> Result<f64> {
    let d = stack.dim();
    if d != 2 {
        return Err(Error::UnsupportedDimension {
            dim: d,
            reason: "the R = ω ⊗ ρ identity only holds on surfaces".into(),
        });
    }
    let w = stack.omega();
    let rho = stack.rho();
    let curv = stack.level(0);
    let mut worst = 0.0f64;
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let v = curv[((l * d + i) * d + j) * d + k] - w[(i, j)] * rho[(l, k)];
                    worst = worst.max(v.abs());
                }
            }
        }
    }
    Ok(worst / (1.0 + max_abs_slice(curv)))
}

/// Least-squares fits of the vector field `U`, the function `f` and the
/// constant `K` that every Ricci-type connection carries:
/// `∇_X ρ = −(X ⊗ ω(U,·) + U ⊗ ω(X,·))/(2n+1)`,
/// `∇_X U = −(2n+1)/(2(n+1)) ρ²X + f X`,
/// `tr ρ² + 4(n+1)/(2n+1) f = K`.
#[derive(Debug, Clone)]
pub struct RicciTypeDiagnostics {
    pub u: Vec<f64>,
    pub f: f64,
    /// `K` at the base point followed by the offset points.
    pub k_values: Vec<f64>,
    pub u_residual: f64,
    pub f_residual: f64,
    pub k_spread: f64,
}

struct PointFit {
    u: Vec<f64>,
    f: f64,
    k: f64,
    u_residual: f64,
    f_residual: f64,
}

fn fit_at(model: &dyn ChartModel, p: &[f64]) -> Result<PointFit> {
    let d = model.dim();
    let n = (d / 2) as f64;
    let field = CurvatureField::new(model, p, 0, 2)?;
    let gamma: Vec<Jet> = field.chart.gamma.iter().map(|j| j.truncate(3)).collect();
    let rho = field.rho()?; // order 2
    let nabla_rho = covariant_derivative(&rho, 1, 1, &gamma, d)?; // (a, b, k), order 1
    let omega: Vec<Jet> = field.chart.omega.iter().map(|j| j.truncate(1)).collect();

    // Row (a, b, k), column c: coefficient of U^c.
    let cu = -1.0 / (2.0 * n + 1.0);
    let rows = d * d * d;
    let zero = Jet::zeros(d, 1);
    let mut m = vec![zero.clone(); rows * d];
    for a in 0..d {
        for b in 0..d {
            for k in 0..d {
                let row = (a * d + b) * d + k;
                for c in 0..d {
                    let mut entry = zero.clone();
                    if a == k {
                        entry.add_scaled(cu, &omega[c * d + b]);
                    }
                    if a == c {
                        entry.add_scaled(cu, &omega[k * d + b]);
                    }
                    m[row * d + c] = entry;
                }
            }
        }
    }
    // Normal equations MᵀM U = Mᵀ b, solved in jet arithmetic so U keeps a
    // first-order expansion.
    let mut mtm = vec![zero.clone(); d * d];
    let mut mtb = vec![zero.clone(); d];
    for row in 0..rows {
        for c in 0..d {
            let mc = &m[row * d + c];
            if mc.max_abs() == 0.0 {
                continue;
            }
            mtb[c].add_product(1.0, mc, &nabla_rho[row]);
            for c2 in 0..d {
                mtm[c * d + c2].add_product(1.0, mc, &m[row * d + c2]);
            }
        }
    }
    let u = solve_scalar(&mtm, d, &mtb, 1, "U normal equations")
        .map_err(|_| Error::DegenerateFit("U normal equations are singular".into()))?;

    let mut u_res = 0.0f64;
    for row in 0..rows {
        let fitted: f64 = (0..d).map(|c| m[row * d + c].value() * u[c].value()).sum();
        u_res = u_res.max((fitted - nabla_rho[row].value()).abs());
    }
    let nabla_rho_norm = nabla_rho.iter().fold(0.0f64, |s, j| s.max(j.value().abs()));
    let u_residual = u_res / (1.0 + nabla_rho_norm);

    // (∇_k U)^a = ∂_k U^a + Γ^a_{kμ} U^μ, indexed (a, k).
    let nabla_u = covariant_derivative(&u, 1, 0, &gamma, d)?;
    let nu = DMatrix::from_fn(d, d, |a, k| nabla_u[a * d + k].value());
    let rho0 = DMatrix::from_fn(d, d, |a, b| rho[a * d + b].value());
    let rho2 = &rho0 * &rho0;
    let cf = (2.0 * n + 1.0) / (2.0 * (n + 1.0));
    let target = &nu + &rho2 * cf;
    let f = target.trace() / d as f64;
    let f_res = max_abs(&(&target - DMatrix::identity(d, d) * f));
    let f_residual = f_res / (1.0 + max_abs(&nu).max(cf * max_abs(&rho2)));
    let k = rho2.trace() + 4.0 * (n + 1.0) / (2.0 * n + 1.0) * f;

    Ok(PointFit {
        u: u.iter().map(Scalar::value).collect(),
        f,
        k,
        u_residual,
        f_residual,
    })
}

/// Fits `U` and `f` at `p` and compares `K` at `p` with its values at
/// `p ± offset·e_i`.
pub fn ricci_type_diagnostics(model: &dyn ChartModel, p: &[f64], offset: f64) -> Result<RicciTypeDiagnostics> {
    let d = model.dim();
    require_dim4(d, "the Ricci-type diagnostics")?;
    let base = fit_at(model, p)?;
    let mut k_values = vec![base.k];
    let mut u_residual = base.u_residual;
    let mut f_residual = base.f_residual;
    for i in 0..d {
        for sign in [1.0, -1.0] {
            let mut q = p.to_vec();
            q[i] += sign * offset;
            let fit = fit_at(model, &q)?;
            u_residual = u_residual.max(fit.u_residual);
            f_residual = f_residual.max(fit.f_residual);
            k_values.push(fit.k);
        }
    }
    let kmax = k_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let kmin = k_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let kscale = k_values.iter().fold(0.0f64, |s, k| s.max(k.abs()));
    Ok(RicciTypeDiagnostics {
        u: base.u,
        f: base.f,
        k_values,
        u_residual,
        f_residual,
        k_spread: (kmax - kmin) / (1.0 + kscale),
    })
}

/// Residuals of the identities a Ricci-type connection imposes on
/// `Π, ∇_XΠ, ∇²_XΠ` along any direction.
#[derive(Debug, Clone, PartialEq)]
pub struct RicciTypeIdentities {
    /// `∇²_X Π`
    pub second_derivative: f64,
    /// `∇_XΠ ∘ ∇_XΠ`
    pub derivative_square: f64,
    /// `Π ∘ ∇_XΠ`
    pub pi_derivative: f64,
    /// `∇_XΠ ∘ Π − 2/(n+1) r(X,X) ∇_XΠ`
    pub derivative_pi: f64,
    /// `∇_XΠ + (∇_XΠ)^⊤`
    pub derivative_symplectic: f64,
}

impl RicciTypeIdentities {
    pub fn max(&self) -> f64 {
        self.second_derivative
            .max(self.derivative_square)
            .max(self.pi_derivative)
            .max(self.derivative_pi)
            .max(self.derivative_symplectic)
    }
}

/// Evaluates the identities on `endos` (needs `L ≥ 2`). Linear expressions are
/// normalized by `1 + s`, quadratic ones by `1 + s²`, where `s` is the largest
/// entry among `Π, ∇_XΠ, ∇²_XΠ`.
pub fn ricci_type_identities(endos: &EndoList, stack: &CurvatureStack) -> Result<RicciTypeIdentities> {
    let d = endos.dim();
    require_dim4(d, "the Ricci-type identities")?;
    if endos.order() < 2 {
        return Err(Error::InsufficientOrder {
            needed: 2,
            available: endos.order(),
        });
    }
    let n = (d / 2) as f64;
    let pi = &endos.entries[0];
    let dpi = &endos.entries[1];
    let d2pi = &endos.entries[2];
    let s = max_abs(pi).max(max_abs(dpi)).max(max_abs(d2pi));
    let lin = 1.0 + s;
    let quad = 1.0 + s * s;
    let x = nalgebra::DVector::from_column_slice(&endos.direction);
    let rxx = (x.transpose() * stack.ricci() * &x)[(0, 0)];
    let adj = symplectic_adjoint(dpi, &endos.omega)?;
    Ok(RicciTypeIdentities {
        second_derivative: max_abs(d2pi) / lin,
        derivative_square: max_abs(&(dpi * dpi)) / quad,
        pi_derivative: max_abs(&(pi * dpi)) / quad,
        derivative_pi: max_abs(&(dpi * pi - dpi * (2.0 / (n + 1.0) * rxx))) / quad,
        derivative_symplectic: max_abs(&(dpi + adj)) / lin,
    })
}
