use crate::error::{Error, Result};
use crate::geometry::curvature::riemann_values;
use crate::geometry::{check_point, contract_gamma, ChartModel};
use crate::jets::Scalar;

use super::ode::{integrate, StepControl};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicOptions {
    /// Half-width `T` of the time grid `[−T, T]`.
    pub t_max: f64,
    /// Local error tolerance of the integrator.
    pub tol: f64,
    /// Number of grid nodes (odd, so `t = 0` is a node).
    pub nodes: usize,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        GeodesicOptions {
            t_max: 0.5,
            tol: 1e-12,
            nodes: 81,
        }
    }
}

impl GeodesicOptions {
    fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidArgument(format!("T must be positive, got {}", self.t_max)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("integrator tolerance must be positive".into()));
        }
        if self.nodes < 3 || self.nodes % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "grid needs an odd number of nodes ≥ 3, got {}",
                self.nodes
            )));
        }
        Ok(())
    }

    /// The symmetric grid `t_k = −T + 2kT/(N−1)`.
    pub fn grid(&self) -> Vec<f64> {
        let half = (self.nodes - 1) / 2;
        (0..self.nodes)
            .map(|k| {
                let j = k as isize - half as isize;
                self.t_max * j as f64 / half as f64
            })
            .collect()
    }
}

/// `Z_i` and `∇_X Z_i` sampled on the grid, `z[i][node][component]`.
#[derive(Debug, Clone)]
pub struct JacobiData {
    pub z: Vec<Vec<Vec<f64>>>,
    pub dz: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone)]
pub struct GeodesicSolution {
    pub point: Vec<f64>,
    pub direction: Vec<f64>,
    pub options: GeodesicOptions,
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    /// Frame `b_1 = X`, completed with coordinate vectors.
    pub basis: Vec<Vec<f64>>,
    pub jacobi: Option<JacobiData>,
}

impl GeodesicSolution {
    /// Index of `t = 0` in the grid.
    pub fn center(&self) -> usize {
        self.times.len() / 2
    }
}

/// `b_1 = X`, then every coordinate vector except the one along the largest
/// component of `X`.
pub fn frame(x: &[f64]) -> Vec<Vec<f64>> {
    let d = x.len();
    let skip = (0..d)
        .max_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs()))
        .expect("non-empty direction");
    let mut basis = vec![x.to_vec()];
    for j in (0..d).filter(|&j| j != skip) {
        let mut e = vec![0.0; d];
        e[j] = 1.0;
        basis.push(e);
    }
    basis
}

fn checked_start(model: &dyn ChartModel, p: &[f64], x: &[f64], opts: &GeodesicOptions) -> Result<()> {
    opts.validate()?;
    check_point(model, p)?;
    if x.len() != p.len() {
        return Err(Error::DimensionMismatch(x.len(), p.len()));
    }
    if x.iter().all(|v| *v == 0.0) {
        return Err(Error::InvalidArgument("direction must be nonzero".into()));
    }
    Ok(())
}

fn geodesic_rhs(model: &dyn ChartModel, y: &[f64], dy: &mut [f64]) -> Result<()> {
    let d = model.dim();
    let (x, v) = y.split_at(d);
    if !model.contains(x) {
        return Err(Error::OutsideDomain { point: x.to_vec() });
    }
    let chart = model.eval(x)?;
    let acc = contract_gamma(&chart.gamma, d, v, v);
    dy[..d].copy_from_slice(v);
    for k in 0..d {
        dy[d + k] = -acc[k];
    }
    Ok(())
}

/// Integrates forward and backward from the same initial data and merges
/// the two halves on the symmetric grid.
fn integrate_both<F>(rhs: F, y0: &[f64], opts: &GeodesicOptions) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let grid = opts.grid();
    let half = grid.len() / 2;
    let forward: Vec<f64> = grid[half..].to_vec();
    let backward: Vec<f64> = grid[..=half].iter().rev().cloned().collect();
    let control = StepControl::new(opts.tol);
    let fwd = integrate(&rhs, 0.0, y0, &forward, control)?;
    let bwd = integrate(&rhs, 0.0, y0, &backward, control)?;
    let mut states: Vec<Vec<f64>> = bwd.into_iter().rev().collect();
    states.extend(fwd.into_iter().skip(1));
    Ok(states)
}

/// Solves `ẍ^k + Γ^k_{ij} ẋ^i ẋ^j = 0` with `x(0) = p`, `ẋ(0) = X` on `[−T, T]`.
pub fn integrate_geodesic(
    model: &dyn ChartModel,
    p: &[f64],
    x: &[f64],
    opts: GeodesicOptions,
) -> Result<GeodesicSolution> {
    checked_start(model, p, x, &opts)?;
    let d = p.len();
    let y0: Vec<f64> = p.iter().chain(x).cloned().collect();
    let states = integrate_both(|_, y, dy| geodesic_rhs(model, y, dy), &y0, &opts)?;
    Ok(GeodesicSolution {
        point: p.to_vec(),
        direction: x.to_vec(),
        options: opts,
        times: opts.grid(),
        positions: states.iter().map(|s| s[..d].to_vec()).collect(),
        velocities: states.iter().map(|s| s[d..2 * d].to_vec()).collect(),
        basis: frame(x),
        jacobi: None,
    })
}

fn jacobi_rhs(model: &dyn ChartModel, y: &[f64], dy: &mut [f64]) -> Result<()> {
    let d = model.dim();
    let x = &y[..d];
    let v = &y[d..2 * d];
    if !model.contains(x) {
        return Err(Error::OutsideDomain { point: x.to_vec() });
    }
    let chart = model.eval_jets(x, 1)?;
    let gamma: Vec<f64> = chart.gamma.iter().map(Scalar::value).collect();
    let dgamma: Vec<f64> = chart
        .gamma
        .iter()
        .flat_map(|j| (0..d).map(move |s| j.gradient_component(s)))
        .collect();
    let r = riemann_values(&gamma, &dgamma, d);

    let acc = contract_gamma(&gamma, d, v, v);
    dy[..d].copy_from_slice(v);
    for k in 0..d {
        dy[d + k] = -acc[k];
    }
    // R(v, ·)v as a matrix: m[l][j] = R^l_{ijk} v^i v^k
    let mut pi = vec![0.0; d * d];
    for l in 0..d {
        for i in 0..d {
            if v[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                let base = ((l * d + i) * d + j) * d;
                let s: f64 = (0..d).map(|k| r[base + k] * v[k]).sum();
                pi[l * d + j] += v[i] * s;
            }
        }
    }
    for f in 0..d {
        let off = 2 * d + 2 * d * f;
        let z = &y[off..off + d];
        let w = &y[off + d..off + 2 * d];
        let gz = contract_gamma(&gamma, d, v, z);
        let gw = contract_gamma(&gamma, d, v, w);
        for l in 0..d {
            dy[off + l] = w[l] - gz[l];
            let rz: f64 = (0..d).map(|j| pi[l * d + j] * z[j]).sum();
            dy[off + d + l] = rz - gw[l];
        }
    }
    Ok(())
}

/// Solves `∇²_X Z_i = R(X, Z_i)X` with `Z_i(0) = 0`, `∇_X Z_i(0) = b_i`
/// jointly with the geodesic, on the grid of `geo`.
pub fn integrate_jacobi(model: &dyn ChartModel, geo: &GeodesicSolution) -> Result<GeodesicSolution> {
    let opts = geo.options;
    checked_start(model, &geo.point, &geo.direction, &opts)?;
    let d = geo.point.len();
    let mut y0: Vec<f64> = geo.point.iter().chain(&geo.direction).cloned().collect();
    for b in &geo.basis {
        y0.extend(std::iter::repeat(0.0).take(d));
        y0.extend(b);
    }
    let states = integrate_both(|_, y, dy| jacobi_rhs(model, y, dy), &y0, &opts)?;
    let mut z = vec![Vec::with_capacity(states.len()); d];
    let mut dz = vec![Vec::with_capacity(states.len()); d];
    for s in &states {
        for f in 0..d {
            let off = 2 * d + 2 * d * f;
            z[f].push(s[off..off + d].to_vec());
            dz[f].push(s[off + d..off + 2 * d].to_vec());
        }
    }
    Ok(GeodesicSolution {
        positions: states.iter().map(|s| s[..d].to_vec()).collect(),
        velocities: states.iter().map(|s| s[d..2 * d].to_vec()).collect(),
        jacobi: Some(JacobiData { z, dz }),
        ..geo.clone()
    })
}

/// `h_{ij}(t) = ω(Z_i, Z_j)` for frame indices `1 ≤ i < j` and
/// `h_{1i}(t) = ω(γ̇, Z_i)` for `i ≥ 1` (0-based, frame index 0 is `X`).
#[derive(Debug, Clone)]
pub struct HSeries {
    pub times: Vec<f64>,
    pub pairs: Vec<(usize, usize)>,
    pub h: Vec<Vec<f64>>,
    pub radial: Vec<usize>,
    pub h1: Vec<Vec<f64>>,
}

pub fn h_series(geo: &GeodesicSolution, model: &dyn ChartModel) -> Result<HSeries> {
    let jac = geo
        .jacobi
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("Jacobi fields have not been integrated".into()))?;
    let d = geo.point.len();
    let pairs: Vec<(usize, usize)> = (1..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect();
    let radial: Vec<usize> = (1..d).collect();
    let mut h = vec![Vec::with_capacity(geo.times.len()); pairs.len()];
    let mut h1 = vec![Vec::with_capacity(geo.times.len()); radial.len()];
    let pair = |w: &[f64], u: &[f64], v: &[f64]| -> f64 {
        let mut acc = 0.0;
        for a in 0..d {
            for b in 0..d {
                acc += u[a] * w[a * d + b] * v[b];
            }
        }
        acc
    };
    for (node, x) in geo.positions.iter().enumerate() {
        let w = model.eval(x)?.omega;
        for (slot, &(i, j)) in pairs.iter().enumerate() {
            h[slot].push(pair(&w, &jac.z[i][node], &jac.z[j][node]));
        }
        for (slot, &i) in radial.iter().enumerate() {
            h1[slot].push(pair(&w, &geo.velocities[node], &jac.z[i][node]));
        }
    }
    Ok(HSeries {
        times: geo.times.clone(),
        pairs,
        h,
        radial,
        h1,
    })
}

/// `max_t |h_{ij}(t) − h_{ij}(−t)|` and `|h_{1i}(t) + h_{1i}(−t)|`, divided by
/// `max |h|`.
pub fn parity_residual(hs: &HSeries) -> Result<f64> {
    let n = hs.times.len();
    let symmetric = (0..n).all(|k| {
        let (a, b) = (hs.times[k], hs.times[n - 1 - k]);
        (a + b).abs() <= 1e-12 * (1.0 + a.abs())
    });
    if !symmetric {
        return Err(Error::InvalidArgument("parity needs a symmetric time grid".into()));
    }
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for series in &hs.h {
        for k in 0..n {
            worst = worst.max((series[k] - series[n - 1 - k]).abs());
            scale = scale.max(series[k].abs());
        }
    }
    for series in &hs.h1 {
        for k in 0..n {
            worst = worst.max((series[k] + series[n - 1 - k]).abs());
            scale = scale.max(series[k].abs());
        }
    }
    Ok(if scale > 0.0 { worst / scale } else { 0.0 })
}
