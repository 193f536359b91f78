use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{check_point, contract_gamma, ChartModel};
use crate::linalg::{inverse, max_abs};

use super::ode::{integrate, StepControl};

/// `exp_p(v)`: the geodesic from `p` with initial velocity `v`, at time 1.
pub fn exp_map(model: &dyn ChartModel, p: &[f64], v: &[f64], tol: f64) -> Result<Vec<f64>> {
    let d = p.len();
    let y0: Vec<f64> = p.iter().chain(v).cloned().collect();
    let out = integrate(
        |_, y, dy| {
            let (x, vel) = y.split_at(d);
            if !model.contains(x) {
                return Err(Error::OutsideDomain { point: x.to_vec() });
            }
            let g = model.eval(x)?;
            let acc = contract_gamma(&g.gamma, d, vel, vel);
            dy[..d].copy_from_slice(vel);
            for k in 0..d {
                dy[d + k] = -acc[k];
            }
            Ok(())
        },
        0.0,
        &y0,
        &[1.0],
        StepControl::new(tol),
    )?;
    Ok(out[0][..d].to_vec())
}

/// Differential of `exp_p` at `v` by Richardson-extrapolated central
/// differences.
fn d_exp(model: &dyn ChartModel, p: &[f64], v: &[f64], step: f64, tol: f64) -> Result<DMatrix<f64>> {
    let d = p.len();
    let mut jac = DMatrix::zeros(d, d);
    for k in 0..d {
        let central = |h: f64| -> Result<Vec<f64>> {
            let mut plus = v.to_vec();
            let mut minus = v.to_vec();
            plus[k] += h;
            minus[k] -= h;
            let a = exp_map(model, p, &plus, tol)?;
            let b = exp_map(model, p, &minus, tol)?;
            Ok(a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * h)).collect())
        };
        let coarse = central(step)?;
        let fine = central(step / 2.0)?;
        for r in 0..d {
            jac[(r, k)] = (4.0 * fine[r] - coarse[r]) / 3.0;
        }
    }
    Ok(jac)
}

#[derive(Debug, Clone)]
pub struct PullbackReport {
    /// `max ‖(s^*ω − ω)_q‖ / (1 + ‖ω_q‖)` over the sampled `q`.
    pub residual: f64,
    /// `(V, q = exp_p(V), s_p(q) = exp_p(−V))` for each ray.
    pub samples: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)>,
}

/// Pulls `ω` back by the geodesic symmetry `s_p: exp_p(V) ↦ exp_p(−V)` at
/// `n_rays` seeded points `q = exp_p(V)` with `|V| = radius`.
pub fn pullback_residual(
    model: &dyn ChartModel,
    p: &[f64],
    radius: f64,
    n_rays: usize,
    fd_step: f64,
    seed: u64,
    tol: f64,
) -> Result<PullbackReport> {
    check_point(model, p)?;
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    }
    if !(fd_step > 0.0) || fd_step >= radius {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step {fd_step} must lie in (0, radius = {radius})"
        )));
    }
    let d = p.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rays = Vec::with_capacity(n_rays);
    while rays.len() < n_rays {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-3 || norm > 1.0 {
            continue;
        }
        rays.push(v.iter().map(|x| x * radius / norm).collect::<Vec<f64>>());
    }

    let results: Vec<Result<(f64, (Vec<f64>, Vec<f64>, Vec<f64>))>> = rays
        .par_iter()
        .map(|v| {
            let minus: Vec<f64> = v.iter().map(|x| -x).collect();
            let q = exp_map(model, p, v, tol)?;
            let sq = exp_map(model, p, &minus, tol)?;
            let dv = d_exp(model, p, v, fd_step, tol)?;
            let dm = d_exp(model, p, &minus, fd_step, tol)?;
            // s = exp ∘ (−id) ∘ exp⁻¹, so ds_q = −D(−V) D(V)⁻¹.
            let ds = -(dm * inverse(&dv, "differential of exp")?);
            let wq = model.eval(&q)?.omega_matrix();
            let ws = model.eval(&sq)?.omega_matrix();
            let pulled = ds.transpose() * ws * &ds;
            let res = max_abs(&(pulled - &wq)) / (1.0 + max_abs(&wq));
            Ok((res, (v.clone(), q, sq)))
        })
        .collect();
    let mut residual = 0.0f64;
    let mut samples = Vec::with_capacity(n_rays);
    for r in results {
        let (res, sample) = r?;
        residual = residual.max(res);
        samples.push(sample);
    }
    Ok(PullbackReport { residual, samples })
}
