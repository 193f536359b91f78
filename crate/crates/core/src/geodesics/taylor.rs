use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::qrecursion::{bilinear_form, QTable, SumBound};

use super::path::HSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FitOptions {
    /// Degree of the least-squares polynomial.
    pub degree: usize,
}

/// `d^m/dt^m` at `t = 0` of the least-squares polynomial through the samples,
/// for each `m` in `orders`. The fit runs in `s = t / max|t|`.
pub fn taylor_derivatives(times: &[f64], samples: &[f64], orders: &[usize], fit: FitOptions) -> Result<Vec<f64>> {
    let n = times.len();
    let deg = fit.degree;
    if n <= deg {
        return Err(Error::DegenerateFit(format!(
            "{n} nodes cannot determine a degree-{deg} polynomial"
        )));
    }
    if let Some(&m) = orders.iter().find(|&&m| m > deg) {
        return Err(Error::DegenerateFit(format!("order {m} exceeds fit degree {deg}")));
    }
    let half_width = times.iter().fold(0.0f64, |a, t| a.max(t.abs()));
    let vander = DMatrix::from_fn(n, deg + 1, |r, c| (times[r] / half_width).powi(c as i32));
    let rhs = DVector::from_column_slice(samples);
    let svd = vander.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-13 * smax) {
        return Err(Error::DegenerateFit(format!(
            "Vandermonde system is ill-conditioned (σ_min/σ_max = {:e})",
            smin / smax
        )));
    }
    let coeffs = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::DegenerateFit(e.to_string()))?;
    Ok(orders
        .iter()
        .map(|&m| {
            let fact: f64 = (1..=m).map(|k| k as f64).product();
            fact * coeffs[m] / half_width.powi(m as i32)
        })
        .collect())
}

fn omega_pair(w: &DMatrix<f64>, u: &[f64], v: &[f64]) -> f64 {
    let u = DVector::from_column_slice(u);
    let v = DVector::from_column_slice(v);
    (u.transpose() * w * v)[(0, 0)]
}

fn need(table: &QTable, r: usize) -> Result<()> {
    if r > table.r_max() {
        return Err(Error::InsufficientOrder {
            needed: r,
            available: table.r_max(),
        });
    }
    Ok(())
}

/// Value of `d^m h/dt^m(0)` predicted from the `Q^r`.
///
/// Indices refer to `basis`, whose first vector is `X`.
pub fn formula_derivative(
    table: &QTable,
    basis: &[Vec<f64>],
    target: HTarget,
    m: usize,
    bound: SumBound,
) -> Result<f64> {
    let w = &table.omega_p;
    match target {
        HTarget::Pair(i, j) => match m {
            0 | 1 | 3 => Ok(0.0),
            2 => Ok(2.0 * omega_pair(w, &basis[i], &basis[j])),
            _ => {
                need(table, m - 2)?;
                let b = bilinear_form(table, m - 2, bound);
                Ok(omega_pair(&b, &basis[i], &basis[j]))
            }
        },
        HTarget::Radial(i) => match m {
            0 | 2 => Ok(0.0),
            1 => Ok(omega_pair(w, &basis[0], &basis[i])),
            _ => {
                need(table, m - 1)?;
                let qb = table.q(m - 1) * DVector::from_column_slice(&basis[i]);
                Ok(omega_pair(w, &basis[0], qb.as_slice()))
            }
        },
    }
}

/// `Pair(i, j)` is `h_{ij}`, `Radial(i)` is `h_{1i}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HTarget {
    Pair(usize, usize),
    Radial(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderDiscrepancy {
    pub order: usize,
    /// `max |fit − formula| / (1 + |formula|)` over all `h` functions.
    pub discrepancy: f64,
    pub fitted: Vec<f64>,
    pub predicted: Vec<f64>,
}

/// Compares fitted Taylor derivatives of every `h` function with the values
/// predicted by `table`.
pub fn taylor_cross_check(
    hs: &HSeries,
    basis: &[Vec<f64>],
    table: &QTable,
    orders: &[usize],
    fit: FitOptions,
    bound: SumBound,
) -> Result<Vec<OrderDiscrepancy>> {
    let mut series: Vec<(HTarget, &Vec<f64>)> = Vec::new();
    for (&(i, j), s) in hs.pairs.iter().zip(&hs.h) {
        series.push((HTarget::Pair(i, j), s));
    }
    for (&i, s) in hs.radial.iter().zip(&hs.h1) {
        series.push((HTarget::Radial(i), s));
    }
    let mut fitted_all = Vec::with_capacity(series.len());
    for (_, s) in &series {
        fitted_all.push(taylor_derivatives(&hs.times, s, orders, fit)?);
    }
    let mut out = Vec::with_capacity(orders.len());
    for (slot, &m) in orders.iter().enumerate() {
        let mut worst = 0.0f64;
        let mut fitted = Vec::with_capacity(series.len());
        let mut predicted = Vec::with_capacity(series.len());
        for ((target, _), fits) in series.iter().zip(&fitted_all) {
            let f = fits[slot];
            let p = formula_derivative(table, basis, *target, m, bound)?;
            worst = worst.max((f - p).abs() / (1.0 + p.abs()));
            fitted.push(f);
            predicted.push(p);
        }
        out.push(OrderDiscrepancy {
            order: m,
            discrepancy: worst,
            fitted,
            predicted,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_samples_are_recovered() {
        let times: Vec<f64> = (0..41).map(|k| -0.5 + k as f64 * 0.025).collect();
        // 1 + 2t − t³/6 + t⁵ / 10
        let samples: Vec<f64> = times
            .iter()
            .map(|t| 1.0 + 2.0 * t - t.powi(3) / 6.0 + t.powi(5) / 10.0)
            .collect();
        let d = taylor_derivatives(&times, &samples, &[0, 1, 2, 3, 4, 5], FitOptions { degree: 7 }).unwrap();
        let expect = [1.0, 2.0, 0.0, -1.0, 0.0, 12.0];
        for (a, b) in d.iter().zip(expect) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn degenerate_fits() {
        let times = [-1.0, 0.0, 1.0];
        let samples = [1.0, 0.0, 1.0];
        assert!(matches!(
            taylor_derivatives(&times, &samples, &[2], FitOptions { degree: 3 }),
            Err(Error::DegenerateFit(_))
        ));
        assert!(matches!(
            taylor_derivatives(&times, &samples, &[3], FitOptions { degree: 2 }),
            Err(Error::DegenerateFit(_))
        ));
        let times: Vec<f64> = (0..81).map(|k| -1.0 + k as f64 / 40.0).collect();
        let samples = vec![0.0; 81];
        assert!(matches!(
            taylor_derivatives(&times, &samples, &[2], FitOptions { degree: 60 }),
            Err(Error::DegenerateFit(_))
        ));
    }
}
