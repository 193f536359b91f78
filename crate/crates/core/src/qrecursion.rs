//! The recursion operators `Q^r`, the operators `P^r` and the odd-order
//! conditions requiring `P^r` to lie in the symplectic Lie algebra.
//!
//! With `E_l = ∇^l_X Π` at the base point:
//! `Q^2 = Π`, `Q^r = (r−1) E_{r−2} + Σ_{q=2}^{r−2} C(r−1, q+1) E_{r−2−q} Q^q`,
//! and for odd `r`,
//! `P^r = (r+2) Q^r + Σ_{q=2}^{(r−1)/2} C(r+2, q+1) (Q^q)^⊤ Q^{r−q}`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::EndoList;
use crate::linalg::{binomial, inverse, max_abs};

#[derive(Debug, Clone)]
pub struct QTable {
    /// `q[r - 2]` is `Q^r`.
    q: Vec<DMatrix<f64>>,
    p_ops: BTreeMap<usize, DMatrix<f64>>,
    pub omega_p: DMatrix<f64>,
    pub direction: Vec<f64>,
    pub point: Vec<f64>,
}

impl QTable {
    pub fn r_max(&self) -> usize {
        self.q.len() + 1
    }

    pub fn dim(&self) -> usize {
        self.omega_p.nrows()
    }

    /// `Q^r` for `2 ≤ r ≤ r_max`.
    pub fn q(&self, r: usize) -> &DMatrix<f64> {
        assert!((2..=self.r_max()).contains(&r), "Q^{r} not in table");
        &self.q[r - 2]
    }

    /// `P^r` for odd `3 ≤ r ≤ r_max`.
    pub fn p(&self, r: usize) -> Option<&DMatrix<f64>> {
        self.p_ops.get(&r)
    }
}

fn check_order(endos: &EndoList, r_max: usize) -> Result<()> {
    if r_max < 2 {
        return Err(Error::InvalidArgument(format!("r_max must be at least 2, got {r_max}")));
    }
    if endos.order() + 2 < r_max {
        return Err(Error::InsufficientOrder {
            needed: r_max - 2,
            available: endos.order(),
        });
    }
    Ok(())
}

fn finish(endos: &EndoList, q: Vec<DMatrix<f64>>) -> Result<QTable> {
    let mut table = QTable {
        q,
        p_ops: BTreeMap::new(),
        omega_p: endos.omega.clone(),
        direction: endos.direction.clone(),
        point: endos.point.clone(),
    };
    let mut r = 3;
    while r <= table.r_max() {
        let mut p = table.q(r) * (r as f64 + 2.0);
        for q in 2..=(r - 1) / 2 {
            let adj = symplectic_adjoint(table.q(q), &table.omega_p)?;
            p += (adj * table.q(r - q)) * binomial(r + 2, q + 1) as f64;
        }
        table.p_ops.insert(r, p);
        r += 2;
    }
    Ok(table)
}

/// Builds `Q^2 … Q^{r_max}` by the recursion, and `P^r` for odd `r`.
pub fn q_table(endos: &EndoList, r_max: usize) -> Result<QTable> {
    check_order(endos, r_max)?;
    let e = &endos.entries;
    let mut q: Vec<DMatrix<f64>> = Vec::with_capacity(r_max - 1);
    for r in 2..=r_max {
        let mut m = &e[r - 2] * (r as f64 - 1.0);
        for qq in 2..=r.saturating_sub(2) {
            m += (&e[r - 2 - qq] * &q[qq - 2]) * binomial(r - 1, qq + 1) as f64;
        }
        q.push(m);
    }
    finish(endos, q)
}

/// Coefficient of `∇^{i_1}Π ∘ … ∘ ∇^{i_k}Π` in `Q^r`, given by
/// `Π_j C(r − 2j + 1 − Σ_{l<j} i_l, i_j)`.
pub fn q_coefficient(r: usize, indices: &[usize]) -> Result<u64> {
    let k = indices.len();
    let total: usize = indices.iter().sum();
    if k == 0 || r != 2 * k + total {
        return Err(Error::InvalidArgument(format!(
            "indices {indices:?} do not satisfy r = 2k + Σ i_j for r = {r}"
        )));
    }
    let mut c = 1u64;
    let mut used = 0;
    for (j, &i) in indices.iter().enumerate() {
        let top = r + 1 - 2 * (j + 1) - used;
        c *= binomial(top, i);
        used += i;
    }
    Ok(c)
}

/// Every tuple `(i_1, …, i_k)` with `k ≥ 1` and `2k + Σ i_j = r`.
pub fn index_tuples(r: usize) -> Vec<Vec<usize>> {
    fn rec(rest: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            if !prefix.is_empty() {
                out.push(prefix.clone());
            }
            return;
        }
        if rest < 2 {
            return;
        }
        for i in 0..=rest - 2 {
            prefix.push(i);
            rec(rest - 2 - i, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(r, &mut Vec::new(), &mut out);
    out
}

/// Builds the same table by summing the closed-form expansion over all
/// index tuples.
pub fn q_table_closed(endos: &EndoList, r_max: usize) -> Result<QTable> {
    check_order(endos, r_max)?;
    let d = endos.dim();
    let e = &endos.entries;
    let mut q = Vec::with_capacity(r_max - 1);
    for r in 2..=r_max {
        let mut m = DMatrix::zeros(d, d);
        for tuple in index_tuples(r) {
            let c = q_coefficient(r, &tuple)? as f64;
            let mut prod = e[tuple[0]].clone();
            for &i in &tuple[1..] {
                prod = prod * &e[i];
            }
            m += prod * c;
        }
        q.push(m);
    }
    finish(endos, q)
}

/// `A^⊤ = Ω⁻¹ Aᵀ Ω`, so that `ω(A^⊤u, v) = ω(u, Av)`.
pub fn symplectic_adjoint(a: &DMatrix<f64>, omega: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.shape() != omega.shape() {
        return Err(Error::DimensionMismatch(a.nrows(), omega.nrows()));
    }
    let inv = inverse(omega, "symplectic form")?;
    Ok(inv * a.transpose() * omega)
}

/// Residuals of the odd-order condition at one order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionResidual {
    /// `‖P^r + (P^r)^⊤‖ / (1 + ‖P^r‖)`
    pub sp: f64,
    /// `|tr Q^r| / (1 + ‖Q^r‖)`, surfaces only.
    pub trace: Option<f64>,
}

fn check_odd(table: &QTable, r: usize) -> Result<()> {
    if r % 2 == 0 || r < 3 || r > table.r_max() {
        return Err(Error::InvalidArgument(format!(
            "condition order must be odd with 3 ≤ r ≤ {}, got {r}",
            table.r_max()
        )));
    }
    Ok(())
}

pub fn condition_residual(table: &QTable, r: usize) -> Result<ConditionResidual> {
    check_odd(table, r)?;
    let p = table.p(r).expect("odd P^r present");
    let adj = symplectic_adjoint(p, &table.omega_p)?;
    let sp = max_abs(&(p + adj)) / (1.0 + max_abs(p));
    let trace = (table.dim() == 2).then(|| {
        let q = table.q(r);
        q.trace().abs() / (1.0 + max_abs(q))
    });
    Ok(ConditionResidual { sp, trace })
}

/// Upper limit of the mixed sum in the bilinear form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumBound {
    /// `q = 2..r−2`, equivalent to the `P^r` form.
    Full,
    /// `q = 2..r−4`, a truncated variant kept for comparison.
    Truncated,
}

impl SumBound {
    fn last(self, r: usize) -> usize {
        match self {
            SumBound::Full => r.saturating_sub(2),
            SumBound::Truncated => r.saturating_sub(4),
        }
    }
}

/// Matrix `B` of the bilinear form
/// `(u,v) ↦ (r+2)[ω(Q^r u, v) + ω(u, Q^r v)] + Σ_q C(r+2, q+1) ω(Q^{r−q}u, Q^q v)`,
/// i.e. `B_{uv} = uᵀ B v`. For `r ≥ 2` this is `d^{r+2}/dt^{r+2}` at zero of
/// `ω(Z_u, Z_v)` along the geodesic.
pub fn bilinear_form(table: &QTable, r: usize, bound: SumBound) -> DMatrix<f64> {
    let w = &table.omega_p;
    let qr = table.q(r);
    let mut b = (qr.transpose() * w + w * qr) * (r as f64 + 2.0);
    for q in 2..=bound.last(r) {
        if r - q < 2 {
            continue;
        }
        b += table.q(r - q).transpose() * w * table.q(q) * binomial(r + 2, q + 1) as f64;
    }
    b
}

/// `‖B‖ / (1 + ‖ω‖ ‖P^r‖)` for the chosen bound.
pub fn bilinear_residual(table: &QTable, r: usize, bound: SumBound) -> Result<f64> {
    check_odd(table, r)?;
    let p = table.p(r).expect("odd P^r present");
    let b = bilinear_form(table, r, bound);
    Ok(max_abs(&b) / (1.0 + max_abs(&table.omega_p) * max_abs(p)))
}

/// Distance of `a` from the line through `b`: `min_c ‖a − c b‖ / (1 + ‖a‖)`.
pub fn proportionality_residual(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let bb = b.dot(b);
    let c = if bb > 0.0 { a.dot(b) / bb } else { 0.0 };
    max_abs(&(a - b * c)) / (1.0 + max_abs(a))
}
