//! Ricci-type models obtained by reducing the quadric `Σ_A = {Ω'(x, Ax) = 1}`
//! of `(R^{2n+2}, Ω')` by the flow of `A ∈ sp(2n+2)`.
//!
//! The chart is `y ↦ σ(y) = v/√Ω'(v, Av)` with `v = x0 + Σ y^i e_i` and the
//! `e_i` spanning `H_{x0}`, the `Ω'`-orthogonal of `span{x0, Ax0}`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{ChartModel, ChartValues};
use crate::jets::{Jet, Scalar};
use crate::linalg::{max_abs, solve_scalar, standard_symplectic};

/// Membership of `A` in the symplectic Lie algebra of `Ω'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpCheck {
    /// `max |AᵀΩ' + Ω'A|`
    pub defect: f64,
    pub pass: bool,
}

pub fn validate_sp(a: &DMatrix<f64>, omega_prime: &DMatrix<f64>) -> Result<SpCheck> {
    if !a.is_square() || a.shape() != omega_prime.shape() {
        return Err(Error::DimensionMismatch(a.nrows(), omega_prime.nrows()));
    }
    let defect = max_abs(&(a.transpose() * omega_prime + omega_prime * a));
    Ok(SpCheck {
        defect,
        pass: defect <= 1e-12,
    })
}

/// Outcome of the search for a point of `Σ_A`.
#[derive(Debug, Clone, PartialEq)]
pub enum BasePoint {
    Found(Vec<f64>),
    /// `Ω'(x, Ax)` was never positive; `Σ_{−A}` is non-empty instead.
    NegateA,
}

fn pairing(omega: &DMatrix<f64>, u: &[f64], v: &[f64]) -> f64 {
    let m = u.len();
    let mut acc = 0.0;
    for i in 0..m {
        for j in 0..m {
            acc += u[i] * omega[(i, j)] * v[j];
        }
    }
    acc
}

fn apply(a: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum())
        .collect()
}

/// Seeded random search for `x` with `Ω'(x, Ax) > 0`, rescaled onto `Σ_A`.
pub fn base_point(a: &DMatrix<f64>, seed: u64) -> Result<BasePoint> {
    const BUDGET: usize = 2000;
    let m = a.nrows();
    if m % 2 != 0 || !a.is_square() {
        return Err(Error::DimensionMismatch(a.nrows(), a.ncols()));
    }
    let omega = standard_symplectic(m / 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut most_negative = 0.0f64;
    for _ in 0..BUDGET {
        let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm2: f64 = x.iter().map(|v| v * v).sum();
        if norm2 < 1e-6 {
            continue;
        }
        let val = pairing(&omega, &x, &apply(a, &x)) / norm2;
        most_negative = most_negative.min(val);
        if best.as_ref().map_or(true, |(b, _)| val > *b) {
            best = Some((val, x));
        }
    }
    let scale = max_abs(a).max(f64::MIN_POSITIVE);
    match best {
        Some((val, x)) if val > 1e-8 * scale => {
            let q = pairing(&omega, &x, &apply(a, &x));
            let s = 1.0 / q.sqrt();
            Ok(BasePoint::Found(x.iter().map(|v| v * s).collect()))
        }
        _ if most_negative < -1e-8 * scale => Ok(BasePoint::NegateA),
        _ => Err(Error::InvalidArgument(
            "Ω'(x, Ax) vanished on every sample; A is degenerate for sampling".into(),
        )),
    }
}

/// `λ` with `A² = λI` (to `1e−10`), if any.
pub fn symmetric_criterion(a: &DMatrix<f64>) -> Option<f64> {
    let m = a.nrows();
    let a2 = a * a;
    let lambda = a2.trace() / m as f64;
    let defect = max_abs(&(a2 - DMatrix::identity(m, m) * lambda));
    (defect <= 1e-10).then_some(lambda)
}

/// The complex structure `J = [[0, −I], [I, 0]]` on `R^{2m}`.
pub fn complex_structure(m: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        j[(i, m + i)] = -1.0;
        j[(m + i, i)] = 1.0;
    }
    j
}

/// `[[E, I], [I, E]]` with `E = θ(e_2 e_1ᵀ − e_1 e_2ᵀ)`, `(n+1)×(n+1)` blocks.
pub fn block_example(n: usize, theta: f64) -> DMatrix<f64> {
    let k = n + 1;
    let mut a = DMatrix::zeros(2 * k, 2 * k);
    for i in 0..k {
        a[(i, k + i)] = 1.0;
        a[(k + i, i)] = 1.0;
    }
    for off in [0, k] {
        a[(off, off + 1)] = -theta;
        a[(off + 1, off)] = theta;
    }
    a
}

#[derive(Debug, Clone)]
pub struct ReductionSpec {
    pub a: DMatrix<f64>,
    pub omega_prime: DMatrix<f64>,
    pub x0: Vec<f64>,
    pub slice_basis: Vec<Vec<f64>>,
}

impl ReductionSpec {
    /// Validates `A`, finds a base point with `seed` and completes the slice.
    pub fn new(a: DMatrix<f64>, seed: u64) -> Result<Self> {
        let m = a.nrows();
        if m < 4 || m % 2 != 0 || !a.is_square() {
            return Err(Error::InvalidParams(format!(
                "A must be square of even size at least 4, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let omega_prime = standard_symplectic(m / 2);
        let sp = validate_sp(&a, &omega_prime)?;
        if !sp.pass {
            return Err(Error::InvalidParams(format!(
                "A is not in the symplectic Lie algebra (defect {:e})",
                sp.defect
            )));
        }
        let x0 = match base_point(&a, seed)? {
            BasePoint::Found(x) => x,
            BasePoint::NegateA => {
                return Err(Error::InvalidParams(
                    "Ω'(x, Ax) ≤ 0 on every sample; use −A instead".into(),
                ))
            }
        };
        let slice_basis = slice_basis(&a, &omega_prime, &x0);
        Ok(ReductionSpec {
            a,
            omega_prime,
            x0,
            slice_basis,
        })
    }

    pub fn from_preset(name: &str, n: usize, seed: u64) -> Result<Self> {
        let a = preset_matrix(name, n)?;
        ReductionSpec::new(a, seed)
    }

    pub fn reduced_dim(&self) -> usize {
        self.a.nrows() - 2
    }
}

/// `"complex-structure"` or `"block-E(θ)"`, e.g. `block-E(1)`.
pub fn preset_matrix(name: &str, n: usize) -> Result<DMatrix<f64>> {
    let name = name.trim();
    if name == "complex-structure" {
        return Ok(complex_structure(n + 1));
    }
    if let Some(rest) = name.strip_prefix("block-E(").and_then(|r| r.strip_suffix(')')) {
        let theta: f64 = rest
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParams(format!("bad angle in preset `{name}`")))?;
        if theta == 0.0 {
            return Err(Error::InvalidParams("block-E needs a nonzero E".into()));
        }
        return Ok(block_example(n, theta));
    }
    Err(Error::InvalidParams(format!(
        "unknown preset `{name}` (expected complex-structure or block-E(θ))"
    )))
}

/// Orthonormal (Euclidean) basis of the `Ω'`-orthogonal of `{x0, Ax0}`.
fn slice_basis(a: &DMatrix<f64>, omega: &DMatrix<f64>, x0: &[f64]) -> Vec<Vec<f64>> {
    let m = x0.len();
    // v ⟂_Ω' w  ⇔  v · (Ω' w) = 0 up to sign.
    let c1 = apply(omega, x0);
    let c2 = apply(omega, &apply(a, x0));
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
    let push = |v: Vec<f64>, basis: &mut Vec<Vec<f64>>| {
        let mut w = v;
        for _ in 0..2 {
            for b in basis.iter() {
                let dot: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= dot * bi;
                }
            }
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            basis.push(w.into_iter().map(|x| x / norm).collect());
        }
    };
    push(c1, &mut basis);
    push(c2, &mut basis);
    for i in 0..m {
        if basis.len() == m {
            break;
        }
        let mut e = vec![0.0; m];
        e[i] = 1.0;
        push(e, &mut basis);
    }
    basis.split_off(2)
}

/// The reduced chart model.
#[derive(Debug, Clone)]
pub struct ReducedModel {
    spec: ReductionSpec,
}

impl ReducedModel {
    pub fn new(spec: ReductionSpec) -> Self {
        ReducedModel { spec }
    }

    pub fn spec(&self) -> &ReductionSpec {
        &self.spec
    }

    fn ambient_point<S: Scalar>(&self, y: &[S]) -> Vec<S> {
        let s = &self.spec;
        (0..s.x0.len())
            .map(|r| {
                let mut acc = y[0].lift(s.x0[r]);
                for (yi, e) in y.iter().zip(&s.slice_basis) {
                    if e[r] != 0.0 {
                        acc = acc + yi.scale(e[r]);
                    }
                }
                acc
            })
            .collect()
    }

    fn omega_pair<S: Scalar>(&self, u: &[S], v: &[S]) -> S {
        let w = &self.spec.omega_prime;
        let mut acc = u[0].lift(0.0);
        for i in 0..u.len() {
            for j in 0..v.len() {
                let c = w[(i, j)];
                if c != 0.0 {
                    acc = acc + (u[i].clone() * v[j].clone()).scale(c);
                }
            }
        }
        acc
    }

    fn apply_a<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let a = &self.spec.a;
        (0..a.nrows())
            .map(|i| {
                let mut acc = x[0].lift(0.0);
                for j in 0..a.ncols() {
                    let c = a[(i, j)];
                    if c != 0.0 {
                        acc = acc + x[j].scale(c);
                    }
                }
                acc
            })
            .collect()
    }

    fn quadric(&self, y: &[f64]) -> f64 {
        let v = self.ambient_point(y);
        self.omega_pair(&v, &self.apply_a(&v))
    }
}

fn truncate_all(v: &[Jet], order: usize) -> Vec<Jet> {
    v.iter().map(|j| j.truncate(order)).collect()
}

fn combine(a: &[Jet], ca: &Jet, b: &[Jet], cb: &Jet, c: &[Jet]) -> Vec<Jet> {
    // c + ca·a + cb·b, truncated to the order of c
    c.iter()
        .zip(a.iter().zip(b))
        .map(|(ci, (ai, bi))| {
            let mut out = ci.clone();
            out.add_product(1.0, ca, ai);
            out.add_product(1.0, cb, bi);
            out
        })
        .collect()
}

impl ChartModel for ReducedModel {
    fn dim(&self) -> usize {
        self.spec.reduced_dim()
    }

    fn name(&self) -> String {
        format!("reduced(ambient {})", self.spec.a.nrows())
    }

    fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && p.iter().all(|x| x.is_finite()) && self.quadric(p) > 0.5
    }

    fn eval_jets(&self, p: &[f64], order: usize) -> Result<ChartValues<Jet>> {
        let d = self.dim();
        if p.len() != d {
            return Err(Error::DimensionMismatch(p.len(), d));
        }
        let y = Jet::variables(p, order + 2);
        let v = self.ambient_point(&y);
        let q = self.omega_pair(&v, &self.apply_a(&v));
        if !(q.value() > 0.5) {
            return Err(Error::ChartValidity { value: q.value() });
        }
        let inv_sqrt = q.sqrt("Omega'(v, Av)")?.recip("sqrt(Omega'(v, Av))")?;
        let sigma: Vec<Jet> = v.iter().map(|c| c * &inv_sqrt).collect();
        let a_sigma = self.apply_a(&sigma);

        let dsigma: Vec<Vec<Jet>> = (0..d)
            .map(|j| sigma.iter().map(|c| c.derivative(j)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;

        // The orbit direction must be transverse to the section.
        let m = sigma.len();
        let mut frame = DMatrix::zeros(m, m);
        for r in 0..m {
            for (j, ds) in dsigma.iter().enumerate() {
                frame[(r, j)] = ds[r].value();
            }
            frame[(r, d)] = a_sigma[r].value();
            frame[(r, d + 1)] = sigma[r].value();
        }
        let col_scale: f64 = frame.column_iter().map(|c| c.norm()).product();
        let det = frame.determinant();
        if !(det.abs() > 1e-10 * col_scale) {
            return Err(Error::Transversality(format!(
                "section frame is degenerate at {p:?} (det {det:e})"
            )));
        }

        // Projection onto H along span{σ, Aσ}. The Ω'-pairing matrix of that
        // span is [[0, 1], [−1, 0]], so the 2×2 system solves to
        // w ↦ w − Ω'(w, Aσ)σ + Ω'(w, σ)Aσ.
        let o1 = order + 1;
        let sigma1 = truncate_all(&sigma, o1);
        let a_sigma1 = truncate_all(&a_sigma, o1);
        let mut c = Vec::with_capacity(d);
        let mut h: Vec<Vec<Jet>> = Vec::with_capacity(d);
        for ds in &dsigma {
            let along_sigma = -self.omega_pair(ds, &a_sigma1);
            let along_orbit = self.omega_pair(ds, &sigma1);
            c.push(-along_orbit.clone());
            h.push(combine(&sigma1, &along_sigma, &a_sigma1, &along_orbit, ds));
        }

        let o0 = order;
        let sigma0 = truncate_all(&sigma, o0);
        let a_sigma0 = truncate_all(&a_sigma, o0);
        let h0: Vec<Vec<Jet>> = h.iter().map(|hj| truncate_all(hj, o0)).collect();
        let ah0: Vec<Vec<Jet>> = h0.iter().map(|hj| self.apply_a(hj)).collect();

        let omega: Vec<Jet> = (0..d)
            .flat_map(|l| (0..d).map(move |k| (l, k)))
            .map(|(l, k)| self.omega_pair(&h0[l], &h0[k]))
            .collect();

        // rhs[l, (i, j)] = Ω'(h_l, V_ij), V_ij = D_{h_i} h_j − Ω'(Ah_i, h_j)σ + Ω'(h_i, h_j)Aσ
        let mut rhs = vec![Jet::zeros(d, o0); d * d * d];
        for i in 0..d {
            for j in 0..d {
                let dh: Vec<Jet> = h[j].iter().map(|c| c.derivative(i)).collect::<Result<_>>()?;
                let ci = c[i].truncate(o0);
                let mut vij: Vec<Jet> = dh
                    .iter()
                    .zip(&ah0[j])
                    .map(|(x, ahj)| {
                        let mut out = x.clone();
                        out.add_product(-1.0, &ci, ahj);
                        out
                    })
                    .collect();
                let s1 = -self.omega_pair(&ah0[i], &h0[j]);
                let s2 = self.omega_pair(&h0[i], &h0[j]);
                vij = combine(&sigma0, &s1, &a_sigma0, &s2, &vij);
                for l in 0..d {
                    rhs[l * d * d + i * d + j] = self.omega_pair(&h0[l], &vij);
                }
            }
        }
        let gamma = solve_scalar(&omega, d, &rhs, d * d, "reduced symplectic form")?;
        Ok(ChartValues { dim: d, gamma, omega })
    }
}
