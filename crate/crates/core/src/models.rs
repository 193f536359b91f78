//! Catalog of chart models.
//!
//! | kind | dim | connection | regime |
//! |------|-----|------------|--------|
//! | `flat` | `2n` | `Γ = 0`, standard `ω` | trivial |
//! | `constant_curvature` | 2 | Levi-Civita of the stereographic round / hyperbolic metric | locally symmetric |
//! | `bourgeois_cahen` | 2 | preferred, not locally symmetric off `y = 0` | S-type |
//! | `bourgeois_cahen_printed` | 2 | same with `x²` in place of `y²` in `Γ^y_{xx}` | fails the preferred check |
//! | `conformal_kahler` | 2 | Levi-Civita of `e^{2f}(dx² + dy²)` | generically not preferred |
//! | `polynomial` | `2n` | `Γ = Ω⁻¹S`, `S` a seeded totally symmetric polynomial tensor | generic |
//! | `product` | sum | block-diagonal product of two models | not Ricci-type |

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{ChartModel, ChartValues};
use crate::jets::{Jet, Scalar};
use crate::linalg::{inverse, standard_symplectic};

/// A real polynomial in the chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub dim: usize,
    /// `(coefficient, exponents)` pairs.
    pub terms: Vec<(f64, Vec<u32>)>,
}

impl Polynomial {
    pub fn new(dim: usize, terms: Vec<(f64, Vec<u32>)>) -> Result<Self> {
        if let Some((_, e)) = terms.iter().find(|(_, e)| e.len() != dim) {
            return Err(Error::InvalidParams(format!(
                "monomial exponents {e:?} do not match dimension {dim}"
            )));
        }
        Ok(Polynomial { dim, terms })
    }

    /// Parses `coef:e1:…:ed` items separated by commas, e.g. `0.3:2:1,0.1:0:3`.
    pub fn parse(dim: usize, text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let parts: Vec<&str> = item.split(':').map(str::trim).collect();
            if parts.len() != dim + 1 {
                return Err(Error::InvalidParams(format!(
                    "monomial `{item}` needs a coefficient and {dim} exponents"
                )));
            }
            let coef: f64 = parts[0]
                .parse()
                .map_err(|_| Error::InvalidParams(format!("bad coefficient in `{item}`")))?;
            let exps = parts[1..]
                .iter()
                .map(|p| p.parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::InvalidParams(format!("bad exponent in `{item}`")))?;
            terms.push((coef, exps));
        }
        Polynomial::new(dim, terms)
    }

    pub fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let mut acc = x[0].lift(0.0);
        for (c, e) in &self.terms {
            if *c == 0.0 {
                continue;
            }
            let mut m = x[0].lift(*c);
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    m = m * xi.clone();
                }
            }
            acc = acc + m;
        }
        acc
    }

    pub fn derivative(&self, var: usize) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .filter(|(_, e)| e[var] > 0)
            .map(|(c, e)| {
                let mut e = e.clone();
                let k = e[var];
                e[var] -= 1;
                (c * k as f64, e)
            })
            .collect();
        Polynomial {
            dim: self.dim,
            terms,
        }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self
            .terms
            .iter()
            .map(|(c, e)| {
                let mut s = format!("{c}");
                for k in e {
                    s.push_str(&format!(":{k}"));
                }
                s
            })
            .collect();
        write!(f, "{}", items.join(","))
    }
}

/// Default conformal factor `f = (3x²y + y³)/10`.
pub fn default_conformal_factor() -> Polynomial {
    Polynomial {
        dim: 2,
        terms: vec![(0.3, vec![2, 1]), (0.1, vec![0, 3])],
    }
}

/// Parameters of a catalog model.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Flat { n: usize },
    ConstantCurvature { kappa: f64 },
    BourgeoisCahen { a: f64, b: f64 },
    /// The variant with `x²` in place of `y²` in `Γ^y_{xx}`; kept as a
    /// negative specimen.
    BourgeoisCahenPrinted { a: f64, b: f64 },
    ConformalKahler { f: Polynomial },
    Polynomial { n: usize, seed: u64, scale: f64 },
    Product(Box<ModelSpec>, Box<ModelSpec>),
}

impl ModelSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelSpec::Flat { .. } => "flat",
            ModelSpec::ConstantCurvature { .. } => "constant_curvature",
            ModelSpec::BourgeoisCahen { .. } => "bourgeois_cahen",
            ModelSpec::BourgeoisCahenPrinted { .. } => "bourgeois_cahen_printed",
            ModelSpec::ConformalKahler { .. } => "conformal_kahler",
            ModelSpec::Polynomial { .. } => "polynomial",
            ModelSpec::Product(..) => "product",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::Flat { n } | ModelSpec::Polynomial { n, .. } => 2 * n,
            ModelSpec::Product(a, b) => a.dim() + b.dim(),
            _ => 2,
        }
    }

    /// Every 2D model in the catalog with its default parameters.
    pub fn surfaces() -> Vec<ModelSpec> {
        vec![
            ModelSpec::Flat { n: 1 },
            ModelSpec::ConstantCurvature { kappa: 1.0 },
            ModelSpec::ConstantCurvature { kappa: -1.0 },
            ModelSpec::BourgeoisCahen { a: 1.0, b: 1.0 },
            ModelSpec::BourgeoisCahenPrinted { a: 1.0, b: 1.0 },
            ModelSpec::ConformalKahler {
                f: default_conformal_factor(),
            },
        ]
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::Flat { n } => write!(f, "flat(n={n})"),
            ModelSpec::ConstantCurvature { kappa } => write!(f, "constant_curvature(kappa={kappa})"),
            ModelSpec::BourgeoisCahen { a, b } => write!(f, "bourgeois_cahen(A={a}, B={b})"),
            ModelSpec::BourgeoisCahenPrinted { a, b } => {
                write!(f, "bourgeois_cahen_printed(A={a}, B={b})")
            }
            ModelSpec::ConformalKahler { f: poly } => write!(f, "conformal_kahler(f={poly})"),
            ModelSpec::Polynomial { n, seed, scale } => {
                write!(f, "polynomial(n={n}, seed={seed}, scale={scale})")
            }
            ModelSpec::Product(a, b) => write!(f, "product({a}, {b})"),
        }
    }
}

#[derive(Debug, Clone)]
enum Formula {
    Flat {
        n: usize,
    },
    ConstantCurvature {
        kappa: f64,
    },
    BourgeoisCahen {
        a: f64,
        b: f64,
        printed: bool,
    },
    ConformalKahler {
        f: Polynomial,
        df: [Polynomial; 2],
    },
    Polynomial {
        n: usize,
        omega: Vec<f64>,
        /// `Γ^k_{ij}` as polynomials, `k*d*d + i*d + j`.
        gamma: Vec<Polynomial>,
    },
    Product(Box<Formula>, Box<Formula>),
}

fn standard_omega<S: Scalar>(like: &S, n: usize) -> Vec<S> {
    let d = 2 * n;
    let mut w = vec![like.lift(0.0); d * d];
    for i in 0..n {
        w[i * d + n + i] = like.lift(1.0);
        w[(n + i) * d + i] = like.lift(-1.0);
    }
    w
}

/// Levi-Civita data of `e^{2φ}(dx² + dy²)` from `∇φ` and `ω_{xy} = e^{2φ}`.
fn conformal_surface<S: Scalar>(grad: [S; 2], area: S) -> ChartValues<S> {
    let zero = area.lift(0.0);
    let mut gamma = vec![zero.clone(); 8];
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                let mut v = zero.clone();
                if k == i {
                    v = v + grad[j].clone();
                }
                if k == j {
                    v = v + grad[i].clone();
                }
                if i == j {
                    v = v - grad[k].clone();
                }
                gamma[k * 4 + i * 2 + j] = v;
            }
        }
    }
    ChartValues {
        dim: 2,
        gamma,
        omega: vec![zero.clone(), area.clone(), -area, zero],
    }
}

impl Formula {
    fn dim(&self) -> usize {
        match self {
            Formula::Flat { n } | Formula::Polynomial { n, .. } => 2 * n,
            Formula::Product(a, b) => a.dim() + b.dim(),
            _ => 2,
        }
    }

    fn contains(&self, p: &[f64]) -> bool {
        if !p.iter().all(|x| x.is_finite()) {
            return false;
        }
        match self {
            Formula::ConstantCurvature { kappa } => 1.0 + kappa * (p[0] * p[0] + p[1] * p[1]) > 1e-9,
            Formula::Product(a, b) => {
                let da = a.dim();
                a.contains(&p[..da]) && b.contains(&p[da..])
            }
            _ => true,
        }
    }

    fn eval<S: Scalar>(&self, x: &[S]) -> Result<ChartValues<S>> {
        let zero = x[0].lift(0.0);
        match self {
            Formula::Flat { n } => Ok(ChartValues {
                dim: 2 * n,
                gamma: vec![zero; 8 * n * n * n],
                omega: standard_omega(&x[0], *n),
            }),
            Formula::ConstantCurvature { kappa } => {
                let r2 = x[0].clone() * x[0].clone() + x[1].clone() * x[1].clone();
                let denom = r2.scale(*kappa) + x[0].lift(1.0);
                let inv = x[0].lift(1.0).checked_div(&denom, "1 + kappa*(x^2 + y^2)")?;
                let grad = [
                    x[0].clone() * inv.clone().scale(-2.0 * kappa),
                    x[1].clone() * inv.clone().scale(-2.0 * kappa),
                ];
                let area = (inv.clone() * inv).scale(4.0);
                Ok(conformal_surface(grad, area))
            }
            Formula::BourgeoisCahen { a, b, printed } => {
                let (px, y) = (&x[0], &x[1]);
                let y2 = y.clone() * y.clone();
                let u = y2.clone() + y.lift(*b);
                let quad_var = if *printed { px.clone() * px.clone() } else { y2 };
                let quad = quad_var + y.clone().scale(2.0 * a) - y.lift(*b);
                let ratio = y.checked_div(&u, "y / (y^2 + B)")?;
                let mut gamma = vec![zero.clone(); 8];
                // Γ^y_{xx}
                gamma[4] = -(u * quad);
                // Γ^x_{xy} = Γ^x_{yx}
                gamma[1] = ratio.clone();
                gamma[2] = ratio.clone();
                // Γ^y_{yy}
                gamma[7] = -ratio;
                Ok(ChartValues {
                    dim: 2,
                    gamma,
                    omega: standard_omega(&x[0], 1),
                })
            }
            Formula::ConformalKahler { f, df } => {
                let grad = [df[0].eval(x), df[1].eval(x)];
                let area = f.eval(x).scale(2.0).exp();
                Ok(conformal_surface(grad, area))
            }
            Formula::Polynomial { n, omega, gamma } => Ok(ChartValues {
                dim: 2 * n,
                gamma: gamma.iter().map(|g| g.eval(x)).collect(),
                omega: omega.iter().map(|w| x[0].lift(*w)).collect(),
            }),
            Formula::Product(fa, fb) => {
                let (da, db) = (fa.dim(), fb.dim());
                let d = da + db;
                let va = fa.eval(&x[..da])?;
                let vb = fb.eval(&x[da..])?;
                let mut gamma = vec![zero.clone(); d * d * d];
                let mut omega = vec![zero; d * d];
                for (off, dd, v) in [(0, da, &va), (da, db, &vb)] {
                    for k in 0..dd {
                        for i in 0..dd {
                            omega[(off + k) * d + off + i] = v.omega(k, i).clone();
                            for j in 0..dd {
                                gamma[(off + k) * d * d + (off + i) * d + off + j] =
                                    v.gamma(k, i, j).clone();
                            }
                        }
                    }
                }
                Ok(ChartValues { dim: d, gamma, omega })
            }
        }
    }
}

fn seeded_polynomial_formula(n: usize, seed: u64, scale: f64) -> Result<Formula> {
    let d = 2 * n;
    let w = standard_symplectic(n);
    let w_inv = inverse(&w, "standard symplectic form")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Monomials of degree ≤ 2.
    let mut monomials: Vec<Vec<u32>> = vec![vec![0; d]];
    for a in 0..d {
        let mut e = vec![0; d];
        e[a] = 1;
        monomials.push(e);
    }
    for a in 0..d {
        for b in a..d {
            let mut e = vec![0; d];
            e[a] += 1;
            e[b] += 1;
            monomials.push(e);
        }
    }
    // Totally symmetric S_{lij}: draw one polynomial per sorted index triple.
    let mut s: Vec<Option<Polynomial>> = vec![None; d * d * d];
    for l in 0..d {
        for i in l..d {
            for j in i..d {
                let terms = monomials
                    .iter()
                    .map(|e| (scale * rng.gen_range(-1.0..1.0), e.clone()))
                    .collect();
                let poly = Polynomial { dim: d, terms };
                for (a, b, c) in [(l, i, j), (l, j, i), (i, l, j), (i, j, l), (j, l, i), (j, i, l)] {
                    s[(a * d + b) * d + c] = Some(poly.clone());
                }
            }
        }
    }
    let s: Vec<Polynomial> = s.into_iter().map(|p| p.expect("filled")).collect();
    let mut gamma = Vec::with_capacity(d * d * d);
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                let mut terms = Vec::new();
                for l in 0..d {
                    let c = w_inv[(k, l)];
                    if c != 0.0 {
                        terms.extend(s[(l * d + i) * d + j].terms.iter().map(|(a, e)| (a * c, e.clone())));
                    }
                }
                gamma.push(Polynomial { dim: d, terms });
            }
        }
    }
    Ok(Formula::Polynomial {
        n,
        omega: w.transpose().as_slice().to_vec(),
        gamma,
    })
}

fn formula(spec: &ModelSpec) -> Result<Formula> {
    let positive = |name: &str, v: f64| {
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("{name} must be positive, got {v}")))
        }
    };
    Ok(match spec {
        ModelSpec::Flat { n } => {
            if *n == 0 {
                return Err(Error::InvalidParams("flat model needs n ≥ 1".into()));
            }
            Formula::Flat { n: *n }
        }
        ModelSpec::ConstantCurvature { kappa } => {
            if *kappa == 0.0 || !kappa.is_finite() {
                return Err(Error::InvalidParams(
                    "constant curvature needs a finite nonzero kappa (use flat for 0)".into(),
                ));
            }
            Formula::ConstantCurvature { kappa: *kappa }
        }
        ModelSpec::BourgeoisCahen { a, b } | ModelSpec::BourgeoisCahenPrinted { a, b } => {
            positive("B", *b)?;
            if !a.is_finite() {
                return Err(Error::InvalidParams("A must be finite".into()));
            }
            Formula::BourgeoisCahen {
                a: *a,
                b: *b,
                printed: matches!(spec, ModelSpec::BourgeoisCahenPrinted { .. }),
            }
        }
        ModelSpec::ConformalKahler { f } => {
            if f.dim != 2 {
                return Err(Error::InvalidParams("conformal factor must be a polynomial in x, y".into()));
            }
            Formula::ConformalKahler {
                f: f.clone(),
                df: [f.derivative(0), f.derivative(1)],
            }
        }
        ModelSpec::Polynomial { n, seed, scale } => {
            if *n == 0 {
                return Err(Error::InvalidParams("polynomial model needs n ≥ 1".into()));
            }
            if !scale.is_finite() {
                return Err(Error::InvalidParams("scale must be finite".into()));
            }
            seeded_polynomial_formula(*n, *seed, *scale)?
        }
        ModelSpec::Product(a, b) => Formula::Product(Box::new(formula(a)?), Box::new(formula(b)?)),
    })
}

/// A catalog model ready for evaluation.
#[derive(Debug, Clone)]
pub struct CatalogModel {
    spec: ModelSpec,
    formula: Formula,
}

impl CatalogModel {
    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }
}

impl ChartModel for CatalogModel {
    fn dim(&self) -> usize {
        self.formula.dim()
    }

    fn name(&self) -> String {
        self.spec.to_string()
    }

    fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && self.formula.contains(p)
    }

    fn eval(&self, p: &[f64]) -> Result<ChartValues<f64>> {
        self.formula.eval(p)
    }

    fn eval_jets(&self, p: &[f64], order: usize) -> Result<ChartValues<Jet>> {
        self.formula.eval(&Jet::variables(p, order))
    }
}

pub fn build_model(spec: &ModelSpec) -> Result<CatalogModel> {
    Ok(CatalogModel {
        spec: spec.clone(),
        formula: formula(spec)?,
    })
}

/// One-line descriptions of each kind and its parameters.
pub fn catalog() -> Vec<(&'static str, &'static str)> {
    vec![
        ("flat", "model.n (default 1): R^{2n} with Γ = 0 and the standard ω"),
        (
            "constant_curvature",
            "model.kappa (nonzero): stereographic chart of the round sphere (κ > 0) or hyperbolic plane (κ < 0), ω the area form",
        ),
        (
            "bourgeois_cahen",
            "model.a, model.b (b > 0): preferred connection on R² with ω = dx∧dy, Γ^y_xx = −(y²+B)(y²+2Ay−B), Γ^x_xy = y/(y²+B), Γ^y_yy = −y/(y²+B)",
        ),
        (
            "bourgeois_cahen_printed",
            "model.a, model.b: as bourgeois_cahen with x² in place of y² in Γ^y_xx; symplectic but not preferred",
        ),
        (
            "conformal_kahler",
            "model.f (default 0.3:2:1,0.1:0:3, i.e. (3x²y + y³)/10): Levi-Civita connection of e^{2f}(dx² + dy²)",
        ),
        (
            "polynomial",
            "model.n, model.seed, model.scale: constant standard ω, Γ = Ω⁻¹S with S a random totally symmetric tensor of quadratic polynomials",
        ),
        (
            "product",
            "model.factor1.*, model.factor2.*: block-diagonal product of two models",
        ),
        (
            "reduced",
            "model.preset (complex-structure | block-E(θ)) or model.A (row-major): Ricci-type quotient of the quadric Ω'(x, Ax) = 1",
        ),
    ]
}
