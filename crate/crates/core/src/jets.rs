//! Truncated multivariate Taylor series ("jets").
//!
//! A [`Jet`] stores the Taylor coefficients `∂^α f / α!` of a scalar function
//! at a fixed center for every multi-index `|α| ≤ K`. Coefficients live in a
//! dense graded layout: all degree-0 terms, then degree 1, and so on. Because
//! the layout of order `k` is a prefix of the layout of any order `K ≥ k`,
//! jets of different orders over the same number of variables combine without
//! re-indexing; the result simply carries the smaller order.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Index tables shared by all jets with the same number of variables.
pub struct Layout {
    dim: usize,
    max_order: usize,
    exponents: Vec<Vec<u8>>,
    degree_start: Vec<usize>,
    lookup: HashMap<Vec<u8>, usize>,
    // (lhs, rhs, out) triples sorted by the degree of `out`.
    products: Vec<[u32; 3]>,
    product_end: Vec<usize>,
    // shifts[v][i] = index of exponents[i] + e_v, for deg(i) < max_order.
    shifts: Vec<Vec<u32>>,
    factorials: Vec<f64>,
}

impl Layout {
    fn build(dim: usize, max_order: usize) -> Layout {
        let mut exponents = Vec::new();
        let mut degree_start = Vec::with_capacity(max_order + 2);
        for degree in 0..=max_order {
            degree_start.push(exponents.len());
            let mut current = vec![0u8; dim];
            push_exponents(&mut exponents, &mut current, 0, degree);
        }
        degree_start.push(exponents.len());

        let lookup: HashMap<Vec<u8>, usize> = exponents
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();

        let degree_of = |i: usize| exponents[i].iter().map(|&a| a as usize).sum::<usize>();

        let mut products = Vec::new();
        let mut sum = vec![0u8; dim];
        for (i, a) in exponents.iter().enumerate() {
            let da = degree_of(i);
            for (j, b) in exponents.iter().enumerate() {
                if da + degree_of(j) > max_order {
                    // exponents are sorted by degree, later j only grow
                    break;
                }
                for v in 0..dim {
                    sum[v] = a[v] + b[v];
                }
                let k = lookup[&sum];
                products.push([i as u32, j as u32, k as u32]);
            }
        }
        products.sort_by_key(|t| degree_of(t[2] as usize));
        let mut product_end = vec![0usize; max_order + 1];
        for (pos, t) in products.iter().enumerate() {
            let d = degree_of(t[2] as usize);
            product_end[d] = pos + 1;
        }
        for d in 1..=max_order {
            product_end[d] = product_end[d].max(product_end[d - 1]);
        }

        let below_top = if max_order == 0 { 0 } else { degree_start[max_order] };
        let shifts = (0..dim)
            .map(|v| {
                (0..below_top)
                    .map(|i| {
                        let mut e = exponents[i].clone();
                        e[v] += 1;
                        lookup[&e] as u32
                    })
                    .collect()
            })
            .collect();

        let factorials = exponents
            .iter()
            .map(|e| e.iter().map(|&a| factorial(a as usize)).product())
            .collect();

        Layout {
            dim,
            max_order,
            exponents,
            degree_start,
            lookup,
            products,
            product_end,
            shifts,
            factorials,
        }
    }

    /// Number of coefficients of a jet of the given order.
    pub fn len(&self, order: usize) -> usize {
        self.degree_start[order + 1]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Position of a multi-index in the graded layout.
    pub fn index_of(&self, alpha: &[usize]) -> Option<usize> {
        if alpha.len() != self.dim {
            return None;
        }
        let key: Vec<u8> = alpha.iter().map(|&a| a as u8).collect();
        self.lookup.get(&key).copied()
    }

    pub fn exponent(&self, index: usize) -> &[u8] {
        &self.exponents[index]
    }
}

fn push_exponents(out: &mut Vec<Vec<u8>>, current: &mut Vec<u8>, var: usize, remaining: usize) {
    let dim = current.len();
    if var + 1 == dim {
        current[var] = remaining as u8;
        out.push(current.clone());
        current[var] = 0;
        return;
    }
    for a in (0..=remaining).rev() {
        current[var] = a as u8;
        push_exponents(out, current, var + 1, remaining - a);
    }
    current[var] = 0;
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Shared layout for `dim` variables covering at least `order`.
pub fn layout(dim: usize, order: usize) -> Arc<Layout> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Layout>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("layout cache poisoned");
    if let Some(existing) = guard.get(&dim) {
        if existing.max_order >= order {
            return existing.clone();
        }
    }
    let built = Arc::new(Layout::build(dim, order));
    guard.insert(dim, built.clone());
    built
}

/// Truncated Taylor expansion of a scalar function of `dim` variables.
#[derive(Clone)]
pub struct Jet {
    layout: Arc<Layout>,
    order: usize,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("dim", &self.layout.dim)
            .field("order", &self.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl Jet {
    pub fn zeros(dim: usize, order: usize) -> Jet {
        let layout = layout(dim, order);
        let n = layout.len(order);
        Jet {
            layout,
            order,
            coeffs: vec![0.0; n],
        }
    }

    pub fn constant(dim: usize, order: usize, value: f64) -> Jet {
        let mut j = Jet::zeros(dim, order);
        j.coeffs[0] = value;
        j
    }

    /// The coordinate function `x_var` expanded around `center`.
    pub fn variable(dim: usize, order: usize, var: usize, center: f64) -> Jet {
        assert!(var < dim, "variable index {var} out of range for dim {dim}");
        let mut j = Jet::constant(dim, order, center);
        if order >= 1 {
            // degree-1 block is ordered x_0, x_1, ...
            j.coeffs[1 + var] = 1.0;
        }
        j
    }

    /// Coordinate jets `x_i = center_i + δ_i` for every variable.
    pub fn variables(center: &[f64], order: usize) -> Vec<Jet> {
        let dim = center.len();
        (0..dim)
            .map(|v| Jet::variable(dim, order, v, center[v]))
            .collect()
    }

    pub fn from_coeffs(dim: usize, order: usize, coeffs: Vec<f64>) -> Result<Jet> {
        let layout = layout(dim, order);
        let n = layout.len(order);
        if coeffs.len() != n {
            return Err(Error::InvalidArgument(format!(
                "expected {n} coefficients for dim {dim} order {order}, got {}",
                coeffs.len()
            )));
        }
        Ok(Jet {
            layout,
            order,
            coeffs,
        })
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// Value at the center.
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Taylor coefficient for a multi-index (zero when `|α| > order`).
    pub fn coeff(&self, alpha: &[usize]) -> f64 {
        match self.layout.index_of(alpha) {
            Some(i) if i < self.coeffs.len() => self.coeffs[i],
            _ => 0.0,
        }
    }

    /// `∂^α f` at the center.
    pub fn partial(&self, alpha: &[usize]) -> Result<f64> {
        if alpha.len() != self.dim() {
            return Err(Error::DimensionMismatch(alpha.len(), self.dim()));
        }
        let total: usize = alpha.iter().sum();
        if total > self.order {
            return Err(Error::OutOfOrder {
                requested: total,
                available: self.order,
            });
        }
        let i = self.layout.index_of(alpha).expect("multi-index within order");
        Ok(self.coeffs[i] * self.layout.factorials[i])
    }

    /// Coefficient of the first-order term in `var`, i.e. `∂_var f` at the center.
    pub fn gradient_component(&self, var: usize) -> f64 {
        debug_assert!(self.order >= 1);
        self.coeffs[1 + var]
    }

    /// Partial derivative as a jet of one lower order.
    pub fn derivative(&self, var: usize) -> Result<Jet> {
        if self.order == 0 {
            return Err(Error::OutOfOrder {
                requested: 1,
                available: 0,
            });
        }
        let order = self.order - 1;
        let n = self.layout.len(order);
        let shifts = &self.layout.shifts[var];
        let coeffs = (0..n)
            .map(|i| {
                let up = shifts[i] as usize;
                let a = self.layout.exponents[up][var] as f64;
                a * self.coeffs[up]
            })
            .collect();
        Ok(Jet {
            layout: self.layout.clone(),
            order,
            coeffs,
        })
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order);
        Jet {
            layout: self.layout.clone(),
            order,
            coeffs: self.coeffs[..self.layout.len(order)].to_vec(),
        }
    }

    pub fn scale(&self, c: f64) -> Jet {
        Jet {
            layout: self.layout.clone(),
            order: self.order,
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn add_const(&self, c: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    fn wider_layout(&self, other: &Jet) -> Arc<Layout> {
        if self.layout.max_order >= other.layout.max_order {
            self.layout.clone()
        } else {
            other.layout.clone()
        }
    }

    fn check_dim(&self, other: &Jet) {
        assert_eq!(
            self.dim(),
            other.dim(),
            "jet dimension mismatch ({} vs {})",
            self.dim(),
            other.dim()
        );
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        self.check_dim(other);
        let order = self.order.min(other.order);
        let layout = self.wider_layout(other);
        let n = layout.len(order);
        let coeffs = (0..n).map(|i| f(self.coeffs[i], other.coeffs[i])).collect();
        Jet {
            layout,
            order,
            coeffs,
        }
    }

    fn product(&self, other: &Jet) -> Jet {
        self.check_dim(other);
        let order = self.order.min(other.order);
        let layout = self.wider_layout(other);
        let mut coeffs = vec![0.0; layout.len(order)];
        let end = layout.product_end[order];
        let (a, b) = (&self.coeffs, &other.coeffs);
        for t in &layout.products[..end] {
            coeffs[t[2] as usize] += a[t[0] as usize] * b[t[1] as usize];
        }
        Jet {
            layout,
            order,
            coeffs,
        }
    }

    /// `self += factor · a · b`, truncated to `self.order`.
    pub fn add_product(&mut self, factor: f64, a: &Jet, b: &Jet) {
        let order = self.order;
        debug_assert!(a.order >= order && b.order >= order);
        let end = self.layout.product_end[order];
        for t in &self.layout.products[..end] {
            self.coeffs[t[2] as usize] += factor * a.coeffs[t[0] as usize] * b.coeffs[t[1] as usize];
        }
    }

    /// `self += factor · a`, truncated to `self.order`.
    pub fn add_scaled(&mut self, factor: f64, a: &Jet) {
        let n = self.coeffs.len();
        debug_assert!(a.coeffs.len() >= n);
        for (s, x) in self.coeffs.iter_mut().zip(&a.coeffs[..n]) {
            *s += factor * x;
        }
    }

    /// Evaluates `Σ_k series[k] (f − f(center))^k`, the composition of a
    /// scalar function with known Taylor coefficients `series` at `f(center)`.
    fn compose(&self, series: &[f64]) -> Jet {
        let mut u = self.clone();
        u.coeffs[0] = 0.0;
        let mut result = Jet {
            layout: self.layout.clone(),
            order: self.order,
            coeffs: vec![0.0; self.coeffs.len()],
        };
        result.coeffs[0] = series[self.order];
        for k in (0..self.order).rev() {
            result = result.product(&u);
            result.coeffs[0] += series[k];
        }
        result
    }

    pub fn recip(&self, what: &str) -> Result<Jet> {
        let b0 = self.value();
        if b0 == 0.0 || !b0.is_finite() {
            return Err(Error::singular(what, "division by a zero constant term"));
        }
        let series: Vec<f64> = (0..=self.order)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign / b0.powi(k as i32 + 1)
            })
            .collect();
        Ok(self.compose(&series))
    }

    pub fn sqrt(&self, what: &str) -> Result<Jet> {
        let b0 = self.value();
        if !(b0 > 0.0) || !b0.is_finite() {
            return Err(Error::singular(what, "square root of a non-positive constant term"));
        }
        let mut series = Vec::with_capacity(self.order + 1);
        let mut binom = 1.0;
        for k in 0..=self.order {
            series.push(binom * b0.powf(0.5 - k as f64));
            binom *= (0.5 - k as f64) / (k as f64 + 1.0);
        }
        Ok(self.compose(&series))
    }

    pub fn exp(&self) -> Jet {
        let e0 = self.value().exp();
        let series: Vec<f64> = (0..=self.order).map(|k| e0 / factorial(k)).collect();
        self.compose(&series)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.product(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

macro_rules! owned_binop {
    ($tr:ident, $method:ident) => {
        impl $tr for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&self).$method(rhs)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

/// Arithmetic shared by plain reals and jets, so chart formulas can be written
/// once and evaluated either pointwise or as Taylor expansions.
pub trait Scalar:
    Clone
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// A constant with the same shape as `self`.
    fn lift(&self, c: f64) -> Self;
    fn value(&self) -> f64;
    fn scale(&self, c: f64) -> Self;
    fn checked_div(&self, rhs: &Self, what: &str) -> Result<Self>;
    fn checked_sqrt(&self, what: &str) -> Result<Self>;
    fn exp(&self) -> Self;
}

impl Scalar for f64 {
    fn lift(&self, c: f64) -> f64 {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn scale(&self, c: f64) -> f64 {
        self * c
    }
    fn checked_div(&self, rhs: &f64, what: &str) -> Result<f64> {
        if *rhs == 0.0 || !rhs.is_finite() {
            return Err(Error::singular(what, "division by zero"));
        }
        Ok(self / rhs)
    }
    fn checked_sqrt(&self, what: &str) -> Result<f64> {
        if !(*self > 0.0) {
            return Err(Error::singular(what, "square root of a non-positive value"));
        }
        Ok(f64::sqrt(*self))
    }
    fn exp(&self) -> f64 {
        f64::exp(*self)
    }
}

impl Scalar for Jet {
    fn lift(&self, c: f64) -> Jet {
        Jet {
            layout: self.layout.clone(),
            order: self.order,
            coeffs: {
                let mut v = vec![0.0; self.coeffs.len()];
                v[0] = c;
                v
            },
        }
    }
    fn value(&self) -> f64 {
        self.coeffs[0]
    }
    fn scale(&self, c: f64) -> Jet {
        Jet::scale(self, c)
    }
    fn checked_div(&self, rhs: &Jet, what: &str) -> Result<Jet> {
        Ok(self * &rhs.recip(what)?)
    }
    fn checked_sqrt(&self, what: &str) -> Result<Jet> {
        self.sqrt(what)
    }
    fn exp(&self) -> Jet {
        Jet::exp(self)
    }
}

/// Scalar expression over chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Sqrt(Box<Expr>),
}

impl Expr {
    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn sqrt(self) -> Expr {
        Expr::Sqrt(Box::new(self))
    }

    /// Evaluate with each `Var(i)` bound to `vars[i]`.
    pub fn eval<S: Scalar>(&self, vars: &[S]) -> Result<S> {
        let shape = vars
            .first()
            .ok_or_else(|| Error::InvalidArgument("expression needs at least one variable".into()))?;
        self.eval_with(vars, shape)
    }

    fn eval_with<S: Scalar>(&self, vars: &[S], shape: &S) -> Result<S> {
        Ok(match self {
            Expr::Const(c) => shape.lift(*c),
            Expr::Var(i) => vars
                .get(*i)
                .cloned()
                .ok_or_else(|| Error::InvalidArgument(format!("variable x{i} not bound")))?,
            Expr::Neg(a) => -a.eval_with(vars, shape)?,
            Expr::Add(a, b) => a.eval_with(vars, shape)? + b.eval_with(vars, shape)?,
            Expr::Sub(a, b) => a.eval_with(vars, shape)? - b.eval_with(vars, shape)?,
            Expr::Mul(a, b) => a.eval_with(vars, shape)? * b.eval_with(vars, shape)?,
            Expr::Div(a, b) => {
                let num = a.eval_with(vars, shape)?;
                let den = b.eval_with(vars, shape)?;
                num.checked_div(&den, &b.to_string())?
            }
            Expr::Sqrt(a) => a.eval_with(vars, shape)?.checked_sqrt(&a.to_string())?,
        })
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::Neg(a) => write!(f, "-({a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "{a}*{b}"),
            Expr::Div(a, b) => write!(f, "{a}/{b}"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
        }
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Expr {
        Expr::Const(c)
    }
}

macro_rules! expr_binop {
    ($tr:ident, $method:ident, $variant:ident) => {
        impl<T: Into<Expr>> $tr<T> for Expr {
            type Output = Expr;
            fn $method(self, rhs: T) -> Expr {
                Expr::$variant(Box::new(self), Box::new(rhs.into()))
            }
        }
        impl $tr<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(Expr::Const(self)), Box::new(rhs))
            }
        }
    };
}

expr_binop!(Add, add, Add);
expr_binop!(Sub, sub, Sub);
expr_binop!(Mul, mul, Mul);
expr_binop!(Div, div, Div);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

/// Degree-`order` Taylor expansion of `expr` at `center`.
pub fn jet_arith(expr: &Expr, center: &[f64], order: usize) -> Result<Jet> {
    if center.is_empty() {
        return Err(Error::InvalidArgument("center must have at least one coordinate".into()));
    }
    let vars = Jet::variables(center, order);
    expr.eval(&vars)
}

/// `∂^α f` at the jet center.
pub fn jet_partial(j: &Jet, alpha: &[usize]) -> Result<f64> {
    j.partial(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::var(0)
    }

    #[test]
    fn polynomial_identity() {
        let e = (1.0 + x()) * (1.0 - x());
        let j = jet_arith(&e, &[0.0], 2).unwrap();
        assert_eq!(j.coeffs(), &[1.0, 0.0, -1.0]);
    }

    #[test]
    fn geometric_series() {
        let e = 1.0 / (1.0 - x());
        let j = jet_arith(&e, &[0.0], 3).unwrap();
        assert_eq!(j.coeffs(), &[1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn binomial_series() {
        let e = (1.0 + 2.0 * x()).sqrt();
        let j = jet_arith(&e, &[0.0], 2).unwrap();
        let c = j.coeffs();
        assert!((c[0] - 1.0).abs() < 1e-15);
        assert!((c[1] - 1.0).abs() < 1e-15);
        assert!((c[2] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn mixed_partial_of_monomial() {
        let e = Expr::var(0) * Expr::var(0) * Expr::var(1);
        let j = jet_arith(&e, &[0.0, 0.0], 3).unwrap();
        assert_eq!(jet_partial(&j, &[2, 1]).unwrap(), 2.0);
        assert_eq!(jet_partial(&j, &[0, 0]).unwrap(), 0.0);
    }

    #[test]
    fn zero_multi_index_is_value() {
        let e = 3.0 + Expr::var(0) * Expr::var(1);
        let j = jet_arith(&e, &[2.0, 5.0], 2).unwrap();
        assert_eq!(jet_partial(&j, &[0, 0]).unwrap(), 13.0);
    }

    #[test]
    fn partial_beyond_order_is_rejected() {
        let j = jet_arith(&(x() * x()), &[1.0], 2).unwrap();
        assert!(matches!(
            jet_partial(&j, &[3]),
            Err(Error::OutOfOrder {
                requested: 3,
                available: 2
            })
        ));
    }

    #[test]
    fn singular_division_names_subexpression() {
        let e = 1.0 / (1.0 - x());
        match jet_arith(&e, &[1.0], 2) {
            Err(Error::SingularEvaluation { expr, .. }) => assert_eq!(expr, "(1 - x0)"),
            other => panic!("expected singular evaluation, got {other:?}"),
        }
    }

    #[test]
    fn sqrt_of_negative_is_singular() {
        let e = (x() - 2.0).sqrt();
        assert!(matches!(
            jet_arith(&e, &[1.0], 2),
            Err(Error::SingularEvaluation { .. })
        ));
    }

    #[test]
    fn derivative_lowers_order() {
        let e = x() * x() * x();
        let j = jet_arith(&e, &[2.0], 4).unwrap();
        let d = j.derivative(0).unwrap();
        assert_eq!(d.order(), 3);
        assert!((d.value() - 12.0).abs() < 1e-14);
        assert!((jet_partial(&d, &[1]).unwrap() - 12.0).abs() < 1e-13);
    }

    #[test]
    fn mixed_orders_truncate_to_smaller() {
        let a = Jet::variable(2, 4, 0, 1.0);
        let b = Jet::variable(2, 2, 1, 1.0);
        let c = &a * &b;
        assert_eq!(c.order(), 2);
        assert_eq!(c.coeff(&[1, 1]), 1.0);
    }

    #[test]
    fn exp_series() {
        let j = Jet::variable(1, 5, 0, 0.0).exp();
        for (k, c) in j.coeffs().iter().enumerate() {
            assert!((c - 1.0 / factorial(k)).abs() < 1e-15);
        }
    }
}
