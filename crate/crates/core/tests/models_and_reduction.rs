//! Catalog models and reduced models against direct computations.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use stype_core::geometry::{
    curvature_stack, pi_derivatives, preferred_residual, ricci_type_diagnostics, ricci_type_identities,
    ricci_type_split, surface_curvature_residual, validate_structure, ChartModel,
};
use stype_core::models::{build_model, default_conformal_factor, ModelSpec};
use stype_core::qrecursion::{condition_residual, q_table};
use stype_core::reduction::{symmetric_criterion, ReducedModel, ReductionSpec};

fn pairing(w: &DMatrix<f64>, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    (u.transpose() * w * v)[(0, 0)]
}

struct AmbientOracle<'a> {
    spec: &'a ReductionSpec,
}

impl AmbientOracle<'_> {
    fn sigma(&self, y: &[f64]) -> DVector<f64> {
        let s = self.spec;
        let mut v = DVector::from_column_slice(&s.x0);
        for (yi, e) in y.iter().zip(&s.slice_basis) {
            v += DVector::from_column_slice(e) * *yi;
        }
        let q = pairing(&s.omega_prime, &v, &(&s.a * &v));
        v / q.sqrt()
    }

    fn d_sigma(&self, y: &[f64], i: usize) -> DVector<f64> {
        let h = 1e-5;
        let mut yp = y.to_vec();
        let mut ym = y.to_vec();
        yp[i] += h;
        ym[i] -= h;
        (self.sigma(&yp) - self.sigma(&ym)) / (2.0 * h)
    }

    /// Removes the `span{σ, Aσ}` part so the result is Ω'-orthogonal to both.
    fn project(&self, sigma: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        let om = &self.spec.omega_prime;
        let a_sigma = &self.spec.a * sigma;
        let gram = Matrix2::new(
            pairing(om, sigma, sigma),
            pairing(om, &a_sigma, sigma),
            pairing(om, sigma, &a_sigma),
            pairing(om, &a_sigma, &a_sigma),
        );
        let rhs = Vector2::new(pairing(om, w, sigma), pairing(om, w, &a_sigma));
        let c = gram.lu().solve(&rhs).expect("σ, Aσ span a symplectic plane");
        w - sigma * c[0] - a_sigma * c[1]
    }

    fn horizontal(&self, y: &[f64]) -> Vec<DVector<f64>> {
        let sigma = self.sigma(y);
        (0..y.len()).map(|i| self.project(&sigma, &self.d_sigma(y, i))).collect()
    }

    fn omega(&self, y: &[f64]) -> DMatrix<f64> {
        let h = self.horizontal(y);
        let d = y.len();
        DMatrix::from_fn(d, d, |i, j| pairing(&self.spec.omega_prime, &h[i], &h[j]))
    }

    /// `Γ^k_ij` from `D_{H_i} H_j = ∂_i h_j − c_i A h_j`, with `c_i` the `Aσ`
    /// component of `∂_i σ`.
    fn gamma(&self, y: &[f64]) -> Vec<f64> {
        let d = y.len();
        let om = &self.spec.omega_prime;
        let h = self.horizontal(y);
        let sigma = self.sigma(y);
        let w = self.omega(y);
        let w_inv = w.clone().try_inverse().unwrap();
        let step = 1e-4;
        let mut out = vec![0.0; d * d * d];
        for i in 0..d {
            let shifted = |s: f64| {
                let mut z = y.to_vec();
                z[i] += s;
                self.horizontal(&z)
            };
            let (hp, hm) = (shifted(step), shifted(-step));
            let ds = self.d_sigma(y, i);
            let c = pairing(om, &sigma, &ds);
            for j in 0..d {
                let dh = (&hp[j] - &hm[j]) / (2.0 * step) - (&self.spec.a * &h[j]) * c;
                let b = DVector::from_fn(d, |l, _| pairing(om, &h[l], &dh));
                let g = &w_inv * b;
                for k in 0..d {
                    out[(k * d + i) * d + j] = g[k];
                }
            }
        }
        out
    }
}

#[test]
fn reduced_chart_matches_ambient_oracle() {
    for (preset, y) in [("block-E(1)", vec![0.05, -0.1, 0.08, 0.02]), ("complex-structure", vec![0.1, -0.05, 0.0, 0.07])] {
        let spec = ReductionSpec::from_preset(preset, 2, 7).unwrap();
        let model = ReducedModel::new(spec.clone());
        let oracle = AmbientOracle { spec: &spec };
        let chart = model.eval(&y).unwrap();
        let w = oracle.omega(&y);
        for i in 0..4 {
            for j in 0..4 {
                assert!((chart.omega(i, j) - w[(i, j)]).abs() < 1e-8, "{preset} ω_{i}{j}");
            }
        }
        let g = oracle.gamma(&y);
        for (idx, (a, b)) in chart.gamma.iter().zip(&g).enumerate() {
            assert!((a - b).abs() < 1e-6, "{preset} Γ[{idx}]: {a} vs {b}");
        }
    }
}

#[test]
fn reduced_block_model_is_ricci_type_and_not_symmetric() {
    let spec = ReductionSpec::from_preset("block-E(1)", 2, 7).unwrap();
    assert_eq!(symmetric_criterion(&spec.a), None);
    let model = ReducedModel::new(spec);
    let y = [0.05, -0.02, 0.03, 0.01];
    assert!(validate_structure(&model, &y, 1e-8).unwrap().pass);
    let stack = curvature_stack(&model, &y, 3).unwrap();
    assert!(ricci_type_split(&stack).unwrap().w_residual < 1e-8);
    assert!(stack.level_norm(1) > 1e-3 * stack.level_norm(0));
    let x = [0.7, -0.2, 0.3, 0.5];
    let endos = pi_derivatives(&stack, &x, 3).unwrap();
    assert!(ricci_type_identities(&endos, &stack).unwrap().max() < 1e-7);
    let table = q_table(&endos, 5).unwrap();
    for r in [3, 5] {
        assert!(condition_residual(&table, r).unwrap().sp < 1e-7);
    }
    let diag = ricci_type_diagnostics(&model, &y, 0.05).unwrap();
    assert!(diag.u_residual < 1e-6 && diag.f_residual < 1e-6 && diag.k_spread < 1e-6, "{diag:?}");
}

#[test]
fn reduced_complex_structure_is_symmetric() {
    let spec = ReductionSpec::from_preset("complex-structure", 2, 3).unwrap();
    assert_eq!(symmetric_criterion(&spec.a), Some(-1.0));
    let model = ReducedModel::new(spec);
    let stack = curvature_stack(&model, &[0.02, 0.01, -0.03, 0.0], 1).unwrap();
    assert!(stack.level_norm(1) < 1e-8);
    assert!(stack.level_norm(0) > 0.1);
}

#[test]
fn surfaces_have_curvature_omega_times_rho() {
    for spec in ModelSpec::surfaces() {
        let m = build_model(&spec).unwrap();
        for p in [[0.1, 0.2], [-0.3, 0.25], [0.4, -0.35]] {
            let s = curvature_stack(&m, &p, 0).unwrap();
            assert!(surface_curvature_residual(&s).unwrap() < 1e-10, "{spec} at {p:?}");
        }
    }
}

#[test]
fn preferred_verdicts_across_the_catalog() {
    let dirs = vec![vec![0.7, -0.2], vec![0.1, 1.0], vec![-0.6, -0.6]];
    let check = |spec: ModelSpec| {
        let m = build_model(&spec).unwrap();
        let s = curvature_stack(&m, &[0.3, 0.4], 1).unwrap();
        preferred_residual(&s, &dirs).unwrap()
    };
    assert!(check(ModelSpec::BourgeoisCahen { a: 1.0, b: 1.0 }) < 1e-10);
    assert!(check(ModelSpec::BourgeoisCahen { a: -0.5, b: 2.0 }) < 1e-10);
    assert!(check(ModelSpec::ConstantCurvature { kappa: 1.0 }) < 1e-10);
    assert!(check(ModelSpec::BourgeoisCahenPrinted { a: 1.0, b: 1.0 }) > 1e-3);
    assert!(check(ModelSpec::ConformalKahler { f: default_conformal_factor() }) > 1e-3);
}

#[test]
fn products_of_s_type_factors_stay_s_type() {
    let spec = ModelSpec::Product(
        Box::new(ModelSpec::BourgeoisCahen { a: 1.0, b: 1.0 }),
        Box::new(ModelSpec::BourgeoisCahen { a: 0.5, b: 2.0 }),
    );
    let m = build_model(&spec).unwrap();
    let p = [0.3, 0.4, 0.1, -0.2];
    let s = curvature_stack(&m, &p, 5).unwrap();
    let x = [0.7, -0.2, 0.3, 0.5];
    let table = q_table(&pi_derivatives(&s, &x, 5).unwrap(), 7).unwrap();
    for r in [3, 5, 7] {
        assert!(condition_residual(&table, r).unwrap().sp < 1e-9);
    }
    // A product of surfaces is not of Ricci type.
    assert!(ricci_type_split(&s).unwrap().w_residual > 1e-3);
}
