//! Jacobi fields, Taylor fits and the geodesic symmetry against independent
//! computations.

use stype_core::geodesics::{
    exp_map, h_series, integrate_geodesic, integrate_jacobi, parity_residual, pullback_residual, taylor_cross_check,
    taylor_derivatives, FitOptions, GeodesicOptions,
};
use stype_core::geometry::{curvature_stack, pi_derivatives};
use stype_core::models::{build_model, ModelSpec};
use stype_core::qrecursion::{q_table, SumBound};

/// `Z_i(t) = ∂_s exp_p(t(X + s b_i))` by central differences in `s`.
#[test]
fn jacobi_fields_are_geodesic_variations() {
    let cases = [
        (ModelSpec::BourgeoisCahen { a: 1.0, b: 1.0 }, vec![0.3, 0.4], vec![0.7, -0.2]),
        (ModelSpec::Polynomial { n: 2, seed: 1, scale: 0.5 }, vec![0.1, 0.2, -0.1, 0.3], vec![0.7, -0.2, 0.3, 0.5]),
    ];
    for (spec, p, x) in cases {
        let m = build_model(&spec).unwrap();
        let opts = GeodesicOptions { t_max: 0.3, tol: 1e-13, nodes: 7 };
        let geo = integrate_jacobi(&m, &integrate_geodesic(&m, &p, &x, opts).unwrap()).unwrap();
        let jac = geo.jacobi.as_ref().unwrap();
        let eps = 1e-5;
        for (i, b) in geo.basis.iter().enumerate() {
            for (node, &t) in geo.times.iter().enumerate() {
                if t == 0.0 {
                    assert!(jac.z[i][node].iter().all(|v| v.abs() < 1e-15));
                    continue;
                }
                let shoot = |s: f64| {
                    let v: Vec<f64> = x.iter().zip(b).map(|(xi, bi)| t * (xi + s * bi)).collect();
                    exp_map(&m, &p, &v, 1e-13).unwrap()
                };
                let (plus, minus) = (shoot(eps), shoot(-eps));
                for k in 0..p.len() {
                    let fd = (plus[k] - minus[k]) / (2.0 * eps);
                    assert!((fd - jac.z[i][node][k]).abs() < 1e-7, "{spec} Z_{i}({t})[{k}]: {fd} vs {}", jac.z[i][node][k]);
                }
            }
        }
        // Geodesic positions agree with the exponential map.
        for (node, &t) in geo.times.iter().enumerate() {
            let v: Vec<f64> = x.iter().map(|xi| t * xi).collect();
            let q = exp_map(&m, &p, &v, 1e-13).unwrap();
            for k in 0..p.len() {
                assert!((q[k] - geo.positions[node][k]).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn fitted_derivatives_of_known_function() {
    let opts = GeodesicOptions::default();
    let times = opts.grid();
    let samples: Vec<f64> = times.iter().map(|t| (2.0 * t).sin()).collect();
    let d = taylor_derivatives(&times, &samples, &[1, 3, 5, 7], FitOptions { degree: 15 }).unwrap();
    let expect = [2.0, -8.0, 32.0, -128.0];
    for (a, b) in d.iter().zip(expect) {
        assert!((a - b).abs() < 1e-6 * b.abs(), "{a} vs {b}");
    }
}

#[test]
fn cross_check_on_constant_curvature() {
    let m = build_model(&ModelSpec::ConstantCurvature { kappa: 1.0 }).unwrap();
    let p = [0.2, -0.1];
    let x = [0.5, 0.8];
    let geo = integrate_jacobi(&m, &integrate_geodesic(&m, &p, &x, GeodesicOptions::default()).unwrap()).unwrap();
    let hs = h_series(&geo, &m).unwrap();
    assert!(parity_residual(&hs).unwrap() < 1e-10);
    let stack = curvature_stack(&m, &p, 5).unwrap();
    let table = q_table(&pi_derivatives(&stack, &x, 5).unwrap(), 7).unwrap();
    let orders: Vec<usize> = (2..=7).collect();
    let res = taylor_cross_check(&hs, &geo.basis, &table, &orders, FitOptions { degree: 9 }, SumBound::Full).unwrap();
    for o in &res {
        let tol = if o.order <= 6 { 1e-5 } else { 1e-3 };
        assert!(o.discrepancy <= tol, "order {}: {:e}", o.order, o.discrepancy);
    }
}

#[test]
fn symmetric_space_has_symplectic_symmetry() {
    let m = build_model(&ModelSpec::ConstantCurvature { kappa: -1.0 }).unwrap();
    let rep = pullback_residual(&m, &[0.1, 0.2], 0.3, 4, 3e-5, 2, 1e-13).unwrap();
    assert!(rep.residual < 1e-8, "{:e}", rep.residual);
}

#[test]
fn geodesic_running_into_the_boundary_fails_cleanly() {
    let m = build_model(&ModelSpec::ConstantCurvature { kappa: -1.0 }).unwrap();
    let err = integrate_geodesic(&m, &[0.9, 0.0], &[20.0, 0.0], GeodesicOptions::default()).unwrap_err();
    assert!(
        matches!(
            err,
            stype_core::Error::DomainExit { .. }
                | stype_core::Error::OutsideDomain { .. }
                | stype_core::Error::StepCollapse { .. }
        ),
        "{err:?}"
    );
}
