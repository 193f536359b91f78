//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with a
//! non-zero status if any criterion fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stype_core::cli::{parse_config, render, run_check};
use stype_core::geodesics::{
    h_series, integrate_geodesic, integrate_jacobi, parity_residual, pullback_residual, taylor_cross_check,
    FitOptions, GeodesicOptions,
};
use stype_core::geometry::{
    check_point, curvature_stack, pi_derivatives, preferred_residual, preferred_trace_residual,
    ricci_type_diagnostics, ricci_type_identities, ricci_type_split, surface_curvature_residual,
    validate_structure, ChartModel, EndoList,
};
use stype_core::linalg::{max_abs, standard_symplectic};
use stype_core::models::{build_model, default_conformal_factor, ModelSpec};
use stype_core::qrecursion::{condition_residual, index_tuples, q_coefficient, q_table, q_table_closed, SumBound};
use stype_core::reduction::{symmetric_criterion, ReducedModel, ReductionSpec};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: u64) -> Result<(), String> {
    ensure(elapsed < Duration::from_secs(limit_s), || {
        format!("runtime {elapsed:.2?} exceeds {limit_s} s")
    })
}

fn seeded_points(seed: u64, count: usize, half_width: f64, d: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..d).map(|_| rng.gen_range(-half_width..half_width)).collect())
        .collect()
}

fn seeded_directions(seed: u64, count: usize, d: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if v.iter().map(|x| x * x).sum::<f64>().sqrt() >= 0.1 {
            out.push(v);
        }
    }
    out
}

fn parity_at(model: &dyn ChartModel, p: &[f64], x: &[f64], t_max: f64) -> Result<f64, String> {
    let opts = GeodesicOptions {
        t_max,
        ..GeodesicOptions::default()
    };
    let geo = integrate_geodesic(model, p, x, opts).map_err(|e| e.to_string())?;
    let geo = integrate_jacobi(model, &geo).map_err(|e| e.to_string())?;
    parity_residual(&h_series(&geo, model).map_err(|e| e.to_string())?).map_err(|e| e.to_string())
}

fn q_recursion_vs_closed_form() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let n = 1 + case % 3;
        let d = 2 * n;
        let entries: Vec<DMatrix<f64>> = (0..8)
            .map(|_| DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0)))
            .collect();
        let endos = EndoList::from_entries(entries, standard_symplectic(n));
        let a = q_table(&endos, 9).map_err(|e| e.to_string())?;
        let b = q_table_closed(&endos, 9).map_err(|e| e.to_string())?;
        for r in 2..=9 {
            let rel = max_abs(&(a.q(r) - b.q(r))) / (1.0 + max_abs(b.q(r)));
            worst = worst.max(rel);
        }
    }
    ensure(worst <= 1e-12, || format!("max relative difference {worst:e}"))?;
    within(start.elapsed(), 5)?;
    Ok(format!("max rel diff {worst:.1e}, {:.2?}", start.elapsed()))
}

fn first_terms() -> Outcome {
    let expected: [(usize, Vec<(Vec<usize>, u64)>); 5] = [
        (2, vec![(vec![0], 1)]),
        (3, vec![(vec![1], 2)]),
        (4, vec![(vec![2], 3), (vec![0, 0], 1)]),
        (5, vec![(vec![3], 4), (vec![1, 0], 4), (vec![0, 1], 2)]),
        (
            6,
            vec![
                (vec![4], 5),
                (vec![2, 0], 10),
                (vec![0, 2], 3),
                (vec![1, 1], 10),
                (vec![0, 0, 0], 1),
            ],
        ),
    ];
    for (r, terms) in expected {
        let want: BTreeMap<Vec<usize>, u64> = terms.into_iter().collect();
        let mut got = BTreeMap::new();
        for t in index_tuples(r) {
            let c = q_coefficient(r, &t).map_err(|e| e.to_string())?;
            got.insert(t, c);
        }
        ensure(got == want, || format!("Q^{r}: got {got:?}, want {want:?}"))?;
    }
    Ok("Q^2..Q^6 coefficient maps exact".into())
}

fn flat_model() -> Outcome {
    let m = build_model(&ModelSpec::Flat { n: 2 }).map_err(|e| e.to_string())?;
    let points = seeded_points(31, 3, 0.5, 4);
    let dirs = seeded_directions(32, 3, 4);
    let (mut q_worst, mut parity_worst, mut pull_worst, mut refl_worst) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for p in &points {
        let stack = curvature_stack(&m, p, 7).map_err(|e| e.to_string())?;
        for x in &dirs {
            let table = q_table(&pi_derivatives(&stack, x, 7).map_err(|e| e.to_string())?, 9).map_err(|e| e.to_string())?;
            for r in [3, 5, 7, 9] {
                q_worst = q_worst.max(condition_residual(&table, r).map_err(|e| e.to_string())?.sp);
            }
            parity_worst = parity_worst.max(parity_at(&m, p, x, 0.5)?);
        }
        let rep = pullback_residual(&m, p, 0.3, 4, 3e-5, 5, 1e-13).map_err(|e| e.to_string())?;
        pull_worst = pull_worst.max(rep.residual);
        for (_, q, sq) in &rep.samples {
            for k in 0..p.len() {
                refl_worst = refl_worst.max((sq[k] - (2.0 * p[k] - q[k])).abs());
            }
        }
    }
    ensure(q_worst <= 1e-9, || format!("Q residual {q_worst:e}"))?;
    ensure(parity_worst <= 1e-9, || format!("parity {parity_worst:e}"))?;
    ensure(pull_worst <= 1e-9, || format!("pullback {pull_worst:e}"))?;
    ensure(refl_worst <= 1e-10, || format!("s_p differs from 2p − q by {refl_worst:e}"))?;
    Ok(format!(
        "Q {q_worst:.1e}, parity {parity_worst:.1e}, pullback {pull_worst:.1e}, reflection {refl_worst:.1e}"
    ))
}

fn bourgeois_cahen() -> Outcome {
    let start = Instant::now();
    let m = build_model(&ModelSpec::BourgeoisCahen { a: 1.0, b: 1.0 }).map_err(|e| e.to_string())?;
    let points = seeded_points(41, 5, 0.5, 2);
    let dirs = seeded_directions(42, 5, 2);
    let (mut pref, mut q_worst, mut parity_worst, mut ident_worst) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut verdicts_agree = true;
    for (p, x) in points.iter().zip(&dirs) {
        let stack = curvature_stack(&m, p, 5).map_err(|e| e.to_string())?;
        pref = pref.max(preferred_residual(&stack, std::slice::from_ref(x)).map_err(|e| e.to_string())?);
        let pref_trace = preferred_trace_residual(&stack, std::slice::from_ref(x)).map_err(|e| e.to_string())?;
        verdicts_agree &= (pref <= 1e-10) == (pref_trace <= 1e-10);
        let endos = pi_derivatives(&stack, x, 5).map_err(|e| e.to_string())?;
        let table = q_table(&endos, 7).map_err(|e| e.to_string())?;
        for r in [3, 5, 7] {
            let res = condition_residual(&table, r).map_err(|e| e.to_string())?;
            q_worst = q_worst.max(res.sp);
            let trace = res.trace.ok_or("missing trace residual in dim 2")?;
            verdicts_agree &= (res.sp <= 1e-9) == (trace <= 1e-9);
        }
        let s = endos.entries.iter().map(max_abs).fold(0.0, f64::max);
        for q in 1..=5 {
            ident_worst = ident_worst.max(endos.entries[q].trace().abs() / (1.0 + s));
            for j in 0..=5 {
                let prod = &endos.entries[j] * &endos.entries[q];
                ident_worst = ident_worst.max(max_abs(&prod) / (1.0 + s * s));
            }
        }
        parity_worst = parity_worst.max(parity_at(&m, p, x, 0.5)?);
    }
    let stack = curvature_stack(&m, &[0.1, 0.4], 1).map_err(|e| e.to_string())?;
    let nabla_r = stack.level_norm(1);
    ensure(pref <= 1e-10, || format!("preferred {pref:e}"))?;
    ensure(q_worst <= 1e-9, || format!("Q residual {q_worst:e}"))?;
    ensure(verdicts_agree, || "trace criterion disagrees with the sp residual".into())?;
    ensure(parity_worst <= 1e-8, || format!("parity {parity_worst:e}"))?;
    ensure(ident_worst <= 1e-10, || format!("identities {ident_worst:e}"))?;
    ensure(nabla_r > 0.0, || "‖∇R‖ vanishes at y ≠ 0".into())?;
    within(start.elapsed(), 10)?;
    Ok(format!(
        "preferred {pref:.1e}, Q {q_worst:.1e}, parity {parity_worst:.1e}, identities {ident_worst:.1e}, ‖∇R‖ {nabla_r:.2}, {:.2?}",
        start.elapsed()
    ))
}

fn cross_check_bounds() -> Outcome {
    let orders: Vec<usize> = (2..=7).collect();
    let fit = FitOptions { degree: 9 };
    let bc = build_model(&ModelSpec::BourgeoisCahen { a: 1.0, b: 1.0 }).map_err(|e| e.to_string())?;
    let cases = [(vec![0.3, 0.4], vec![0.7, -0.2]), (vec![-0.2, 0.1], vec![0.1, 1.0])];
    let (mut low, mut seventh) = (0.0f64, 0.0f64);
    for (p, x) in &cases {
        let geo = integrate_geodesic(&bc, p, x, GeodesicOptions::default()).map_err(|e| e.to_string())?;
        let geo = integrate_jacobi(&bc, &geo).map_err(|e| e.to_string())?;
        let hs = h_series(&geo, &bc).map_err(|e| e.to_string())?;
        let stack = curvature_stack(&bc, p, 5).map_err(|e| e.to_string())?;
        let table = q_table(&pi_derivatives(&stack, x, 5).map_err(|e| e.to_string())?, 7).map_err(|e| e.to_string())?;
        for o in taylor_cross_check(&hs, &geo.basis, &table, &orders, fit, SumBound::Full).map_err(|e| e.to_string())? {
            if o.order <= 6 {
                low = low.max(o.discrepancy);
            } else {
                seventh = seventh.max(o.discrepancy);
            }
        }
    }
    ensure(low <= 1e-5, || format!("full bound, orders ≤ 6: {low:e}"))?;
    ensure(seventh <= 1e-3, || format!("full bound, order 7: {seventh:e}"))?;

    // The truncated bound only differs from the full one once a mixed term
    // with q = r−3 or r−2 is non-zero, which needs dimension ≥ 4 and a
    // non-nilpotent Π.
    let poly = build_model(&ModelSpec::Polynomial { n: 2, seed: 1, scale: 0.5 }).map_err(|e| e.to_string())?;
    let p = [0.1, 0.2, -0.1, 0.3];
    let x = [0.7, -0.2, 0.3, 0.5];
    let opts = GeodesicOptions {
        t_max: 0.3,
        ..GeodesicOptions::default()
    };
    let geo = integrate_geodesic(&poly, &p, &x, opts).map_err(|e| e.to_string())?;
    let geo = integrate_jacobi(&poly, &geo).map_err(|e| e.to_string())?;
    let hs = h_series(&geo, &poly).map_err(|e| e.to_string())?;
    let stack = curvature_stack(&poly, &p, 5).map_err(|e| e.to_string())?;
    let table = q_table(&pi_derivatives(&stack, &x, 5).map_err(|e| e.to_string())?, 7).map_err(|e| e.to_string())?;
    let trunc = taylor_cross_check(&hs, &geo.basis, &table, &[7], FitOptions { degree: 15 }, SumBound::Truncated)
        .map_err(|e| e.to_string())?[0]
        .discrepancy;
    ensure(trunc > 1e-2, || format!("truncated bound only off by {trunc:e} at order 7"))?;
    Ok(format!("full: ≤6 {low:.1e}, 7 {seventh:.1e}; truncated order 7 {trunc:.2e}"))
}

fn conformal_witness() -> Outcome {
    let m = build_model(&ModelSpec::ConformalKahler {
        f: default_conformal_factor(),
    })
    .map_err(|e| e.to_string())?;
    let p = [0.3, 0.4];
    let x = [0.7, -0.2];
    let stack = curvature_stack(&m, &p, 1).map_err(|e| e.to_string())?;
    let table = q_table(&pi_derivatives(&stack, &x, 1).map_err(|e| e.to_string())?, 3).map_err(|e| e.to_string())?;
    let q3 = condition_residual(&table, 3).map_err(|e| e.to_string())?.sp;
    let parity = parity_at(&m, &p, &x, 0.5)?;
    let pref = preferred_residual(&stack, &[x.to_vec()]).map_err(|e| e.to_string())?;
    ensure(q3 >= 1e-3, || format!("Q3 residual only {q3:e}"))?;
    ensure(parity >= 1e-4, || format!("parity only {parity:e}"))?;
    ensure(pref > 1e-9, || format!("preferred passes ({pref:e})"))?;
    Ok(format!("Q3 {q3:.2e}, parity {parity:.2e}, preferred {pref:.2e}"))
}

fn reduced_block() -> Outcome {
    let start = Instant::now();
    let spec = ReductionSpec::from_preset("block-E(1)", 2, 7).map_err(|e| e.to_string())?;
    ensure(symmetric_criterion(&spec.a).is_none(), || "A² is a multiple of the identity".into())?;
    let m = ReducedModel::new(spec);
    let points = seeded_points(71, 3, 0.2, 4);
    let dirs = seeded_directions(72, 2, 4);
    let (mut structure, mut w, mut ident, mut q_worst, mut diag_worst) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut ratio = f64::INFINITY;
    for p in &points {
        structure = structure.max(validate_structure(&m, p, 1e-8).map_err(|e| e.to_string())?.max_residual());
        let stack = curvature_stack(&m, p, 5).map_err(|e| e.to_string())?;
        w = w.max(ricci_type_split(&stack).map_err(|e| e.to_string())?.w_residual);
        ratio = ratio.min(stack.level_norm(1) / stack.level_norm(0));
        for x in &dirs {
            let endos = pi_derivatives(&stack, x, 5).map_err(|e| e.to_string())?;
            ident = ident.max(ricci_type_identities(&endos, &stack).map_err(|e| e.to_string())?.max());
            let table = q_table(&endos, 7).map_err(|e| e.to_string())?;
            for r in [3, 5, 7] {
                q_worst = q_worst.max(condition_residual(&table, r).map_err(|e| e.to_string())?.sp);
            }
        }
        let d = ricci_type_diagnostics(&m, p, 0.05).map_err(|e| e.to_string())?;
        diag_worst = diag_worst.max(d.u_residual).max(d.f_residual).max(d.k_spread);
    }
    ensure(structure <= 1e-8, || format!("structure {structure:e}"))?;
    ensure(w <= 1e-8, || format!("W residual {w:e}"))?;
    ensure(ident <= 1e-7, || format!("identities {ident:e}"))?;
    ensure(q_worst <= 1e-7, || format!("Q residual {q_worst:e}"))?;
    ensure(diag_worst <= 1e-6, || format!("U/f/K diagnostics {diag_worst:e}"))?;
    ensure(ratio > 1e-3, || format!("‖∇R‖/‖R‖ = {ratio:e}"))?;
    within(start.elapsed(), 60)?;
    Ok(format!(
        "structure {structure:.1e}, W {w:.1e}, identities {ident:.1e}, Q {q_worst:.1e}, U/f/K {diag_worst:.1e}, ‖∇R‖/‖R‖ ≥ {ratio:.2}, {:.2?}",
        start.elapsed()
    ))
}

fn reduced_symmetric() -> Outcome {
    let spec = ReductionSpec::from_preset("complex-structure", 2, 3).map_err(|e| e.to_string())?;
    let lambda = symmetric_criterion(&spec.a);
    ensure(lambda.is_some_and(|l| (l + 1.0).abs() < 1e-12), || format!("λ = {lambda:?}"))?;
    let m = ReducedModel::new(spec);
    let (mut nabla, mut q_worst) = (0.0f64, 0.0f64);
    for p in seeded_points(81, 2, 0.2, 4) {
        let stack = curvature_stack(&m, &p, 5).map_err(|e| e.to_string())?;
        nabla = nabla.max(stack.level_norm(1));
        for x in seeded_directions(82, 2, 4) {
            let endos = pi_derivatives(&stack, &x, 5).map_err(|e| e.to_string())?;
            let scale = 1.0 + max_abs(&endos.entries[0]);
            let table = q_table(&endos, 7).map_err(|e| e.to_string())?;
            for r in [3, 5, 7] {
                q_worst = q_worst.max(max_abs(table.q(r)) / scale);
            }
        }
    }
    ensure(nabla <= 1e-8, || format!("‖∇R‖ = {nabla:e}"))?;
    ensure(q_worst <= 1e-9, || format!("odd Q^r = {q_worst:e}"))?;
    Ok(format!("λ = −1, ‖∇R‖ {nabla:.1e}, odd Q^r {q_worst:.1e}"))
}

fn surfaces() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for spec in ModelSpec::surfaces() {
        let m = build_model(&spec).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        let mut done = 0;
        while done < 10 {
            let p = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
            if check_point(&m, &p).is_err() {
                continue;
            }
            let s = curvature_stack(&m, &p, 0).map_err(|e| e.to_string())?;
            worst = worst.max(surface_curvature_residual(&s).map_err(|e| e.to_string())?);
            done += 1;
        }
        count += 1;
    }
    ensure(worst <= 1e-10, || format!("‖R − ω⊗ρ‖ = {worst:e}"))?;
    Ok(format!("{count} models × 10 points, max {worst:.1e}"))
}

fn strip_timestamp(body: &str) -> String {
    body.lines()
        .filter(|l| !l.trim_start().starts_with("\"timestamp\""))
        .collect::<Vec<_>>()
        .join("\n")
}

fn determinism() -> Outcome {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/bourgeois_cahen.conf");
    let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
    let config = parse_config(&text).map_err(|e| e.to_string())?;
    let body = || -> Result<String, String> {
        let mut v = run_check(&config).map_err(|e| e.to_string())?.to_json();
        v.as_object_mut().map(|o| o.remove("timestamp"));
        render(&v).map_err(|e| e.to_string())
    };
    let (a, b) = (body()?, body()?);
    ensure(a == b, || "library reports differ".into())?;

    let run = |threads: &str| -> Result<String, String> {
        let out = Command::new(env!("CARGO_BIN_EXE_stype"))
            .arg("check")
            .arg(&path)
            .env("STYPE_THREADS", threads)
            .output()
            .map_err(|e| e.to_string())?;
        String::from_utf8(out.stdout).map_err(|e| e.to_string())
    };
    let (c, d) = (strip_timestamp(&run("1")?), strip_timestamp(&run("3")?));
    ensure(!c.is_empty() && c == d, || "binary reports differ".into())?;
    Ok(format!("{} bytes identical", a.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("recursion equals closed form", q_recursion_vs_closed_form),
        ("first terms of Q^r", first_terms),
        ("flat model", flat_model),
        ("Bourgeois-Cahen(1,1)", bourgeois_cahen),
        ("full vs truncated cross-check bound", cross_check_bounds),
        ("conformal witness", conformal_witness),
        ("reduced block model", reduced_block),
        ("reduced complex structure", reduced_symmetric),
        ("surfaces R = ω⊗ρ", surfaces),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (idx, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", idx + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail}", idx + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
