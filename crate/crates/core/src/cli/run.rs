use std::time::{SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::geodesics::{
    h_series, integrate_geodesic, integrate_jacobi, parity_residual, pullback_residual, taylor_cross_check,
    FitOptions, GeodesicSolution, HSeries,
};
use crate::geometry::{
    curvature_stack, pi_derivatives, preferred_residual, ricci_type_diagnostics, ricci_type_identities,
    ricci_type_split, surface_curvature_residual, validate_structure, ChartModel, CurvatureStack,
};
use crate::models::build_model;
use crate::qrecursion::{condition_residual, q_table, SumBound};
use crate::reduction::{ReducedModel, ReductionSpec};

use super::config::{CheckConfig, CheckKind, ModelChoice, Sampler};
use super::report::{sort_cells, Cell, ConditionReport};

/// Default thresholds, looked up as `check.label` and then `check`.
fn default_threshold(check: CheckKind, label: &str) -> Option<f64> {
    Some(match check {
        CheckKind::Structure => 1e-8,
        CheckKind::Preferred => 1e-9,
        CheckKind::Qr => 1e-9,
        CheckKind::RicciType => match label {
            "w" | "surface" => 1e-8,
            "identities" => 1e-7,
            _ => 1e-6,
        },
        CheckKind::Parity => 1e-8,
        CheckKind::Pullback => 1e-8,
        CheckKind::CrossCheck => {
            let order: usize = label.trim_start_matches("order").parse().unwrap_or(0);
            if order <= 6 {
                1e-5
            } else {
                1e-3
            }
        }
        CheckKind::Curvature => return None,
    })
}

/// Offset used by the `K` constancy probe of the Ricci-type check.
const RICCI_OFFSET: f64 = 0.05;
const SAMPLE_BUDGET: usize = 10_000;

/// Builds the model a configuration describes.
pub fn build(choice: &ModelChoice) -> Result<Box<dyn ChartModel>> {
    Ok(match choice {
        ModelChoice::Catalog(spec) => Box::new(build_model(spec)?),
        ModelChoice::Reduced { a, seed, .. } => Box::new(ReducedModel::new(ReductionSpec::new(a.clone(), *seed)?)),
    })
}

fn sample_points(model: &dyn ChartModel, sampler: &Sampler) -> Result<Vec<Vec<f64>>> {
    let d = model.dim();
    match sampler {
        Sampler::List(list) => Ok(list.clone()),
        Sampler::Random {
            count,
            seed,
            half_width,
            center,
        } => {
            let center = center.clone().unwrap_or_else(|| vec![0.0; d]);
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut out = Vec::with_capacity(*count);
            let mut tries = 0;
            while out.len() < *count {
                tries += 1;
                if tries > SAMPLE_BUDGET * count {
                    return Err(Error::InvalidArgument(format!(
                        "could not sample {count} points inside the domain of {}",
                        model.name()
                    )));
                }
                let p: Vec<f64> = center
                    .iter()
                    .map(|c| c + rng.gen_range(-1.0..=1.0) * half_width)
                    .collect();
                if model.contains(&p) {
                    out.push(p);
                }
            }
            Ok(out)
        }
    }
}

/// Components uniform in `[−1, 1]`, rejected below norm `1e−3`, not normalized.
fn sample_directions(d: usize, sampler: &Sampler) -> Vec<Vec<f64>> {
    match sampler {
        Sampler::List(list) => list.clone(),
        Sampler::Random { count, seed, .. } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut out = Vec::with_capacity(*count);
            while out.len() < *count {
                let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                if x.iter().map(|v| v * v).sum::<f64>().sqrt() >= 1e-3 {
                    out.push(x);
                }
            }
            out
        }
    }
}

struct CellSink<'a> {
    config: &'a CheckConfig,
    point: usize,
    cells: Vec<Cell>,
}

impl CellSink<'_> {
    fn threshold(&self, check: CheckKind, label: &str) -> Option<f64> {
        let default = default_threshold(check, label)?;
        let specific = format!("{check}.{label}");
        Some(
            self.config
                .tolerances
                .get(&specific)
                .or_else(|| self.config.tolerances.get(check.name()))
                .copied()
                .unwrap_or(default),
        )
    }

    fn push(&mut self, check: CheckKind, label: &str, direction: Option<usize>, residual: f64) {
        let t = self.threshold(check, label);
        self.cells
            .push(Cell::measured(check.name(), label, self.point, direction, residual, t));
    }

    fn record(&mut self, check: CheckKind, direction: Option<usize>, f: impl FnOnce(&mut Self) -> Result<()>) {
        if let Err(e) = f(self) {
            self.cells.push(Cell::failed(check.name(), self.point, direction, &e));
        }
    }
}

fn wants(config: &CheckConfig, c: CheckKind) -> bool {
    config.checks.contains(&c)
}

fn needs_stack(config: &CheckConfig) -> bool {
    config.checks.iter().any(|c| {
        matches!(
            c,
            CheckKind::Preferred | CheckKind::Qr | CheckKind::RicciType | CheckKind::CrossCheck | CheckKind::Curvature
        )
    })
}

fn cross_orders(r_max: usize) -> Vec<usize> {
    (2..=r_max.min(7)).collect()
}

fn geodesic_data(model: &dyn ChartModel, config: &CheckConfig, p: &[f64], x: &[f64]) -> Result<(GeodesicSolution, HSeries)> {
    let geo = integrate_geodesic(model, p, x, config.geodesic)?;
    let geo = integrate_jacobi(model, &geo)?;
    let hs = h_series(&geo, model)?;
    Ok((geo, hs))
}

fn run_point(model: &dyn ChartModel, config: &CheckConfig, index: usize, p: &[f64], directions: &[Vec<f64>]) -> Vec<Cell> {
    let mut sink = CellSink {
        config,
        point: index,
        cells: Vec::new(),
    };
    let d = model.dim();

    if wants(config, CheckKind::Structure) {
        sink.record(CheckKind::Structure, None, |s| {
            let tol = s.threshold(CheckKind::Structure, "max").unwrap_or(0.0);
            let rep = validate_structure(model, p, tol)?;
            s.push(CheckKind::Structure, "torsion", None, rep.torsion);
            s.push(CheckKind::Structure, "omega_skew", None, rep.omega_skew);
            s.push(CheckKind::Structure, "nabla_omega", None, rep.nabla_omega);
            s.push(CheckKind::Structure, "d_omega", None, rep.d_omega);
            s.push(CheckKind::Structure, "bianchi", None, rep.bianchi);
            Ok(())
        });
    }

    if wants(config, CheckKind::Pullback) {
        sink.record(CheckKind::Pullback, None, |s| {
            let pb = &config.pullback;
            let rep = pullback_residual(model, p, pb.radius, pb.rays, pb.fd_step, pb.seed, config.geodesic.tol)?;
            s.push(CheckKind::Pullback, "omega", None, rep.residual);
            Ok(())
        });
    }

    let stack: Option<std::result::Result<CurvatureStack, Error>> =
        needs_stack(config).then(|| curvature_stack(model, p, config.r_max - 2));
    let stack = match stack {
        None => None,
        Some(Ok(s)) => Some(s),
        Some(Err(e)) => {
            for c in &config.checks {
                if !matches!(c, CheckKind::Structure | CheckKind::Pullback | CheckKind::Parity) {
                    sink.cells.push(Cell::failed(c.name(), index, None, &e));
                }
            }
            None
        }
    };

    if let Some(stack) = &stack {
        if wants(config, CheckKind::Curvature) {
            sink.push(CheckKind::Curvature, "riemann", None, stack.level_norm(0));
            if stack.order() >= 1 {
                sink.push(CheckKind::Curvature, "nabla_r", None, stack.level_norm(1));
            }
        }
        if wants(config, CheckKind::RicciType) {
            sink.record(CheckKind::RicciType, None, |s| {
                if d == 2 {
                    s.push(CheckKind::RicciType, "surface", None, surface_curvature_residual(stack)?);
                    return Ok(());
                }
                s.push(CheckKind::RicciType, "w", None, ricci_type_split(stack)?.w_residual);
                let diag = ricci_type_diagnostics(model, p, RICCI_OFFSET)?;
                s.push(CheckKind::RicciType, "u_fit", None, diag.u_residual);
                s.push(CheckKind::RicciType, "f_fit", None, diag.f_residual);
                s.push(CheckKind::RicciType, "k_spread", None, diag.k_spread);
                Ok(())
            });
        }
    }

    for (j, x) in directions.iter().enumerate() {
        let dir = Some(j);
        if let Some(stack) = &stack {
            if wants(config, CheckKind::Preferred) {
                sink.record(CheckKind::Preferred, dir, |s| {
                    s.push(CheckKind::Preferred, "cyclic", dir, preferred_residual(stack, &[x.clone()])?);
                    Ok(())
                });
            }
            let table = if wants(config, CheckKind::Qr)
                || wants(config, CheckKind::CrossCheck)
                || (wants(config, CheckKind::RicciType) && d >= 4)
            {
                match pi_derivatives(stack, x, config.r_max - 2) {
                    Ok(endos) => {
                        if wants(config, CheckKind::RicciType) && d >= 4 {
                            sink.record(CheckKind::RicciType, dir, |s| {
                                s.push(CheckKind::RicciType, "identities", dir, ricci_type_identities(&endos, stack)?.max());
                                Ok(())
                            });
                        }
                        q_table(&endos, config.r_max)
                    }
                    Err(e) => Err(e),
                }
            } else {
                Err(Error::InvalidArgument("not requested".into()))
            };
            if wants(config, CheckKind::Qr) {
                sink.record(CheckKind::Qr, dir, |s| {
                    let table = table.as_ref().map_err(Clone::clone)?;
                    for r in (3..=config.r_max).step_by(2) {
                        let res = condition_residual(table, r)?;
                        s.push(CheckKind::Qr, &format!("r{r}"), dir, res.sp);
                        if let Some(t) = res.trace {
                            s.push(CheckKind::Qr, &format!("r{r}.trace"), dir, t);
                        }
                    }
                    Ok(())
                });
            }
            if wants(config, CheckKind::CrossCheck) {
                sink.record(CheckKind::CrossCheck, dir, |s| {
                    let table = table.as_ref().map_err(Clone::clone)?;
                    let (geo, hs) = geodesic_data(model, config, p, x)?;
                    let orders = cross_orders(config.r_max);
                    let degree = config.fit_degree.unwrap_or(orders.last().copied().unwrap_or(2) + 2);
                    let res = taylor_cross_check(&hs, &geo.basis, table, &orders, FitOptions { degree }, SumBound::Full)?;
                    for o in res {
                        s.push(CheckKind::CrossCheck, &format!("order{}", o.order), dir, o.discrepancy);
                    }
                    if wants(config, CheckKind::Parity) {
                        s.push(CheckKind::Parity, "h", dir, parity_residual(&hs)?);
                    }
                    Ok(())
                });
            }
        }
        let parity_done = wants(config, CheckKind::CrossCheck)
            && sink
                .cells
                .iter()
                .any(|c| c.check == CheckKind::Parity.name() && c.direction_index == dir);
        if wants(config, CheckKind::Parity) && !parity_done {
            sink.record(CheckKind::Parity, dir, |s| {
                let (_, hs) = geodesic_data(model, config, p, x)?;
                s.push(CheckKind::Parity, "h", dir, parity_residual(&hs)?);
                Ok(())
            });
        }
    }
    sink.cells
}

fn seeds(config: &CheckConfig) -> Map<String, Value> {
    let mut m = Map::new();
    if let Sampler::Random { seed, .. } = &config.points {
        m.insert("points".into(), json!(seed));
    }
    if let Sampler::Random { seed, .. } = &config.directions {
        m.insert("directions".into(), json!(seed));
    }
    if let ModelChoice::Reduced { seed, .. } = &config.model {
        m.insert("model".into(), json!(seed));
    }
    if wants(config, CheckKind::Pullback) {
        m.insert("pullback".into(), json!(config.pullback.seed));
    }
    m
}

/// Runs every requested check at every `(point, direction)`.
///
/// Configuration and model-building problems are returned as errors; failures
/// inside a check are recorded in the corresponding cell.
pub fn run_check(config: &CheckConfig) -> Result<ConditionReport> {
    let model = build(&config.model)?;
    let points = sample_points(model.as_ref(), &config.points)?;
    let directions = sample_directions(model.dim(), &config.directions);
    let mut cells: Vec<Cell> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| run_point(model.as_ref(), config, i, p, &directions))
        .flatten()
        .collect();
    sort_cells(&mut cells);
    let name = match &config.model {
        ModelChoice::Catalog(spec) => spec.to_string(),
        ModelChoice::Reduced { label, .. } => format!("reduced({label})"),
    };
    Ok(ConditionReport {
        model: name,
        dim: model.dim(),
        points,
        directions,
        cells,
        config_hash: config.hash.clone(),
        seeds: seeds(config),
        timestamp: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    })
}

/// Same cells as [`run_check`]; the report carries max/median summaries.
pub fn run_sweep(config: &CheckConfig) -> Result<ConditionReport> {
    run_check(config)
}

/// What each check computes, for `stype explain`.
pub fn explain(check: CheckKind) -> &'static str {
    match check {
        CheckKind::Structure => {
            "structure: at each point, verifies that the chart data define a symplectic connection.\n\
             Cells: torsion = max|Γ^k_ij − Γ^k_ji|; omega_skew = ω + ωᵀ; nabla_omega = ∂_k ω_ij − Γ^l_ki ω_lj − Γ^l_kj ω_il;\n\
             d_omega = cyclic sum of ∂_k ω_ij; bianchi = cyclic sum of R^l_ijk over (i,j,k).\n\
             A nearly singular ω is reported as an error instead of a residual."
        }
        CheckKind::Preferred => {
            "preferred: cyclic-parallel Ricci tensor along the direction X.\n\
             Cell cyclic = |(∇_X r)(X,X)| / (1 + |X|³‖∇r‖). Zero for every X exactly when the cyclic sum of ∇r vanishes."
        }
        CheckKind::Qr => {
            "qr: the odd-order conditions on the recursion operators Q^r built from Π_X = R(X,·)X and its covariant derivatives.\n\
             Q^r = (r−1)∇^{r−2}Π + Σ_{q=2}^{r−2} C(r−1,q+1) ∇^{r−2−q}Π ∘ Q^q.\n\
             For odd r, P^r = (r+2)Q^r + Σ_{q=2}^{(r−1)/2} C(r+2,q+1)(Q^q)^⊤Q^{r−q} must lie in sp(T_pM,ω).\n\
             Cell r<k> = ‖P^r + (P^r)^⊤‖/(1+‖P^r‖); on surfaces r<k>.trace = |tr Q^r|/(1+‖Q^r‖).\n\
             All odd conditions holding for every X at every point characterizes connections whose geodesic symmetries are symplectic."
        }
        CheckKind::RicciType => {
            "ricci_type: curvature determined by the Ricci tensor.\n\
             dim 2: surface = ‖R − ω⊗ρ‖ (holds on every surface).\n\
             dim ≥ 4: w = ‖R − E(ρ)‖ with E the Ricci part of R; u_fit, f_fit = least-squares residuals of\n\
             ∇_Xρ = −(X⊗ω(U,·) + U⊗ω(X,·))/(2n+1) and ∇_XU = −(2n+1)/(2(n+1))ρ²X + fX;\n\
             k_spread = variation of tr ρ² + 4(n+1)/(2n+1) f over nearby points;\n\
             identities = ∇²_XΠ, ∇_XΠ∘∇_XΠ, Π∘∇_XΠ, ∇_XΠ∘Π − 2r(X,X)/(n+1)∇_XΠ and ∇_XΠ + (∇_XΠ)^⊤, all zero for Ricci type."
        }
        CheckKind::Parity => {
            "parity: integrates the geodesic through p with velocity X and the Jacobi fields Z_i with Z_i(0)=0, Z_i'(0)=e_i,\n\
             then forms h_ij(t) = ω(Z_i, Z_j) and h_1i(t) = ω(γ', Z_i) on [−T, T].\n\
             Cell h = max of |h_ij(t) − h_ij(−t)| and |h_1i(t) + h_1i(−t)|, divided by max|h|.\n\
             h_ij even and h_1i odd along every geodesic through p means s_p*ω = ω near p."
        }
        CheckKind::Pullback => {
            "pullback: pulls ω back by the geodesic symmetry exp_p(V) ↦ exp_p(−V) at seeded points |V| = radius.\n\
             The differential of exp is taken by Richardson-extrapolated central differences.\n\
             Cell omega = max‖s*ω − ω‖/(1+‖ω‖)."
        }
        CheckKind::CrossCheck => {
            "cross_check: fits Taylor coefficients of the h functions from the integrated geodesic and compares them\n\
             with the values predicted from the Q^r: d^m h_ij(0) = ω(B_{m−2} e_i, e_j), d^m h_1i(0) = ω(X, Q^{m−1}e_i).\n\
             Cell order<m> = max|fit − formula|/(1+|formula|)."
        }
        CheckKind::Curvature => {
            "curvature: informational norms ‖R‖ (riemann) and ‖∇R‖ (nabla_r) at each point. Never fails unless non-finite."
        }
    }
}
