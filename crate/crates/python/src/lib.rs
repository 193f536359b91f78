//! Python bindings: chart models, the curvature stack and the condition checks.

use nalgebra::DMatrix;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use stype_core::cli::{parse_config, render, run_check as core_run_check};
use stype_core::geodesics::{
    h_series, integrate_geodesic, integrate_jacobi, parity_residual as core_parity, pullback_residual as core_pullback,
    GeodesicOptions,
};
use stype_core::geometry::{
    curvature_stack, pi_derivatives, preferred_residual as core_preferred, validate_structure, ChartModel,
};
use stype_core::models::{build_model, default_conformal_factor, ModelSpec, Polynomial};
use stype_core::qrecursion::{condition_residual, q_coefficient as core_q_coefficient, q_table};
use stype_core::reduction::{ReducedModel, ReductionSpec};

fn py_err(e: stype_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

/// A symplectic connection in chart form.
#[pyclass(name = "Model", frozen)]
struct PyModel {
    inner: Box<dyn ChartModel>,
}

impl PyModel {
    fn catalog(spec: ModelSpec) -> PyResult<Self> {
        Ok(PyModel {
            inner: Box::new(build_model(&spec).map_err(py_err)?),
        })
    }
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    #[pyo3(signature = (n = 1))]
    fn flat(n: usize) -> PyResult<Self> {
        Self::catalog(ModelSpec::Flat { n })
    }

    #[staticmethod]
    fn constant_curvature(kappa: f64) -> PyResult<Self> {
        Self::catalog(ModelSpec::ConstantCurvature { kappa })
    }

    #[staticmethod]
    #[pyo3(signature = (a = 1.0, b = 1.0))]
    fn bourgeois_cahen(a: f64, b: f64) -> PyResult<Self> {
        Self::catalog(ModelSpec::BourgeoisCahen { a, b })
    }

    /// `f` uses the `coef:e1:e2, ...` term syntax; omitted means the default factor.
    #[staticmethod]
    #[pyo3(signature = (f = None))]
    fn conformal_kahler(f: Option<&str>) -> PyResult<Self> {
        let f = match f {
            Some(text) => Polynomial::parse(2, text).map_err(py_err)?,
            None => default_conformal_factor(),
        };
        Self::catalog(ModelSpec::ConformalKahler { f })
    }

    #[staticmethod]
    #[pyo3(signature = (n = 2, seed = 1, scale = 0.5))]
    fn polynomial(n: usize, seed: u64, scale: f64) -> PyResult<Self> {
        Self::catalog(ModelSpec::Polynomial { n, seed, scale })
    }

    /// Reduction of `R^{2n+2}` by the flow of `A`, given as a preset name or a
    /// square matrix (list of rows).
    #[staticmethod]
    #[pyo3(signature = (a, n = 2, seed = 1))]
    fn reduced(a: &Bound<'_, PyAny>, n: usize, seed: u64) -> PyResult<Self> {
        let spec = if let Ok(name) = a.extract::<String>() {
            ReductionSpec::from_preset(&name, n, seed)
        } else {
            let m: Vec<Vec<f64>> = a.extract()?;
            let size = m.len();
            if m.iter().any(|r| r.len() != size) {
                return Err(PyValueError::new_err("A must be square"));
            }
            let flat: Vec<f64> = m.into_iter().flatten().collect();
            ReductionSpec::new(DMatrix::from_row_slice(size, size, &flat), seed)
        }
        .map_err(py_err)?;
        Ok(PyModel {
            inner: Box::new(ReducedModel::new(spec)),
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name()
    }

    fn contains(&self, p: Vec<f64>) -> bool {
        self.inner.contains(&p)
    }

    /// `(gamma, omega)` at `p`; `gamma[k][i][j]` is `Γ^k_ij`.
    fn eval(&self, p: Vec<f64>) -> PyResult<(Vec<Vec<Vec<f64>>>, Vec<Vec<f64>>)> {
        let v = self.inner.eval(&p).map_err(py_err)?;
        let d = v.dim;
        let gamma = (0..d)
            .map(|k| (0..d).map(|i| (0..d).map(|j| *v.gamma(k, i, j)).collect()).collect())
            .collect();
        Ok((gamma, rows(&v.omega_matrix())))
    }

    /// Structure residuals at `p` as a dict.
    #[pyo3(signature = (p, tol = 1e-8))]
    fn structure(&self, p: Vec<f64>, tol: f64) -> PyResult<Vec<(String, f64)>> {
        let r = validate_structure(self.inner.as_ref(), &p, tol).map_err(py_err)?;
        Ok(vec![
            ("torsion".into(), r.torsion),
            ("omega_skew".into(), r.omega_skew),
            ("nabla_omega".into(), r.nabla_omega),
            ("d_omega".into(), r.d_omega),
            ("det_omega".into(), r.det_omega),
            ("bianchi".into(), r.bianchi),
        ])
    }

    /// Max-norms of `R, ∇R, ..., ∇^M R` at `p`.
    #[pyo3(signature = (p, max_level = 1))]
    fn curvature_norms(&self, p: Vec<f64>, max_level: usize) -> PyResult<Vec<f64>> {
        let s = curvature_stack(self.inner.as_ref(), &p, max_level).map_err(py_err)?;
        Ok((0..=max_level).map(|m| s.level_norm(m)).collect())
    }

    fn preferred_residual(&self, p: Vec<f64>, x: Vec<f64>) -> PyResult<f64> {
        let s = curvature_stack(self.inner.as_ref(), &p, 1).map_err(py_err)?;
        core_preferred(&s, &[x]).map_err(py_err)
    }

    /// `Q^2 ... Q^{r_max}` at `(p, X)` as nested lists.
    #[pyo3(signature = (p, x, r_max = 7))]
    fn q_table(&self, p: Vec<f64>, x: Vec<f64>, r_max: usize) -> PyResult<Vec<Vec<Vec<f64>>>> {
        let t = self.table(&p, &x, r_max)?;
        Ok((2..=r_max).map(|r| rows(t.q(r))).collect())
    }

    /// `[(r, sp_residual, trace_residual or None)]` for odd `r` in `3..=r_max`.
    #[pyo3(signature = (p, x, r_max = 7))]
    fn condition_residuals(&self, p: Vec<f64>, x: Vec<f64>, r_max: usize) -> PyResult<Vec<(usize, f64, Option<f64>)>> {
        let t = self.table(&p, &x, r_max)?;
        (3..=r_max)
            .step_by(2)
            .map(|r| {
                let c = condition_residual(&t, r).map_err(py_err)?;
                Ok((r, c.sp, c.trace))
            })
            .collect()
    }

    #[pyo3(signature = (p, x, t_max = 0.5, tol = 1e-12, nodes = 81))]
    fn parity_residual(&self, p: Vec<f64>, x: Vec<f64>, t_max: f64, tol: f64, nodes: usize) -> PyResult<f64> {
        let m = self.inner.as_ref();
        let opts = GeodesicOptions { t_max, tol, nodes };
        let geo = integrate_geodesic(m, &p, &x, opts).map_err(py_err)?;
        let geo = integrate_jacobi(m, &geo).map_err(py_err)?;
        let hs = h_series(&geo, m).map_err(py_err)?;
        core_parity(&hs).map_err(py_err)
    }

    #[pyo3(signature = (p, radius = 0.3, rays = 4, fd_step = 3e-5, seed = 0, tol = 1e-12))]
    fn pullback_residual(&self, p: Vec<f64>, radius: f64, rays: usize, fd_step: f64, seed: u64, tol: f64) -> PyResult<f64> {
        core_pullback(self.inner.as_ref(), &p, radius, rays, fd_step, seed, tol)
            .map(|r| r.residual)
            .map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("Model({})", self.inner.name())
    }
}

impl PyModel {
    fn table(&self, p: &[f64], x: &[f64], r_max: usize) -> PyResult<stype_core::qrecursion::QTable> {
        if r_max < 3 {
            return Err(PyValueError::new_err("r_max must be at least 3"));
        }
        let s = curvature_stack(self.inner.as_ref(), p, r_max - 2).map_err(py_err)?;
        let e = pi_derivatives(&s, x, r_max - 2).map_err(py_err)?;
        q_table(&e, r_max).map_err(py_err)
    }
}

/// Coefficient of `∇^{i_1}Π ∘ ... ∘ ∇^{i_k}Π` in `Q^r`.
#[pyfunction]
fn q_coefficient(r: usize, indices: Vec<usize>) -> PyResult<u64> {
    core_q_coefficient(r, &indices).map_err(py_err)
}

/// Runs a configuration given as text and returns the JSON report.
#[pyfunction]
fn run_check(config: &str) -> PyResult<String> {
    let cfg = parse_config(config).map_err(py_err)?;
    let report = core_run_check(&cfg).map_err(py_err)?;
    render(&report.to_json()).map_err(py_err)
}

#[pymodule]
fn stype(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(q_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(run_check, m)?)?;
    Ok(())
}
