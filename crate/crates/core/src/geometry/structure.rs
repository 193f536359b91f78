//! Pointwise checks that a chart model really is a Fedosov manifold.

use crate::error::{Error, Result};
use crate::geometry::curvature::riemann_values;
use crate::geometry::model::{check_point, ChartModel};
use crate::jets::Scalar;
use crate::linalg::max_abs_slice;

/// Residuals of the defining identities at one point.
///
/// The torsion residual is the raw `max |Γ^k_{ij} − Γ^k_{ji}|`; the others are
/// normalized by `1 + ` the size of the dominant input.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    pub torsion: f64,
    pub omega_skew: f64,
    pub nabla_omega: f64,
    pub d_omega: f64,
    pub det_omega: f64,
    pub bianchi: f64,
    pub tol: f64,
    pub pass: bool,
}

impl StructureReport {
    /// Largest of the residuals that enter the verdict.
    pub fn max_residual(&self) -> f64 {
        self.torsion
            .max(self.omega_skew)
            .max(self.nabla_omega)
            .max(self.d_omega)
            .max(self.bianchi)
    }
}

/// Checks torsion, `∇ω`, `dω`, nondegeneracy of `ω` and the first Bianchi
/// identity at `p`.
pub fn validate_structure(model: &dyn ChartModel, p: &[f64], tol: f64) -> Result<StructureReport> {
    check_point(model, p)?;
    let d = model.dim();
    let chart = model.eval_jets(p, 1)?;
    let gamma: Vec<f64> = chart.gamma.iter().map(Scalar::value).collect();
    let omega: Vec<f64> = chart.omega.iter().map(Scalar::value).collect();
    let dgamma: Vec<f64> = chart
        .gamma
        .iter()
        .flat_map(|j| (0..d).map(move |s| j.gradient_component(s)))
        .collect();
    let domega: Vec<f64> = chart
        .omega
        .iter()
        .flat_map(|j| (0..d).map(move |s| j.gradient_component(s)))
        .collect();

    let omega_norm = max_abs_slice(&omega);
    let det = nalgebra::DMatrix::from_row_slice(d, d, &omega).determinant();
    if !(det.abs() > 1e-12 * omega_norm.powi(d as i32)) {
        return Err(Error::SingularOmega {
            point: p.to_vec(),
            det,
        });
    }

    let g = |k: usize, i: usize, j: usize| gamma[k * d * d + i * d + j];
    let w = |i: usize, j: usize| omega[i * d + j];
    let dw = |i: usize, j: usize, k: usize| domega[(i * d + j) * d + k];

    let mut torsion = 0.0f64;
    let mut omega_skew = 0.0f64;
    let mut nabla_omega = 0.0f64;
    let mut d_omega = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            omega_skew = omega_skew.max((w(i, j) + w(j, i)).abs());
            for k in 0..d {
                torsion = torsion.max((g(k, i, j) - g(k, j, i)).abs());
                // (∇_k ω)_{ij}
                let mut nw = dw(i, j, k);
                for m in 0..d {
                    nw -= g(m, k, i) * w(m, j) + g(m, k, j) * w(i, m);
                }
                nabla_omega = nabla_omega.max(nw.abs());
                d_omega = d_omega.max((dw(j, k, i) + dw(k, i, j) + dw(i, j, k)).abs());
            }
        }
    }
    let gamma_norm = max_abs_slice(&gamma);
    let domega_norm = max_abs_slice(&domega);
    nabla_omega /= 1.0 + domega_norm.max(gamma_norm * omega_norm);
    d_omega /= 1.0 + domega_norm;
    omega_skew /= 1.0 + omega_norm;

    let r = riemann_values(&gamma, &dgamma, d);
    let idx = |l: usize, i: usize, j: usize, k: usize| ((l * d + i) * d + j) * d + k;
    let mut bianchi = 0.0f64;
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let s = r[idx(l, i, j, k)] + r[idx(l, j, k, i)] + r[idx(l, k, i, j)];
                    bianchi = bianchi.max(s.abs());
                }
            }
        }
    }
    bianchi /= 1.0 + max_abs_slice(&r);

    let mut report = StructureReport {
        torsion,
        omega_skew,
        nabla_omega,
        d_omega,
        det_omega: det.abs(),
        bianchi,
        tol,
        pass: false,
    };
    report.pass = report.max_residual() <= tol;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ChartValues;
    use crate::jets::Jet;

    /// Constant Γ and ω on R².
    struct Constant {
        gamma: Vec<f64>,
        omega: Vec<f64>,
    }

    impl ChartModel for Constant {
        fn dim(&self) -> usize {
            2
        }
        fn name(&self) -> String {
            "constant".into()
        }
        fn contains(&self, _: &[f64]) -> bool {
            true
        }
        fn eval_jets(&self, _: &[f64], order: usize) -> Result<ChartValues<Jet>> {
            Ok(ChartValues {
                dim: 2,
                gamma: self.gamma.iter().map(|&g| Jet::constant(2, order, g)).collect(),
                omega: self.omega.iter().map(|&w| Jet::constant(2, order, w)).collect(),
            })
        }
    }

    #[test]
    fn torsion_is_detected() {
        let mut gamma = vec![0.0; 8];
        gamma[1] = 0.5; // Γ^0_{01} without its mirror Γ^0_{10}
        let m = Constant {
            gamma,
            omega: vec![0.0, 1.0, -1.0, 0.0],
        };
        let rep = validate_structure(&m, &[0.0, 0.0], 1e-10).unwrap();
        assert!(!rep.pass);
        assert_eq!(rep.torsion, 0.5);
    }

    #[test]
    fn non_parallel_omega_is_detected() {
        let mut gamma = vec![0.0; 8];
        gamma[0] = 1.0; // Γ^0_{00}: symmetric but does not preserve ω
        let m = Constant {
            gamma,
            omega: vec![0.0, 1.0, -1.0, 0.0],
        };
        let rep = validate_structure(&m, &[0.0, 0.0], 1e-10).unwrap();
        assert_eq!(rep.torsion, 0.0);
        assert!(rep.nabla_omega > 0.1);
        assert!(!rep.pass);
    }

    #[test]
    fn degenerate_omega_is_its_own_error() {
        let m = Constant {
            gamma: vec![0.0; 8],
            omega: vec![0.0; 4],
        };
        assert!(matches!(
            validate_structure(&m, &[0.0, 0.0], 1e-10),
            Err(Error::SingularOmega { .. })
        ));
        assert!(matches!(
            validate_structure(&m, &[0.0], 1e-10),
            Err(Error::InvalidArgument(_))
        ));
    }
}
