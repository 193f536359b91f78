//! Geodesics, Jacobi fields and the checks built on them: parity of the
//! `h`-functions, Taylor coefficients against the `Q^r` formulas, and the
//! pullback of `ω` by the geodesic symmetry.

pub mod ode;
mod path;
mod pullback;
mod taylor;

pub use path::{
    h_series, integrate_geodesic, integrate_jacobi, parity_residual, GeodesicOptions, GeodesicSolution, HSeries,
    JacobiData,
};
pub use pullback::{exp_map, pullback_residual, PullbackReport};
pub use taylor::{
    formula_derivative, taylor_cross_check, taylor_derivatives, FitOptions, HTarget, OrderDiscrepancy,
};
