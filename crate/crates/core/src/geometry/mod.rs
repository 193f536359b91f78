//! Chart-level tensor calculus for Fedosov manifolds.

pub mod curvature;
pub mod endo;
pub mod model;
pub mod ricci;
pub mod structure;

pub use curvature::{curvature_stack, CurvatureField, CurvatureStack};
pub use endo::{pi_derivatives, preferred_residual, preferred_trace_residual, EndoList};
pub use model::{check_point, contract_gamma, ChartModel, ChartValues};
pub use ricci::{
    ricci_type_diagnostics, ricci_type_identities, ricci_type_split, surface_curvature_residual,
    RicciSplit, RicciTypeDiagnostics, RicciTypeIdentities,
};
pub use structure::{validate_structure, StructureReport};
