pub mod cli;
pub mod error;
pub mod geodesics;
pub mod geometry;
pub mod jets;
pub mod linalg;
pub mod models;
pub mod qrecursion;
pub mod reduction;

pub use error::{Error, Result};
