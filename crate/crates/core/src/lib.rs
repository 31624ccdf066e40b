//! Projection-based adiabatic elimination for bipartite Lindblad master
//! equations.

pub mod elimination;
pub mod error;
pub mod liouville;
pub mod models;
pub mod numkernel;
pub mod simulate;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
