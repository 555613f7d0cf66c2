//! n-level densities of eigenangles of Haar-random USp(2N) matrices, computed
//! by Monte Carlo sampling, contour integration of the ratio kernel J*, closed
//! Fourier-side formulas (support < 1, < 2, < 3) and the determinantal kernel.

pub mod cli;
pub mod closedform;
pub mod combinat;
pub mod contour;
pub mod detform;
pub mod error;
pub mod estimate;
pub mod haar;
pub mod jstar;
pub mod periodize;
pub mod quad;
pub mod region;
pub mod special;
pub mod stats;
pub mod testfn;

pub use error::{Error, Result};
pub use estimate::{DensityEstimate, Method};
