//! Numerical certification of multiplier conditions on SL_n(R).

pub mod certify;
pub mod composition_calculus;
pub mod csv_io;
pub mod error;
pub mod euclidean_analysis;
pub mod group_geometry;
pub mod numerics;
pub mod profile;
pub mod report;
pub mod schur_numerics;
pub mod sphere_spectra;

pub use error::{Error, Result};
