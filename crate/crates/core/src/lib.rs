//! Sparse high-dimensional regression with penalty levels pre-set at the
//! detection boundary of a pivotal zero-thresholding statistic.

pub mod calibration;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod format;
pub mod losses;
pub mod model;
pub(crate) mod lad;
pub mod rng;
pub mod solver;
pub mod subset;

pub use error::{PicError, Result};
