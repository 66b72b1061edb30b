//! Exact realizable-statistic geometry and likelihood analysis for
//! exponential random graph models on small vertex sets.

pub mod cli;
pub mod degeneracy;
pub mod error;
pub mod geometry;
pub mod graphspace;
pub mod likelihood;
pub mod linalg;
pub mod lp;
pub mod rational;

pub use error::{Error, Result};
