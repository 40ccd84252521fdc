//! Persistent-homology-preserving linear dimensionality reduction, and
//! similarity measures between Rips filtrations.

pub mod datasets;
pub mod cli;
pub mod diagram_distance;
pub mod equivalence;
pub mod error;
pub mod experiment;
pub mod filtration;
pub mod geometry;
pub mod grassmann;
pub mod io;
pub mod linalg;
pub mod optimizer;
pub mod persistence;
pub mod plot;

pub use error::{Result, SpredError};
