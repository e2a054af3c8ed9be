//! Blind identification of graph filters from their outputs to a common,
//! unknown input.

pub mod dst;
pub mod error;
pub mod filters;
pub mod graph;
pub mod identifiability;
mod linalg;
pub mod noise;
pub mod recover_ls;
pub mod sparse;
pub mod spectral;

pub use error::{Error, Result};
