pub mod aggregators;
pub mod cli;
pub mod data;
pub mod deepwalk;
pub mod error;
pub mod eval;
pub mod graph;
pub mod model;
pub mod numeric;
pub mod seeds;

pub use error::{Error, Result};
