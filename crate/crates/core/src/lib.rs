pub mod cli;
pub mod config;
pub mod contrastive;
pub mod dataset;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod matrix;
pub mod sampling;
pub mod synthgen;
pub mod textualize;
pub mod trainer;

pub use error::{Error, Result};
