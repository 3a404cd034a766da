pub mod config;
pub mod data;
pub mod error;
pub mod eval;
pub mod genome;
pub mod losses;
pub mod nets;
pub mod numerics;
pub mod sampler;
pub mod trainer;

pub use error::{Error, Result};
