pub mod cli;
pub mod conformal;
pub mod duhamel;
pub mod equations;
pub mod error;
pub mod norms;
pub mod null_condition;
pub mod poly;
pub mod solver;
pub mod sphere_spectral;

pub use error::{Error, Result};
