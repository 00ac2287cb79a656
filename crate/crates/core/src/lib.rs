pub mod apps;
pub mod cli;
pub mod decoupling;
pub mod entropy;
pub mod error;
pub mod linalg;
pub mod random;
pub mod sdp;

pub use error::{Error, Result};
pub use num_complex::Complex64;
