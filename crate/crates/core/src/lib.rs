pub mod arrays;
pub mod cli;
pub mod disintegration;
pub mod error;
pub mod kernels;
pub mod linalg;
pub mod model;
pub mod rng;
pub mod svm;

pub use error::{Error, Result};
