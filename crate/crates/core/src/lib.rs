pub mod best_approx;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod fractional;
pub mod periodic;
pub mod piecewise;
pub mod poly;
pub mod quasinorm;
pub mod smoothness;
pub mod verifier;

pub use error::{Error, Result};
