pub mod error;
pub mod expr;
pub mod functional;
pub mod grid;
pub mod homology;
pub mod problem;
pub mod reduction;
pub mod search;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{GridDomain, VectorField2};
