//! Exact prime-geodesic counting for the modular surface PSL(2, ℤ)\ℍ, together
//! with the explicit-formula, mean-value and exceptional-set machinery used to
//! study the error term of the prime geodesic theorem numerically.

pub mod class_numbers;
pub mod error;
pub mod experiments;
pub mod format;
pub mod gallagher;
pub mod geodesic_counts;
pub mod spectral;
pub mod summation;

pub use error::{Error, Result};
