//! Localized zonal Jacobi kernels, fractional Laplace–Beltrami operators, doubling
//! weights, positive cubature and constructive L^p approximation on the sphere.

pub mod approx;
pub mod cli;
pub mod cubature;
pub mod error;
pub mod fit;
pub mod jacobi;
pub mod kernels;
pub mod operators;
pub mod quad;
pub mod sphere;
pub mod weights;

pub use error::{Error, Result};
