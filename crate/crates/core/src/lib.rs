//! Gaussian fields indexed by measures: kernels β_μ(A, B) = μ(A ∩ B), their RKHS
//! and sampling, fractional Brownian motion, time-changed Brownian motion, and
//! finite energy spaces of weighted graphs.

pub mod error;
pub mod fbm;
pub mod field;
pub mod io;
pub mod kernels;
pub mod kl;
pub mod laplacian;
pub mod measure;
pub mod quadrature;
pub mod rng;
pub mod shannon;
pub mod stats;
pub mod timechange;
pub mod verify;

pub use error::{Error, Result};
pub use nalgebra::Complex;
