//! Finite-dimensional laboratory for noncommutative martingales.

pub mod error;
pub mod filtration;
pub mod harness;
pub mod lil;
pub mod martingale;
pub mod operator;
pub mod random;
pub mod rng;
pub mod tail;

pub use error::{Error, Hypothesis, Result};
pub use operator::{Interval, Operator, Projection, SpectralDecomposition};
