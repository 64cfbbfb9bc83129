//! Elliptic special functions, a differential-polynomial engine, and a formal
//! delta-distribution calculus, assembled to build and check Poisson brackets
//! of hydrodynamic type on loop spaces of `C^n` and `CP^{n-1}`.

pub mod distcalc;
pub mod elliptic;
pub mod error;
pub mod models;
pub mod numdiff;
pub mod symexpr;
pub mod verify;

pub use error::{Error, Result};
