//! Gamma regression with a log link under linear inequality restrictions `Rβ ≤ r`.
//!
//! The crate provides the classical estimators (Fisher-scoring maximum
//! likelihood and the gamma ridge estimator with two data-driven penalties),
//! a Metropolis–Hastings sampler for the posterior under a truncated
//! multivariate normal prior, the Monte Carlo study harness used to compare
//! them, and goodness-of-fit / multicollinearity diagnostics.

pub mod bayes;
pub mod diagnostics;
pub mod error;
pub mod estimators;
pub mod model;
pub mod numerics;
pub mod restrictions;
pub mod simulation;
pub mod tmvn;

pub use error::{Error, Result};
pub use estimators::{Estimator, FitResult, MleMode, MleOptions};
pub use model::Dataset;
pub use numerics::{Matrix, RngStream};
pub use restrictions::LinearRestrictions;
