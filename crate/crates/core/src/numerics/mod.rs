//! Numerical building blocks shared by every other module.

pub mod linalg;
pub mod rng;
pub mod special;

pub use linalg::{condition_number, dot, inverse_spd, solve_spd, sym_eigen, Cholesky, Matrix, SymmetricEigen};
pub use rng::{sample_gamma, sample_standard_normal, RngStream};
pub use special::{log_gamma, reg_lower_inc_gamma};
