//! Gamma regression in the (ζ, μ) parametrisation with log link.
//!
//! `y_i ~ Gamma(shape = 1/ζ, scale = μ_i ζ)`, so `E y_i = μ_i` and
//! `Var y_i = ζ μ_i²`, with `ln μ_i = x_iᵀβ` and ζ treated as known.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::linalg::dot;
use crate::numerics::special::ln_gamma_unchecked;
use crate::numerics::{Cholesky, Matrix};

/// Largest |η| accepted before `exp` is considered out of range.
pub const ETA_LIMIT: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    x: Matrix,
    y: Vec<f64>,
    zeta: f64,
}

impl Dataset {
    /// Validates shapes, positivity of the response and of ζ.
    ///
    /// Rank deficiency of `X` is not an error here; see [`Dataset::has_full_rank`].
    pub fn new(x: Matrix, y: Vec<f64>, zeta: f64) -> Result<Self> {
        let (n, p) = (x.rows(), x.cols());
        if p == 0 || n <= p {
            return Err(Error::Contract(format!("need n > p >= 1, got n = {n}, p = {p}")));
        }
        if y.len() != n {
            return Err(Error::Contract(format!("X has {n} rows but y has {} entries", y.len())));
        }
        if let Some(i) = y.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Domain {
                op: "Dataset::new",
                detail: format!("response must be positive, y[{i}] = {}", y[i]),
            });
        }
        if !(zeta > 0.0) || !zeta.is_finite() {
            return Err(Error::Domain {
                op: "Dataset::new",
                detail: format!("precision zeta must be positive, got {zeta}"),
            });
        }
        if x.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain {
                op: "Dataset::new",
                detail: "design matrix contains non-finite entries".into(),
            });
        }
        Ok(Self { x, y, zeta })
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    /// Same data under a different precision.
    pub fn with_zeta(&self, zeta: f64) -> Result<Self> {
        Self::new(self.x.clone(), self.y.clone(), zeta)
    }

    /// Whether `XᵀX` admits a Cholesky factorisation.
    pub fn has_full_rank(&self) -> bool {
        Cholesky::new(&self.x.gram()).is_ok()
    }
}

/// `η = Xβ`, rejecting predictors whose exponential would overflow.
pub fn linear_predictor(x: &Matrix, beta: &[f64]) -> Result<Vec<f64>> {
    let eta = x.matvec(beta)?;
    if let Some((row, &e)) = eta
        .iter()
        .enumerate()
        .find(|(_, e)| !(e.abs() <= ETA_LIMIT))
    {
        return Err(Error::NumericRange { row, eta: e });
    }
    Ok(eta)
}

/// `μ_i = exp(x_iᵀβ)`.
pub fn mean_response(x: &Matrix, beta: &[f64]) -> Result<Vec<f64>> {
    Ok(linear_predictor(x, beta)?.into_iter().map(f64::exp).collect())
}

fn density_terms(y: f64, zeta: f64, mu: f64, ln_gamma_shape: f64) -> f64 {
    let shape = 1.0 / zeta;
    (shape - 1.0) * y.ln() - y / (mu * zeta) - shape * (zeta * mu).ln() - ln_gamma_shape
}

/// Log density of a single observation.
pub fn gamma_log_density(y: f64, zeta: f64, mu: f64) -> Result<f64> {
    if !(y > 0.0) || !(zeta > 0.0) || !(mu > 0.0) {
        return Err(Error::Domain {
            op: "gamma_log_density",
            detail: format!("y, zeta and mu must be positive, got ({y}, {zeta}, {mu})"),
        });
    }
    Ok(density_terms(y, zeta, mu, ln_gamma_unchecked(1.0 / zeta)))
}

/// Full log-likelihood `Σ_i ln f(y_i | ζ, μ_i(β))`.
pub fn log_likelihood(data: &Dataset, beta: &[f64]) -> Result<f64> {
    let mu = mean_response(&data.x, beta)?;
    let lg = ln_gamma_unchecked(1.0 / data.zeta);
    Ok(data
        .y
        .iter()
        .zip(&mu)
        .map(|(&y, &m)| density_terms(y, data.zeta, m, lg))
        .sum())
}

/// Gradient of [`log_likelihood`]: `(1/ζ) Σ_i (y_i e^{-η_i} − 1) x_i`.
pub fn score(data: &Dataset, beta: &[f64]) -> Result<Vec<f64>> {
    let eta = linear_predictor(&data.x, beta)?;
    let resid: Vec<f64> = data
        .y
        .iter()
        .zip(&eta)
        .map(|(&y, &e)| (y * (-e).exp() - 1.0) / data.zeta)
        .collect();
    data.x.tr_matvec(&resid)
}

/// `Xᵀ diag(μ²) X`.
pub fn weighted_crossproduct(data: &Dataset, mu: &[f64]) -> Result<Matrix> {
    if let Some(i) = mu.iter().position(|m| !(*m > 0.0)) {
        return Err(Error::Domain {
            op: "weighted_crossproduct",
            detail: format!("mu[{i}] = {} is not positive", mu[i]),
        });
    }
    let w: Vec<f64> = mu.iter().map(|m| m * m).collect();
    data.x.weighted_gram(&w)
}

/// Kernel of the log-likelihood in β: `−(1/ζ) Σ_i (y_i e^{-η_i} + η_i)`.
pub(crate) fn log_likelihood_kernel(data: &Dataset, beta: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for (row, &y) in data.y.iter().enumerate() {
        let eta = dot(data.x.row(row), beta);
        if !(eta.abs() <= ETA_LIMIT) {
            return Err(Error::NumericRange { row, eta });
        }
        acc += y * (-eta).exp() + eta;
    }
    Ok(-acc / data.zeta)
}
