//! Goodness of fit of a marginal gamma law (Anderson–Darling with a
//! parametric bootstrap p-value) and multicollinearity measures.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::FitResult;
use crate::model::{weighted_crossproduct, Dataset};
use crate::numerics::special::{digamma, reg_lower_inc_gamma, trigamma};
use crate::numerics::{condition_number, Matrix, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaFit {
    pub shape: f64,
    pub scale: f64,
}

/// Maximum-likelihood gamma fit: `ln a − ψ(a) = ln ȳ − mean(ln y)`, `scale = ȳ / a`.
pub fn fit_gamma_univariate(y: &[f64]) -> Result<GammaFit> {
    if y.len() < 3 {
        return Err(Error::Contract(format!("need at least 3 observations, got {}", y.len())));
    }
    if let Some(v) = y.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::Domain {
            op: "fit_gamma_univariate",
            detail: format!("observations must be positive, got {v}"),
        });
    }
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let mean_ln = y.iter().map(|v| v.ln()).sum::<f64>() / n;
    let s = mean.ln() - mean_ln;
    if !(s > 1e-14) {
        return Err(Error::Degenerate("sample has no spread".into()));
    }
    // ln a − ψ(a) decreases from +∞ to 0, so the root is unique.
    let f = |a: f64| a.ln() - digamma(a) - s;
    let mut a = (3.0 - s + ((s - 3.0).powi(2) + 24.0 * s).sqrt()) / (12.0 * s);
    let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
    for _ in 0..200 {
        let fa = f(a);
        if fa > 0.0 {
            lo = a;
        } else {
            hi = a;
        }
        let mut next = a - fa / (1.0 / a - trigamma(a));
        if !(next > lo && next < hi) {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * a };
        }
        let done = (next - a).abs() <= 1e-14 * a;
        a = next;
        if done {
            break;
        }
    }
    Ok(GammaFit {
        shape: a,
        scale: mean / a,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdStatistic {
    pub value: f64,
    /// Some fitted CDF value hit 0 or 1 and was clamped.
    pub clamped: bool,
}

const F_MIN: f64 = 1e-300;
const F_MAX: f64 = 1.0 - 1e-16;

/// Anderson–Darling `A²` of `y` against `Gamma(shape, scale)`.
pub fn ad_statistic(y: &[f64], shape: f64, scale: f64) -> Result<AdStatistic> {
    if y.is_empty() {
        return Err(Error::Contract("empty sample".into()));
    }
    if !(shape > 0.0) || !(scale > 0.0) {
        return Err(Error::Domain {
            op: "ad_statistic",
            detail: format!("shape and scale must be positive, got ({shape}, {scale})"),
        });
    }
    let mut sorted = y.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut clamped = false;
    let mut f = Vec::with_capacity(sorted.len());
    for v in &sorted {
        let raw = reg_lower_inc_gamma(shape, v.max(0.0) / scale)?;
        let c = raw.clamp(F_MIN, F_MAX);
        clamped |= c != raw;
        f.push(c);
    }
    Ok(AdStatistic {
        value: ad_from_cdf(&f),
        clamped,
    })
}

/// `A²` from sorted CDF values `F(y_(1)) ≤ … ≤ F(y_(n))`.
pub fn ad_from_cdf(f: &[f64]) -> f64 {
    let n = f.len();
    let s: f64 = (0..n)
        .map(|i| (2 * i + 1) as f64 * (f[i].ln() + (-f[n - 1 - i]).ln_1p()))
        .sum();
    -(n as f64) - s / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub ad_statistic: f64,
    pub p_value: f64,
    pub fitted_shape: f64,
    pub fitted_scale: f64,
    pub clamped: bool,
    pub bootstrap_replicates: usize,
}

pub const DEFAULT_BOOTSTRAP: usize = 1000;

/// Bootstrap replicate statistics: `A²` of refitted synthetic samples from the fitted gamma.
pub fn bootstrap_ad_null(rng: &RngStream, n: usize, fit: GammaFit, b: usize) -> Result<Vec<f64>> {
    (0..b)
        .into_par_iter()
        .map(|k| {
            let mut r = rng.derive(k as u64);
            let sample = (0..n)
                .map(|_| r.gamma(fit.shape, fit.scale))
                .collect::<Result<Vec<_>>>()?;
            let refit = fit_gamma_univariate(&sample)?;
            Ok(ad_statistic(&sample, refit.shape, refit.scale)?.value)
        })
        .collect()
}

/// `(1 + #{A²_b ≥ A²_obs}) / (B + 1)`.
pub fn bootstrap_p_value(observed: f64, null: &[f64]) -> f64 {
    let exceed = null.iter().filter(|v| **v >= observed).count();
    (1 + exceed) as f64 / (null.len() + 1) as f64
}

/// Parametric-bootstrap p-value of the AD statistic with estimated parameters.
pub fn ad_pvalue_bootstrap(rng: &RngStream, y: &[f64], b: usize) -> Result<f64> {
    Ok(gamma_gof(rng, y, b)?.p_value)
}

/// Fit, statistic and bootstrap p-value in one go.
pub fn gamma_gof(rng: &RngStream, y: &[f64], b: usize) -> Result<GofReport> {
    if b < 200 {
        return Err(Error::Contract(format!("need at least 200 bootstrap replicates, got {b}")));
    }
    let fit = fit_gamma_univariate(y)?;
    let obs = ad_statistic(y, fit.shape, fit.scale)?;
    let null = bootstrap_ad_null(rng, y.len(), fit, b)?;
    Ok(GofReport {
        ad_statistic: obs.value,
        p_value: bootstrap_p_value(obs.value, &null),
        fitted_shape: fit.shape,
        fitted_scale: fit.scale,
        clamped: obs.clamped,
        bootstrap_replicates: b,
    })
}

/// Pearson correlation matrix of the columns of `x`.
pub fn correlation_matrix(x: &Matrix) -> Result<Matrix> {
    let (n, p) = (x.rows(), x.cols());
    if n < 2 {
        return Err(Error::Contract("need at least two rows".into()));
    }
    let mut centred = Vec::with_capacity(p);
    for j in 0..p {
        let col = x.column(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        let c: Vec<f64> = col.iter().map(|v| v - mean).collect();
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 1e-300) || c.iter().all(|v| v.abs() <= 1e-14 * mean.abs()) {
            return Err(Error::Degenerate(format!("column {j} is constant")));
        }
        centred.push(c.into_iter().map(|v| v / norm).collect::<Vec<f64>>());
    }
    let mut out = Matrix::identity(p);
    for a in 0..p {
        for b in (a + 1)..p {
            let r: f64 = centred[a].iter().zip(&centred[b]).map(|(u, v)| u * v).sum();
            let r = r.clamp(-1.0, 1.0);
            out[(a, b)] = r;
            out[(b, a)] = r;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionNumbers {
    /// Of `Xᵀ diag(μ̂²) X`.
    pub weighted: f64,
    /// Of `XᵀX`.
    pub unweighted: f64,
}

/// `√(λ_max/λ_min)` of the weighted and unweighted cross-products.
pub fn multicollinearity_condition_number(data: &Dataset, fit: &FitResult) -> Result<ConditionNumbers> {
    if !fit.converged {
        return Err(Error::Contract("condition number needs a converged fit".into()));
    }
    Ok(ConditionNumbers {
        weighted: condition_number(&weighted_crossproduct(data, &fit.mu_hat)?)?,
        unweighted: condition_number(&data.x().gram())?,
    })
}
