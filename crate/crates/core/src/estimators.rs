//! Classical estimators: maximum likelihood by Fisher scoring / IRLS and the
//! gamma ridge estimator with the `k₁` and `k₂` penalty rules.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{log_likelihood, mean_response, score, weighted_crossproduct, Dataset};
use crate::numerics::linalg::dot;
use crate::numerics::{sym_eigen, Cholesky, Matrix};

/// Every estimator the crate knows how to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Estimator {
    #[serde(rename = "MLE")]
    Mle,
    #[serde(rename = "GRE1")]
    Gre1,
    #[serde(rename = "GRE2")]
    Gre2,
    #[serde(rename = "custom-ridge")]
    CustomRidge,
    #[serde(rename = "BEUGRC")]
    Beugrc,
    #[serde(rename = "BEGRC")]
    Begrc,
}

impl Estimator {
    pub const STUDY: [Estimator; 5] = [
        Estimator::Mle,
        Estimator::Gre1,
        Estimator::Gre2,
        Estimator::Beugrc,
        Estimator::Begrc,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Estimator::Mle => "MLE",
            Estimator::Gre1 => "GRE1",
            Estimator::Gre2 => "GRE2",
            Estimator::CustomRidge => "custom-ridge",
            Estimator::Beugrc => "BEUGRC",
            Estimator::Begrc => "BEGRC",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "MLE" => Ok(Estimator::Mle),
            "GRE1" => Ok(Estimator::Gre1),
            "GRE2" => Ok(Estimator::Gre2),
            "CUSTOM-RIDGE" => Ok(Estimator::CustomRidge),
            "BEUGRC" => Ok(Estimator::Beugrc),
            "BEGRC" => Ok(Estimator::Begrc),
            _ => Err(Error::Contract(format!("unknown estimator `{s}`"))),
        }
    }
}

/// Which fixed-point equation the maximum-likelihood iteration solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MleMode {
    /// `β ← (XᵀWX)⁻¹ XᵀW M` with `W = diag(μ²)` and `M_i = η_i + (y_i − μ_i)/μ_i²`.
    /// Its fixed point solves `Xᵀ(y − μ) = 0`. Converges linearly and slowly
    /// whenever the μ_i spread over several orders of magnitude.
    PaperFaithful,
    /// Fisher scoring on the gamma log-likelihood; solves `score(β) = 0`.
    LikelihoodConsistent,
}

impl FromStr for MleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-faithful" => Ok(MleMode::PaperFaithful),
            "likelihood-consistent" => Ok(MleMode::LikelihoodConsistent),
            _ => Err(Error::Contract(format!("unknown MLE mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub mode: MleMode,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tol: 1e-8,
            mode: MleMode::LikelihoodConsistent,
        }
    }
}

impl MleOptions {
    pub fn with_mode(mode: MleMode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub beta_hat: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub mu_hat: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub estimator: Estimator,
    /// Ridge penalty per coefficient, for ridge fits.
    pub penalty: Option<Vec<f64>>,
}

/// Least squares on `ln y`, the starting point of both MLE iterations.
pub fn log_ls_start(data: &Dataset) -> Result<Vec<f64>> {
    let chol = Cholesky::new(&data.x().gram())?;
    let ln_y: Vec<f64> = data.y().iter().map(|v| v.ln()).collect();
    chol.solve_vec(&data.x().tr_matvec(&ln_y)?)
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Maximum-likelihood fit. Non-convergence is reported through
/// `converged = false`, not as an error.
pub fn fit_mle(data: &Dataset, opts: &MleOptions) -> Result<FitResult> {
    let start = log_ls_start(data)?;
    let (beta, iterations, converged) = match opts.mode {
        MleMode::PaperFaithful => irls_paper(data, start, opts)?,
        MleMode::LikelihoodConsistent => fisher_scoring(data, start, opts)?,
    };
    let mu_hat = mean_response(data.x(), &beta)?;
    let std_errors = weighted_std_errors(data, &mu_hat).unwrap_or_else(|_| vec![f64::NAN; data.p()]);
    Ok(FitResult {
        beta_hat: beta,
        std_errors,
        mu_hat,
        iterations,
        converged,
        estimator: Estimator::Mle,
        penalty: None,
    })
}

fn irls_paper(data: &Dataset, mut beta: Vec<f64>, opts: &MleOptions) -> Result<(Vec<f64>, usize, bool)> {
    let x = data.x();
    for it in 1..=opts.max_iter {
        let mu = match mean_response(x, &beta) {
            Ok(mu) => mu,
            Err(Error::NumericRange { .. }) => return Ok((beta, it - 1, false)),
            Err(e) => return Err(e),
        };
        let eta = x.matvec(&beta)?;
        // XᵀW M with W = μ², M = η + (y − μ)/μ²  ⇒  W M = μ² η + (y − μ)
        let wm: Vec<f64> = mu
            .iter()
            .zip(&eta)
            .zip(data.y())
            .map(|((&m, &e), &y)| m * m * e + (y - m))
            .collect();
        let xtwx = weighted_crossproduct(data, &mu)?;
        let next = Cholesky::new(&xtwx)?.solve_vec(&x.tr_matvec(&wm)?)?;
        if next.iter().any(|v| !v.is_finite()) {
            return Ok((beta, it - 1, false));
        }
        let step = sup_diff(&next, &beta);
        beta = next;
        if step < opts.tol {
            return Ok((beta, it, true));
        }
    }
    Ok((beta, opts.max_iter, false))
}

fn fisher_scoring(data: &Dataset, mut beta: Vec<f64>, opts: &MleOptions) -> Result<(Vec<f64>, usize, bool)> {
    // Expected information is (1/ζ) XᵀX, so the scoring direction is
    // (XᵀX)⁻¹ Xᵀ(y/μ − 1), independent of ζ.
    let chol = Cholesky::new(&data.x().gram())?;
    let mut ll = log_likelihood(data, &beta)?;
    for it in 0..opts.max_iter {
        let s = score(data, &beta)?;
        if sup_norm(&s) < opts.tol {
            return Ok((beta, it, true));
        }
        let scaled: Vec<f64> = s.iter().map(|v| v * data.zeta()).collect();
        let dir = chol.solve_vec(&scaled)?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand: Vec<f64> = beta.iter().zip(&dir).map(|(b, d)| b + t * d).collect();
            if let Ok(cand_ll) = log_likelihood(data, &cand) {
                // Near the optimum the log-likelihood is flat to rounding, so
                // only a decrease beyond that noise triggers halving.
                if cand_ll >= ll - 1e-12 * (1.0 + ll.abs()) {
                    beta = cand;
                    ll = cand_ll;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            // No ascent possible at working precision.
            let s = score(data, &beta)?;
            return Ok((beta, it + 1, sup_norm(&s) < opts.tol));
        }
    }
    let s = score(data, &beta)?;
    Ok((beta, opts.max_iter, sup_norm(&s) < opts.tol))
}

fn weighted_std_errors(data: &Dataset, mu: &[f64]) -> Result<Vec<f64>> {
    let inv = Cholesky::new(&weighted_crossproduct(data, mu)?)?.inverse();
    Ok(inv.diag().iter().map(|v| (data.zeta() * v).max(0.0).sqrt()).collect())
}

/// `sqrt(diag(ζ (Xᵀ diag(μ̂²) X)⁻¹))`.
pub fn mle_std_errors(data: &Dataset, fit: &FitResult) -> Result<Vec<f64>> {
    if !fit.converged {
        return Err(Error::Contract("standard errors need a converged fit".into()));
    }
    weighted_std_errors(data, &fit.mu_hat)
}

/// How the canonical coordinates are formed from the eigenvectors Λ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaConvention {
    /// `α = Λᵀ β̂`, the usual canonical form.
    #[default]
    Transpose,
    /// `α = Λ β̂`, as literally printed in the source formulas.
    Literal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalForm {
    /// Ascending eigenvalues of `Xᵀ diag(μ̂²) X`.
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
    pub alpha: Vec<f64>,
}

pub fn canonical_form(data: &Dataset, fit: &FitResult, convention: AlphaConvention) -> Result<CanonicalForm> {
    let xtwx = weighted_crossproduct(data, &fit.mu_hat)?;
    let eig = sym_eigen(&xtwx)?;
    if let Some(j) = eig.eigenvalues.iter().position(|l| !(*l > 0.0)) {
        return Err(Error::Singular { pivot: j });
    }
    let alpha = match convention {
        AlphaConvention::Transpose => eig.eigenvectors.tr_matvec(&fit.beta_hat)?,
        AlphaConvention::Literal => eig.eigenvectors.matvec(&fit.beta_hat)?,
    };
    Ok(CanonicalForm {
        eigenvalues: eig.eigenvalues,
        eigenvectors: eig.eigenvectors,
        alpha,
    })
}

/// `k₁ = λ_min ζ / min_j α_j²`.
pub fn ridge_k1(cf: &CanonicalForm, zeta: f64) -> Result<f64> {
    let alpha_min_sq = cf.alpha.iter().map(|a| a * a).fold(f64::INFINITY, f64::min);
    if !(alpha_min_sq > 0.0) {
        return Err(Error::DegeneratePenalty("smallest canonical coefficient is zero".into()));
    }
    let lambda_min = cf.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(lambda_min * zeta / alpha_min_sq)
}

/// `k₂ = max_j λ_max / ((n − p) ζ + λ_j α_j²)`.
pub fn ridge_k2(cf: &CanonicalForm, zeta: f64, n: usize, p: usize) -> Result<f64> {
    let lambda_max = cf.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let dof = n as f64 - p as f64;
    let mut best = f64::NEG_INFINITY;
    for (l, a) in cf.eigenvalues.iter().zip(&cf.alpha) {
        let denom = dof * zeta + l * a * a;
        if !(denom > 0.0) {
            return Err(Error::DegeneratePenalty(format!("non-positive k2 denominator {denom}")));
        }
        best = best.max(lambda_max / denom);
    }
    Ok(best)
}

/// Ridge penalty: a scalar `k` (meaning `k·I`) or one value per coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RidgePenalty {
    Scalar(f64),
    PerCoefficient(Vec<f64>),
}

impl RidgePenalty {
    fn expand(&self, p: usize) -> Result<Vec<f64>> {
        let k = match self {
            RidgePenalty::Scalar(k) => vec![*k; p],
            RidgePenalty::PerCoefficient(k) if k.len() == p => k.clone(),
            RidgePenalty::PerCoefficient(k) => {
                return Err(Error::Contract(format!("{} penalties for {p} coefficients", k.len())))
            }
        };
        if let Some(v) = k.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::Domain {
                op: "fit_ridge",
                detail: format!("penalty must be finite and non-negative, got {v}"),
            });
        }
        Ok(k)
    }
}

/// `β̂_GRE = (XᵀWX + diag(k))⁻¹ XᵀWX β̂_MLE` with `W = diag(μ̂²)` from the MLE fit.
///
/// Standard errors use the sandwich `ζ A⁻¹ XᵀWX A⁻¹`, `A = XᵀWX + diag(k)`.
pub fn fit_ridge(data: &Dataset, mle: &FitResult, k: &RidgePenalty) -> Result<FitResult> {
    if !mle.converged {
        return Err(Error::Contract("ridge estimator needs a converged MLE fit".into()));
    }
    let kv = k.expand(data.p())?;
    let xtwx = weighted_crossproduct(data, &mle.mu_hat)?;
    let a = xtwx.add_diag(&kv)?;
    let chol = Cholesky::new(&a)?;
    let beta = chol.solve_vec(&xtwx.matvec(&mle.beta_hat)?)?;
    let a_inv = chol.inverse();
    let sandwich = a_inv.matmul(&xtwx)?.matmul(&a_inv)?;
    let std_errors = sandwich
        .diag()
        .iter()
        .map(|v| (data.zeta() * v).max(0.0).sqrt())
        .collect();
    let mu_hat = mean_response(data.x(), &beta)?;
    Ok(FitResult {
        beta_hat: beta,
        std_errors,
        mu_hat,
        iterations: 0,
        converged: true,
        estimator: Estimator::CustomRidge,
        penalty: Some(kv),
    })
}

/// Which data-driven ridge penalty to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PenaltyRule {
    K1,
    K2,
}

/// Ridge fit with the `k₁` or `k₂` rule, tagged GRE1 / GRE2.
pub fn fit_gre(data: &Dataset, mle: &FitResult, rule: PenaltyRule, convention: AlphaConvention) -> Result<FitResult> {
    let cf = canonical_form(data, mle, convention)?;
    let (k, tag) = match rule {
        PenaltyRule::K1 => (ridge_k1(&cf, data.zeta())?, Estimator::Gre1),
        PenaltyRule::K2 => (ridge_k2(&cf, data.zeta(), data.n(), data.p())?, Estimator::Gre2),
    };
    let mut fit = fit_ridge(data, mle, &RidgePenalty::Scalar(k))?;
    fit.estimator = tag;
    Ok(fit)
}

/// `‖Xᵀ(y − μ̂)‖_∞`, the residual of the paper-faithful fixed point.
pub fn poisson_normal_equation_residual(data: &Dataset, mu: &[f64]) -> Result<f64> {
    let r: Vec<f64> = data.y().iter().zip(mu).map(|(y, m)| y - m).collect();
    Ok(sup_norm(&data.x().tr_matvec(&r)?))
}

/// Canonical coordinates `Λᵀ β` for an arbitrary β.
pub fn to_canonical(cf: &CanonicalForm, beta: &[f64]) -> Vec<f64> {
    (0..cf.eigenvectors.cols())
        .map(|j| dot(&cf.eigenvectors.column(j), beta))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cf(l: &[f64], a: &[f64]) -> CanonicalForm {
        CanonicalForm {
            eigenvalues: l.to_vec(),
            eigenvectors: Matrix::identity(l.len()),
            alpha: a.to_vec(),
        }
    }

    #[test]
    fn k1_fixtures() {
        assert_eq!(ridge_k1(&cf(&[1.0, 1.0], &[1.0, 1.0]), 1.0).unwrap(), 1.0);
        let c = cf(&[0.5, 2.0], &[2.0, 0.1]);
        assert!((ridge_k1(&c, 0.25).unwrap() - 12.5).abs() < 1e-12);
        assert!((ridge_k1(&c, 0.5).unwrap() - 25.0).abs() < 1e-12);
        assert!(matches!(
            ridge_k1(&cf(&[1.0, 1.0], &[0.0, 1.0]), 1.0),
            Err(Error::DegeneratePenalty(_))
        ));
    }

    #[test]
    fn k2_fixtures() {
        assert_eq!(ridge_k2(&cf(&[1.0, 1.0], &[1.0, 1.0]), 1.0, 2, 2).unwrap(), 1.0);
        let c = cf(&[1.0, 4.0], &[1.0, 1.0]);
        assert!((ridge_k2(&c, 0.25, 8, 4).unwrap() - 2.0).abs() < 1e-12);
        assert!(matches!(
            ridge_k2(&cf(&[1.0, 1.0], &[0.0, 1.0]), 1.0, 2, 2),
            Err(Error::DegeneratePenalty(_))
        ));
    }

    #[test]
    fn saturated_paper_fit_recovers_log_response() {
        // Repeated identity rows: the fixed point Xᵀ(y − μ) = 0 gives μ = y.
        let x = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let y = vec![3.0, 0.5, 3.0, 0.5];
        let d = Dataset::new(x, y, 1.0).unwrap();
        let fit = fit_mle(&d, &MleOptions::with_mode(MleMode::PaperFaithful)).unwrap();
        assert!(fit.converged);
        assert!((fit.beta_hat[0] - 3f64.ln()).abs() < 1e-10);
        assert!((fit.beta_hat[1] - 0.5f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn std_errors_unit_case_and_scaling() {
        // Orthonormal columns, μ̂ ≡ 1, ζ = 1 → SE = 1.
        let x = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]).unwrap();
        let d = Dataset::new(x, vec![1.0, 1.0, 1.0], 1.0).unwrap();
        let fit = FitResult {
            beta_hat: vec![0.0, 0.0],
            std_errors: vec![],
            mu_hat: vec![1.0; 3],
            iterations: 1,
            converged: true,
            estimator: Estimator::Mle,
            penalty: None,
        };
        let se = mle_std_errors(&d, &fit).unwrap();
        assert!(se.iter().all(|s| (s - 1.0).abs() < 1e-15));
        let se4 = mle_std_errors(&d.with_zeta(4.0).unwrap(), &fit).unwrap();
        assert!(se4.iter().all(|s| (s - 2.0).abs() < 1e-15));
        let mut nc = fit.clone();
        nc.converged = false;
        assert!(mle_std_errors(&d, &nc).is_err());
    }

    #[test]
    fn estimator_names_round_trip() {
        for e in Estimator::STUDY {
            assert_eq!(e.label().parse::<Estimator>().unwrap(), e);
            let js = serde_json::to_string(&e).unwrap();
            assert_eq!(js, format!("\"{}\"", e.label()));
        }
    }
}
