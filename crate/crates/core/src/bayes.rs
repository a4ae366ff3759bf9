//! Metropolis–Hastings samplers for the gamma regression posterior under a
//! normal (BEUGRC) or truncated normal (BEGRC) prior.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::Estimator;
use crate::model::{log_likelihood_kernel, weighted_crossproduct, Dataset};
use crate::numerics::linalg::dot;
use crate::numerics::{Cholesky, Matrix, RngStream};
use crate::restrictions::{LinearRestrictions, DEFAULT_MAX_PASSES};
use crate::tmvn::GibbsKernel;

#[derive(Debug, Clone)]
pub struct PriorSpec {
    mean: Vec<f64>,
    covariance: Matrix,
    precision: Matrix,
    restrictions: Option<LinearRestrictions>,
}

impl PriorSpec {
    pub fn new(mean: Vec<f64>, covariance: Matrix, restrictions: Option<LinearRestrictions>) -> Result<Self> {
        let p = mean.len();
        if covariance.rows() != p || covariance.cols() != p {
            return Err(Error::Contract("prior mean and covariance disagree on p".into()));
        }
        if let Some(r) = &restrictions {
            if r.p() != p {
                return Err(Error::Contract("prior restrictions act on the wrong number of coefficients".into()));
            }
        }
        let precision = Cholesky::new(&covariance)?.inverse();
        Ok(Self {
            mean,
            covariance,
            precision,
            restrictions,
        })
    }

    /// The default prior `N(0, (XᵀX)⁻¹)`, optionally truncated.
    pub fn default_for(x: &Matrix, restrictions: Option<LinearRestrictions>) -> Result<Self> {
        let (mean, covariance) = default_hyperparameters(x)?;
        let precision = x.gram();
        if let Some(r) = &restrictions {
            if r.p() != mean.len() {
                return Err(Error::Contract("prior restrictions act on the wrong number of coefficients".into()));
            }
        }
        Ok(Self {
            mean,
            covariance,
            precision,
            restrictions,
        })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &Matrix {
        &self.covariance
    }

    pub fn restrictions(&self) -> Option<&LinearRestrictions> {
        self.restrictions.as_ref()
    }

    pub fn with_restrictions(&self, restrictions: LinearRestrictions) -> Result<Self> {
        if restrictions.p() != self.mean.len() {
            return Err(Error::Contract("prior restrictions act on the wrong number of coefficients".into()));
        }
        Ok(Self {
            restrictions: Some(restrictions),
            ..self.clone()
        })
    }

    pub fn without_restrictions(&self) -> Self {
        Self {
            restrictions: None,
            ..self.clone()
        }
    }
}

/// `μ_β = 0`, `Σ_β = (XᵀX)⁻¹`.
pub fn default_hyperparameters(x: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let cov = Cholesky::new(&x.gram())?.inverse();
    Ok((vec![0.0; x.cols()], cov))
}

/// `(1/ζ) (Xᵀ diag(μ̂²) X)⁻¹`.
pub fn default_proposal_cov(data: &Dataset, mu_hat: &[f64]) -> Result<Matrix> {
    let inv = Cholesky::new(&weighted_crossproduct(data, mu_hat)?)?.inverse();
    Ok(inv.scale(1.0 / data.zeta()))
}

/// Random-walk proposal kept in precision form: the default covariance is
/// badly conditioned whenever μ̂ spans several orders of magnitude, while its
/// inverse `ζ Xᵀ diag(μ̂²) X` factors cleanly.
#[derive(Debug, Clone)]
pub struct Proposal {
    precision: Matrix,
    chol: Cholesky,
}

impl Proposal {
    pub fn from_precision(precision: Matrix) -> Result<Self> {
        let chol = Cholesky::new(&precision)?;
        Ok(Self { precision, chol })
    }

    pub fn from_covariance(cov: &Matrix) -> Result<Self> {
        Self::from_precision(Cholesky::new(cov)?.inverse())
    }

    /// The default `Σ_pro` multiplied by `scale`.
    pub fn from_fit(data: &Dataset, mu_hat: &[f64], scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::Domain {
                op: "Proposal::from_fit",
                detail: format!("proposal scale must be positive, got {scale}"),
            });
        }
        let info = weighted_crossproduct(data, mu_hat)?;
        Self::from_precision(info.scale(data.zeta() / scale))
    }

    pub fn precision(&self) -> &Matrix {
        &self.precision
    }

    pub fn covariance(&self) -> Matrix {
        self.chol.inverse()
    }

    /// `center + L⁻ᵀ z`, a draw from `N(center, precision⁻¹)`.
    fn draw(&self, rng: &mut RngStream, center: &[f64]) -> Vec<f64> {
        let z: Vec<f64> = (0..center.len()).map(|_| rng.standard_normal()).collect();
        let step = self.chol.backward(&z);
        center.iter().zip(step).map(|(c, s)| c + s).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProposalMode {
    /// One Gibbs cycle of the truncated normal centred at the current state,
    /// accepted with the plain posterior ratio.
    #[default]
    PaperFaithfulTn,
    /// Untruncated random walk; infeasible proposals are rejected.
    ExactIndicatorRw,
}

impl FromStr for ProposalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-faithful-tn" => Ok(ProposalMode::PaperFaithfulTn),
            "exact-indicator-rw" => Ok(ProposalMode::ExactIndicatorRw),
            _ => Err(Error::Contract(format!("unknown proposal mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McmcConfig {
    pub n_iter: usize,
    pub burn_in: usize,
    pub proposal_mode: ProposalMode,
    /// Multiplier on the default proposal covariance.
    pub proposal_scale: f64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            n_iter: 15_000,
            burn_in: 2_000,
            proposal_mode: ProposalMode::PaperFaithfulTn,
            proposal_scale: 1.0,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.n_iter {
            return Err(Error::Contract(format!(
                "burn_in ({}) must be below n_iter ({})",
                self.burn_in, self.n_iter
            )));
        }
        if !(self.proposal_scale > 0.0) || !self.proposal_scale.is_finite() {
            return Err(Error::Contract("proposal_scale must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    /// All `n_iter` states, burn-in included.
    pub draws: Matrix,
    pub acceptance_rate: f64,
    pub burn_in: usize,
    pub estimator: Estimator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub posterior_mean: Vec<f64>,
    pub posterior_sd: Vec<f64>,
}

/// `−(1/ζ) Σ (y e^{−η} + η) − ½ (β−μ)ᵀ Σ_β⁻¹ (β−μ)`, or `−∞` outside the restrictions.
pub fn log_posterior_kernel(data: &Dataset, beta: &[f64], prior: &PriorSpec) -> Result<f64> {
    if beta.len() != data.p() || prior.mean.len() != data.p() {
        return Err(Error::Contract("coefficient vector has the wrong length".into()));
    }
    if let Some(r) = &prior.restrictions {
        if !r.satisfied_unchecked(beta) {
            return Ok(f64::NEG_INFINITY);
        }
    }
    let ll = log_likelihood_kernel(data, beta)?;
    let d: Vec<f64> = beta.iter().zip(&prior.mean).map(|(b, m)| b - m).collect();
    let q = dot(&d, &prior.precision.matvec(&d)?);
    Ok(ll - 0.5 * q)
}

enum Step<'a> {
    RandomWalk,
    Gibbs(&'a GibbsKernel),
}

fn run_chain(
    data: &Dataset,
    prior: &PriorSpec,
    cfg: &McmcConfig,
    proposal: &Proposal,
    start: Vec<f64>,
    step: Step<'_>,
    estimator: Estimator,
    rng: &mut RngStream,
) -> Result<Chain> {
    cfg.validate()?;
    let p = data.p();
    if proposal.precision.rows() != p {
        return Err(Error::Contract("proposal dimension does not match the data".into()));
    }
    let mut current = start;
    let mut current_lp = log_posterior_kernel(data, &current, prior)?;
    if !current_lp.is_finite() {
        return Err(Error::Contract("chain starts outside the posterior support".into()));
    }
    let mut draws = Vec::with_capacity(cfg.n_iter * p);
    let mut accepted = 0usize;
    for _ in 0..cfg.n_iter {
        let candidate = match step {
            Step::RandomWalk => Ok(proposal.draw(rng, &current)),
            Step::Gibbs(kernel) => {
                let mut next = current.clone();
                kernel.sweep(rng, &current, &mut next).map(|_| next)
            }
        };
        let u = rng.uniform();
        // Proposals the sampler or the likelihood cannot evaluate count as rejections.
        if let Ok(cand) = candidate {
            if let Ok(lp) = log_posterior_kernel(data, &cand, prior) {
                if u.ln() < lp - current_lp {
                    current = cand;
                    current_lp = lp;
                    accepted += 1;
                }
            }
        }
        draws.extend_from_slice(&current);
    }
    Ok(Chain {
        draws: Matrix::from_row_major(cfg.n_iter, p, draws)?,
        acceptance_rate: accepted as f64 / cfg.n_iter as f64,
        burn_in: cfg.burn_in,
        estimator,
    })
}

/// Restricted sampler, started at `feasible_start(restrictions, start_hint)`
/// (callers pass β̂_MLE).
pub fn run_begrc(
    data: &Dataset,
    prior: &PriorSpec,
    cfg: &McmcConfig,
    proposal: &Proposal,
    start_hint: &[f64],
    rng: &mut RngStream,
) -> Result<Chain> {
    let res = prior
        .restrictions
        .as_ref()
        .ok_or_else(|| Error::Contract("BEGRC needs a restricted prior".into()))?;
    let start = res.feasible_start(start_hint, DEFAULT_MAX_PASSES)?;
    match cfg.proposal_mode {
        ProposalMode::ExactIndicatorRw => {
            run_chain(data, prior, cfg, proposal, start, Step::RandomWalk, Estimator::Begrc, rng)
        }
        ProposalMode::PaperFaithfulTn => {
            let kernel = GibbsKernel::new(proposal.precision.clone(), res.clone())?;
            run_chain(data, prior, cfg, proposal, start, Step::Gibbs(&kernel), Estimator::Begrc, rng)
        }
    }
}

/// Unrestricted random-walk sampler started at `start` (callers pass β̂_MLE).
pub fn run_beugrc(
    data: &Dataset,
    prior: &PriorSpec,
    cfg: &McmcConfig,
    proposal: &Proposal,
    start: &[f64],
    rng: &mut RngStream,
) -> Result<Chain> {
    if prior.restrictions.is_some() {
        return Err(Error::Contract("BEUGRC takes an unrestricted prior".into()));
    }
    run_chain(data, prior, cfg, proposal, start.to_vec(), Step::RandomWalk, Estimator::Beugrc, rng)
}

/// Coordinatewise mean and standard deviation (divisor `N − 1`) after burn-in.
pub fn summarize(chain: &Chain) -> Result<PosteriorSummary> {
    let n_iter = chain.draws.rows();
    if n_iter < chain.burn_in + 100 {
        return Err(Error::Contract(format!(
            "need at least 100 post-burn-in draws, have {}",
            n_iter.saturating_sub(chain.burn_in)
        )));
    }
    let p = chain.draws.cols();
    let kept = (n_iter - chain.burn_in) as f64;
    let mut mean = vec![0.0; p];
    for i in chain.burn_in..n_iter {
        for (m, v) in mean.iter_mut().zip(chain.draws.row(i)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= kept);
    let mut ss = vec![0.0; p];
    for i in chain.burn_in..n_iter {
        for ((s, v), m) in ss.iter_mut().zip(chain.draws.row(i)).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let sd = ss.iter().map(|s| (s / (kept - 1.0)).sqrt()).collect();
    Ok(PosteriorSummary {
        posterior_mean: mean,
        posterior_sd: sd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::log_likelihood;

    fn toy() -> Dataset {
        let x = Matrix::from_rows(&[[1.0, 0.3], [0.2, 1.0], [0.7, -0.4], [1.2, 0.5], [-0.3, 0.8]]).unwrap();
        Dataset::new(x, vec![1.4, 2.2, 0.9, 3.1, 1.5], 0.5).unwrap()
    }

    #[test]
    fn orthonormal_design_gives_identity_prior() {
        let x = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]).unwrap();
        let (m, s) = default_hyperparameters(&x).unwrap();
        assert_eq!(m, vec![0.0, 0.0]);
        assert!(s.add(&Matrix::identity(2).scale(-1.0)).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn proposal_cov_scaling() {
        let x = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]).unwrap();
        let d = Dataset::new(x, vec![1.0; 3], 1.0).unwrap();
        let c = default_proposal_cov(&d, &[1.0; 3]).unwrap();
        assert!(c.add(&Matrix::identity(2).scale(-1.0)).unwrap().max_abs() < 1e-15);
        let half = default_proposal_cov(&d.with_zeta(0.5).unwrap(), &[1.0; 3]).unwrap();
        assert!(half.add(&c.scale(-2.0)).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn kernel_is_minus_infinity_outside_restrictions() {
        let d = toy();
        let prior = PriorSpec::default_for(d.x(), Some(LinearRestrictions::lower_bounds(2, 0.0).unwrap())).unwrap();
        assert_eq!(log_posterior_kernel(&d, &[-0.1, 0.5], &prior).unwrap(), f64::NEG_INFINITY);
        assert!(log_posterior_kernel(&d, &[0.1, 0.5], &prior).unwrap().is_finite());
    }

    #[test]
    fn kernel_matches_scalar_formula() {
        let d = toy();
        let prior = PriorSpec::default_for(d.x(), None).unwrap();
        let beta = [0.3, 0.6];
        let mut ll = 0.0;
        for i in 0..d.n() {
            let eta = d.x()[(i, 0)] * beta[0] + d.x()[(i, 1)] * beta[1];
            ll -= (d.y()[i] * (-eta).exp() + eta) / d.zeta();
        }
        let g = d.x().gram();
        let q = g[(0, 0)] * beta[0] * beta[0] + 2.0 * g[(0, 1)] * beta[0] * beta[1] + g[(1, 1)] * beta[1] * beta[1];
        let want = ll - 0.5 * q;
        assert!((log_posterior_kernel(&d, &beta, &prior).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn kernel_differences_match_likelihood_differences() {
        let d = toy();
        let prior = PriorSpec::default_for(d.x(), None).unwrap();
        let prior_kernel = |b: &[f64]| -0.5 * dot(b, &d.x().gram().matvec(b).unwrap());
        let pairs = [([0.1, 0.2], [0.5, -0.3]), ([1.0, 0.9], [-0.4, 0.1]), ([0.0, 0.0], [0.3, 0.3])];
        for (a, b) in pairs {
            let lhs = log_posterior_kernel(&d, &a, &prior).unwrap() - log_posterior_kernel(&d, &b, &prior).unwrap();
            let rhs = log_likelihood(&d, &a).unwrap() - log_likelihood(&d, &b).unwrap() + prior_kernel(&a)
                - prior_kernel(&b);
            assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn constant_chain_summary() {
        let chain = Chain {
            draws: Matrix::from_row_major(300, 2, [1.5, -2.0].repeat(300)).unwrap(),
            acceptance_rate: 0.0,
            burn_in: 100,
            estimator: Estimator::Beugrc,
        };
        let s = summarize(&chain).unwrap();
        assert_eq!(s.posterior_mean, vec![1.5, -2.0]);
        assert_eq!(s.posterior_sd, vec![0.0, 0.0]);
        let short = Chain { burn_in: 250, ..chain };
        assert!(summarize(&short).is_err());
    }

    #[test]
    fn config_validation() {
        let bad = McmcConfig {
            n_iter: 100,
            burn_in: 100,
            ..McmcConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(McmcConfig::default().validate().is_ok());
    }

    #[test]
    fn chains_are_reproducible() {
        let d = toy();
        let prior = PriorSpec::default_for(d.x(), Some(LinearRestrictions::lower_bounds(2, 0.0).unwrap())).unwrap();
        let prop = Proposal::from_fit(&d, &[1.0; 5], 1.0).unwrap();
        let cfg = McmcConfig {
            n_iter: 500,
            burn_in: 100,
            ..McmcConfig::default()
        };
        let a = run_begrc(&d, &prior, &cfg, &prop, &[0.5, 0.5], &mut RngStream::new(4, 1)).unwrap();
        let b = run_begrc(&d, &prior, &cfg, &prop, &[0.5, 0.5], &mut RngStream::new(4, 1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exact_mode_without_restrictions_matches_unrestricted_sampler() {
        let d = toy();
        let prior = PriorSpec::default_for(d.x(), None).unwrap();
        let vacuous = PriorSpec::default_for(d.x(), Some(LinearRestrictions::unrestricted(2))).unwrap();
        let prop = Proposal::from_fit(&d, &[1.0; 5], 1.0).unwrap();
        let cfg = McmcConfig {
            n_iter: 400,
            burn_in: 100,
            proposal_mode: ProposalMode::ExactIndicatorRw,
            proposal_scale: 1.0,
        };
        let start = [0.2, 0.4];
        let a = run_begrc(&d, &vacuous, &cfg, &prop, &start, &mut RngStream::new(8, 2)).unwrap();
        let b = run_beugrc(&d, &prior, &cfg, &prop, &start, &mut RngStream::new(8, 2)).unwrap();
        assert_eq!(a.draws, b.draws);
        assert_eq!(a.acceptance_rate, b.acceptance_rate);
    }
}
