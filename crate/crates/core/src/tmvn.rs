//! Truncated normal sampling: univariate rejection samplers and the Gibbs
//! driver for the multivariate normal restricted to `{Rβ ≤ r}`.

use crate::error::{Error, Result};
use crate::numerics::special::{ln_norm_pdf, ln_norm_sf};
use crate::numerics::{Cholesky, Matrix, RngStream};
use crate::restrictions::{LinearRestrictions, DEFAULT_MAX_PASSES};

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;
const LN_MIN_MASS: f64 = -690.775_527_898_213_7; // ln 1e-300

/// Draw from `N(mu, sigma²)` conditioned on `[lo, hi]` (either end may be infinite).
pub fn sample_tn_univariate(rng: &mut RngStream, mu: f64, sigma: f64, lo: f64, hi: f64) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() || !mu.is_finite() {
        return Err(Error::Contract(format!("need finite mu and sigma > 0, got ({mu}, {sigma})")));
    }
    if !(lo < hi) {
        return Err(Error::Contract(format!("need lo < hi, got [{lo}, {hi}]")));
    }
    let mut a = (lo - mu) / sigma;
    let mut b = (hi - mu) / sigma;
    let flip = b <= 0.0;
    if flip {
        (a, b) = (-b, -a);
    }
    let z = standard_tn(rng, a, b).map_err(|_| Error::DegenerateTruncation { lo, hi })?;
    let x = if flip { mu - sigma * z } else { mu + sigma * z };
    Ok(x.clamp(lo, hi))
}

/// Standard normal truncated to `[a, b]` with `b > 0`.
fn standard_tn(rng: &mut RngStream, a: f64, b: f64) -> std::result::Result<f64, ()> {
    if a < 0.0 {
        // Interval straddles the mode.
        if (b - a) * (1.0 / SQRT_2PI) < 1e-300 {
            return Err(());
        }
        return Ok(if b - a >= SQRT_2PI {
            normal_rejection(rng, a, b)
        } else {
            uniform_rejection(rng, a, b, 0.0)
        });
    }
    check_tail_mass(a, b)?;

    let lambda = 0.5 * (a + (a * a + 4.0).sqrt());
    let (normal_score, unif_score, exp_score) = proposal_scores(a, b, lambda);
    Ok(if unif_score >= exp_score && unif_score >= normal_score {
        uniform_rejection(rng, a, b, a)
    } else if exp_score >= normal_score {
        exponential_rejection(rng, a, b, lambda)
    } else {
        normal_rejection(rng, a, b)
    })
}

/// Rejects only when the normal mass of `[a, b]`, `0 ≤ a < b`, is below 1e-300.
fn check_tail_mass(a: f64, b: f64) -> std::result::Result<(), ()> {
    // Cheap upper bound first: Mills ratio and width times peak density.
    let ln_phi_a = ln_norm_pdf(a);
    let mut ln_bound = ((b - a).ln() + ln_phi_a).min(if a > 0.0 { ln_phi_a - a.ln() } else { 0.0 });
    if ln_bound < LN_MIN_MASS + 20.0 {
        let sa = ln_norm_sf(a);
        let sb = ln_norm_sf(b);
        ln_bound = sa + (-(sb - sa).exp()).ln_1p();
    }
    if ln_bound < LN_MIN_MASS || ln_bound.is_nan() {
        Err(())
    } else {
        Ok(())
    }
}

/// Acceptance rates of the normal, uniform and exponential proposals on
/// `[a, b]`, `a ≥ 0`, each divided by the common truncated mass.
fn proposal_scores(a: f64, b: f64, lambda: f64) -> (f64, f64, f64) {
    let exp_score = lambda * SQRT_2PI * (lambda * a - 0.5 * lambda * lambda).exp();
    let unif_score = if b.is_finite() {
        SQRT_2PI * (0.5 * a * a).exp() / (b - a)
    } else {
        0.0
    };
    (1.0, unif_score, exp_score)
}

fn normal_rejection(rng: &mut RngStream, a: f64, b: f64) -> f64 {
    loop {
        let z = rng.standard_normal();
        if z >= a && z <= b {
            return z;
        }
    }
}

/// Uniform proposal on `[a, b]`; `peak` is where the density is largest.
fn uniform_rejection(rng: &mut RngStream, a: f64, b: f64, peak: f64) -> f64 {
    loop {
        let z = a + (b - a) * rng.uniform();
        if rng.uniform().ln() <= 0.5 * (peak * peak - z * z) {
            return z;
        }
    }
}

fn exponential_rejection(rng: &mut RngStream, a: f64, b: f64, lambda: f64) -> f64 {
    loop {
        let z = a + rng.exponential() / lambda;
        if z > b {
            continue;
        }
        let d = z - lambda;
        if rng.uniform().ln() <= -0.5 * d * d {
            return z;
        }
    }
}

/// Truncated normal CDF, used by tests and the browser demo.
pub fn tn_cdf(x: f64, mu: f64, sigma: f64, lo: f64, hi: f64) -> f64 {
    use crate::numerics::special::norm_cdf;
    if x <= lo {
        return 0.0;
    }
    if x >= hi {
        return 1.0;
    }
    let (a, b, z) = ((lo - mu) / sigma, (hi - mu) / sigma, (x - mu) / sigma);
    if a > 0.0 {
        // Upper tail: work with survival functions to avoid cancellation.
        let sa = ln_norm_sf(a);
        let sb = ln_norm_sf(b);
        let sz = ln_norm_sf(z);
        let num = 1.0 - (sz - sa).exp();
        let den = 1.0 - (sb - sa).exp();
        return num / den;
    }
    if b < 0.0 {
        return 1.0 - tn_cdf(-x, -mu, sigma, -hi, -lo);
    }
    (norm_cdf(z) - norm_cdf(a)) / (norm_cdf(b) - norm_cdf(a))
}

/// Precision-based Gibbs kernel for `N(mean, Ω⁻¹)` restricted to a polytope.
/// The mean is supplied per sweep so the same kernel can serve as a random-walk proposal.
#[derive(Debug, Clone)]
pub struct GibbsKernel {
    precision: Matrix,
    cond_sd: Vec<f64>,
    restrictions: LinearRestrictions,
}

impl GibbsKernel {
    pub fn new(precision: Matrix, restrictions: LinearRestrictions) -> Result<Self> {
        if !precision.is_square() || precision.rows() != restrictions.p() {
            return Err(Error::Contract("precision and restrictions disagree on p".into()));
        }
        let cond_sd = precision
            .diag()
            .iter()
            .map(|d| {
                if *d > 0.0 && d.is_finite() {
                    Ok(1.0 / d.sqrt())
                } else {
                    Err(Error::Contract(format!("precision diagonal entry {d} is not positive")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            precision,
            cond_sd,
            restrictions,
        })
    }

    pub fn restrictions(&self) -> &LinearRestrictions {
        &self.restrictions
    }

    pub fn precision(&self) -> &Matrix {
        &self.precision
    }

    /// One systematic-scan sweep over `j = 0..p` updating `state` in place.
    pub fn sweep(&self, rng: &mut RngStream, mean: &[f64], state: &mut [f64]) -> Result<()> {
        let p = self.cond_sd.len();
        if mean.len() != p || state.len() != p {
            return Err(Error::Contract(format!("expected vectors of length {p}")));
        }
        if !self.restrictions.satisfied_unchecked(state) {
            return Err(Error::Contract("Gibbs sweep started from an infeasible state".into()));
        }
        for j in 0..p {
            let row = self.precision.row(j);
            let mut acc = 0.0;
            for k in 0..p {
                if k != j {
                    acc += row[k] * (state[k] - mean[k]);
                }
            }
            let m = mean[j] - acc / row[j];
            let (lo, hi) = self.restrictions.coordinate_interval(j, state)?;
            if lo < hi {
                state[j] = sample_tn_univariate(rng, m, self.cond_sd[j], lo, hi)?;
            }
            // A zero-width interval pins the coordinate where it is.
        }
        Ok(())
    }
}

/// `N(mean, covariance)` restricted to `{Rβ ≤ r}`.
#[derive(Debug, Clone)]
pub struct TmvnSpec {
    mean: Vec<f64>,
    covariance: Matrix,
    kernel: GibbsKernel,
}

impl TmvnSpec {
    pub fn new(mean: Vec<f64>, covariance: Matrix, restrictions: LinearRestrictions) -> Result<Self> {
        let p = mean.len();
        if covariance.rows() != p || covariance.cols() != p || restrictions.p() != p {
            return Err(Error::Contract("mean, covariance and restrictions disagree on p".into()));
        }
        if !covariance.is_symmetric(1e-12 * (1.0 + covariance.max_abs())) {
            return Err(Error::Contract("covariance is not symmetric".into()));
        }
        let precision = Cholesky::new(&covariance)?.inverse();
        let resid = precision.matmul(&covariance)?.add(&Matrix::identity(p).scale(-1.0))?;
        if resid.max_abs() > 1e-8 {
            return Err(Error::Contract(format!(
                "covariance too ill-conditioned: |precision * covariance - I| = {:e}",
                resid.max_abs()
            )));
        }
        Ok(Self {
            mean,
            covariance,
            kernel: GibbsKernel::new(precision, restrictions)?,
        })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &Matrix {
        &self.covariance
    }

    pub fn precision(&self) -> &Matrix {
        self.kernel.precision()
    }

    pub fn restrictions(&self) -> &LinearRestrictions {
        self.kernel.restrictions()
    }

    pub fn kernel(&self) -> &GibbsKernel {
        &self.kernel
    }
}

/// One Gibbs cycle from a feasible `state`.
pub fn gibbs_sweep(rng: &mut RngStream, spec: &TmvnSpec, state: &[f64]) -> Result<Vec<f64>> {
    let mut next = state.to_vec();
    spec.kernel.sweep(rng, &spec.mean, &mut next)?;
    Ok(next)
}

pub const DEFAULT_BURN: usize = 100;
pub const DEFAULT_THIN: usize = 1;

/// `n_draws` successive post-burn-in, thinned Gibbs states as rows of a matrix.
pub fn sample_tmvn(
    rng: &mut RngStream,
    spec: &TmvnSpec,
    n_draws: usize,
    burn: usize,
    thin: usize,
    init: Option<&[f64]>,
) -> Result<Matrix> {
    if n_draws == 0 || thin == 0 {
        return Err(Error::Contract("need n_draws >= 1 and thin >= 1".into()));
    }
    let res = spec.restrictions();
    let mut state = match init {
        Some(s) => {
            if !res.satisfies(s)? {
                return Err(Error::Contract("initial state violates the restrictions".into()));
            }
            s.to_vec()
        }
        None => res.feasible_start(&spec.mean, DEFAULT_MAX_PASSES)?,
    };
    for _ in 0..burn {
        spec.kernel.sweep(rng, &spec.mean, &mut state)?;
    }
    let p = state.len();
    let mut out = Vec::with_capacity(n_draws * p);
    for _ in 0..n_draws {
        for _ in 0..thin {
            spec.kernel.sweep(rng, &spec.mean, &mut state)?;
        }
        out.extend_from_slice(&state);
    }
    Matrix::from_row_major(n_draws, p, out)
}
