//! wasm-bindgen exports behind `www/index.html`.
//!
//! Each export returns a flat `Float64Array`; the page reshapes it. The plain
//! `*_values` functions carry the logic so they can be tested natively.

use gammareg::estimators::{fit_gre, fit_mle, fit_ridge, AlphaConvention, PenaltyRule, RidgePenalty};
use gammareg::model::gamma_log_density;
use gammareg::restrictions::Sense;
use gammareg::simulation::{gen_design, gen_response};
use gammareg::tmvn::{sample_tmvn, TmvnSpec};
use gammareg::{Dataset, LinearRestrictions, Matrix, MleOptions, RngStream};
use wasm_bindgen::prelude::*;

/// Coefficients used to simulate the ridge-trace data.
pub const TRACE_BETA: [f64; 4] = [0.5, 0.3, -0.2, 0.4];
const TRACE_ZETA: f64 = 0.25;

/// Draws from a bivariate normal restricted to `a1·x + a2·y <= b`.
///
/// Returns `[x0, y0, x1, y1, ...]`.
pub fn tmvn_scatter_values(
    mean: [f64; 2],
    sd: [f64; 2],
    rho: f64,
    half_plane: [f64; 3],
    n: usize,
    seed: u64,
) -> Result<Vec<f64>, String> {
    let cov = Matrix::from_rows(&[
        [sd[0] * sd[0], rho * sd[0] * sd[1]],
        [rho * sd[0] * sd[1], sd[1] * sd[1]],
    ])
    .map_err(|e| e.to_string())?;
    let [a1, a2, b] = half_plane;
    let res = if a1 == 0.0 && a2 == 0.0 {
        LinearRestrictions::unrestricted(2)
    } else {
        LinearRestrictions::from_rows(2, &[(vec![a1, a2], b, Sense::Le)]).map_err(|e| e.to_string())?
    };
    let spec = TmvnSpec::new(mean.to_vec(), cov, res).map_err(|e| e.to_string())?;
    let mut rng = RngStream::new(seed, 0);
    let draws = sample_tmvn(&mut rng, &spec, n.max(1), 200, 1, None).map_err(|e| e.to_string())?;
    Ok(draws.as_slice().to_vec())
}

/// Ridge coefficient paths on simulated collinear data.
///
/// Rows are `[k, β0, β1, β2, β3]` for `n_k` log-spaced penalties in
/// `[10^log_k_min, 10^log_k_max]`, preceded by two marker rows holding the
/// data-driven `k₁` and `k₂` fits (NaN if the rule failed).
pub fn ridge_trace_values(
    n: usize,
    rho: f64,
    seed: u64,
    log_k_min: f64,
    log_k_max: f64,
    n_k: usize,
) -> Result<Vec<f64>, String> {
    let p = TRACE_BETA.len();
    let mut rng = RngStream::new(seed, 0);
    let x = gen_design(&mut rng, n, p, rho).map_err(|e| e.to_string())?;
    let y = gen_response(&mut rng, &x, &TRACE_BETA, TRACE_ZETA).map_err(|e| e.to_string())?;
    let data = Dataset::new(x, y, TRACE_ZETA).map_err(|e| e.to_string())?;
    let mle = fit_mle(&data, &MleOptions::default()).map_err(|e| e.to_string())?;
    if !mle.converged {
        return Err("MLE did not converge".into());
    }
    let mut out = Vec::with_capacity((n_k + 2) * (p + 1));
    for rule in [PenaltyRule::K1, PenaltyRule::K2] {
        match fit_gre(&data, &mle, rule, AlphaConvention::Transpose) {
            Ok(fit) => {
                out.push(fit.penalty.as_ref().map_or(f64::NAN, |k| k[0]));
                out.extend(&fit.beta_hat);
            }
            Err(_) => out.extend(std::iter::repeat(f64::NAN).take(p + 1)),
        }
    }
    let steps = n_k.max(2);
    for i in 0..steps {
        let t = log_k_min + (log_k_max - log_k_min) * i as f64 / (steps - 1) as f64;
        let k = 10f64.powf(t);
        let fit = fit_ridge(&data, &mle, &RidgePenalty::Scalar(k)).map_err(|e| e.to_string())?;
        out.push(k);
        out.extend(&fit.beta_hat);
    }
    Ok(out)
}

/// Gamma(shape 1/ζ, scale μζ) density on `n_points` points of `(0, y_max]`.
///
/// Returns `[y0, f0, y1, f1, ...]`.
pub fn gamma_density_values(zeta: f64, mu: f64, y_max: f64, n_points: usize) -> Result<Vec<f64>, String> {
    if !(y_max > 0.0) || n_points == 0 {
        return Err("need y_max > 0 and at least one point".into());
    }
    let mut out = Vec::with_capacity(2 * n_points);
    for i in 1..=n_points {
        let y = y_max * i as f64 / n_points as f64;
        let f = gamma_log_density(y, zeta, mu).map_err(|e| e.to_string())?.exp();
        out.push(y);
        out.push(f);
    }
    Ok(out)
}

fn js(r: Result<Vec<f64>, String>) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn tmvn_scatter(
    mean_x: f64,
    mean_y: f64,
    sd_x: f64,
    sd_y: f64,
    rho: f64,
    a1: f64,
    a2: f64,
    b: f64,
    n: usize,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    js(tmvn_scatter_values([mean_x, mean_y], [sd_x, sd_y], rho, [a1, a2, b], n, seed as u64))
}

#[wasm_bindgen]
pub fn ridge_trace(n: usize, rho: f64, seed: u32, log_k_min: f64, log_k_max: f64, n_k: usize) -> Result<Vec<f64>, JsError> {
    js(ridge_trace_values(n, rho, seed as u64, log_k_min, log_k_max, n_k))
}

#[wasm_bindgen]
pub fn gamma_density_curve(zeta: f64, mu: f64, y_max: f64, n_points: usize) -> Result<Vec<f64>, JsError> {
    js(gamma_density_values(zeta, mu, y_max, n_points))
}
