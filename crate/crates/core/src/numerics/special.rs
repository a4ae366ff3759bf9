//! Special functions: log-gamma, digamma/trigamma, regularized incomplete gamma,
//! and the standard normal distribution built on top of them.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;
const MAX_TERMS: usize = 100_000;

fn domain(op: &'static str, detail: String) -> Error {
    Error::Domain { op, detail }
}

/// `ln Γ(x)` for finite `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain("log_gamma", format!("x must be finite and positive, got {x}")));
    }
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x) = Γ(x + 1) / x keeps the Lanczos sum in its accurate range.
        return ln_gamma_unchecked(x + 1.0) - x.ln();
    }
    let z = x - 1.0;
    let mut sum = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + sum.ln()
}

/// Digamma ψ(x) for `x > 0`.
pub fn digamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    acc + x.ln() - 0.5 * inv
        - inv2
            * (1.0 / 12.0
                - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))))
}

/// Trigamma ψ₁(x) for `x > 0`.
pub fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    acc + inv
        + 0.5 * inv2
        + inv * inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 / 30.0)))
}

fn check_inc_gamma(op: &'static str, a: f64, x: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain(op, format!("shape must be finite and positive, got {a}")));
    }
    if !(x >= 0.0) {
        return Err(domain(op, format!("x must be non-negative, got {x}")));
    }
    Ok(())
}

/// `ln(x^a e^{-x} / Γ(a))`, the common prefactor of both incomplete-gamma expansions.
fn ln_prefactor(a: f64, x: f64) -> f64 {
    -x + a * x.ln() - ln_gamma_unchecked(a)
}

/// Series for P(a, x), valid (and fast) for x < a + 1.
fn lower_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..MAX_TERMS {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    (ln_prefactor(a, x) + sum.ln()).exp()
}

/// Modified Lentz continued fraction; returns `ln Q(a, x)`, for x ≥ a + 1.
fn ln_upper_cf(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_TERMS {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    ln_prefactor(a, x) + h.ln()
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn reg_lower_inc_gamma(a: f64, x: f64) -> Result<f64> {
    check_inc_gamma("reg_lower_inc_gamma", a, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    Ok(if x < a + 1.0 {
        lower_series(a, x)
    } else {
        1.0 - ln_upper_cf(a, x).exp()
    })
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub fn reg_upper_inc_gamma(a: f64, x: f64) -> Result<f64> {
    Ok(ln_reg_upper_inc_gamma(a, x)?.exp())
}

/// `ln Q(a, x)`, accurate deep in the upper tail where `Q` underflows.
pub fn ln_reg_upper_inc_gamma(a: f64, x: f64) -> Result<f64> {
    check_inc_gamma("reg_upper_inc_gamma", a, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(if x < a + 1.0 {
        (-lower_series(a, x)).ln_1p()
    } else {
        ln_upper_cf(a, x)
    })
}

/// Standard normal CDF Φ(z).
pub fn norm_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z < 0.0 {
        norm_sf(-z)
    } else {
        1.0 - norm_sf(z)
    }
}

/// Standard normal survival function 1 − Φ(z).
pub fn norm_sf(z: f64) -> f64 {
    ln_norm_sf(z).exp()
}

/// `ln(1 − Φ(z))`, finite far into the upper tail.
pub fn ln_norm_sf(z: f64) -> f64 {
    if z == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    if z == f64::NEG_INFINITY {
        return 0.0;
    }
    let half_q = 0.5_f64.ln()
        + ln_reg_upper_inc_gamma(0.5, 0.5 * z * z).expect("valid incomplete gamma arguments");
    if z >= 0.0 {
        half_q
    } else {
        (-half_q.exp()).ln_1p()
    }
}

/// Log density of the standard normal.
#[inline]
pub fn ln_norm_pdf(z: f64) -> f64 {
    -0.5 * z * z - 0.5 * (2.0 * PI).ln()
}
