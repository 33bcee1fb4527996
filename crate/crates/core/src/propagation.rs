//! Lognormal algebra: the Gaussian tail function, the composite
//! lognormal-exponential approximation, lognormal-sum approximations and
//! fractional moments.

use std::f64::consts::{PI, SQRT_2};

use crate::config::{LognormalParams, ZETA};
use crate::error::{invalid, Error, Result};
use crate::numerics::{brent_root, GaussHermite};

/// Standard normal CCDF, `Q(x) = ½ erfc(x/√2)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// `e^{z²/2}·Q(z)`, finite for all `z`. Above `z = 5` the Mills-ratio
/// continued fraction `1/(z + 1/(z + 2/(z + 3/(z + …))))` is used since
/// both factors of the direct product leave the floating-point range.
pub fn scaled_q(z: f64) -> f64 {
    if z < 5.0 {
        return (0.5 * z * z).exp() * q_function(z);
    }
    let mut tail = z;
    for k in (1..=120).rev() {
        tail = z + k as f64 / tail;
    }
    1.0 / (tail * (2.0 * PI).sqrt())
}

/// Turkmani's lognormal fit to `Θ·|h|²` with `Θ ~ LN(ζμ_dB, ζ²σ_dB²)` and
/// `|h|² ~ Exp(1)`: `μ = ζ(μ_dB − 2.5)`, `σ = ζ√(σ_dB² + 5.57²)`.
pub fn composite_ln_exp(mu_db: f64, sigma_db: f64) -> Result<LognormalParams> {
    if !(sigma_db >= 0.0) {
        return Err(invalid("sigma_dB", format!("must be >= 0, got {sigma_db}")));
    }
    LognormalParams::new(
        ZETA * (mu_db - 2.5),
        ZETA * (sigma_db * sigma_db + 5.57 * 5.57).sqrt(),
    )
}

/// `E[X^δ] = exp(δμ + δ²σ²/2)`.
pub fn lognormal_fractional_moment(params: LognormalParams, delta: f64) -> f64 {
    (delta * params.mu + 0.5 * delta * delta * params.sigma * params.sigma).exp()
}

/// `E[e^{−sX}]` by Gauss-Hermite quadrature.
pub fn lognormal_mgf(params: LognormalParams, s: f64, rule: &GaussHermite) -> f64 {
    rule.normal_expectation(params.mu, params.sigma, |z| (-s * z.exp()).exp())
}

/// How a weighted sum of independent lognormals is collapsed to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SumMethod {
    /// Match the exact linear-domain mean and variance.
    FentonWilkinson,
    /// Match the moment generating function at two points. The sum is first
    /// normalized by `Σ w_k e^{μ_k}` so the points act on an O(1) variable.
    Mgf { s1: f64, s2: f64, order: usize },
}

impl SumMethod {
    pub const MGF_DEFAULT: SumMethod = SumMethod::Mgf {
        s1: 0.2,
        s2: 1.0,
        order: 32,
    };
}

impl Default for SumMethod {
    fn default() -> Self {
        SumMethod::MGF_DEFAULT
    }
}

/// Approximates `Σ w_k·X_k` (independent `X_k ~ LN(μ_k, σ_k²)`) by a single
/// lognormal.
pub fn lognormal_sum(terms: &[(f64, LognormalParams)], method: SumMethod) -> Result<LognormalParams> {
    if terms.is_empty() {
        return Err(Error::EmptySum);
    }
    if let Some((w, _)) = terms.iter().find(|(w, _)| !(*w > 0.0) || !w.is_finite()) {
        return Err(invalid("weight", format!("must be positive and finite, got {w}")));
    }
    if terms.len() == 1 {
        let (w, p) = terms[0];
        return Ok(p.scaled(w));
    }
    if terms.iter().all(|(_, p)| p.sigma == 0.0) {
        let total: f64 = terms.iter().map(|(w, p)| w * p.mu.exp()).sum();
        return LognormalParams::new(total.ln(), 0.0);
    }
    match method {
        SumMethod::FentonWilkinson => Ok(fenton_wilkinson(terms)),
        SumMethod::Mgf { s1, s2, order } => mgf_match(terms, s1, s2, order),
    }
}

fn fenton_wilkinson(terms: &[(f64, LognormalParams)]) -> LognormalParams {
    let mean: f64 = terms.iter().map(|(w, p)| w * p.mean()).sum();
    let var: f64 = terms.iter().map(|(w, p)| w * w * p.variance()).sum();
    let s2 = (var / (mean * mean)).ln_1p();
    LognormalParams {
        mu: mean.ln() - 0.5 * s2,
        sigma: s2.sqrt(),
    }
}

fn mgf_match(terms: &[(f64, LognormalParams)], s1: f64, s2: f64, order: usize) -> Result<LognormalParams> {
    if !(s1 > 0.0 && s2 > 0.0 && s1 != s2) {
        return Err(invalid("s", "MGF matching points must be distinct and positive"));
    }
    let rule = GaussHermite::new(order)?;
    let scale: f64 = terms.iter().map(|(w, p)| w * p.mu.exp()).sum();
    let normalized: Vec<LognormalParams> = terms.iter().map(|(w, p)| p.scaled(w / scale)).collect();
    let target = |s: f64| -> f64 {
        normalized.iter().map(|p| lognormal_mgf(*p, s, &rule)).product()
    };
    let (t1, t2) = (target(s1), target(s2));

    // For fixed σ the MGF is strictly decreasing in μ.
    let mu_for = |sigma: f64, s: f64, t: f64| -> Result<f64> {
        brent_root(
            |mu| lognormal_mgf(LognormalParams { mu, sigma }, s, &rule) - t,
            -60.0,
            60.0,
            1e-13,
        )
    };
    let gap = |sigma: f64| -> f64 {
        match (mu_for(sigma, s1, t1), mu_for(sigma, s2, t2)) {
            (Ok(a), Ok(b)) => a - b,
            _ => f64::NAN,
        }
    };
    let sigma = brent_root(gap, 1e-4, 8.0, 1e-12)?;
    let mu = mu_for(sigma, s1, t1)?;
    Ok(LognormalParams {
        mu: mu + scale.ln(),
        sigma,
    })
}
