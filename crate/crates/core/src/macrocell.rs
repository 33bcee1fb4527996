//! Analytical macrocell SIR distribution and round-robin subchannel
//! throughput.
//!
//! The SIR of a user at `r` is lognormal with parameters
//! `μ_C = μ_S − μ_I(r)` and `σ_C = √(σ_S² + σ_I²(r))`, where the desired
//! link is the composite lognormal-exponential gain and the interference
//! parameters come from collapsing the 18 path-loss weighted interferer
//! gains into one lognormal. The cell is replaced by the equal-area circle,
//! split into annuli with one `(μ_C, σ_C)` pair per annulus evaluated at the
//! outer edge.

use std::f64::consts::PI;

use crate::config::{LognormalParams, ModulationConfig, SystemParams};
use crate::error::{invalid, Result};
use crate::geometry::{AnnulusPartition, CellGeometry, Point};
use crate::propagation::{composite_ln_exp, lognormal_sum, q_function, scaled_q, SumMethod};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroOptions {
    /// `M`.
    pub annuli: usize,
    /// Azimuths over which the interference parameters at each radius are
    /// averaged.
    pub azimuths: usize,
    pub sum_method: SumMethod,
}

impl Default for MacroOptions {
    fn default() -> Self {
        Self {
            annuli: 50,
            azimuths: 16,
            sum_method: SumMethod::default(),
        }
    }
}

/// Cached per-annulus SIR parameters for the central cell.
#[derive(Debug, Clone)]
pub struct MacroEnv {
    pub geometry: CellGeometry,
    pub partition: AnnulusPartition,
    /// Desired-link composite gain `(μ_S, σ_S)`.
    pub signal: LognormalParams,
    /// `(μ_I, σ_I)` at each annulus outer edge.
    pub interference: Vec<LognormalParams>,
    /// `(μ_C, σ_C)` at each annulus outer edge.
    pub sir: Vec<LognormalParams>,
    pub alpha_c: f64,
    pub modulation: ModulationConfig,
}

/// `build_macro_env` with `M` annuli and default options otherwise.
pub fn build_macro_env(params: &SystemParams, annuli: usize) -> Result<MacroEnv> {
    MacroEnv::build(
        params,
        MacroOptions {
            annuli,
            ..MacroOptions::default()
        },
    )
}

/// Path-loss weights `(‖r − b_k‖/R_c)^{−α_c}` of the interferers seen at `r`.
pub fn interference_weights(geometry: &CellGeometry, alpha_c: f64, r: Point) -> Vec<f64> {
    geometry
        .interferers
        .iter()
        .map(|b| (r.distance(*b) / geometry.macro_radius).powf(-alpha_c))
        .collect()
}

/// Lognormal fit of `Ψ_I(r)` at a single position.
pub fn interference_at(
    geometry: &CellGeometry,
    alpha_c: f64,
    gain: LognormalParams,
    r: Point,
    method: SumMethod,
) -> Result<LognormalParams> {
    let terms: Vec<(f64, LognormalParams)> = interference_weights(geometry, alpha_c, r)
        .into_iter()
        .map(|w| (w, gain))
        .collect();
    lognormal_sum(&terms, method)
}

impl MacroEnv {
    pub fn build(params: &SystemParams, opts: MacroOptions) -> Result<Self> {
        params.validate()?;
        if opts.azimuths == 0 {
            return Err(invalid("azimuths", "need at least one azimuth"));
        }
        let geometry = CellGeometry::new(params.macro_radius)?;
        let partition = AnnulusPartition::for_cell(&geometry, opts.annuli)?;
        let gain = composite_ln_exp(params.mu_c_db, params.sigma_c_db)?;
        let mut interference = Vec::with_capacity(partition.count());
        for m in 0..partition.count() {
            let (_, outer) = partition.bounds(m);
            let (mut mu, mut sigma) = (0.0, 0.0);
            for j in 0..opts.azimuths {
                let phi = 2.0 * PI * j as f64 / opts.azimuths as f64;
                let p = interference_at(&geometry, params.alpha_c, gain, Point::polar(outer, phi), opts.sum_method)?;
                mu += p.mu;
                sigma += p.sigma;
            }
            let n = opts.azimuths as f64;
            interference.push(LognormalParams {
                mu: mu / n,
                sigma: sigma / n,
            });
        }
        let sir = interference
            .iter()
            .map(|i| LognormalParams {
                mu: gain.mu - i.mu,
                sigma: gain.sigma.hypot(i.sigma),
            })
            .collect();
        Ok(Self {
            geometry,
            partition,
            signal: gain,
            interference,
            sir,
            alpha_c: params.alpha_c,
            modulation: params.modulation()?,
        })
    }

    pub fn annuli(&self) -> usize {
        self.partition.count()
    }

    /// Copy with every `μ_C` shifted by `delta` (natural-log units).
    pub fn with_mu_shift(&self, delta: f64) -> Self {
        let mut out = self.clone();
        for p in &mut out.sir {
            p.mu += delta;
        }
        out
    }

    /// `(a, b)` of annulus `m` at threshold `gamma`.
    pub fn annulus_ab(&self, m: usize, gamma: f64) -> (f64, f64) {
        let p = self.sir[m];
        ((gamma.ln() - p.mu) / p.sigma, self.alpha_c / p.sigma)
    }

    /// SIR CDF averaged over annulus `m` (0-based, innermost first).
    pub fn annulus_avg_sir_cdf(&self, m: usize, gamma: f64) -> Result<f64> {
        if m >= self.annuli() {
            return Err(invalid("m", format!("annulus {m} out of range (M = {})", self.annuli())));
        }
        check_gamma(gamma)?;
        Ok(self.annulus_cdf_unchecked(m, gamma))
    }

    fn annulus_cdf_unchecked(&self, m: usize, gamma: f64) -> f64 {
        let (inner, outer) = self.partition.bounds(m);
        let (a, b) = self.annulus_ab(m, gamma);
        let rc = self.geometry.macro_radius;
        let outer_term = outer * outer * c_function_unchecked(a + b * (outer / rc).ln(), b);
        let inner_term = if inner > 0.0 {
            inner * inner * c_function_unchecked(a + b * (inner / rc).ln(), b)
        } else {
            0.0
        };
        (1.0 - (outer_term - inner_term) / (outer * outer - inner * inner)).clamp(0.0, 1.0)
    }

    /// Cell-averaged SIR CDF: annulus CDFs weighted by their area share.
    pub fn cell_avg_sir_cdf(&self, gamma: f64) -> Result<f64> {
        check_gamma(gamma)?;
        Ok(self.cell_cdf_unchecked(gamma))
    }

    fn cell_cdf_unchecked(&self, gamma: f64) -> f64 {
        let area = self.geometry.area;
        let total: f64 = (0..self.annuli())
            .map(|m| self.partition.area(m) / area * self.annulus_cdf_unchecked(m, gamma))
            .sum();
        total.clamp(0.0, 1.0)
    }

    /// Round-robin subchannel throughput `T_c` (b/s/Hz).
    pub fn throughput_rr(&self) -> f64 {
        self.modulation.throughput_from_cdf(|g| self.cell_cdf_unchecked(g))
    }
}

pub fn macro_throughput_rr(env: &MacroEnv) -> f64 {
    env.throughput_rr()
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0) {
        return Err(invalid("gamma", format!("SIR threshold must be positive, got {gamma}")));
    }
    Ok(())
}

/// `C(a, b) = Q(a) + exp((2 − 2ab)/b²)·Q((2 − ab)/b)`, equal to
/// `(2/R²)∫₀^R Q(a + b ln(r/R)) r dr`.
pub fn c_function(a: f64, b: f64) -> Result<f64> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(invalid("b", format!("must be positive, got {b}")));
    }
    Ok(c_function_unchecked(a, b))
}

fn c_function_unchecked(a: f64, b: f64) -> f64 {
    if a == f64::INFINITY {
        return 0.0;
    }
    if a == f64::NEG_INFINITY {
        return 1.0;
    }
    let z = (2.0 - a * b) / b;
    // exp((2 − 2ab)/b²) = exp(z²/2 − a²/2).
    let second = if z < 5.0 {
        ((2.0 - 2.0 * a * b) / (b * b)).exp() * q_function(z)
    } else {
        (-0.5 * a * a).exp() * scaled_q(z)
    };
    q_function(a) + second
}
