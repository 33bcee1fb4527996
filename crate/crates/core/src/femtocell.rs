//! Femtocell tier: shot-noise interference bounds, the SIR CDF bound and
//! subchannel throughput `T_f`, Monte Carlo validation, the F-ALOHA access
//! optimizer and the utilization test.
//!
//! The in-home gain is normalized to one, so the only cross-wall factor is
//! the two-wall attenuation `P_f²`. The probe user sits on the edge of its
//! home femtocell at distance `R_f`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;

use crate::config::{db_to_linear, disc_area, LognormalParams, ModulationConfig, SystemParams};
use crate::error::{invalid, Error, Result};
use crate::numerics::{golden_section_max, mean_and_stderr, stream_rng, GaussHermite};
use crate::propagation::{composite_ln_exp, lognormal_fractional_moment};

const SIR_DOMAIN: u32 = 3;
const SHOT_DOMAIN: u32 = 4;
const MC_CHUNK: usize = 256;
/// Share of the mean interference allowed outside the simulation disc.
pub const TRUNCATION_SHARE: f64 = 1e-3;
pub const DEFAULT_QUADRATURE: usize = 64;
const ACCESS_GRID: usize = 64;

#[derive(Debug, Clone)]
pub struct FemtoEnv {
    /// `λ_f`, femtocells per m².
    pub lambda_f: f64,
    /// F-ALOHA access fraction `ρ_f`.
    pub rho_f: f64,
    pub alpha_f: f64,
    pub beta_f: f64,
    /// Per-wall penetration attenuation (linear, `< 1` for a loss).
    pub penetration: f64,
    pub femto_radius: f64,
    pub macro_radius: f64,
    /// Desired in-home composite gain.
    pub psi_0: LognormalParams,
    /// Interferer composite gain.
    pub psi_i: LognormalParams,
    /// Shadowing of the desired link before fading.
    pub shadow_in: LognormalParams,
    /// Shadowing of interferer links before fading.
    pub shadow_out: LognormalParams,
    /// `δ_f = 2/α_f`.
    pub delta: f64,
    /// `κ_f = π λ_f E[Ψ_I^δ] (P_f² R_f^β)^δ`.
    pub kappa: f64,
    pub modulation: ModulationConfig,
    rule: GaussHermite,
}

impl FemtoEnv {
    pub fn new(params: &SystemParams, rho_f: f64) -> Result<Self> {
        Self::with_quadrature(params, rho_f, DEFAULT_QUADRATURE)
    }

    pub fn with_quadrature(params: &SystemParams, rho_f: f64, order: usize) -> Result<Self> {
        params.validate()?;
        if !(params.alpha_f > 2.0) {
            return Err(invalid("alpha_f", format!("shot noise diverges unless alpha_f > 2, got {}", params.alpha_f)));
        }
        check_rho(rho_f)?;
        let psi_0 = composite_ln_exp(params.mu_fi_db, params.sigma_fi_db)?;
        let psi_i = composite_ln_exp(params.mu_fo_db, params.sigma_fo_db)?;
        let mut env = Self {
            lambda_f: params.femto_intensity(),
            rho_f,
            alpha_f: params.alpha_f,
            beta_f: params.beta_f,
            penetration: db_to_linear(-params.penetration_loss_db),
            femto_radius: params.femto_radius,
            macro_radius: params.macro_radius,
            psi_0,
            psi_i,
            shadow_in: LognormalParams::from_db(params.mu_fi_db, params.sigma_fi_db)?,
            shadow_out: LognormalParams::from_db(params.mu_fo_db, params.sigma_fo_db)?,
            delta: 2.0 / params.alpha_f,
            kappa: 0.0,
            modulation: params.modulation()?,
            rule: GaussHermite::new(order)?,
        };
        env.kappa = env.kappa_for(env.lambda_f);
        Ok(env)
    }

    fn kappa_for(&self, lambda: f64) -> f64 {
        let a_f = self.penetration * self.penetration;
        PI * lambda
            * lognormal_fractional_moment(self.psi_i, self.delta)
            * (a_f * self.femto_radius.powf(self.beta_f)).powf(self.delta)
    }

    pub fn with_rho_f(&self, rho_f: f64) -> Result<Self> {
        check_rho(rho_f)?;
        let mut out = self.clone();
        out.rho_f = rho_f;
        Ok(out)
    }

    pub fn with_intensity(&self, lambda_f: f64) -> Result<Self> {
        if !(lambda_f >= 0.0) || !lambda_f.is_finite() {
            return Err(invalid("lambda_f", format!("must be finite and >= 0, got {lambda_f}")));
        }
        let mut out = self.clone();
        out.lambda_f = lambda_f;
        out.kappa = out.kappa_for(lambda_f);
        Ok(out)
    }

    /// `P_f²`, the two-wall attenuation between a neighbour and the probe.
    pub fn wall_gain(&self) -> f64 {
        self.penetration * self.penetration
    }

    /// Lower bound on `Pr(I_{f,f} > y)` from the nearest-interferer event.
    pub fn interference_tail_lb(&self, y: f64) -> Result<f64> {
        check_positive("y", y)?;
        let e = lognormal_fractional_moment(self.psi_i, self.delta);
        let rate = PI * self.lambda_f * self.rho_f * e * self.wall_gain().powf(self.delta) * y.powf(-self.delta);
        Ok(-(-rate).exp_m1())
    }

    /// Exact `Pr(I_{f,f} > y)` for `α_f = 4`, where the shot noise is a Lévy
    /// variable.
    pub fn interference_tail_exact4(&self, y: f64) -> Result<f64> {
        if self.alpha_f != 4.0 {
            return Err(Error::RequiresAlphaFour("interference_tail_exact4", self.alpha_f));
        }
        check_positive("y", y)?;
        let e = lognormal_fractional_moment(self.psi_i, 0.5);
        let arg = PI.powf(1.5) * self.lambda_f * self.rho_f * self.penetration * e / (2.0 * y.sqrt());
        Ok(libm::erf(arg))
    }

    /// `1 − E_Ψ0[exp(−ρ_f κ_f γ^δ Ψ0^{−δ})]`, an upper bound on the SIR CDF.
    pub fn femto_sir_cdf_lb(&self, gamma: f64) -> Result<f64> {
        check_positive("gamma", gamma)?;
        Ok(self.cdf_unchecked(gamma))
    }

    fn cdf_unchecked(&self, gamma: f64) -> f64 {
        let c = self.rho_f * self.kappa * gamma.powf(self.delta);
        if c == 0.0 {
            return 0.0;
        }
        let d = self.delta;
        let survive = self
            .rule
            .normal_expectation(self.psi_0.mu, self.psi_0.sigma, |ln_psi| (-c * (-d * ln_psi).exp()).exp());
        (1.0 - survive).clamp(0.0, 1.0)
    }

    /// Subchannel throughput `T_f` (b/s/Hz) from the CDF bound.
    pub fn femto_throughput(&self) -> f64 {
        self.modulation.throughput_from_cdf(|g| self.cdf_unchecked(g))
    }

    /// Radius of the interferer disc used by the simulators: at least
    /// `10 R_c`, and large enough that the mean interference beyond it is at
    /// most [`TRUNCATION_SHARE`] of the mean from `[R_f, R]`.
    pub fn simulation_radius(&self) -> f64 {
        let tail = self.femto_radius * (1.0 / TRUNCATION_SHARE + 1.0).powf(1.0 / (self.alpha_f - 2.0));
        (10.0 * self.macro_radius).max(tail)
    }

    /// Mean interference outside radius `r` relative to the mean from the
    /// annulus `[R_f, r]`.
    pub fn truncation_ratio(&self, r: f64) -> f64 {
        let e = 2.0 - self.alpha_f;
        r.powf(e) / (self.femto_radius.powf(e) - r.powf(e))
    }
}

fn check_rho(rho_f: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rho_f) {
        return Err(invalid("rho_f", format!("must lie in [0, 1], got {rho_f}")));
    }
    Ok(())
}

fn check_positive(name: &'static str, x: f64) -> Result<()> {
    if !(x > 0.0) {
        return Err(invalid(name, format!("must be positive, got {x}")));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct FemtoSimResult {
    pub sir: Vec<f64>,
    pub throughput: f64,
    pub stderr: f64,
}

/// Points of the thinned interferer process in the simulation disc around
/// the probe, reported as `r^{−α}`.
fn interferer_losses<R: Rng + ?Sized>(rng: &mut R, env: &FemtoEnv, radius: f64, mut visit: impl FnMut(&mut R, f64)) {
    let mean = env.lambda_f * env.rho_f * disc_area(radius);
    if mean <= 0.0 {
        return;
    }
    let count: f64 = Poisson::new(mean).expect("finite Poisson mean").sample(rng);
    let base = radius.powf(-env.alpha_f);
    let half = -0.5 * env.alpha_f;
    for _ in 0..count as u64 {
        // r = R√u, so r^{-α} = R^{-α} u^{-α/2}.
        let u: f64 = 1.0 - rng.random::<f64>();
        visit(rng, base * u.powf(half));
    }
}

/// Femtocell SIR at the home-cell edge with lognormal shadowing and
/// Rayleigh fading on every link.
pub fn simulate_femto_sir(env: &FemtoEnv, samples: usize, seed: u64) -> Result<FemtoSimResult> {
    if samples == 0 {
        return Err(invalid("samples", "need at least one sample"));
    }
    let radius = env.simulation_radius();
    let wall = env.wall_gain();
    let desired_loss = env.femto_radius.powf(-env.beta_f);
    let sir = chunked(samples, seed, SIR_DOMAIN, |rng| {
        let s = env.shadow_in.sample(rng) * exp1(rng) * desired_loss;
        let mut i = 0.0;
        interferer_losses(rng, env, radius, |rng, loss| {
            i += env.shadow_out.sample(rng) * exp1(rng) * loss;
        });
        i *= wall;
        if i > 0.0 {
            s / i
        } else {
            f64::INFINITY
        }
    });
    let rates: Vec<f64> = sir.iter().map(|&x| env.modulation.rate_map(x) as f64).collect();
    let (throughput, stderr) = mean_and_stderr(&rates);
    Ok(FemtoSimResult { sir, throughput, stderr })
}

/// Draws of the aggregate interference `I_{f,f}` with marks from the
/// interferer gain law `Ψ_I`.
pub fn simulate_shot_noise(env: &FemtoEnv, draws: usize, seed: u64) -> Result<Vec<f64>> {
    if draws == 0 {
        return Err(invalid("draws", "need at least one draw"));
    }
    let radius = env.simulation_radius();
    let wall = env.wall_gain();
    Ok(chunked(draws, seed, SHOT_DOMAIN, |rng| {
        let mut i = 0.0;
        interferer_losses(rng, env, radius, |rng, loss| {
            i += env.psi_i.sample(rng) * loss;
        });
        wall * i
    }))
}

fn chunked<F>(n: usize, seed: u64, domain: u32, draw: F) -> Vec<f64>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> f64 + Sync,
{
    (0..n.div_ceil(MC_CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, domain, c as u64);
            let len = MC_CHUNK.min(n - c * MC_CHUNK);
            (0..len).map(|_| draw(&mut rng)).collect::<Vec<f64>>()
        })
        .collect::<Vec<_>>()
        .concat()
}

fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FalohaOptimum {
    /// `ρ_f*`.
    pub rho_f: f64,
    /// `T_f(ρ_f* λ_f)`.
    pub throughput: f64,
    /// `λ_f ρ_f* T_f`, b/s/Hz/m².
    pub ase: f64,
    /// Whether the access grid was unimodal; otherwise the grid argmax is
    /// returned unrefined.
    pub unimodal: bool,
}

/// Maximizes `θ·T_f(θλ_f)` over `θ ∈ (0, 1]`. The `rho_f` of `env` is
/// ignored.
pub fn optimize_faloha(env: &FemtoEnv) -> Result<FalohaOptimum> {
    if !(env.lambda_f > 0.0) {
        return Err(invalid("lambda_f", "F-ALOHA optimization needs lambda_f > 0"));
    }
    let objective = |theta: f64| -> f64 {
        let mut e = env.clone();
        e.rho_f = theta;
        theta * e.femto_throughput()
    };
    let grid: Vec<f64> = (1..=ACCESS_GRID).map(|i| i as f64 / ACCESS_GRID as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&t| objective(t)).collect();
    let best = values
        .iter()
        .enumerate()
        .fold(0, |b, (i, v)| if *v > values[b] { i } else { b });
    let slack = 1e-12 * values[best].abs();
    let unimodal = values[..=best].windows(2).all(|w| w[1] >= w[0] - slack)
        && values[best..].windows(2).all(|w| w[1] <= w[0] + slack);

    let (rho_f, value) = if !unimodal {
        (grid[best], values[best])
    } else {
        let lo = if best == 0 { 1e-9 } else { grid[best - 1] };
        let hi = grid[(best + 1).min(ACCESS_GRID - 1)];
        let (x, fx) = golden_section_max(objective, lo, hi, 1e-9);
        let at_one = values[ACCESS_GRID - 1];
        if best == ACCESS_GRID - 1 && (x > 1.0 - 1e-6 || at_one >= fx) {
            (1.0, at_one)
        } else if fx >= values[best] {
            (x, fx)
        } else {
            (grid[best], values[best])
        }
    };
    Ok(FalohaOptimum {
        rho_f,
        throughput: value / rho_f,
        ase: env.lambda_f * value,
        unimodal,
    })
}

/// One evaluated operating point of the two-tier split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub rho: f64,
    pub rho_f: f64,
    pub t_f: f64,
}

impl OperatingPoint {
    /// Mean throughput per femtocell, `(1 − ρ) ρ_f T_f`.
    pub fn per_femto(self) -> f64 {
        (1.0 - self.rho) * self.rho_f * self.t_f
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UtilizationKind {
    FullyUtilized,
    SubUtilized,
}

impl UtilizationKind {
    pub fn label(self) -> &'static str {
        match self {
            UtilizationKind::FullyUtilized => "fully-utilized",
            UtilizationKind::SubUtilized => "sub-utilized",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Utilization {
    pub kind: UtilizationKind,
    /// Both points gave the same per-femtocell throughput.
    pub tie: bool,
}

/// Fully utilized when a density increment lowers the per-femtocell
/// throughput; ties count as sub-utilized and are flagged.
pub fn classify_utilization(low: OperatingPoint, high: OperatingPoint) -> Utilization {
    let (a, b) = (low.per_femto(), high.per_femto());
    let tie = (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
    let kind = if !tie && a > b {
        UtilizationKind::FullyUtilized
    } else {
        UtilizationKind::SubUtilized
    };
    Utilization { kind, tie }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Scenario;
    use crate::numerics::ks_distance;

    fn env(s: Scenario, n_f: f64, rho_f: f64) -> FemtoEnv {
        FemtoEnv::new(&SystemParams::reference(s).with_femtos(n_f), rho_f).unwrap()
    }

    #[test]
    fn kappa_by_hand() {
        let e = env(Scenario::HighAttenuation, 50.0, 1.0);
        let lambda = 50.0 / (1.5 * 3f64.sqrt() * 288.0 * 288.0);
        let (mu, s) = (e.psi_i.mu, e.psi_i.sigma);
        let moment = (0.5 * mu + 0.125 * s * s).exp();
        let k = PI * lambda * moment * (0.01 * 40f64.powi(3)).sqrt();
        assert!((e.kappa - k).abs() < 1e-12 * k);
        assert_eq!(e.delta, 0.5);
    }

    #[test]
    fn tail_bounds() {
        let e = env(Scenario::HighAttenuation, 50.0, 1.0);
        let none = e.with_rho_f(0.0).unwrap();
        for k in 0..100 {
            let y = 10f64.powf(-10.0 + 0.08 * k as f64);
            let lb = e.interference_tail_lb(y).unwrap();
            let ex = e.interference_tail_exact4(y).unwrap();
            assert!(lb <= ex + 1e-15, "y {y}: {lb} > {ex}");
            assert!((0.0..1.0).contains(&lb), "y {y} lb {lb}");
            assert_eq!(none.interference_tail_lb(y).unwrap(), 0.0);
        }
        assert!(e.interference_tail_lb(1e300).unwrap() < 1e-100);
        assert!(e.interference_tail_exact4(1e-300).unwrap() > 1.0 - 1e-12);
        assert!(e.interference_tail_lb(0.0).is_err());
        let la = env(Scenario::LowAttenuation, 50.0, 1.0);
        assert!(matches!(la.interference_tail_exact4(1.0), Err(Error::RequiresAlphaFour(..))));
    }

    #[test]
    fn cdf_is_valid_and_monotone() {
        let e = env(Scenario::LowAttenuation, 50.0, 0.7);
        let mut prev = 0.0;
        for k in 0..80 {
            let g = 10f64.powf(-3.0 + 0.1 * k as f64);
            let f = e.femto_sir_cdf_lb(g).unwrap();
            assert!(f >= prev && f <= 1.0);
            let more = e.with_rho_f(0.9).unwrap().femto_sir_cdf_lb(g).unwrap();
            assert!(more >= f);
            prev = f;
        }
        assert!(e.femto_sir_cdf_lb(1e40).unwrap() > 1.0 - 1e-9);
        assert_eq!(e.with_rho_f(0.0).unwrap().femto_sir_cdf_lb(10.0).unwrap(), 0.0);
    }

    #[test]
    fn cdf_matches_monte_carlo_expectation() {
        // E over Ψ0 checked against direct sampling of the lognormal.
        use rand::SeedableRng;
        let e = env(Scenario::LowAttenuation, 50.0, 1.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let g: f64 = 20.0;
        let c = e.kappa * g.powf(e.delta);
        let n = 200_000;
        let acc: f64 = (0..n).map(|_| (-c * e.psi_0.sample(&mut rng).powf(-e.delta)).exp()).sum();
        let mc = 1.0 - acc / n as f64;
        assert!((mc - e.femto_sir_cdf_lb(g).unwrap()).abs() < 0.005);
    }

    #[test]
    fn throughput_limits() {
        let e = env(Scenario::LowAttenuation, 50.0, 1.0);
        assert_eq!(e.with_intensity(0.0).unwrap().femto_throughput(), 8.0);
        let t1 = e.femto_throughput();
        let t2 = e.with_intensity(2.0 * e.lambda_f).unwrap().femto_throughput();
        assert!(t2 < t1 && t1 < 8.0);
    }

    #[test]
    fn simulation_radius_keeps_truncation_small() {
        for s in [Scenario::HighAttenuation, Scenario::LowAttenuation] {
            let e = env(s, 50.0, 1.0);
            let r = e.simulation_radius();
            assert!(r >= 2880.0);
            assert!(e.truncation_ratio(r) <= TRUNCATION_SHARE * (1.0 + 1e-9));
        }
    }

    #[test]
    fn empty_field_saturates() {
        let e = env(Scenario::HighAttenuation, 0.0, 1.0);
        let r = simulate_femto_sir(&e, 500, 1).unwrap();
        assert_eq!(r.throughput, 8.0);
        assert!(r.sir.iter().all(|s| s.is_infinite()));
    }

    #[test]
    fn shot_noise_matches_levy_tail() {
        let e = env(Scenario::HighAttenuation, 50.0, 1.0);
        let mut draws = simulate_shot_noise(&e, 4000, 3).unwrap();
        let d = ks_distance(&mut draws, |y| 1.0 - e.interference_tail_exact4(y).unwrap());
        assert!(d < 0.04, "KS {d}");
    }

    #[test]
    fn access_optimum_cases() {
        let sparse = optimize_faloha(&env(Scenario::LowAttenuation, 10.0, 1.0)).unwrap();
        assert_eq!(sparse.rho_f, 1.0);
        let dense = optimize_faloha(&env(Scenario::LowAttenuation, 100.0, 1.0)).unwrap();
        assert!((dense.rho_f - 0.28).abs() < 0.02, "{}", dense.rho_f);
        assert!(dense.unimodal);
        // Remark: wherever the optimum is interior, λ_f ρ_f* is fixed.
        let denser = optimize_faloha(&env(Scenario::LowAttenuation, 150.0, 1.0)).unwrap();
        assert!((denser.ase - dense.ase).abs() < 1e-3 * dense.ase);
        let a = dense.rho_f * 100.0;
        let b = denser.rho_f * 150.0;
        assert!((a - b).abs() < 0.01 * a);
    }

    #[test]
    fn per_femto_throughput_vanishes() {
        let mut prev = f64::INFINITY;
        for n_f in [20.0, 40.0, 80.0, 140.0] {
            let o = optimize_faloha(&env(Scenario::LowAttenuation, n_f, 1.0)).unwrap();
            let per = o.rho_f * o.throughput;
            assert!(per < prev);
            prev = per;
        }
    }

    #[test]
    fn utilization_classes() {
        let p = OperatingPoint { rho: 0.3, rho_f: 0.5, t_f: 1.0 };
        let same = classify_utilization(p, p);
        assert_eq!(same.kind, UtilizationKind::SubUtilized);
        assert!(same.tie);
        let worse = OperatingPoint { t_f: 0.8, ..p };
        assert_eq!(classify_utilization(p, worse).kind, UtilizationKind::FullyUtilized);
        assert_eq!(classify_utilization(worse, p).kind, UtilizationKind::SubUtilized);
        assert!(!classify_utilization(worse, p).tie);
    }
}
