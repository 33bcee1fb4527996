//! Shared parameter types: system-wide scalars, the adaptive-modulation
//! rate map, lognormal parameter pairs and the QoS fraction.

use std::f64::consts::{LN_10, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};

/// dB to natural-log scaling, `0.1 ln 10`.
pub const ZETA: f64 = 0.1 * LN_10;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Natural-log mean and standard deviation of a lognormal variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LognormalParams {
    pub mu: f64,
    pub sigma: f64,
}

impl LognormalParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(invalid("mu", format!("must be finite, got {mu}")));
        }
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(invalid("sigma", format!("must be finite and >= 0, got {sigma}")));
        }
        Ok(Self { mu, sigma })
    }

    /// `LN(ζ μ_dB, ζ² σ_dB²)`.
    pub fn from_db(mu_db: f64, sigma_db: f64) -> Result<Self> {
        Self::new(ZETA * mu_db, ZETA * sigma_db)
    }

    /// Inverse of [`LognormalParams::from_db`].
    pub fn to_db(self) -> (f64, f64) {
        (self.mu / ZETA, self.sigma / ZETA)
    }

    pub fn mean(self) -> f64 {
        (self.mu + 0.5 * self.sigma * self.sigma).exp()
    }

    pub fn variance(self) -> f64 {
        let s2 = self.sigma * self.sigma;
        (s2.exp() - 1.0) * (2.0 * self.mu + s2).exp()
    }

    /// Parameters of `w·X`.
    pub fn scaled(self, w: f64) -> Self {
        Self {
            mu: self.mu + w.ln(),
            sigma: self.sigma,
        }
    }

    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        (self.mu + self.sigma * z).exp()
    }
}

/// Adaptive M-QAM configuration: Shannon gap and the `L` SIR thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationConfig {
    gap: f64,
    thresholds: Vec<f64>,
}

impl ModulationConfig {
    /// Thresholds `Γ_l = G (2^l − 1)` so that the rate at level `l` is
    /// exactly `l` b/s/Hz.
    pub fn new(gap: f64, levels: usize) -> Result<Self> {
        let thresholds = (1..=levels)
            .map(|l| gap * (2f64.powi(l as i32) - 1.0))
            .collect();
        Self::with_thresholds(gap, thresholds)
    }

    pub fn with_thresholds(gap: f64, thresholds: Vec<f64>) -> Result<Self> {
        if !(gap >= 1.0) || !gap.is_finite() {
            return Err(invalid("G", format!("Shannon gap must be >= 1, got {gap}")));
        }
        if thresholds.is_empty() {
            return Err(invalid("L", "need at least one rate level"));
        }
        if thresholds.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(invalid("thresholds", "must be positive and finite"));
        }
        if thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("thresholds", "must be strictly increasing"));
        }
        Ok(Self { gap, thresholds })
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn levels(&self) -> usize {
        self.thresholds.len()
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// `b_i = log2(1 + Γ_i / G)`.
    pub fn rates(&self) -> Vec<f64> {
        self.thresholds
            .iter()
            .map(|t| (1.0 + t / self.gap).log2())
            .collect()
    }

    /// Largest level `l` with `Γ_l <= sir`, or 0 below `Γ_1`.
    pub fn rate_map(&self, sir: f64) -> usize {
        self.thresholds.partition_point(|&t| t <= sir)
    }

    /// Expected rate level from an SIR CDF evaluated at the thresholds:
    /// `Σ_{l<L} l·[F(Γ_{l+1}) − F(Γ_l)] + L·[1 − F(Γ_L)]`.
    pub fn throughput_from_cdf<F: FnMut(f64) -> f64>(&self, mut cdf: F) -> f64 {
        let f: Vec<f64> = self.thresholds.iter().map(|&g| cdf(g)).collect();
        let l = f.len();
        let mut t = 0.0;
        for i in 1..l {
            t += i as f64 * (f[i] - f[i - 1]);
        }
        t + l as f64 * (1.0 - f[l - 1])
    }
}

/// QoS fraction `η`: each tier's per-user throughput is at least
/// `η/(1−η)` of the other's.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QosConfig {
    eta: f64,
}

impl QosConfig {
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 0.5) {
            return Err(invalid("eta", format!("must lie in (0, 0.5], got {eta}")));
        }
        Ok(Self { eta })
    }

    pub fn eta(self) -> f64 {
        self.eta
    }

    /// `η/(1−η)`.
    pub fn ratio(self) -> f64 {
        self.eta / (1.0 - self.eta)
    }
}

/// Femtocell propagation scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// High attenuation: `α_f = 4`, `P_f = 10 dB`.
    HighAttenuation,
    /// Low attenuation: `α_f = 3.5`, `P_f = 2 dB`.
    LowAttenuation,
}

impl Scenario {
    pub fn alpha_f(self) -> f64 {
        match self {
            Scenario::HighAttenuation => 4.0,
            Scenario::LowAttenuation => 3.5,
        }
    }

    pub fn penetration_loss_db(self) -> f64 {
        match self {
            Scenario::HighAttenuation => 10.0,
            Scenario::LowAttenuation => 2.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Scenario::HighAttenuation => "HA",
            Scenario::LowAttenuation => "LA",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "HA" | "HIGH" => Ok(Scenario::HighAttenuation),
            "LA" | "LOW" => Ok(Scenario::LowAttenuation),
            _ => Err(Error::Config(format!("unknown scenario `{s}` (expected HA or LA)"))),
        }
    }
}

/// System-wide scalars. Defaults are the reference deployment: 288 m
/// macrocells, 40 m femtocells, 300 users per cell site, two users per
/// femtocell, 3 dB gap with 8 rate levels.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// `R_c` (m).
    pub macro_radius: f64,
    /// `R_f` (m).
    pub femto_radius: f64,
    /// `U`, users per cell site.
    pub total_users: f64,
    /// `U_f`.
    pub users_per_femto: f64,
    /// `N_f`, mean femtocells per cell site.
    pub femtos_per_cell: f64,
    /// `F`.
    pub subchannels: usize,
    /// `W` (Hz).
    pub subchannel_bandwidth: f64,
    pub alpha_c: f64,
    pub alpha_f: f64,
    pub beta_f: f64,
    /// `P_f` (dB).
    pub penetration_loss_db: f64,
    pub sigma_c_db: f64,
    pub sigma_fi_db: f64,
    pub sigma_fo_db: f64,
    pub mu_c_db: f64,
    pub mu_fi_db: f64,
    pub mu_fo_db: f64,
    pub shannon_gap_db: f64,
    pub levels: usize,
    /// Optional explicit SIR thresholds (linear) replacing `G(2^l − 1)`.
    pub thresholds: Option<Vec<f64>>,
}

impl SystemParams {
    pub fn reference(scenario: Scenario) -> Self {
        Self {
            macro_radius: 288.0,
            femto_radius: 40.0,
            total_users: 300.0,
            users_per_femto: 2.0,
            femtos_per_cell: 50.0,
            subchannels: 100,
            subchannel_bandwidth: 15e3,
            alpha_c: 4.0,
            alpha_f: scenario.alpha_f(),
            beta_f: 3.0,
            penetration_loss_db: scenario.penetration_loss_db(),
            sigma_c_db: 8.0,
            sigma_fi_db: 4.0,
            sigma_fo_db: 12.0,
            mu_c_db: 0.0,
            mu_fi_db: 0.0,
            mu_fo_db: 0.0,
            shannon_gap_db: 3.0,
            levels: 8,
            thresholds: None,
        }
    }

    pub fn with_femtos(mut self, n_f: f64) -> Self {
        self.femtos_per_cell = n_f;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("R_c", self.macro_radius),
            ("R_f", self.femto_radius),
            ("U_f", self.users_per_femto),
            ("W", self.subchannel_bandwidth),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        for (name, v) in [("alpha_c", self.alpha_c), ("alpha_f", self.alpha_f), ("beta_f", self.beta_f)] {
            if !(2.0..=6.0).contains(&v) {
                return Err(invalid(name, format!("path-loss exponent must lie in [2, 6], got {v}")));
            }
        }
        if !(self.femtos_per_cell >= 0.0) || !self.femtos_per_cell.is_finite() {
            return Err(invalid("N_f", "must be finite and >= 0"));
        }
        if self.subchannels == 0 {
            return Err(invalid("F", "need at least one subchannel"));
        }
        for (name, v) in [
            ("sigma_c_dB", self.sigma_c_db),
            ("sigma_fi_dB", self.sigma_fi_db),
            ("sigma_fo_dB", self.sigma_fo_db),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(invalid(name, format!("must be >= 0, got {v}")));
            }
        }
        if self.macro_users() < 0.0 {
            return Err(invalid(
                "U",
                format!(
                    "U = {} cannot host N_f·U_f = {} femtocell users",
                    self.total_users,
                    self.femtos_per_cell * self.users_per_femto
                ),
            ));
        }
        self.modulation()?;
        Ok(())
    }

    /// `U_c = U − N_f·U_f`.
    pub fn macro_users(&self) -> f64 {
        self.total_users - self.femtos_per_cell * self.users_per_femto
    }

    /// `|H| = (3√3/2) R_c²`.
    pub fn cell_area(&self) -> f64 {
        1.5 * 3f64.sqrt() * self.macro_radius * self.macro_radius
    }

    /// `λ_f = N_f / |H|` (femtocells per m²).
    pub fn femto_intensity(&self) -> f64 {
        self.femtos_per_cell / self.cell_area()
    }

    pub fn modulation(&self) -> Result<ModulationConfig> {
        let gap = db_to_linear(self.shannon_gap_db);
        match &self.thresholds {
            Some(t) => ModulationConfig::with_thresholds(gap, t.clone()),
            None => ModulationConfig::new(gap, self.levels),
        }
    }

    /// Shadowing `Θ` on the macrocell links.
    pub fn macro_shadowing(&self) -> LognormalParams {
        LognormalParams {
            mu: ZETA * self.mu_c_db,
            sigma: ZETA * self.sigma_c_db,
        }
    }
}

/// Area of a disc, used for SPPP regions.
pub(crate) fn disc_area(radius: f64) -> f64 {
    PI * radius * radius
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gap2(levels: usize) -> ModulationConfig {
        ModulationConfig::new(2.0, levels).unwrap()
    }

    #[test]
    fn rate_map_edges() {
        let m = gap2(8);
        assert_eq!(m.rate_map(0.0), 0);
        assert_eq!(m.rate_map(m.thresholds()[7] * 10.0), 8);
        // Γ_3 = 2·(2³ − 1) = 14.
        assert_eq!(m.thresholds()[2], 14.0);
        assert_eq!(m.rate_map(14.0), 3);
        assert_eq!(m.rate_map(13.999), 2);
    }

    #[test]
    fn default_thresholds_give_integer_rates() {
        let m = ModulationConfig::new(db_to_linear(3.0), 8).unwrap();
        for (l, b) in m.rates().iter().enumerate() {
            assert!((b - (l + 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn threshold_ordering_is_enforced() {
        assert!(ModulationConfig::with_thresholds(2.0, vec![1.0, 1.0]).is_err());
        assert!(ModulationConfig::with_thresholds(0.5, vec![1.0]).is_err());
        assert!(ModulationConfig::with_thresholds(2.0, vec![]).is_err());
    }

    #[test]
    fn throughput_from_step_cdfs() {
        let m = gap2(8);
        assert_eq!(m.throughput_from_cdf(|_| 0.0), 8.0);
        assert_eq!(m.throughput_from_cdf(|_| 1.0), 0.0);
        let single = ModulationConfig::with_thresholds(2.0, vec![1e-9]).unwrap();
        assert_eq!(single.throughput_from_cdf(|_| 0.0), 1.0);
    }

    #[test]
    fn db_round_trip() {
        let p = LognormalParams::from_db(-3.0, 8.0).unwrap();
        let (m, s) = p.to_db();
        assert!((m + 3.0).abs() < 1e-14);
        assert!((s - 8.0).abs() < 1e-14);
        assert!(LognormalParams::new(0.0, -1.0).is_err());
    }

    #[test]
    fn qos_bounds() {
        assert!(QosConfig::new(0.0).is_err());
        assert!(QosConfig::new(0.6).is_err());
        assert_eq!(QosConfig::new(0.5).unwrap().ratio(), 1.0);
    }

    #[test]
    fn reference_params_are_valid() {
        for s in [Scenario::HighAttenuation, Scenario::LowAttenuation] {
            let p = SystemParams::reference(s);
            p.validate().unwrap();
            assert_eq!(p.macro_users(), 200.0);
            assert!((p.cell_area() - 215_494.9).abs() < 0.1, "{}", p.cell_area());
        }
        let bad = SystemParams::reference(Scenario::LowAttenuation).with_femtos(151.0);
        assert!(bad.validate().is_err());
        let mut bad = SystemParams::reference(Scenario::LowAttenuation);
        bad.alpha_c = 7.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn scenario_parsing() {
        assert_eq!("ha".parse::<Scenario>().unwrap(), Scenario::HighAttenuation);
        assert_eq!("LA".parse::<Scenario>().unwrap(), Scenario::LowAttenuation);
        assert!("XX".parse::<Scenario>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn rate_map_is_monotone(a in 0.0f64..1e4, b in 0.0f64..1e4) {
                let m = gap2(8);
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                prop_assert!(m.rate_map(lo) <= m.rate_map(hi));
            }

            #[test]
            fn db_conversion_round_trips(mu in -40.0f64..40.0, sigma in 0.0f64..20.0) {
                let (m, s) = LognormalParams::from_db(mu, sigma).unwrap().to_db();
                prop_assert!((m - mu).abs() <= 1e-12 * mu.abs().max(1.0));
                prop_assert!((s - sigma).abs() <= 1e-12 * sigma.max(1.0));
            }
        }
    }
}
