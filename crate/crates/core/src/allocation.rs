//! Spectrum split between the tiers: network ASE, the QoS-constrained
//! optimum in closed form and by search, and the spectrum needed to meet
//! per-user rate targets.
//!
//! With `ρ` the macrocell share, per-user throughputs are
//! `T_cu = ρT_c/U_c` and `T_fu = (1 − ρ)ρ_f T_f/U_f`. The QoS constraint
//! `min(T_cu, T_fu) ≥ η(T_cu + T_fu)` confines `ρ` to an interval whose
//! ends are both candidates for the linear objective.

use crate::config::{QosConfig, SystemParams};
use crate::error::{invalid, Error, Result};
use crate::femtocell::{optimize_faloha, FalohaOptimum, FemtoEnv};

const FEASIBILITY_SLACK: f64 = 1e-12;

/// `[ρT_c + (1 − ρ)N_f ρ_f T_f]/|H|`, b/s/Hz/m².
pub fn network_ase(rho: f64, t_c: f64, n_f: f64, rho_f: f64, t_f: f64, area: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(invalid("rho", format!("must lie in [0, 1], got {rho}")));
    }
    if !(area > 0.0) {
        return Err(invalid("area", format!("must be positive, got {area}")));
    }
    Ok((rho * t_c + (1.0 - rho) * n_f * rho_f * t_f) / area)
}

/// Everything the split depends on besides `ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TierInputs {
    pub qos: QosConfig,
    /// Macrocell subchannel throughput `T_c`, b/s/Hz.
    pub t_c: f64,
    pub u_c: f64,
    pub u_f: f64,
    pub rho_f: f64,
    pub t_f: f64,
    pub n_f: f64,
    /// `|H|`, m².
    pub area: f64,
}

impl TierInputs {
    fn check(&self) -> Result<()> {
        for (name, v) in [
            ("T_c", self.t_c),
            ("U_c", self.u_c),
            ("U_f", self.u_f),
            ("rho_f*T_f", self.rho_f * self.t_f),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Degenerate(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.area > 0.0) || !(self.n_f >= 0.0) {
            return Err(invalid("area", "area must be positive and N_f >= 0"));
        }
        Ok(())
    }

    /// Eq. (7) objective without the `1/|H|` factor.
    fn objective(&self, rho: f64, t_c: f64) -> f64 {
        rho * t_c + (1.0 - rho) * self.n_f * self.rho_f * self.t_f
    }

    fn per_user(&self, rho: f64, t_c: f64) -> (f64, f64) {
        (rho * t_c / self.u_c, (1.0 - rho) * self.rho_f * self.t_f / self.u_f)
    }

    fn feasible(&self, rho: f64, t_c: f64) -> bool {
        let (c, f) = self.per_user(rho, t_c);
        c.min(f) >= self.qos.eta() * (c + f) - FEASIBILITY_SLACK * (c + f)
    }

    fn result(&self, rho: f64, t_c: f64) -> AllocationResult {
        let (t_cu, t_fu) = self.per_user(rho, t_c);
        let eta = self.qos.eta();
        let sum = t_cu + t_fu;
        AllocationResult {
            rho,
            rho_f: self.rho_f,
            t_c,
            t_f: self.t_f,
            u_c: self.u_c,
            u_f: self.u_f,
            eta,
            ase: self.objective(rho, t_c) / self.area,
            t_cu,
            t_fu,
            binding: (t_cu.min(t_fu) - eta * sum).abs() <= 1e-9 * sum,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationResult {
    /// Macrocell spectrum share `ρ`.
    pub rho: f64,
    pub rho_f: f64,
    pub t_c: f64,
    pub t_f: f64,
    pub u_c: f64,
    pub u_f: f64,
    pub eta: f64,
    /// Network ASE, b/s/Hz/m².
    pub ase: f64,
    pub t_cu: f64,
    pub t_fu: f64,
    /// The QoS constraint holds with equality.
    pub binding: bool,
}

impl AllocationResult {
    pub fn femto_share(&self) -> f64 {
        1.0 - self.rho
    }

    /// Mean throughput per femtocell, `(1 − ρ)ρ_f T_f`.
    pub fn per_femto(&self) -> f64 {
        (1.0 - self.rho) * self.rho_f * self.t_f
    }

    pub fn feasible(&self) -> bool {
        self.t_cu.min(self.t_fu) >= self.eta * (self.t_cu + self.t_fu) - 1e-9
    }
}

/// The two ends of the feasible interval, `(x, y)` with `x ≤ y`:
/// `x = [1 + ((1−η)/η)k]^{-1}` and `y = [1 + (η/(1−η))k]^{-1}` where
/// `k = (T_c/U_c)(U_f/(ρ_f T_f))`.
pub fn candidate_shares(inputs: &TierInputs) -> Result<(f64, f64)> {
    inputs.check()?;
    let k = (inputs.t_c / inputs.u_c) * (inputs.u_f / (inputs.rho_f * inputs.t_f));
    let r = inputs.qos.ratio();
    Ok((1.0 / (1.0 + k / r), 1.0 / (1.0 + r * k)))
}

/// Closed-form optimum for a macrocell throughput that does not depend on
/// `ρ`: the better of the two boundary candidates.
pub fn optimal_rho_closed_form(inputs: &TierInputs) -> Result<AllocationResult> {
    let (x, y) = candidate_shares(inputs)?;
    let rho = if inputs.objective(y, inputs.t_c) > inputs.objective(x, inputs.t_c) {
        y
    } else {
        x
    };
    Ok(inputs.result(rho, inputs.t_c))
}

/// Grid search over `ρ ∈ [0, 1]` with `T_c` allowed to vary with `ρ`,
/// followed by a finer grid around the best feasible point.
pub fn optimal_rho_numeric<F: Fn(f64) -> f64>(inputs: &TierInputs, t_c_of: F, grid: usize) -> Result<AllocationResult> {
    inputs.check()?;
    if grid < 2 {
        return Err(invalid("grid", "need at least 2 grid intervals"));
    }
    let search = |lo: f64, hi: f64, n: usize| -> Option<(f64, f64)> {
        let mut best: Option<(f64, f64)> = None;
        for i in 0..=n {
            let rho = lo + (hi - lo) * i as f64 / n as f64;
            let t_c = t_c_of(rho);
            if !inputs.feasible(rho, t_c) {
                continue;
            }
            let v = inputs.objective(rho, t_c);
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((rho, v));
            }
        }
        best
    };
    let (coarse, _) = search(0.0, 1.0, grid)
        .ok_or_else(|| Error::Infeasible(format!("no feasible rho on a {grid}-point grid")))?;
    let h = 1.0 / grid as f64;
    let (rho, _) = search((coarse - h).max(0.0), (coarse + h).min(1.0), 2000).unwrap_or((coarse, 0.0));
    Ok(inputs.result(rho, t_c_of(rho)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RequiredSpectrum {
    /// `WF = U_c D_c/(ρT_c)`, Hz.
    pub total_hz: f64,
    /// `U_f D_f/((1 − ρ)ρ_f T_f)`, Hz.
    pub femto_form_hz: f64,
    /// `WF/W`.
    pub subchannels: f64,
    /// `D_f = D_c(1 − η)/η` holds.
    pub targets_consistent: bool,
    /// The two forms agree to 1e-6 relative.
    pub forms_agree: bool,
}

/// Spectrum needed to deliver `d_c` (b/s) to each macrocell user and `d_f`
/// to each femtocell user under the split `result`.
pub fn required_spectrum(result: &AllocationResult, d_c: f64, d_f: f64, bandwidth: f64) -> Result<RequiredSpectrum> {
    let macro_rate = result.rho * result.t_c;
    if !(macro_rate > 0.0) {
        return Err(Error::Degenerate("rho*T_c must be positive".into()));
    }
    if !(d_c > 0.0) || !(d_f > 0.0) || !(bandwidth > 0.0) {
        return Err(invalid("D", "rate targets and bandwidth must be positive"));
    }
    let total_hz = result.u_c * d_c / macro_rate;
    let femto_rate = (1.0 - result.rho) * result.rho_f * result.t_f;
    let femto_form_hz = if femto_rate > 0.0 {
        result.u_f * d_f / femto_rate
    } else {
        f64::INFINITY
    };
    let expected_f = d_c * (1.0 - result.eta) / result.eta;
    Ok(RequiredSpectrum {
        total_hz,
        femto_form_hz,
        subchannels: total_hz / bandwidth,
        targets_consistent: (d_f - expected_f).abs() <= 1e-9 * expected_f,
        forms_agree: (total_hz - femto_form_hz).abs() <= 1e-6 * total_hz,
    })
}

/// Empirical `T_c(U_c)` with linear interpolation, clamped at the ends.
#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputTable {
    users: Vec<f64>,
    throughput: Vec<f64>,
}

impl ThroughputTable {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("table", "need at least one point"));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(invalid("table", "duplicate user counts"));
        }
        Ok(Self {
            users: points.iter().map(|p| p.0).collect(),
            throughput: points.iter().map(|p| p.1).collect(),
        })
    }

    pub fn at(&self, users: f64) -> f64 {
        let n = self.users.len();
        if users <= self.users[0] {
            return self.throughput[0];
        }
        if users >= self.users[n - 1] {
            return self.throughput[n - 1];
        }
        let j = self.users.partition_point(|&u| u <= users);
        let (u0, u1) = (self.users[j - 1], self.users[j]);
        let (t0, t1) = (self.throughput[j - 1], self.throughput[j]);
        t0 + (t1 - t0) * (users - u0) / (u1 - u0)
    }
}

/// Best F-ALOHA access for the femtocell tier of `params`.
pub fn femto_optimum(params: &SystemParams) -> Result<FalohaOptimum> {
    let env = FemtoEnv::new(params, 1.0)?;
    if env.lambda_f > 0.0 {
        optimize_faloha(&env)
    } else {
        Ok(FalohaOptimum {
            rho_f: 1.0,
            throughput: env.femto_throughput(),
            ase: 0.0,
            unimodal: true,
        })
    }
}

/// Closed-form split of `params` for a given macrocell throughput `t_c`,
/// with the femtocell tier at its F-ALOHA optimum.
pub fn plan(params: &SystemParams, t_c: f64, qos: QosConfig) -> Result<AllocationResult> {
    let femto = femto_optimum(params)?;
    optimal_rho_closed_form(&TierInputs {
        qos,
        t_c,
        u_c: params.macro_users(),
        u_f: params.users_per_femto,
        rho_f: femto.rho_f,
        t_f: femto.throughput,
        n_f: params.femtos_per_cell,
        area: params.cell_area(),
    })
}
