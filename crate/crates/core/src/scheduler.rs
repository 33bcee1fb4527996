//! Monte Carlo macrocell downlink: the round-robin SIR/throughput oracle and
//! the proportional-fair scheduler estimate of `T_c(U_c)`.
//!
//! A trial is one scheduling interval of one OFDM symbol, `1/W` seconds.
//! Rayleigh fading is held for `⌈0.4/f_d · W⌉` trials; shadowing is drawn
//! once per drop.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::config::{LognormalParams, ModulationConfig, SystemParams};
use crate::error::{invalid, Result};
use crate::geometry::{hex_point, CellGeometry, Point, INTERFERER_COUNT};
use crate::numerics::{mean_and_stderr, pairwise_mean, stream_rng};

const RR_DOMAIN: u32 = 1;
const PF_DOMAIN: u32 = 2;
const RR_CHUNK: usize = 4096;
const RATE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrSimConfig {
    pub samples: usize,
    pub seed: u64,
    /// Transmit power of the serving base station.
    pub serving_power: f64,
    /// Transmit power of each interfering base station; 0 removes them.
    pub interferer_power: f64,
}

impl RrSimConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            serving_power: 1.0,
            interferer_power: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RrSimResult {
    /// Per-sample SIR in generation order (`+∞` without interference).
    pub sir: Vec<f64>,
    /// Sample mean of the rate level, b/s/Hz.
    pub throughput: f64,
    pub stderr: f64,
}

struct Link {
    alpha: f64,
    rc: f64,
    interferers: [Point; INTERFERER_COUNT],
    shadow: LognormalParams,
}

impl Link {
    fn new(params: &SystemParams) -> Result<Self> {
        let geometry = CellGeometry::new(params.macro_radius)?;
        Ok(Self {
            alpha: params.alpha_c,
            rc: params.macro_radius,
            interferers: geometry.interferers,
            shadow: params.macro_shadowing(),
        })
    }

    fn path_gain(&self, p: Point, bs: Point) -> f64 {
        (p.distance(bs) / self.rc).powf(-self.alpha)
    }
}

/// Round-robin downlink: one user per sample, uniform in the hexagon, with
/// independent shadowing and unit-mean exponential fading on all 19 links.
pub fn simulate_rr(params: &SystemParams, cfg: RrSimConfig) -> Result<RrSimResult> {
    params.validate()?;
    if cfg.samples == 0 {
        return Err(invalid("samples", "need at least one sample"));
    }
    if !(cfg.serving_power > 0.0) || !(cfg.interferer_power >= 0.0) {
        return Err(invalid("power", "serving power must be > 0 and interferer power >= 0"));
    }
    let link = Link::new(params)?;
    let modulation = params.modulation()?;
    let chunks = cfg.samples.div_ceil(RR_CHUNK);
    let sir: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(cfg.seed, RR_DOMAIN, c as u64);
            let n = RR_CHUNK.min(cfg.samples - c * RR_CHUNK);
            (0..n)
                .map(|_| {
                    let p = hex_point(&mut rng, link.rc);
                    let s = cfg.serving_power * link.shadow.sample(&mut rng) * exp1(&mut rng) * link.path_gain(p, Point::ORIGIN);
                    let mut i = 0.0;
                    for b in &link.interferers {
                        i += link.shadow.sample(&mut rng) * exp1(&mut rng) * link.path_gain(p, *b);
                    }
                    i *= cfg.interferer_power;
                    if i > 0.0 {
                        s / i
                    } else {
                        f64::INFINITY
                    }
                })
                .collect::<Vec<f64>>()
        })
        .collect::<Vec<_>>()
        .concat();
    let rates: Vec<f64> = sir.iter().map(|&x| modulation.rate_map(x) as f64).collect();
    let (throughput, stderr) = mean_and_stderr(&rates);
    Ok(RrSimResult { sir, throughput, stderr })
}

fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PfSimConfig {
    /// `U_c`.
    pub users: usize,
    /// PF window `N` in trials.
    pub window: f64,
    /// `F_c`.
    pub subchannels: usize,
    /// `W` (Hz).
    pub bandwidth: f64,
    pub drops: usize,
    pub trials_per_drop: usize,
    /// Mobile speed, m/s.
    pub speed: f64,
    pub carrier_frequency: f64,
    pub seed: u64,
}

impl Default for PfSimConfig {
    fn default() -> Self {
        Self {
            users: 32,
            window: 500.0,
            subchannels: 1,
            bandwidth: 15e3,
            drops: 500,
            trials_per_drop: 8000,
            speed: 13.34,
            carrier_frequency: 2e9,
            seed: 0,
        }
    }
}

impl PfSimConfig {
    pub fn doppler(&self) -> f64 {
        self.speed * self.carrier_frequency / 3e8
    }

    /// Fading block length in trials.
    pub fn coherence_trials(&self) -> usize {
        ((0.4 / self.doppler() * self.bandwidth).ceil() as usize).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.users == 0 {
            return Err(invalid("U_c", "PF simulation needs at least one user"));
        }
        if !(self.window >= 1.0) {
            return Err(invalid("N", format!("window must be >= 1, got {}", self.window)));
        }
        if self.subchannels == 0 || self.drops == 0 || self.trials_per_drop == 0 {
            return Err(invalid("PfSimConfig", "F_c, drops and trials must be >= 1"));
        }
        if !(self.doppler() > 0.0) || !(self.bandwidth > 0.0) {
            return Err(invalid("v", "speed, carrier and bandwidth must be positive"));
        }
        Ok(())
    }
}

/// Proportional-fair selector over `U` users with windowed mean rates.
#[derive(Debug, Clone)]
pub struct PfScheduler {
    mean_rates: Vec<f64>,
    window: f64,
    served: Vec<u64>,
}

impl PfScheduler {
    /// `initial` seeds `R̄_k`; values are floored to keep the ratio finite.
    pub fn new(initial: &[f64], window: f64) -> Self {
        Self {
            mean_rates: initial.iter().map(|r| r.max(RATE_FLOOR)).collect(),
            window,
            served: vec![0; initial.len()],
        }
    }

    /// Best user for one subchannel, `argmax R_k/R̄_k`, lowest index on ties.
    pub fn select(&self, rates: &[f64]) -> usize {
        let mut best = 0;
        let mut best_metric = f64::NEG_INFINITY;
        for (k, (r, m)) in rates.iter().zip(&self.mean_rates).enumerate() {
            let metric = r / m;
            if metric > best_metric {
                best = k;
                best_metric = metric;
            }
        }
        best
    }

    /// One trial on `F_c` subchannels; `rates[f]` holds every user's rate on
    /// subchannel `f`. All selections use `R̄` from before the trial, then
    /// `R̄_k ← (1 − 1/N) R̄_k + (1/N)·Σ_f served_k,f`. Returns the total
    /// served rate.
    pub fn step(&mut self, rates: &[&[f64]]) -> f64 {
        let mut gained = vec![0.0; self.mean_rates.len()];
        let mut total = 0.0;
        for sub in rates {
            let k = self.select(sub);
            gained[k] += sub[k];
            total += sub[k];
            self.served[k] += 1;
        }
        let keep = 1.0 - 1.0 / self.window;
        for (m, g) in self.mean_rates.iter_mut().zip(gained) {
            *m = (keep * *m + g / self.window).max(RATE_FLOOR);
        }
        total
    }

    pub fn mean_rates(&self) -> &[f64] {
        &self.mean_rates
    }

    /// Number of subchannel grants per user so far.
    pub fn grants(&self) -> &[u64] {
        &self.served
    }
}

/// Users and slow-fading state of one drop.
#[derive(Debug, Clone)]
pub struct DropState {
    pub positions: Vec<Point>,
    /// Serving-link shadowing `Θ_0` per user.
    pub serving_shadow: Vec<f64>,
    /// Interferer shadowing `Θ_0k`, row-major `[user][interferer]`.
    pub interferer_shadow: Vec<f64>,
}

impl DropState {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, params: &SystemParams, users: usize) -> Self {
        let shadow = params.macro_shadowing();
        let positions: Vec<Point> = (0..users).map(|_| hex_point(rng, params.macro_radius)).collect();
        let serving_shadow = (0..users).map(|_| shadow.sample(rng)).collect();
        let interferer_shadow = (0..users * INTERFERER_COUNT).map(|_| shadow.sample(rng)).collect();
        Self {
            positions,
            serving_shadow,
            interferer_shadow,
        }
    }

    pub fn users(&self) -> usize {
        self.positions.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropRecord {
    pub drop: usize,
    /// PF served rate per subchannel per trial, b/s/Hz.
    pub pf: f64,
    /// Round-robin rate over the same channel realizations.
    pub rr: f64,
}

#[derive(Debug, Clone)]
pub struct PfSimResult {
    pub throughput_pf: f64,
    pub throughput_rr: f64,
    pub stderr_pf: f64,
    pub stderr_rr: f64,
    pub drops: Vec<DropRecord>,
}

impl PfSimResult {
    pub fn gain(&self) -> f64 {
        self.throughput_pf / self.throughput_rr
    }
}

/// Block-fading PF simulation; round robin runs on the same drops and
/// fading so the two estimates share their noise.
pub fn simulate_pf(params: &SystemParams, cfg: PfSimConfig) -> Result<PfSimResult> {
    params.validate()?;
    cfg.validate()?;
    let link = Link::new(params)?;
    let modulation = params.modulation()?;
    let drops: Vec<DropRecord> = (0..cfg.drops)
        .into_par_iter()
        .map(|d| run_drop(&link, &modulation, params, &cfg, d))
        .collect();
    let pf: Vec<f64> = drops.iter().map(|r| r.pf).collect();
    let rr: Vec<f64> = drops.iter().map(|r| r.rr).collect();
    let (throughput_pf, stderr_pf) = mean_and_stderr(&pf);
    let (throughput_rr, stderr_rr) = mean_and_stderr(&rr);
    Ok(PfSimResult {
        throughput_pf,
        throughput_rr,
        stderr_pf,
        stderr_rr,
        drops,
    })
}

fn run_drop(link: &Link, modulation: &ModulationConfig, params: &SystemParams, cfg: &PfSimConfig, d: usize) -> DropRecord {
    let mut rng = stream_rng(cfg.seed, PF_DOMAIN, d as u64);
    let users = cfg.users;
    let state = DropState::sample(&mut rng, params, users);
    let serving_path: Vec<f64> = state.positions.iter().map(|p| link.path_gain(*p, Point::ORIGIN)).collect();
    let interferer_path: Vec<f64> = state
        .positions
        .iter()
        .flat_map(|p| link.interferers.iter().map(move |b| (*p, *b)))
        .map(|(p, b)| link.path_gain(p, b))
        .collect();

    let hold = cfg.coherence_trials();
    let subs = cfg.subchannels;
    // rates[f * users + k]
    let mut rates = vec![0.0; subs * users];
    let draw_block = |rng: &mut rand_chacha::ChaCha8Rng, rates: &mut [f64]| {
        for f in 0..subs {
            for k in 0..users {
                let s = state.serving_shadow[k] * exp1(rng) * serving_path[k];
                let mut i = 0.0;
                for j in 0..INTERFERER_COUNT {
                    let idx = k * INTERFERER_COUNT + j;
                    i += state.interferer_shadow[idx] * exp1(rng) * interferer_path[idx];
                }
                rates[f * users + k] = modulation.rate_map(s / i) as f64;
            }
        }
    };

    draw_block(&mut rng, &mut rates);
    let initial: Vec<f64> = (0..users)
        .map(|k| (0..subs).map(|f| rates[f * users + k]).sum::<f64>() / users as f64)
        .collect();
    let mut pf = PfScheduler::new(&initial, cfg.window);
    let mut pf_total = Vec::with_capacity(cfg.trials_per_drop.div_ceil(hold));
    let mut rr_total = Vec::with_capacity(pf_total.capacity());
    let mut pointer = 0usize;
    let mut t = 0;
    while t < cfg.trials_per_drop {
        if t > 0 {
            draw_block(&mut rng, &mut rates);
        }
        let len = hold.min(cfg.trials_per_drop - t);
        let views: Vec<&[f64]> = rates.chunks(users).collect();
        let (mut pf_block, mut rr_block) = (0.0, 0.0);
        for _ in 0..len {
            pf_block += pf.step(&views);
            for sub in &views {
                rr_block += sub[pointer];
                pointer = (pointer + 1) % users;
            }
        }
        pf_total.push(pf_block);
        rr_total.push(rr_block);
        t += len;
    }
    let denom = (cfg.trials_per_drop * subs) as f64;
    let blocks = pf_total.len() as f64;
    DropRecord {
        drop: d,
        pf: pairwise_mean(&pf_total) * blocks / denom,
        rr: pairwise_mean(&rr_total) * blocks / denom,
    }
}
