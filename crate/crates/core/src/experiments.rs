//! The eight experiments behind the CLI. Each returns named tables; column
//! schemas are fixed per experiment id and listed in [`header`].

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::allocation::{femto_optimum, optimal_rho_closed_form, required_spectrum, AllocationResult, TierInputs};
use crate::cli::{ExperimentConfig, ExperimentId, SchedulerKind, Table};
use crate::config::{QosConfig, Scenario, SystemParams};
use crate::error::{invalid, Error, Result};
use crate::femtocell::{classify_utilization, simulate_femto_sir, FemtoEnv, OperatingPoint};
use crate::macrocell::build_macro_env;
use crate::numerics::ks_distance;
use crate::scheduler::{simulate_pf, simulate_rr, PfSimConfig, PfSimResult, RrSimConfig};

/// Scenario label and `N_f` bits.
type FemtoKey = (&'static str, u64);

const ANNULI: usize = 50;

/// Column names of the main table of each experiment.
pub fn header(id: ExperimentId) -> Vec<&'static str> {
    match id {
        ExperimentId::MacroTcVsAlpha => vec!["alpha_c", "tc_analytical", "tc_mc", "tc_mc_stderr", "ks_distance"],
        ExperimentId::MacroRrVsPf => vec![
            "u_c",
            "tc_rr_analytical",
            "tc_rr_mc",
            "tc_rr_mc_stderr",
            "tc_pf_mc",
            "tc_pf_mc_stderr",
            "pf_gain",
        ],
        ExperimentId::FemtoTpt => vec!["scenario", "n_f", "rho_f", "tf_analytical", "tf_mc", "tf_mc_stderr"],
        ExperimentId::FemtoAse => vec!["scenario", "n_f", "theta", "ase", "rho_f_star", "ase_star"],
        ExperimentId::AllocationVsEta => vec![
            "scenario",
            "scheduler",
            "n_f",
            "eta",
            "rho",
            "femto_share",
            "rho_f",
            "t_c",
            "t_f",
            "t_cu",
            "t_fu",
            "ase",
        ],
        ExperimentId::TwoTierAse => vec![
            "scenario", "scheduler", "eta", "n_f", "u_c", "rho", "rho_f", "t_c", "t_f", "ase",
        ],
        ExperimentId::FemtoUserTpt => vec![
            "scenario",
            "scheduler",
            "eta",
            "n_f",
            "rho",
            "rho_f",
            "t_f",
            "per_femto",
            "t_fu",
            "utilization",
        ],
        ExperimentId::RequiredSpectrum => vec![
            "scenario",
            "scheduler",
            "eta",
            "n_f",
            "rho",
            "t_c",
            "d_c",
            "d_f",
            "wf_hz",
            "subchannels",
            "forms_agree",
        ],
    }
}

/// Column names of the per-drop PF table written next to `macro_rr_vs_pf`.
pub const DROP_HEADER: [&str; 4] = ["u_c", "drop", "tc_pf", "tc_rr"];

fn num(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one sweep point, independent of evaluation order.
fn point_seed(seed: u64, tag: u64, index: u64) -> u64 {
    splitmix(splitmix(seed ^ tag.rotate_left(32)) ^ index)
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<(String, Table)>> {
    match cfg.id {
        ExperimentId::MacroTcVsAlpha => macro_tc_vs_alpha(cfg),
        ExperimentId::MacroRrVsPf => macro_rr_vs_pf(cfg),
        ExperimentId::FemtoTpt => femto_tpt(cfg),
        ExperimentId::FemtoAse => femto_ase(cfg),
        ExperimentId::AllocationVsEta | ExperimentId::TwoTierAse | ExperimentId::FemtoUserTpt | ExperimentId::RequiredSpectrum => {
            two_tier(cfg)
        }
    }
}

fn single(cfg: &ExperimentConfig, table: Table) -> Vec<(String, Table)> {
    vec![(cfg.id.name().to_string(), table)]
}

fn macro_tc_vs_alpha(cfg: &ExperimentConfig) -> Result<Vec<(String, Table)>> {
    let base = cfg.params(cfg.scenarios[0])?;
    let rows = cfg
        .sweep
        .par_iter()
        .enumerate()
        .map(|(i, &alpha)| -> Result<Vec<String>> {
            let p = SystemParams { alpha_c: alpha, ..base.clone() };
            let env = build_macro_env(&p, ANNULI)?;
            let mut mc = simulate_rr(&p, RrSimConfig::new(cfg.samples, point_seed(cfg.seed, 1, i as u64)))?;
            let ks = ks_distance(&mut mc.sir, |g| env.cell_avg_sir_cdf(g).unwrap_or(f64::NAN));
            Ok(vec![num(alpha), num(env.throughput_rr()), num(mc.throughput), num(mc.stderr), num(ks)])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(header(cfg.id));
    t.rows = rows;
    Ok(single(cfg, t))
}

fn user_count(x: f64) -> Result<usize> {
    if !(x >= 1.0) || x.fract() != 0.0 || !x.is_finite() {
        return Err(invalid("U_c", format!("user counts must be positive integers, got {x}")));
    }
    Ok(x as usize)
}

fn pf_config(cfg: &ExperimentConfig, users: usize, seed: u64) -> PfSimConfig {
    PfSimConfig {
        users,
        window: cfg.pf_window,
        drops: cfg.pf_drops,
        trials_per_drop: cfg.pf_trials,
        speed: cfg.pf_speed,
        carrier_frequency: cfg.pf_carrier,
        seed,
        ..PfSimConfig::default()
    }
}

fn pf_for(cfg: &ExperimentConfig, params: &SystemParams, users: usize) -> Result<PfSimResult> {
    let pf = PfSimConfig {
        bandwidth: params.subchannel_bandwidth,
        ..pf_config(cfg, users, point_seed(cfg.seed, 2, users as u64))
    };
    simulate_pf(params, pf)
}

fn macro_rr_vs_pf(cfg: &ExperimentConfig) -> Result<Vec<(String, Table)>> {
    let p = cfg.params(cfg.scenarios[0])?;
    let analytic = build_macro_env(&p, ANNULI)?.throughput_rr();
    let users = cfg.sweep.iter().map(|&u| user_count(u)).collect::<Result<Vec<_>>>()?;
    let mut main = Table::new(header(cfg.id));
    let mut drops = Table::new(DROP_HEADER.to_vec());
    for u in users {
        let r = pf_for(cfg, &p, u)?;
        main.rows.push(vec![
            u.to_string(),
            num(analytic),
            num(r.throughput_rr),
            num(r.stderr_rr),
            num(r.throughput_pf),
            num(r.stderr_pf),
            num(r.gain()),
        ]);
        for d in &r.drops {
            drops.rows.push(vec![u.to_string(), d.drop.to_string(), num(d.pf), num(d.rr)]);
        }
    }
    Ok(vec![
        (cfg.id.name().to_string(), main),
        (format!("{}_drops", cfg.id.name()), drops),
    ])
}

fn femto_tpt(cfg: &ExperimentConfig) -> Result<Vec<(String, Table)>> {
    let mut jobs = Vec::new();
    for &s in &cfg.scenarios {
        for (i, &n_f) in cfg.sweep.iter().enumerate() {
            jobs.push((s, i, n_f));
        }
    }
    let rows = jobs
        .par_iter()
        .map(|&(s, i, n_f)| -> Result<Vec<String>> {
            let p = cfg.params(s)?.with_femtos(n_f);
            p.validate()?;
            let env = FemtoEnv::new(&p, cfg.rho_f)?;
            let seed = point_seed(cfg.seed, 3 + s as u64, i as u64);
            let mc = simulate_femto_sir(&env, cfg.samples, seed)?;
            Ok(vec![
                s.label().into(),
                num(n_f),
                num(cfg.rho_f),
                num(env.femto_throughput()),
                num(mc.throughput),
                num(mc.stderr),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(header(cfg.id));
    t.rows = rows;
    Ok(single(cfg, t))
}

fn femto_ase(cfg: &ExperimentConfig) -> Result<Vec<(String, Table)>> {
    let mut jobs = Vec::new();
    for &s in &cfg.scenarios {
        for &n_f in &cfg.sweep {
            jobs.push((s, n_f));
        }
    }
    let blocks = jobs
        .par_iter()
        .map(|&(s, n_f)| -> Result<Vec<Vec<String>>> {
            if !(n_f > 0.0) {
                return Err(invalid("N_f", "femto_ase needs N_f > 0"));
            }
            let p = cfg.params(s)?.with_femtos(n_f);
            p.validate()?;
            let env = FemtoEnv::new(&p, 1.0)?;
            let opt = crate::femtocell::optimize_faloha(&env)?;
            (1..=cfg.thetas)
                .map(|k| {
                    let theta = k as f64 / cfg.thetas as f64;
                    let e = env.with_rho_f(theta)?;
                    let ase = env.lambda_f * theta * e.femto_throughput();
                    Ok(vec![s.label().into(), num(n_f), num(theta), num(ase), num(opt.rho_f), num(opt.ase)])
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(header(cfg.id));
    t.rows = blocks.concat();
    Ok(single(cfg, t))
}

/// Macrocell subchannel throughput for each scheduler: the analytical RR
/// value, or the PF simulation at the nearest integer `U_c`.
struct MacroThroughput {
    rr: f64,
    pf: BTreeMap<usize, f64>,
}

impl MacroThroughput {
    fn get(&self, kind: SchedulerKind, u_c: f64) -> Result<f64> {
        match kind {
            SchedulerKind::RoundRobin => Ok(self.rr),
            SchedulerKind::ProportionalFair => self
                .pf
                .get(&rounded_users(u_c)?)
                .copied()
                .ok_or_else(|| Error::Degenerate(format!("no PF estimate for U_c = {u_c}"))),
        }
    }
}

fn rounded_users(u_c: f64) -> Result<usize> {
    if !(u_c >= 0.5) {
        return Err(Error::Degenerate(format!("U_c = {u_c} leaves no macrocell users")));
    }
    Ok(u_c.round() as usize)
}

struct Point2 {
    scenario: Scenario,
    scheduler: SchedulerKind,
    qos: QosConfig,
    n_f: f64,
}

fn two_tier(cfg: &ExperimentConfig) -> Result<Vec<(String, Table)>> {
    let id = cfg.id;
    // Axes: η is swept for allocation_vs_eta, N_f otherwise.
    let (etas, femtos): (Vec<QosConfig>, Vec<f64>) = if id == ExperimentId::AllocationVsEta {
        let etas = cfg.sweep.iter().map(|&e| QosConfig::new(e)).collect::<Result<Vec<_>>>()?;
        (etas, cfg.femtos.clone())
    } else {
        (cfg.etas.clone(), cfg.sweep.clone())
    };
    let mut points = Vec::new();
    for &scenario in &cfg.scenarios {
        for &scheduler in &cfg.schedulers {
            if id == ExperimentId::AllocationVsEta {
                for &n_f in &femtos {
                    for &qos in &etas {
                        points.push(Point2 { scenario, scheduler, qos, n_f });
                    }
                }
            } else {
                for &qos in &etas {
                    for &n_f in &femtos {
                        points.push(Point2 { scenario, scheduler, qos, n_f });
                    }
                }
            }
        }
    }

    let base = cfg.params(cfg.scenarios[0])?;
    let mut tc = MacroThroughput {
        rr: build_macro_env(&base, ANNULI)?.throughput_rr(),
        pf: BTreeMap::new(),
    };
    if cfg.schedulers.contains(&SchedulerKind::ProportionalFair) {
        for &n_f in &femtos {
            let u = rounded_users(base.clone().with_femtos(n_f).macro_users())?;
            if let std::collections::btree_map::Entry::Vacant(e) = tc.pf.entry(u) {
                e.insert(pf_for(cfg, &base, u)?.throughput_pf);
            }
        }
    }

    // One F-ALOHA optimum per (scenario, N_f).
    let mut femto_jobs: Vec<(Scenario, f64)> = Vec::new();
    for &s in &cfg.scenarios {
        for &n_f in &femtos {
            femto_jobs.push((s, n_f));
        }
    }
    let optima = femto_jobs
        .par_iter()
        .map(|&(s, n_f)| -> Result<(FemtoKey, (f64, f64))> {
            let p = cfg.params(s)?.with_femtos(n_f);
            p.validate()?;
            let o = femto_optimum(&p)?;
            Ok(((s.label(), n_f.to_bits()), (o.rho_f, o.throughput)))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;

    let results = points
        .iter()
        .map(|pt| -> Result<AllocationResult> {
            let p = cfg.params(pt.scenario)?.with_femtos(pt.n_f);
            let (rho_f, t_f) = optima[&(pt.scenario.label(), pt.n_f.to_bits())];
            let u_c = p.macro_users();
            optimal_rho_closed_form(&TierInputs {
                qos: pt.qos,
                t_c: tc.get(pt.scheduler, u_c)?,
                u_c,
                u_f: p.users_per_femto,
                rho_f,
                t_f,
                n_f: pt.n_f,
                area: p.cell_area(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut t = Table::new(header(id));
    for (k, (pt, r)) in points.iter().zip(&results).enumerate() {
        let tags = [pt.scenario.label().to_string(), pt.scheduler.label().to_string()];
        let row = match id {
            ExperimentId::AllocationVsEta => vec![
                num(pt.n_f),
                num(pt.qos.eta()),
                num(r.rho),
                num(r.femto_share()),
                num(r.rho_f),
                num(r.t_c),
                num(r.t_f),
                num(r.t_cu),
                num(r.t_fu),
                num(r.ase),
            ],
            ExperimentId::TwoTierAse => vec![
                num(pt.qos.eta()),
                num(pt.n_f),
                num(r.u_c),
                num(r.rho),
                num(r.rho_f),
                num(r.t_c),
                num(r.t_f),
                num(r.ase),
            ],
            ExperimentId::FemtoUserTpt => {
                let next = points.get(k + 1).filter(|n| {
                    n.scenario == pt.scenario && n.scheduler == pt.scheduler && n.qos == pt.qos
                });
                let class = match next {
                    Some(_) => {
                        let h = &results[k + 1];
                        let at = |r: &AllocationResult| OperatingPoint { rho: r.rho, rho_f: r.rho_f, t_f: r.t_f };
                        classify_utilization(at(r), at(h)).kind.label()
                    }
                    None => "none",
                };
                vec![
                    num(pt.qos.eta()),
                    num(pt.n_f),
                    num(r.rho),
                    num(r.rho_f),
                    num(r.t_f),
                    num(r.per_femto()),
                    num(r.t_fu),
                    class.into(),
                ]
            }
            ExperimentId::RequiredSpectrum => {
                let eta = pt.qos.eta();
                let d_f = cfg.d_f.unwrap_or(cfg.d_c * (1.0 - eta) / eta);
                let p = cfg.params(pt.scenario)?;
                let s = required_spectrum(r, cfg.d_c, d_f, p.subchannel_bandwidth)?;
                vec![
                    num(eta),
                    num(pt.n_f),
                    num(r.rho),
                    num(r.t_c),
                    num(cfg.d_c),
                    num(d_f),
                    num(s.total_hz),
                    num(s.subchannels),
                    s.forms_agree.to_string(),
                ]
            }
            _ => unreachable!("not a two-tier experiment"),
        };
        t.rows.push(tags.into_iter().chain(row).collect());
    }
    Ok(single(cfg, t))
}
