//! End-to-end acceptance checks. Runs without the libtest harness so every
//! criterion prints its own PASS/FAIL line; exits non-zero if any fails.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tierwave::allocation::{optimal_rho_closed_form, plan, required_spectrum, TierInputs};
use tierwave::cli::{self, Args, ExperimentConfig, ExperimentId};
use tierwave::config::{QosConfig, Scenario, SystemParams};
use tierwave::femtocell::{
    classify_utilization, optimize_faloha, simulate_femto_sir, simulate_shot_noise, FemtoEnv, OperatingPoint,
    UtilizationKind,
};
use tierwave::macrocell::{build_macro_env, c_function};
use tierwave::numerics::ks_distance;
use tierwave::scheduler::{simulate_pf, simulate_rr, PfSimConfig, RrSimConfig};

const HA: Scenario = Scenario::HighAttenuation;
const LA: Scenario = Scenario::LowAttenuation;

type Criterion = (u32, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&x)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn q(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

#[allow(clippy::too_many_arguments)]
fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

fn adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(&f, a, b, fa, fm, fb, whole, tol, 50)
}

fn appendix_identity() -> Outcome {
    // With R = 1 the integrand is 2 r Q(a + b ln r); split at small r where
    // the log varies fastest.
    let mut worst: f64 = 0.0;
    for i in 0..9 {
        let a = -4.0 + i as f64;
        for b in [0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0] {
            let f = |r: f64| if r == 0.0 { 0.0 } else { 2.0 * r * q(a + b * r.ln()) };
            let oracle = adaptive(f, 0.0, 1e-3, 1e-15) + adaptive(f, 1e-3, 1.0, 1e-14);
            worst = worst.max((c_function(a, b).unwrap() - oracle).abs());
        }
    }
    outcome(worst <= 1e-8, format!("max |err| {worst:.2e} on 9x8 grid (tol 1e-8)"))
}

fn macro_theory_vs_mc() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for alpha in [3.5, 4.0, 4.5] {
        let mut p = SystemParams::reference(HA);
        p.alpha_c = alpha;
        let env = build_macro_env(&p, 50).unwrap();
        let analytic = env.throughput_rr();
        let mut mc = simulate_rr(&p, RrSimConfig::new(100_000, 1)).unwrap();
        let ks = ks_distance(&mut mc.sir, |g| if g > 0.0 { env.cell_avg_sir_cdf(g).unwrap() } else { 0.0 });
        let err = rel(analytic, mc.throughput);
        pass &= err <= 0.10 && ks <= 0.03;
        parts.push(format!("a={alpha}: T_c {analytic:.4} vs {:.4} ({:.1}%), KS {ks:.4}", mc.throughput, 100.0 * err));
    }
    outcome(pass, parts.join("; "))
}

fn pf_gain() -> Outcome {
    let cfg = PfSimConfig {
        users: 32,
        drops: 100,
        trials_per_drop: 2000,
        seed: 1,
        ..PfSimConfig::default()
    };
    let r = simulate_pf(&SystemParams::reference(HA), cfg).unwrap();
    let g = r.gain();
    outcome(
        within(g, 1.7, 2.3),
        format!("PF {:.4} / RR {:.4} = {g:.3} (want [1.7, 2.3])", r.throughput_pf, r.throughput_rr),
    )
}

fn tail_dominance() -> Outcome {
    let env = FemtoEnv::new(&SystemParams::reference(HA).with_femtos(50.0), 1.0).unwrap();
    let mut violations = 0;
    for k in 0..100 {
        let y = 10f64.powf(-14.0 + 0.1 * k as f64);
        let lb = env.interference_tail_lb(y).unwrap();
        let exact = env.interference_tail_exact4(y).unwrap();
        if lb > exact + 1e-12 {
            violations += 1;
        }
    }
    let mut draws = simulate_shot_noise(&env, 100_000, 1).unwrap();
    let ks = ks_distance(&mut draws, |y| if y > 0.0 { 1.0 - env.interference_tail_exact4(y).unwrap() } else { 0.0 });
    outcome(
        violations == 0 && ks <= 0.03,
        format!("{violations} bound violations on 100 points; exact vs MC KS {ks:.4} (tol 0.03)"),
    )
}

fn femto_throughput() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (s, lo, hi) in [(HA, 3.8, 5.2), (LA, 0.4, 0.6)] {
        let env = FemtoEnv::new(&SystemParams::reference(s).with_femtos(50.0), 1.0).unwrap();
        let mc = simulate_femto_sir(&env, 20_000, 1).unwrap();
        let analytic = env.femto_throughput();
        let ok = within(mc.throughput, lo, hi) && rel(analytic, mc.throughput) <= 0.20;
        pass &= ok;
        parts.push(format!(
            "{s}: MC {:.4} (want [{lo}, {hi}]) analytic {analytic:.4} ({:.1}%)",
            mc.throughput,
            100.0 * rel(analytic, mc.throughput)
        ));
    }
    outcome(pass, parts.join("; "))
}

fn faloha(n_f: f64) -> tierwave::femtocell::FalohaOptimum {
    let env = FemtoEnv::new(&SystemParams::reference(LA).with_femtos(n_f), 1.0).unwrap();
    optimize_faloha(&env).unwrap()
}

fn ase_plateau() -> Outcome {
    let ases: Vec<f64> = [50.0, 100.0, 150.0].iter().map(|&n| faloha(n).ase).collect();
    let max = ases.iter().cloned().fold(f64::MIN, f64::max);
    let min = ases.iter().cloned().fold(f64::MAX, f64::min);
    let at100 = faloha(100.0).rho_f;
    let at10 = faloha(10.0).rho_f;
    let pass = ases.iter().all(|&a| within(a, 1.0e-4, 1.4e-4))
        && (max - min) / max <= 0.05
        && within(at100, 0.25, 0.35)
        && at10 == 1.0;
    outcome(
        pass,
        format!(
            "max ASE {:.4e}/{:.4e}/{:.4e} (spread {:.2}%); rho_f*(100) {at100:.3}; rho_f*(10) {at10}",
            ases[0],
            ases[1],
            ases[2],
            100.0 * (max - min) / max
        ),
    )
}

fn grid_best(inputs: &TierInputs, n: usize) -> Option<f64> {
    let r = inputs.qos.eta() / (1.0 - inputs.qos.eta());
    let mut best: Option<(f64, f64)> = None;
    for i in 0..=n {
        let rho = i as f64 / n as f64;
        let cu = rho * inputs.t_c / inputs.u_c;
        let fu = (1.0 - rho) * inputs.rho_f * inputs.t_f / inputs.u_f;
        if cu < r * fu || fu < r * cu {
            continue;
        }
        let v = rho * inputs.t_c + (1.0 - rho) * inputs.n_f * inputs.rho_f * inputs.t_f;
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((rho, v));
        }
    }
    best.map(|b| b.0)
}

fn allocation() -> Outcome {
    let tc = build_macro_env(&SystemParams::reference(LA), 50).unwrap().throughput_rr();
    let a = plan(&SystemParams::reference(LA).with_femtos(100.0), tc, QosConfig::new(0.5).unwrap()).unwrap();
    let b = plan(&SystemParams::reference(LA).with_femtos(50.0), tc, QosConfig::new(0.01).unwrap()).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 10_000;
    let mut worst: f64 = 0.0;
    let mut missing = 0;
    for _ in 0..20 {
        let inputs = TierInputs {
            qos: QosConfig::new(rng.random_range(0.01..0.45)).unwrap(),
            t_c: rng.random_range(0.5..4.0),
            u_c: rng.random_range(20.0..300.0),
            u_f: rng.random_range(1.0..4.0),
            rho_f: rng.random_range(0.1..1.0),
            t_f: rng.random_range(0.3..5.0),
            n_f: rng.random_range(5.0..150.0),
            area: SystemParams::reference(LA).cell_area(),
        };
        let closed = optimal_rho_closed_form(&inputs).unwrap().rho;
        match grid_best(&inputs, n) {
            Some(g) => worst = worst.max((closed - g).abs() * n as f64),
            None => missing += 1,
        }
    }
    let pass = within(a.rho, 0.85, 0.95) && within(b.femto_share(), 0.6, 0.8) && worst <= 1.0 && missing == 0;
    outcome(
        pass,
        format!(
            "eta=0.5 rho {:.4}; LA eta=0.01 N_f=50 1-rho {:.4}; closed vs grid worst {worst:.3} cells, {missing} empty grids",
            a.rho,
            b.femto_share()
        ),
    )
}

fn per_femto_sweep(s: Scenario, eta: f64, tc: f64) -> Vec<OperatingPoint> {
    (0..7)
        .map(|k| {
            let p = SystemParams::reference(s).with_femtos(10.0 + 20.0 * k as f64);
            let a = plan(&p, tc, QosConfig::new(eta).unwrap()).unwrap();
            OperatingPoint {
                rho: a.rho,
                rho_f: a.rho_f,
                t_f: a.t_f,
            }
        })
        .collect()
}

fn all_pairs(points: &[OperatingPoint], want: UtilizationKind) -> bool {
    points.windows(2).all(|w| classify_utilization(w[0], w[1]).kind == want)
}

fn required_spectrum_ratio() -> Outcome {
    let p = SystemParams::reference(HA).with_femtos(50.0);
    let qos = QosConfig::new(0.01).unwrap();
    let tc_rr = build_macro_env(&p, 50).unwrap().throughput_rr();
    let cfg = PfSimConfig {
        users: p.macro_users().round() as usize,
        drops: 100,
        trials_per_drop: 2000,
        seed: 1,
        ..PfSimConfig::default()
    };
    let tc_pf = simulate_pf(&p, cfg).unwrap().throughput_pf;
    let wf = |tc: f64| {
        let a = plan(&p, tc, qos).unwrap();
        required_spectrum(&a, 0.1e6, 10e6, p.subchannel_bandwidth).unwrap().total_hz
    };
    let ratio = wf(tc_pf) / wf(tc_rr);

    let la = all_pairs(&per_femto_sweep(LA, 0.01, build_macro_env(&SystemParams::reference(LA), 50).unwrap().throughput_rr()), UtilizationKind::FullyUtilized);
    let ha = all_pairs(&per_femto_sweep(HA, 0.5, tc_rr), UtilizationKind::SubUtilized);
    outcome(
        within(ratio, 0.4, 0.6) && la && ha,
        format!("WF(PF)/WF(RR) {ratio:.3} (want [0.4, 0.6]); LA/0.01 fully-utilized {la}; HA/0.5 sub-utilized {ha}"),
    )
}

fn determinism() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    let mut mismatched = Vec::new();
    let mut files = 0;
    for id in ExperimentId::ALL {
        let args = Args {
            config: None,
            experiment: Some(id.name().into()),
            seed: Some(11),
            out: PathBuf::new(),
            samples: Some(400),
        };
        let cfg = ExperimentConfig::resolve(&args, Default::default()).unwrap();
        let runs: Vec<Vec<(PathBuf, Vec<u8>)>> = (0..2)
            .map(|k| {
                let dir = root.path().join(format!("{}-{k}", id.name()));
                cli::run(&cfg, &dir)
                    .unwrap()
                    .files
                    .into_iter()
                    .map(|(path, _)| (PathBuf::from(path.file_name().unwrap()), fs::read(&path).unwrap()))
                    .collect()
            })
            .collect();
        files += runs[0].len();
        if runs[0] != runs[1] {
            mismatched.push(id.name());
        }
    }
    outcome(
        mismatched.is_empty(),
        format!("{files} CSV files over {} experiments; mismatched: {mismatched:?}", ExperimentId::ALL.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (1, "annulus integral identity", appendix_identity),
        (2, "macrocell theory vs Monte Carlo", macro_theory_vs_mc),
        (3, "proportional-fair gain", pf_gain),
        (4, "interference tail bound and Levy law", tail_dominance),
        (5, "femtocell throughput", femto_throughput),
        (6, "ASE plateau and access fraction", ase_plateau),
        (7, "spectrum allocation", allocation),
        (8, "required spectrum and utilization", required_spectrum_ratio),
        (9, "deterministic CSV output", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (n, name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str()) || *f == n.to_string()) {
            continue;
        }
        let t = Instant::now();
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n} {name}: {verdict} ({}) [{:.1}s]", o.detail, t.elapsed().as_secs_f64());
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {failed} failed");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
