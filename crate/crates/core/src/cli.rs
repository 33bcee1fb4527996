//! Command-line front end: flags, the TOML experiment file and the run
//! driver that writes one CSV per experiment.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Parser;
use serde::Deserialize;

use crate::config::{QosConfig, Scenario, SystemParams};
use crate::error::{Error, Result};
use crate::experiments;

pub const THREADS_ENV: &str = "TIERWAVE_THREADS";
/// MC sample budget the PF drop count is scaled against.
pub const REFERENCE_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, Parser)]
#[command(name = "tierwave", version, about = "Two-tier spectrum allocation experiments")]
pub struct Args {
    /// TOML experiment file.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Experiment id; overrides the config file.
    #[arg(long, value_name = "ID")]
    pub experiment: Option<String>,
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output directory for CSV files.
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Monte Carlo sample budget; PF drops scale with it.
    #[arg(long, value_name = "N")]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentId {
    MacroTcVsAlpha,
    MacroRrVsPf,
    FemtoTpt,
    FemtoAse,
    AllocationVsEta,
    TwoTierAse,
    FemtoUserTpt,
    RequiredSpectrum,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 8] = [
        ExperimentId::MacroTcVsAlpha,
        ExperimentId::MacroRrVsPf,
        ExperimentId::FemtoTpt,
        ExperimentId::FemtoAse,
        ExperimentId::AllocationVsEta,
        ExperimentId::TwoTierAse,
        ExperimentId::FemtoUserTpt,
        ExperimentId::RequiredSpectrum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::MacroTcVsAlpha => "macro_tc_vs_alpha",
            ExperimentId::MacroRrVsPf => "macro_rr_vs_pf",
            ExperimentId::FemtoTpt => "femto_tpt",
            ExperimentId::FemtoAse => "femto_ase",
            ExperimentId::AllocationVsEta => "allocation_vs_eta",
            ExperimentId::TwoTierAse => "two_tier_ase",
            ExperimentId::FemtoUserTpt => "femto_user_tpt",
            ExperimentId::RequiredSpectrum => "required_spectrum",
        }
    }

    /// What the `sweep` list sweeps.
    pub fn sweep_axis(self) -> &'static str {
        match self {
            ExperimentId::MacroTcVsAlpha => "alpha_c",
            ExperimentId::MacroRrVsPf => "U_c",
            ExperimentId::AllocationVsEta => "eta",
            _ => "N_f",
        }
    }

    pub fn default_sweep(self) -> Vec<f64> {
        match self {
            ExperimentId::MacroTcVsAlpha => vec![3.0, 3.5, 4.0, 4.5, 5.0],
            ExperimentId::MacroRrVsPf => vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
            ExperimentId::FemtoTpt => (1..=15).map(|k| 10.0 * k as f64).collect(),
            ExperimentId::FemtoAse => vec![10.0, 50.0, 100.0, 150.0],
            ExperimentId::AllocationVsEta => vec![0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5],
            _ => vec![10.0, 30.0, 50.0, 70.0, 90.0, 110.0, 130.0],
        }
    }

    fn default_scenarios(self) -> Vec<Scenario> {
        match self {
            ExperimentId::FemtoAse => vec![Scenario::LowAttenuation],
            _ => vec![Scenario::HighAttenuation, Scenario::LowAttenuation],
        }
    }

    fn default_schedulers(self) -> Vec<SchedulerKind> {
        match self {
            ExperimentId::AllocationVsEta | ExperimentId::FemtoUserTpt => vec![SchedulerKind::RoundRobin],
            _ => vec![SchedulerKind::RoundRobin, SchedulerKind::ProportionalFair],
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchedulerKind {
    RoundRobin,
    ProportionalFair,
}

impl SchedulerKind {
    pub fn label(self) -> &'static str {
        match self {
            SchedulerKind::RoundRobin => "RR",
            SchedulerKind::ProportionalFair => "PF",
        }
    }
}

impl FromStr for SchedulerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "RR" | "rr" => Ok(SchedulerKind::RoundRobin),
            "PF" | "pf" => Ok(SchedulerKind::ProportionalFair),
            _ => Err(Error::Config(format!("unknown scheduler `{s}` (expected RR or PF)"))),
        }
    }
}

/// Table I names accepted in `[overrides]`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(rename = "R_c")]
    pub r_c: Option<f64>,
    #[serde(rename = "R_f")]
    pub r_f: Option<f64>,
    #[serde(rename = "U")]
    pub u: Option<f64>,
    #[serde(rename = "U_f")]
    pub u_f: Option<f64>,
    #[serde(rename = "N_f")]
    pub n_f: Option<f64>,
    #[serde(rename = "F")]
    pub f: Option<usize>,
    #[serde(rename = "W")]
    pub w: Option<f64>,
    pub alpha_c: Option<f64>,
    pub alpha_f: Option<f64>,
    pub beta_f: Option<f64>,
    #[serde(rename = "P_f_dB")]
    pub p_f_db: Option<f64>,
    #[serde(rename = "sigma_c_dB")]
    pub sigma_c_db: Option<f64>,
    #[serde(rename = "sigma_fi_dB")]
    pub sigma_fi_db: Option<f64>,
    #[serde(rename = "sigma_fo_dB")]
    pub sigma_fo_db: Option<f64>,
    #[serde(rename = "mu_c_dB")]
    pub mu_c_db: Option<f64>,
    #[serde(rename = "mu_fi_dB")]
    pub mu_fi_db: Option<f64>,
    #[serde(rename = "mu_fo_dB")]
    pub mu_fo_db: Option<f64>,
    #[serde(rename = "G_dB")]
    pub g_db: Option<f64>,
    #[serde(rename = "L")]
    pub l: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, mut p: SystemParams) -> SystemParams {
        macro_rules! set {
            ($($field:ident => $target:ident),* $(,)?) => {
                $(if let Some(v) = self.$field { p.$target = v; })*
            };
        }
        set!(
            r_c => macro_radius,
            r_f => femto_radius,
            u => total_users,
            u_f => users_per_femto,
            n_f => femtos_per_cell,
            f => subchannels,
            w => subchannel_bandwidth,
            alpha_c => alpha_c,
            alpha_f => alpha_f,
            beta_f => beta_f,
            p_f_db => penetration_loss_db,
            sigma_c_db => sigma_c_db,
            sigma_fi_db => sigma_fi_db,
            sigma_fo_db => sigma_fo_db,
            mu_c_db => mu_c_db,
            mu_fi_db => mu_fi_db,
            mu_fo_db => mu_fo_db,
            g_db => shannon_gap_db,
            l => levels,
        );
        p
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PfSection {
    pub drops: Option<usize>,
    pub trials: Option<usize>,
    pub window: Option<f64>,
    pub speed: Option<f64>,
    pub carrier_frequency: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub sweep: Option<Vec<f64>>,
    pub scenarios: Option<Vec<String>>,
    pub schedulers: Option<Vec<String>>,
    pub etas: Option<Vec<f64>>,
    pub femtos: Option<Vec<f64>>,
    /// F-ALOHA fraction for `femto_tpt`.
    pub rho_f: Option<f64>,
    /// Access-grid points for `femto_ase`.
    pub thetas: Option<usize>,
    #[serde(rename = "D_c")]
    pub d_c: Option<f64>,
    #[serde(rename = "D_f")]
    pub d_f: Option<f64>,
    #[serde(default)]
    pub pf: PfSection,
    #[serde(default)]
    pub overrides: Overrides,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub id: ExperimentId,
    pub seed: u64,
    pub samples: usize,
    pub sweep: Vec<f64>,
    pub scenarios: Vec<Scenario>,
    pub schedulers: Vec<SchedulerKind>,
    pub etas: Vec<QosConfig>,
    pub femtos: Vec<f64>,
    pub rho_f: f64,
    pub thetas: usize,
    pub d_c: f64,
    pub d_f: Option<f64>,
    pub pf_drops: usize,
    pub pf_trials: usize,
    pub pf_window: f64,
    pub pf_speed: f64,
    pub pf_carrier: f64,
    pub overrides: Overrides,
}

fn sorted(mut v: Vec<f64>, what: &str) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::Config(format!("{what} must not be empty")));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Config(format!("{what} must be finite")));
    }
    v.sort_by(f64::total_cmp);
    v.dedup();
    Ok(v)
}

impl ExperimentConfig {
    pub fn resolve(args: &Args, file: ConfigFile) -> Result<Self> {
        let name = args
            .experiment
            .clone()
            .or(file.experiment.clone())
            .ok_or_else(|| Error::Config("no experiment given (use --experiment or `experiment =`)".into()))?;
        let id: ExperimentId = name.parse()?;
        let samples = args.samples.or(file.samples).unwrap_or(REFERENCE_SAMPLES);
        if samples == 0 {
            return Err(Error::Config("samples must be >= 1".into()));
        }
        let scenarios = match file.scenarios {
            Some(v) => v.iter().map(|s| s.parse()).collect::<Result<Vec<Scenario>>>()?,
            None => id.default_scenarios(),
        };
        let schedulers = match file.schedulers {
            Some(v) => v.iter().map(|s| s.parse()).collect::<Result<Vec<SchedulerKind>>>()?,
            None => id.default_schedulers(),
        };
        if scenarios.is_empty() || schedulers.is_empty() {
            return Err(Error::Config("scenarios and schedulers must not be empty".into()));
        }
        let etas = sorted(file.etas.unwrap_or_else(|| vec![0.01, 0.5]), "etas")?
            .into_iter()
            .map(QosConfig::new)
            .collect::<Result<Vec<_>>>()?;
        let pf_drops = file
            .pf
            .drops
            .unwrap_or_else(|| (500 * samples).div_ceil(REFERENCE_SAMPLES).max(1));
        Ok(Self {
            id,
            seed: args.seed.or(file.seed).unwrap_or(1),
            samples,
            sweep: sorted(file.sweep.unwrap_or_else(|| id.default_sweep()), "sweep")?,
            scenarios,
            schedulers,
            etas,
            femtos: sorted(file.femtos.unwrap_or_else(|| vec![50.0, 100.0]), "femtos")?,
            rho_f: file.rho_f.unwrap_or(1.0),
            thetas: file.thetas.unwrap_or(100).max(2),
            d_c: file.d_c.unwrap_or(1e5),
            d_f: file.d_f,
            pf_drops,
            pf_trials: file.pf.trials.unwrap_or(8000),
            pf_window: file.pf.window.unwrap_or(500.0),
            pf_speed: file.pf.speed.unwrap_or(13.34),
            pf_carrier: file.pf.carrier_frequency.unwrap_or(2e9),
            overrides: file.overrides,
        })
    }

    /// Reference parameters for `scenario` with the overrides applied.
    pub fn params(&self, scenario: Scenario) -> Result<SystemParams> {
        let p = self.overrides.apply(SystemParams::reference(scenario));
        p.validate()?;
        Ok(p)
    }
}

/// Column header plus formatted rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

pub struct Output {
    pub files: Vec<(PathBuf, usize)>,
}

/// Runs the configured experiment inside a pool capped by
/// `TIERWAVE_THREADS` and writes its CSV files under `out`.
pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<Output> {
    let pool = thread_pool()?;
    let tables = pool.install(|| experiments::run(cfg))?;
    fs::create_dir_all(out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
    let mut files = Vec::new();
    for (name, table) in tables {
        let path = out.join(format!("{name}.csv"));
        fs::write(&path, table.to_csv()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        files.push((path, table.rows.len()));
    }
    Ok(Output { files })
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n >= 1)
            .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Config(e.to_string()))
}

/// Exit status for an error: 2 for bad input, 1 for everything else.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 1,
        _ => 2,
    }
}

/// Entry point shared by the binary and tests.
pub fn main_with(args: Args) -> std::result::Result<Output, Error> {
    let file = match &args.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let cfg = ExperimentConfig::resolve(&args, file)?;
    run(&cfg, &args.out)
}
