use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tierwave::cli::ExperimentId;
use tierwave::experiments::header;

fn tierwave(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tierwave"))
        .current_dir(dir)
        .env_remove("TIERWAVE_THREADS")
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn golden_headers() {
    let golden = [
        ("macro_tc_vs_alpha", "alpha_c,tc_analytical,tc_mc,tc_mc_stderr,ks_distance"),
        (
            "macro_rr_vs_pf",
            "u_c,tc_rr_analytical,tc_rr_mc,tc_rr_mc_stderr,tc_pf_mc,tc_pf_mc_stderr,pf_gain",
        ),
        ("femto_tpt", "scenario,n_f,rho_f,tf_analytical,tf_mc,tf_mc_stderr"),
        ("femto_ase", "scenario,n_f,theta,ase,rho_f_star,ase_star"),
        (
            "allocation_vs_eta",
            "scenario,scheduler,n_f,eta,rho,femto_share,rho_f,t_c,t_f,t_cu,t_fu,ase",
        ),
        ("two_tier_ase", "scenario,scheduler,eta,n_f,u_c,rho,rho_f,t_c,t_f,ase"),
        (
            "femto_user_tpt",
            "scenario,scheduler,eta,n_f,rho,rho_f,t_f,per_femto,t_fu,utilization",
        ),
        (
            "required_spectrum",
            "scenario,scheduler,eta,n_f,rho,t_c,d_c,d_f,wf_hz,subchannels,forms_agree",
        ),
    ];
    assert_eq!(golden.len(), ExperimentId::ALL.len());
    for (name, cols) in golden {
        let id: ExperimentId = name.parse().unwrap();
        assert_eq!(header(id).join(","), cols, "{name}");
    }
}

#[test]
fn writes_csv_with_lf_and_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = tierwave(dir.path(), &["--experiment", "femto_ase", "--out", "res", "--seed", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("res/femto_ase.csv")).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.ends_with('\n'));
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), header(ExperimentId::FemtoAse).join(","));
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty());
    for r in rows {
        assert_eq!(r.split(',').count(), 6, "{r}");
        assert!(!r.contains(';'));
    }
}

#[test]
fn config_file_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.toml"),
        "experiment = \"femto_tpt\"\nsamples = 50\nsweep = [20, 10]\nscenarios = [\"HA\"]\n[overrides]\nP_f_dB = 12.0\n",
    )
    .unwrap();
    let out = tierwave(dir.path(), &["--config", "run.toml", "--out", "o"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("o/femto_tpt.csv")).unwrap();
    let n_f: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(n_f, ["10", "20"]);
}

#[test]
fn empty_sweep_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("e.toml"), "experiment = \"femto_ase\"\nsweep = []\n").unwrap();
    let out = tierwave(dir.path(), &["--config", "e.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sweep"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn bad_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(tierwave(dir.path(), &["--experiment", "fig9"]).status.code(), Some(2));
    assert_eq!(tierwave(dir.path(), &[]).status.code(), Some(2));
    fs::write(dir.path().join("u.toml"), "experiment = \"femto_ase\"\n[overrides]\nR_x = 1.0\n").unwrap();
    assert_eq!(tierwave(dir.path(), &["--config", "u.toml"]).status.code(), Some(2));
    let threads = Command::new(env!("CARGO_BIN_EXE_tierwave"))
        .current_dir(dir.path())
        .env("TIERWAVE_THREADS", "zero")
        .args(["--experiment", "femto_ase"])
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, out: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_tierwave"))
            .current_dir(dir.path())
            .env("TIERWAVE_THREADS", threads)
            .args(["--experiment", "macro_tc_vs_alpha", "--samples", "3000", "--out", out])
            .output()
            .unwrap();
        assert!(o.status.success());
        fs::read(dir.path().join(out).join("macro_tc_vs_alpha.csv")).unwrap()
    };
    assert_eq!(run("1", "a"), run("3", "b"));
}
