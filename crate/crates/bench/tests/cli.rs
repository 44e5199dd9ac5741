use singctrl_bench::experiments::{cmd_cascade, cmd_control, cmd_table1, fit_rates, ExperimentRow, TABLE1_HEADER};
use singctrl_bench::output::read_signal;
use singctrl_bench::verify::dalembert_suite;
use singctrl_bench::ExperimentConfig;
use singctrl_core::signals::l2_norm;
use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("singctrl-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn config(text: &str, out: &std::path::Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::parse(text).unwrap();
    c.out = out.to_path_buf();
    c
}

#[test]
fn table1_is_byte_reproducible() {
    let text = "eps = 1e-2\nwave_elements = 100\ntimings = false\n";
    let (a, b) = (scratch("det-a"), scratch("det-b"));
    let mut ca = config(text, &a);
    ca.jobs = 2;
    ca.eps = Some(vec![1e-2, 1e-2]);
    cmd_table1(&ca).unwrap();
    cmd_table1(&config(text, &b)).unwrap();
    for f in ["table1.csv", "rates.csv", "v0.csv", "v1.csv", "v2.csv", "sqrt_eps_v_1e-2.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let table = fs::read_to_string(a.join("table1.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some(TABLE1_HEADER));
    assert_eq!(lines.count(), 1);
    assert!(!table.contains('\r'));
}

#[test]
fn zero_data_writes_zero_controls() {
    let dir = scratch("zero");
    let res = cmd_cascade(&config("data = zero\nwave_elements = 60\n", &dir)).unwrap();
    assert_eq!(res.depth(), 2);
    for j in 0..3 {
        let s = read_signal(&dir.join(format!("v{j}.csv"))).unwrap();
        assert!(s.values().iter().all(|v| *v == 0.0));
    }
}

#[test]
fn cascade_files_round_trip_exactly() {
    let dir = scratch("round");
    let res = cmd_cascade(&config("wave_elements = 80\n", &dir)).unwrap();
    for (j, level) in res.levels.iter().enumerate() {
        let back = read_signal(&dir.join(format!("v{j}.csv"))).unwrap();
        assert_eq!(back.grid(), level.control.grid());
        assert_eq!(back.values(), level.control.values());
    }
}

#[test]
fn default_cascade_reproduces_the_wave_norm() {
    let dir = scratch("v0");
    cmd_cascade(&config("", &dir)).unwrap();
    let v0 = read_signal(&dir.join("v0.csv")).unwrap();
    let n = l2_norm(&v0);
    assert!((n / 0.3498 - 1.0).abs() <= 0.02, "{n}");
}

#[test]
fn single_eps_row_matches_the_reference_norm() {
    let dir = scratch("one");
    let (rows, _) = cmd_table1(&config("eps = 1e-3\n", &dir)).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].failure.is_none());
    assert!((rows[0].norm / 0.3542 - 1.0).abs() <= 0.05, "{}", rows[0].norm);
}

#[test]
fn unresolved_mesh_is_recorded_not_fatal() {
    let dir = scratch("coarse");
    let c = config("eps = 1e-2, 1e-3\nbeam_elements = 40\nwave_elements = 60\n", &dir);
    let (rows, _) = cmd_table1(&c).unwrap();
    assert!(rows[0].failure.is_none(), "{:?}", rows[0].failure);
    let why = rows[1].failure.as_deref().expect("1e-3 needs h <= sqrt(eps)/4");
    assert!(why.contains("resolve"), "{why}");
    assert!(rows[1].norm.is_nan());
    assert!(cmd_control(&c, 1e-3).is_err());
}

#[test]
fn rates_use_the_three_smallest_successful_rows() {
    let row = |eps: f64, e: f64| ExperimentRow {
        eps,
        iterations: 1,
        norm: 0.3,
        errors: [e, e * e, e * e * e],
        seconds: 0.0,
        control: None,
        failure: None,
    };
    let mut rows: Vec<ExperimentRow> = [1e-1, 1e-2, 1e-3, 1e-4].iter().map(|&e: &f64| row(e, e.sqrt())).collect();
    rows.push(ExperimentRow { failure: Some("x".into()), ..row(1e-5, 1.0) });
    let rates = fit_rates(&rows);
    assert_eq!((rates[0].eps_min, rates[0].eps_max), (1e-4, 1e-2));
    for (k, r) in rates.iter().enumerate() {
        assert!((r.slope.unwrap() - 0.5 * (k + 1) as f64).abs() < 1e-12);
    }
}

#[test]
fn broken_courant_ratio_fails_the_exactness_suite() {
    assert!(dalembert_suite(1.0).passed);
    let s = dalembert_suite(1.1);
    assert!(!s.passed);
    assert!(s.detail.contains("Courant"), "{}", s.detail);
}

#[test]
fn binary_refuses_an_unresolved_mesh() {
    let dir = scratch("bin");
    fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, "beam_elements = 20 # too coarse for 1e-4\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_singctrl"))
        .args(["control", "--eps", "1e-4", "--config"])
        .arg(&cfg)
        .env("SINGCTRL_OUT", &dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not resolve the layer"));
}

#[test]
fn binary_writes_the_cascade_to_the_env_directory() {
    let dir = scratch("env");
    fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, "wave_elements = 60\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_singctrl"))
        .args(["cascade", "--config"])
        .arg(&cfg)
        .env("SINGCTRL_OUT", &dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("v2.csv").exists());
}
