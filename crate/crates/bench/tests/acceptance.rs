//! Acceptance report: one PASS/FAIL line per criterion. A FAIL is reported,
//! not raised; the process aborts only when a computation itself errors.

use singctrl_bench::experiments::{fit_rates, sweep};
use singctrl_bench::verify::{self, SuiteOutcome};
use singctrl_bench::ExperimentConfig;
use singctrl_core::cascade::{composite_error, compute_v0, run_cascade, CascadeInput};
use singctrl_core::signals::{fit_rate, l2_norm};
use std::time::{Duration, Instant};

const WAVE_NORM_REF: f64 = 0.349834;
const WAVE_NORM_TOL: f64 = 0.02;
const WAVE_BUDGET: Duration = Duration::from_secs(30);

/// `(ε, reference ‖√ε v^ε‖)`.
const BEAM_NORM_REF: [(f64, f64); 2] = [(1e-2, 0.2965), (1e-3, 0.3542)];
const BEAM_NORM_TOL: f64 = 0.05;
const BEAM_BUDGET_PER_EPS: Duration = Duration::from_secs(300);

const RATE_EPS: [f64; 3] = [1e-3, 1e-4, 1e-5];
const RATE_WINDOWS: [(f64, f64); 3] = [(0.40, 0.80), (0.80, 1.25), (1.10, 1.60)];
const RATE_BUDGET: Duration = Duration::from_secs(1800);
const RATE_JOBS: usize = 3;

const COMPOSITE_MIN_SLOPE: [f64; 2] = [0.45, 0.65];
const SUITE_BUDGET: Duration = Duration::from_secs(120);

struct Report {
    lines: Vec<(bool, String)>,
}

impl Report {
    fn record(&mut self, passed: bool, line: String) {
        println!("{} {line}", if passed { "PASS" } else { "FAIL" });
        self.lines.push((passed, line));
    }

    fn suite(&mut self, label: &str, s: &SuiteOutcome) {
        if s.tol.is_nan() {
            panic!("{label} {}: computation failed: {}", s.name, s.detail);
        }
        let line = s.line();
        self.record(s.passed, format!("{label} {}", line.split_once(' ').map_or(line.as_str(), |x| x.1)));
    }
}

fn within(measured: f64, reference: f64, tol: f64) -> bool {
    (measured / reference - 1.0).abs() <= tol
}

fn main() {
    let mut report = Report { lines: Vec::new() };
    let config = ExperimentConfig::default();

    let start = Instant::now();
    let v0 = compute_v0(&CascadeInput::standard(0).expect("cascade input")).expect("wave control");
    let norm = l2_norm(&v0.levels[0].control);
    let took = start.elapsed();
    report.record(
        within(norm, WAVE_NORM_REF, WAVE_NORM_TOL) && took <= WAVE_BUDGET,
        format!(
            "[1] wave control norm: {norm:.6} vs {WAVE_NORM_REF} (±{:.0}%), h = 1/{}, {:.1}s <= {}s",
            WAVE_NORM_TOL * 100.0,
            v0.input.grid.n_elem,
            took.as_secs_f64(),
            WAVE_BUDGET.as_secs()
        ),
    );

    let sweep_config =
        ExperimentConfig { eps: Some(vec![1e-2, 1e-3, 1e-4, 1e-5]), jobs: RATE_JOBS, ..config.clone() };
    let start = Instant::now();
    let (_, rows) = sweep(&sweep_config).expect("sweep");
    let sweep_time = start.elapsed();
    for r in &rows {
        if r.norm.is_nan() {
            panic!("beam run at ε = {:e} failed: {:?}", r.eps, r.failure);
        }
    }
    for (eps, reference) in BEAM_NORM_REF {
        let r = rows.iter().find(|r| r.eps == eps).expect("row");
        let ok = within(r.norm, reference, BEAM_NORM_TOL) && r.seconds <= BEAM_BUDGET_PER_EPS.as_secs_f64();
        report.record(
            ok,
            format!(
                "[2] beam control norm at ε = {eps:e}: {:.6} vs {reference} ({:+.1}%, tolerance ±{:.0}%), {} iterations, {:.1}s",
                r.norm,
                100.0 * (r.norm / reference - 1.0),
                BEAM_NORM_TOL * 100.0,
                r.iterations,
                r.seconds
            ),
        );
    }

    let rate_rows: Vec<_> = rows.iter().filter(|r| RATE_EPS.contains(&r.eps)).cloned().collect();
    let rates = fit_rates(&rate_rows);
    for (k, rate) in rates.iter().enumerate() {
        let slope = rate.slope.expect("rate fit");
        let (lo, hi) = RATE_WINDOWS[k];
        let values: Vec<String> = rate_rows.iter().map(|r| format!("{:.3e}", r.errors[k])).collect();
        report.record(
            (lo..=hi).contains(&slope) && sweep_time <= RATE_BUDGET,
            format!(
                "[3] {} slope over ε = 1e-3..1e-5: {slope:.3} in [{lo}, {hi}] (values {}; sweep {:.1}s with {RATE_JOBS} jobs)",
                rate.quantity,
                values.join(", "),
                sweep_time.as_secs_f64()
            ),
        );
    }

    for s in verify::adjoint_suites(&config) {
        report.suite("[4]", &s);
    }
    report.suite("[5]", &verify::layer_scaling_suite(&config));

    let cascade = run_cascade(&CascadeInput::standard(1).expect("cascade input")).expect("cascade");
    for n in 0..2 {
        let pts: Vec<(f64, f64)> =
            RATE_EPS.iter().map(|&e| (e, composite_error(&cascade, e, n).expect("composite").error)).collect();
        let slope = fit_rate(&pts).expect("rate fit");
        let values: Vec<String> = pts.iter().map(|(_, v)| format!("{v:.3e}")).collect();
        report.record(
            slope >= COMPOSITE_MIN_SLOPE[n],
            format!(
                "[6] composite error n = {n}: slope {slope:.3} >= {} (values {})",
                COMPOSITE_MIN_SLOPE[n],
                values.join(", ")
            ),
        );
    }

    let start = Instant::now();
    let mut suites = vec![verify::dalembert_suite(1.0), verify::energy_suite()];
    suites.extend(verify::gradient_suites(config.seed));
    suites.extend(verify::certificate_suites(&config));
    suites.push(verify::reversibility_suite());
    suites.push(verify::linearity_suite(&config));
    let took = start.elapsed();
    for s in &suites {
        report.suite("[7]", s);
    }
    report.record(
        took <= SUITE_BUDGET,
        format!("[7] property suites runtime: {:.1}s <= {}s", took.as_secs_f64(), SUITE_BUDGET.as_secs()),
    );

    let failed = report.lines.iter().filter(|(p, _)| !p).count();
    println!("acceptance: {} criteria lines, {failed} FAIL", report.lines.len());
}
