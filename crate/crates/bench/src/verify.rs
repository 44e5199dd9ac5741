//! Property suites behind `singctrl verify`. None of them sweeps the beam HUM
//! over ε; the only beam HUM solve is a single certified run.

use crate::config::ExperimentConfig;
use crate::experiments::{cascade_input, layer_amplitude, BoxResult};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use singctrl_core::beam::{
    beam_energy, hermite_interpolant, solve_beam, solve_beam_with, BeamMatrices, BeamProblem,
};
use singctrl_core::beam_hum::{
    certify_beam_control, gradient_check_beam, solve_beam_control, unknowns, BeamHumProblem, BEAM_REL_TOL,
};
use singctrl_core::cascade::{adjoint_expansion_check, layer_source_scaling, run_cascade};
use singctrl_core::signals::{fit_rate, Signal, SpaceGrid, TimeGrid};
use singctrl_core::wave::{solve_wave, Direction, WaveInit, WaveProblem, WaveSource};
use singctrl_core::wave_hum::{gradient_check_wave, solve_wave_control, WaveHumProblem, STATE_TOL};
use singctrl_core::{sin4, sin4_dx, CgSettings};

pub const DALEMBERT_TOL: f64 = 1e-12;
pub const ENERGY_DRIFT_TOL: f64 = 1e-8;
pub const GRADIENT_TOL: f64 = 1e-6;
pub const CERTIFICATE_TOL: f64 = 1e-6;
pub const REVERSIBILITY_TOL: f64 = 1e-8;
pub const LINEARITY_TOL: f64 = 1e-9;
pub const LAYER_EXPONENT_MIN: f64 = 0.65;
/// ε of the beam runs in the gradient and certificate suites.
pub const SUITE_EPS: f64 = 0.05;
/// Sweep of the adjoint expansion suite.
pub const ADJOINT_EPS: [f64; 3] = [1e-3, 1e-4, 1e-5];

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub measured: f64,
    pub tol: f64,
    /// True when `measured` must stay at or below `tol`, false for a lower bound.
    pub upper: bool,
    pub passed: bool,
    pub detail: String,
}

impl SuiteOutcome {
    fn below(name: &'static str, measured: f64, tol: f64) -> Self {
        SuiteOutcome { name, measured, tol, upper: true, passed: measured <= tol, detail: String::new() }
    }

    fn above(name: &'static str, measured: f64, tol: f64) -> Self {
        SuiteOutcome { name, measured, tol, upper: false, passed: measured >= tol, detail: String::new() }
    }

    fn errored(name: &'static str, e: impl std::fmt::Display) -> Self {
        SuiteOutcome { name, measured: f64::NAN, tol: f64::NAN, upper: true, passed: false, detail: e.to_string() }
    }

    fn with_detail(mut self, detail: String) -> Self {
        self.detail = detail;
        self
    }

    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        if self.tol.is_nan() {
            return format!("{status} {}: {}", self.name, self.detail);
        }
        let op = if self.upper { "<=" } else { ">=" };
        let mut s = format!("{status} {}: {:.3e} {op} {:.3e}", self.name, self.measured, self.tol);
        if !self.detail.is_empty() {
            s.push_str(&format!(" ({})", self.detail));
        }
        s
    }
}

fn run(name: &'static str, f: impl FnOnce() -> BoxResult<SuiteOutcome>) -> SuiteOutcome {
    f().unwrap_or_else(|e| SuiteOutcome::errored(name, e))
}

/// Odd, 2-periodic extension of a function on `[0, 1]`.
fn odd_periodic(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let y = x.rem_euclid(2.0);
    if y <= 1.0 {
        f(y)
    } else {
        -f(2.0 - y)
    }
}

fn hat(x: f64) -> f64 {
    (1.0 - (4.0 * x - 2.0).abs()).max(0.0)
}

/// Leapfrog against d'Alembert with reflections, on a grid of Courant number `courant`.
pub fn dalembert_suite(courant: f64) -> SuiteOutcome {
    run("wave d'Alembert exactness", || {
        let g = SpaceGrid::new(40)?;
        let t_final = 3.3;
        let steps = (t_final * g.n_elem as f64 / courant).round() as usize;
        let tg = TimeGrid::new(t_final, steps)?;
        let init = WaveInit::Taylor { position: g.sample(hat), velocity: vec![0.0; g.n_nodes()] };
        let u = solve_wave(&WaveProblem::free(g, tg, init)?, Direction::Forward)?;
        let mut worst = 0.0f64;
        for (i, t) in tg.nodes().enumerate() {
            for j in 0..g.n_nodes() {
                let x = g.x(j);
                let exact = 0.5 * (odd_periodic(hat, x - t) + odd_periodic(hat, x + t));
                worst = worst.max((u.at(i, j) - exact).abs());
            }
        }
        Ok(SuiteOutcome::below("wave d'Alembert exactness", worst, DALEMBERT_TOL))
    })
}

/// Clamped bump `x²(1−x)²(c₀ + c₁x)` as Hermite data.
fn clamped(grid: SpaceGrid, c0: f64, c1: f64) -> Vec<f64> {
    let f = move |x: f64| x * x * (1.0 - x).powi(2) * (c0 + c1 * x);
    let df = move |x: f64| {
        (2.0 * x * (1.0 - x).powi(2) - 2.0 * x * x * (1.0 - x)) * (c0 + c1 * x) + x * x * (1.0 - x).powi(2) * c1
    };
    hermite_interpolant(grid, f, df)
}

pub fn energy_suite() -> SuiteOutcome {
    run("beam energy drift", || {
        let g = SpaceGrid::new(40)?;
        let tg = TimeGrid::new(2.5, 500)?;
        let p = BeamProblem::new(0.01, g, tg, clamped(g, 30.0, -10.0), clamped(g, -5.0, 20.0), Signal::zeros(tg))?;
        let mats = BeamMatrices::assemble(g)?;
        let e = beam_energy(&solve_beam_with(&p, Direction::Forward, &mats)?, &mats);
        let e0 = e.values()[0];
        let drift = e.values().iter().map(|v| (v - e0).abs() / e0).fold(0.0, f64::max);
        Ok(SuiteOutcome::below("beam energy drift", drift, ENERGY_DRIFT_TOL))
    })
}

fn random(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn sin4_wave(g: SpaceGrid) -> WaveInit {
    WaveInit::Taylor { position: g.sample(sin4), velocity: vec![0.0; g.n_nodes()] }
}

fn small_beam(settings: CgSettings) -> BoxResult<BeamHumProblem> {
    let g = SpaceGrid::new(20)?;
    let tg = TimeGrid::new(2.5, 250)?;
    let pos = hermite_interpolant(g, sin4, sin4_dx);
    let vel = vec![0.0; pos.len()];
    Ok(BeamHumProblem::new(SUITE_EPS, g, tg, pos, vel, singctrl_core::signals::WeightFn::standard(2.5), settings)?)
}

pub fn gradient_suites(seed: u64) -> [SuiteOutcome; 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wave = run("wave gradient check", || {
        let g = SpaceGrid::new(40)?;
        let p = WaveHumProblem::standard(g, sin4_wave(g), singctrl_core::signals::WeightFn::standard(2.5))?;
        let n = 2 * (g.n_elem - 1);
        let mut worst = 0.0f64;
        for _ in 0..4 {
            let (b, d) = (random(&mut rng, n), random(&mut rng, n));
            worst = worst.max(gradient_check_wave(&p, &b, &d, 1e-5)?);
        }
        Ok(SuiteOutcome::below("wave gradient check", worst, GRADIENT_TOL))
    });
    let beam = run("beam gradient check", || {
        let p = small_beam(CgSettings { rel_tol: BEAM_REL_TOL, state_tol: STATE_TOL, max_iter: 500 })?;
        let n = unknowns(&p);
        let mut worst = 0.0f64;
        for _ in 0..3 {
            let (b, d) = (random(&mut rng, n), random(&mut rng, n));
            worst = worst.max(gradient_check_beam(&p, &b, &d, 1e-5)?);
        }
        Ok(SuiteOutcome::below("beam gradient check", worst, GRADIENT_TOL))
    });
    [wave, beam]
}

/// Final-state certificates of a converged wave HUM run, the three cascade
/// levels and one beam HUM run.
pub fn certificate_suites(c: &ExperimentConfig) -> [SuiteOutcome; 3] {
    let wave = run("wave HUM certificate", || {
        let g = SpaceGrid::new(200)?;
        // The final-state rule alone decides convergence here.
        let settings = CgSettings { rel_tol: 1e-14, state_tol: STATE_TOL, max_iter: 4 * g.n_elem };
        let p = WaveHumProblem::new(g, sin4_wave(g), singctrl_core::signals::WeightFn::standard(2.5), settings)?;
        let r = solve_wave_control(&p)?;
        let op = p.operator()?;
        let u = solve_wave(
            &WaveProblem::new(g, p.tgrid(), sin4_wave(g), Signal::zeros(p.tgrid()), r.control.clone(), WaveSource::None)?,
            Direction::Forward,
        )?;
        let cert = op.state_norm(&op.final_pair(&u));
        let s = SuiteOutcome::below("wave HUM certificate", cert, CERTIFICATE_TOL);
        Ok(s.with_detail(format!("{} iterations, converged {}", r.iterations, r.converged)))
    });
    let cascade = run("cascade level certificates", || {
        let res = run_cascade(&cascade_input(c, 2)?)?;
        let worst = res.levels.iter().map(|l| l.final_residual).fold(0.0, f64::max);
        let all = res.levels.iter().all(|l| l.converged);
        Ok(SuiteOutcome::below("cascade level certificates", worst, CERTIFICATE_TOL)
            .with_detail(format!("all converged {all}")))
    });
    let beam = run("beam HUM certificate", || {
        let p = BeamHumProblem::standard(SUITE_EPS, (sin4, sin4_dx), (|_| 0.0, |_| 0.0), c.weight())?;
        let r = solve_beam_control(&p)?;
        let cert = certify_beam_control(&p, &r.control)?;
        Ok(SuiteOutcome::below("beam HUM certificate", cert, CERTIFICATE_TOL)
            .with_detail(format!("ε = {SUITE_EPS}, {} iterations, converged {}", r.iterations, r.converged)))
    });
    [wave, cascade, beam]
}

pub fn reversibility_suite() -> SuiteOutcome {
    run("time reversibility", || {
        let g = SpaceGrid::new(64)?;
        let tg = TimeGrid::new(2.5, 160)?;
        let init = WaveInit::Taylor { position: g.sample(sin4), velocity: g.sample(|x| x * (1.0 - x)) };
        let u = solve_wave(&WaveProblem::free(g, tg, init)?, Direction::Forward)?;
        let (a, b) = u.final_levels();
        let back = WaveProblem::free(g, tg, WaveInit::Levels { first: b.to_vec(), second: a.to_vec() })?;
        let v = solve_wave(&back, Direction::Backward)?;
        let mut worst = 0.0f64;
        for i in 0..2 {
            worst = u.row(i).iter().zip(v.row(i)).fold(worst, |m, (p, q)| m.max((p - q).abs()));
        }

        let bg = SpaceGrid::new(40)?;
        let btg = TimeGrid::new(2.5, 500)?;
        let (p0, v0) = (clamped(bg, 30.0, -10.0), clamped(bg, -5.0, 20.0));
        let ctl = Signal::from_fn(btg, |t| (t * (2.5 - t)).powi(2) * t.sin());
        let w = solve_beam(&BeamProblem::new(0.01, bg, btg, p0.clone(), v0.clone(), ctl.clone())?, Direction::Forward)?;
        let m = btg.n_steps;
        let back = BeamProblem::new(0.01, bg, btg, w.displacement(m).to_vec(), w.velocity(m).to_vec(), ctl)?;
        let z = solve_beam(&back, Direction::Backward)?;
        let scale = p0.iter().chain(&v0).fold(0.0f64, |a, b| a.max(b.abs()));
        let beam_gap = z.displacement(0).iter().zip(&p0).chain(z.velocity(0).iter().zip(&v0))
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()))
            / scale;
        Ok(SuiteOutcome::below("time reversibility", worst.max(beam_gap), REVERSIBILITY_TOL)
            .with_detail(format!("wave {worst:.1e}, beam {beam_gap:.1e}")))
    })
}

pub fn linearity_suite(c: &ExperimentConfig) -> SuiteOutcome {
    run("cascade linearity", || {
        // A fixed iteration count keeps both runs on the same Krylov path.
        let fixed = |amp: f64| -> BoxResult<_> {
            let mut inp = cascade_input(&ExperimentConfig { wave_elements: 60, ..c.clone() }, 2)?.scaled(amp);
            inp.settings = CgSettings { rel_tol: 0.0, state_tol: 0.0, max_iter: 40 };
            Ok(run_cascade(&inp)?)
        };
        let (c1, c2) = (fixed(1.0)?, fixed(-2.0)?);
        let mut worst = 0.0f64;
        for (a, b) in c1.levels.iter().zip(&c2.levels) {
            let gap = a.control.combine(-2.0, &b.control, -1.0)?.max_abs();
            worst = worst.max(gap / b.control.max_abs().max(f64::MIN_POSITIVE));
        }
        Ok(SuiteOutcome::below("cascade linearity", worst, LINEARITY_TOL))
    })
}

pub fn layer_scaling_suite(c: &ExperimentConfig) -> SuiteOutcome {
    run("layer energy scaling", || {
        let s = layer_source_scaling(&ADJOINT_EPS, &layer_amplitude(c, 2000)?)?;
        let e = s.exponent.ok_or("no exponent: zero energies")?;
        Ok(SuiteOutcome::above("layer energy scaling", e, LAYER_EXPONENT_MIN))
    })
}

/// Residual slopes of the adjoint expansion for `n = 0, 1, 2`, each against `n/2 + 0.15`.
pub fn adjoint_suites(c: &ExperimentConfig) -> Vec<SuiteOutcome> {
    const NAMES: [&str; 3] = ["adjoint expansion n=0", "adjoint expansion n=1", "adjoint expansion n=2"];
    let cascade = match cascade_input(c, 2).map_err(|e| e.to_string()).and_then(|i| run_cascade(&i).map_err(|e| e.to_string())) {
        Ok(r) => r,
        Err(e) => return NAMES.iter().map(|n| SuiteOutcome::errored(n, &e)).collect(),
    };
    (0..3)
        .map(|n| {
            run(NAMES[n], || {
                let pts = ADJOINT_EPS
                    .iter()
                    .map(|&e| Ok((e, adjoint_expansion_check(&cascade, e, n)?.residual)))
                    .collect::<BoxResult<Vec<_>>>()?;
                let slope = fit_rate(&pts)?;
                let detail = pts.iter().map(|(_, r)| format!("{r:.2e}")).collect::<Vec<_>>().join(", ");
                Ok(SuiteOutcome::above(NAMES[n], slope, n as f64 / 2.0 + 0.15).with_detail(detail))
            })
        })
        .collect()
}

/// Every suite, in a fixed order.
pub fn cmd_verify(c: &ExperimentConfig) -> Vec<SuiteOutcome> {
    let mut out = vec![dalembert_suite(c.wave_courant), energy_suite()];
    out.extend(gradient_suites(c.seed));
    out.extend(certificate_suites(c));
    out.push(reversibility_suite());
    out.push(linearity_suite(c));
    out.push(layer_scaling_suite(c));
    out.extend(adjoint_suites(c));
    out
}
