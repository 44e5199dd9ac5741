//! The sweep behind the `table1`, `cascade`, `control` and `energy-scaling` commands.

use crate::config::ExperimentConfig;
use crate::output::{cell, eps_tag, write_signal, write_table};
use rayon::prelude::*;
use singctrl_core::beam::{default_elements, default_time_grid, hermite_interpolant};
use singctrl_core::beam_hum::{solve_beam_control, BeamHumProblem, BEAM_REL_TOL};
use singctrl_core::cascade::{expansion_error, layer_source_scaling, run_cascade, CascadeInput, CascadeResult};
use singctrl_core::signals::{fit_rate, l2_norm, Signal, SpaceGrid, TimeGrid};
use singctrl_core::wave_hum::{HumResult, STATE_TOL};
use singctrl_core::CgSettings;
use std::error::Error;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub type BoxResult<T> = Result<T, Box<dyn Error + Send + Sync>>;

pub const TABLE1_HEADER: &str = "eps,iterations,norm_sqrt_eps_v,E0,E1,E2,seconds";

/// Number of smallest ε values entering the rate fits.
pub const RATE_POINTS: usize = 3;

/// CG iteration cap of the beam sweep.
pub const BEAM_MAX_ITER: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub eps: f64,
    pub iterations: usize,
    pub norm: f64,
    /// `E₀, E₁, E₂`.
    pub errors: [f64; 3],
    pub seconds: f64,
    /// `√ε v^ε`, kept for the plot files.
    pub control: Option<Signal>,
    /// Set when the run failed. The numeric fields are NaN unless the run
    /// only missed its stopping rule.
    pub failure: Option<String>,
}

impl ExperimentRow {
    fn failed(eps: f64, seconds: f64, why: String) -> Self {
        ExperimentRow {
            eps,
            iterations: 0,
            norm: f64::NAN,
            errors: [f64::NAN; 3],
            seconds,
            control: None,
            failure: Some(why),
        }
    }

    fn cells(&self, timings: bool) -> Vec<String> {
        let mut c = vec![cell(self.eps), self.iterations.to_string(), cell(self.norm)];
        c.extend(self.errors.iter().map(|e| cell(*e)));
        c.push(if timings { format!("{:.3}", self.seconds) } else { "0".into() });
        c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rate {
    pub quantity: &'static str,
    pub slope: Option<f64>,
    pub eps_min: f64,
    pub eps_max: f64,
}

pub fn cascade_input(c: &ExperimentConfig, order: usize) -> BoxResult<CascadeInput> {
    let grid = SpaceGrid::new(c.wave_elements)?;
    Ok(CascadeInput::new(grid, c.data.profile(), singctrl_core::cascade::Profile::ZERO, c.weight(), order)?)
}

/// Beam HUM problem for one ε with the configured mesh overrides.
pub fn beam_problem(c: &ExperimentConfig, eps: f64) -> BoxResult<BeamHumProblem> {
    let grid = SpaceGrid::new(c.beam_elements.unwrap_or_else(|| default_elements(eps)))?;
    let tgrid = match c.beam_steps {
        Some(n) => TimeGrid::new(c.t_final, n)?,
        None => default_time_grid(c.t_final, grid)?,
    };
    let y0 = c.data.profile();
    let position = hermite_interpolant(grid, |x| y0.value(x), |x| y0.derivative(x, 1));
    let velocity = vec![0.0; position.len()];
    let settings = CgSettings { rel_tol: BEAM_REL_TOL, state_tol: STATE_TOL, max_iter: BEAM_MAX_ITER };
    Ok(BeamHumProblem::new(eps, grid, tgrid, position, velocity, c.weight(), settings)?)
}

/// One table row against a finished cascade.
pub fn run_row(c: &ExperimentConfig, cascade: &CascadeResult, eps: f64) -> ExperimentRow {
    let start = Instant::now();
    let attempt = || -> BoxResult<ExperimentRow> {
        let r = solve_beam_control(&beam_problem(c, eps)?)?;
        let mut errors = [0.0; 3];
        for (n, e) in errors.iter_mut().enumerate().take(cascade.depth() + 1) {
            *e = expansion_error(&r.control, cascade, eps, n)?;
        }
        let scaled = r.control.scaled(eps.sqrt());
        Ok(ExperimentRow {
            eps,
            iterations: r.iterations,
            norm: l2_norm(&scaled),
            errors,
            seconds: 0.0,
            control: Some(scaled),
            failure: unconverged(&r),
        })
    };
    match attempt() {
        Ok(mut row) => {
            row.seconds = start.elapsed().as_secs_f64();
            row
        }
        Err(e) => ExperimentRow::failed(eps, start.elapsed().as_secs_f64(), e.to_string()),
    }
}

fn pool(jobs: usize) -> BoxResult<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?)
}

/// Cascade once, then every ε independently. Rows come back largest ε first.
pub fn sweep(c: &ExperimentConfig) -> BoxResult<(CascadeResult, Vec<ExperimentRow>)> {
    let cascade = run_cascade(&cascade_input(c, 2)?)?;
    let eps = c.eps_list();
    let rows = pool(c.jobs)?.install(|| eps.par_iter().map(|&e| run_row(c, &cascade, e)).collect());
    Ok((cascade, rows))
}

/// Slopes of the norm and `E₀..E₂` over the smallest [`RATE_POINTS`] successful rows.
pub fn fit_rates(rows: &[ExperimentRow]) -> Vec<Rate> {
    let mut ok: Vec<&ExperimentRow> = rows.iter().filter(|r| r.failure.is_none()).collect();
    ok.sort_by(|a, b| a.eps.total_cmp(&b.eps));
    ok.truncate(RATE_POINTS);
    let (eps_min, eps_max) = match (ok.first(), ok.last()) {
        (Some(a), Some(b)) => (a.eps, b.eps),
        _ => (f64::NAN, f64::NAN),
    };
    let names = ["E0", "E1", "E2"];
    (0..3)
        .map(|k| {
            let pts: Vec<(f64, f64)> = ok.iter().map(|r| (r.eps, r.errors[k])).collect();
            Rate { quantity: names[k], slope: fit_rate(&pts).ok(), eps_min, eps_max }
        })
        .collect()
}

pub fn output_dir(c: &ExperimentConfig) -> BoxResult<PathBuf> {
    fs::create_dir_all(&c.out)?;
    Ok(c.out.clone())
}

pub fn write_rows(dir: &Path, rows: &[ExperimentRow], timings: bool) -> BoxResult<()> {
    let cells: Vec<Vec<String>> = rows.iter().map(|r| r.cells(timings)).collect();
    write_table(&dir.join("table1.csv"), TABLE1_HEADER, &cells)?;
    Ok(())
}

pub fn write_rates(dir: &Path, rates: &[Rate]) -> BoxResult<()> {
    let cells: Vec<Vec<String>> = rates
        .iter()
        .map(|r| {
            let slope = r.slope.map(|s| format!("{s:.4}")).unwrap_or_else(|| "nan".into());
            vec![r.quantity.to_string(), slope, cell(r.eps_min), cell(r.eps_max)]
        })
        .collect();
    write_table(&dir.join("rates.csv"), "quantity,slope,eps_min,eps_max", &cells)?;
    Ok(())
}

pub fn write_cascade(dir: &Path, cascade: &CascadeResult) -> BoxResult<()> {
    for (j, level) in cascade.levels.iter().enumerate() {
        write_signal(&dir.join(format!("v{j}.csv")), &level.control)?;
    }
    Ok(())
}

/// `table1`: rows, rates, the cascade controls and one `√ε v^ε` plot file per ε.
pub fn cmd_table1(c: &ExperimentConfig) -> BoxResult<(Vec<ExperimentRow>, Vec<Rate>)> {
    let dir = output_dir(c)?;
    let (cascade, rows) = sweep(c)?;
    let rates = fit_rates(&rows);
    write_rows(&dir, &rows, c.timings)?;
    write_rates(&dir, &rates)?;
    write_cascade(&dir, &cascade)?;
    for r in &rows {
        if let Some(s) = &r.control {
            write_signal(&dir.join(format!("sqrt_eps_v_{}.csv", eps_tag(r.eps))), s)?;
        }
    }
    Ok((rows, rates))
}

/// `cascade`: `v0.csv`, `v1.csv`, `v2.csv`.
pub fn cmd_cascade(c: &ExperimentConfig) -> BoxResult<CascadeResult> {
    let dir = output_dir(c)?;
    let cascade = run_cascade(&cascade_input(c, 2)?)?;
    write_cascade(&dir, &cascade)?;
    Ok(cascade)
}

/// `control --eps`: one beam run, written as `control_<eps>.csv` (`v^ε`, unscaled).
pub fn cmd_control(c: &ExperimentConfig, eps: f64) -> BoxResult<ExperimentRow> {
    let dir = output_dir(c)?;
    let start = Instant::now();
    let r = solve_beam_control(&beam_problem(c, eps)?)?;
    write_signal(&dir.join(format!("control_{}.csv", eps_tag(eps))), &r.control)?;
    let scaled = r.control.scaled(eps.sqrt());
    Ok(ExperimentRow {
        eps,
        iterations: r.iterations,
        norm: l2_norm(&scaled),
        errors: [f64::NAN; 3],
        seconds: start.elapsed().as_secs_f64(),
        control: Some(scaled),
        failure: unconverged(&r),
    })
}

fn unconverged(r: &HumResult) -> Option<String> {
    (!r.converged).then(|| format!("no convergence in {} iterations, final state {:e}", r.iterations, r.final_residual))
}

/// Amplitude `sin²(πt/T)` of the layer load.
pub fn layer_amplitude(c: &ExperimentConfig, steps: usize) -> BoxResult<Signal> {
    let tg = TimeGrid::new(c.t_final, steps)?;
    let t_final = c.t_final;
    Ok(Signal::from_fn(tg, move |t| (std::f64::consts::PI * t / t_final).sin().powi(2)))
}

/// `energy-scaling`: `sup_t √E^ε` of the beam under a boundary-layer load.
pub fn cmd_energy_scaling(c: &ExperimentConfig) -> BoxResult<(Vec<(f64, f64)>, Option<f64>)> {
    let dir = output_dir(c)?;
    let eps = if c.eps.is_some() { c.eps_list() } else { vec![1e-3, 1e-4, 1e-5] };
    let s = layer_source_scaling(&eps, &layer_amplitude(c, 2000)?)?;
    let cells: Vec<Vec<String>> = s.points.iter().map(|(e, v)| vec![cell(*e), cell(*v)]).collect();
    write_table(&dir.join("energy_scaling.csv"), "eps,sup_sqrt_energy", &cells)?;
    Ok((s.points, s.exponent))
}
