//! Minimal `L²(η)`-weighted Dirichlet control of the wave equation at `x = 1`.
//!
//! The discrete unknown is the adjoint final pair `λ = (λ_a, λ_b)` dual to the
//! final levels `(y[M−1], y[M])` of the controlled leapfrog run. The adjoint
//! field `φ` is the homogeneous leapfrog solution with `φ[M] = λ_a`,
//! `φ[M−1] = −λ_b`, and `v_n = η_n · (−φ[n][N−1]/h)` is exactly the transpose
//! of the boundary injection, so `G = L diag(η/w) Lᵀ` is symmetric positive
//! semidefinite and its minimizer yields the minimal `Σ w |v|²/η` control.

use crate::cg::{polak_ribiere, CgOutcome, CgSettings};
use crate::error::{Error, Result};
use crate::signals::{interior_stiffness, Signal, SpaceGrid, TimeGrid, WeightFn};
use crate::wave::{solve_wave, Direction, WaveField, WaveInit, WaveProblem, WaveSource};
use crate::banded::BandedCholesky;

/// Gradient relative tolerance of the wave CG.
pub const WAVE_REL_TOL: f64 = 1e-8;
/// Final-state residual tolerance shared with the beam rule.
pub const STATE_TOL: f64 = 1e-6;

/// Outcome of a HUM minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct HumResult {
    pub control: Signal,
    /// Adjoint data at `t = 0`: first two leapfrog levels (wave) or the
    /// Hermite position and velocity (beam).
    pub adjoint_initial: (Vec<f64>, Vec<f64>),
    pub iterations: usize,
    /// Norm of the controlled final state.
    pub final_residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveHumProblem {
    grid: SpaceGrid,
    tgrid: TimeGrid,
    data: WaveInit,
    weight: WeightFn,
    settings: CgSettings,
}

impl WaveHumProblem {
    /// `T` must be a multiple of `h` so that `dt = h`.
    pub fn new(grid: SpaceGrid, data: WaveInit, weight: WeightFn, settings: CgSettings) -> Result<Self> {
        let t = weight.t_final;
        if !(t > 2.0) {
            return Err(Error::ShortHorizon(t));
        }
        let steps = t * grid.n_elem as f64;
        if (steps - steps.round()).abs() > 1e-9 * steps {
            return Err(Error::Invalid(format!("T = {t} is not a multiple of h = {}", grid.h())));
        }
        let tgrid = TimeGrid::new(t, steps.round() as usize)?;
        // Validates shapes and corners.
        WaveProblem::free(grid, tgrid, data.clone())?;
        Ok(WaveHumProblem { grid, tgrid, data, weight, settings })
    }

    /// Default CG settings: relative gradient `1e−8` or state residual `1e−6`.
    pub fn standard(grid: SpaceGrid, data: WaveInit, weight: WeightFn) -> Result<Self> {
        let settings = CgSettings { rel_tol: WAVE_REL_TOL, state_tol: STATE_TOL, max_iter: 4 * grid.n_elem };
        WaveHumProblem::new(grid, data, weight, settings)
    }

    pub fn grid(&self) -> SpaceGrid {
        self.grid
    }

    pub fn tgrid(&self) -> TimeGrid {
        self.tgrid
    }

    pub fn operator(&self) -> Result<WaveHumOperator> {
        WaveHumOperator::new(self.grid, self.weight, self.settings)
    }
}

/// The Gramian, its pieces and the state metric on one grid.
#[derive(Debug, Clone)]
pub struct WaveHumOperator {
    grid: SpaceGrid,
    tgrid: TimeGrid,
    eta: Signal,
    laplacian: BandedCholesky,
    settings: CgSettings,
}

/// A minimizer together with the adjoint field it generates.
#[derive(Debug, Clone)]
pub struct WaveHumSolution {
    pub result: HumResult,
    /// `φ` with `control = η · ∂ₓφ(1, ·)` in the transpose-consistent trace.
    pub adjoint: WaveField,
    /// Transpose-consistent trace `−φ[n][N−1]/h`.
    pub observation: Signal,
    pub outcome: CgOutcome,
}

impl WaveHumOperator {
    pub fn new(grid: SpaceGrid, weight: WeightFn, settings: CgSettings) -> Result<Self> {
        if grid.n_elem < 3 {
            return Err(Error::Invalid("wave control needs at least 3 elements".into()));
        }
        let t = weight.t_final;
        let steps = (t * grid.n_elem as f64).round() as usize;
        let tgrid = TimeGrid::new(t, steps)?;
        let eta = weight.sample(tgrid)?;
        let laplacian = interior_stiffness(grid).cholesky()?;
        Ok(WaveHumOperator { grid, tgrid, eta, laplacian, settings })
    }

    pub fn tgrid(&self) -> TimeGrid {
        self.tgrid
    }

    fn n_int(&self) -> usize {
        self.grid.n_elem - 1
    }

    /// Interior final levels `[y[M−1], y[M]]` of a field.
    pub fn final_pair(&self, u: &WaveField) -> Vec<f64> {
        let (a, b) = u.final_levels();
        let n = self.grid.n_elem;
        let mut out = Vec::with_capacity(2 * (n - 1));
        out.extend_from_slice(&a[1..n]);
        out.extend_from_slice(&b[1..n]);
        out
    }

    /// Final pair of the uncontrolled run from `data`.
    pub fn free_final(&self, data: &WaveInit) -> Result<Vec<f64>> {
        let p = WaveProblem::free(self.grid, self.tgrid, data.clone())?;
        Ok(self.final_pair(&solve_wave(&p, Direction::Forward)?))
    }

    /// Run from rest with `y(1, ·) = v`, `y(0, ·) = 0`.
    pub fn controlled_run(&self, v: &Signal) -> Result<WaveField> {
        let p = WaveProblem::new(
            self.grid,
            self.tgrid,
            WaveInit::zero(self.grid),
            Signal::zeros(self.tgrid),
            v.clone(),
            WaveSource::None,
        )?;
        solve_wave(&p, Direction::Forward)
    }

    /// `L v`: final pair of the run from rest driven by `v`.
    pub fn apply_l(&self, v: &Signal) -> Result<Vec<f64>> {
        Ok(self.final_pair(&self.controlled_run(v)?))
    }

    /// Homogeneous adjoint field with final levels `φ[M] = λ_a`, `φ[M−1] = −λ_b`.
    pub fn adjoint_field(&self, lambda: &[f64]) -> Result<WaveField> {
        let ni = self.n_int();
        if lambda.len() != 2 * ni {
            return Err(Error::Shape { expected: 2 * ni, got: lambda.len() });
        }
        let pad = |v: &[f64], s: f64| {
            let mut out = vec![0.0; ni + 2];
            for (o, x) in out[1..=ni].iter_mut().zip(v) {
                *o = s * x;
            }
            out
        };
        let init = WaveInit::Levels { first: pad(&lambda[..ni], 1.0), second: pad(&lambda[ni..], -1.0) };
        solve_wave(&WaveProblem::free(self.grid, self.tgrid, init)?, Direction::Backward)
    }

    /// Transpose-consistent trace `−φ[n][N−1]/h`, zero at `n = M`.
    pub fn observation(&self, phi: &WaveField) -> Signal {
        let n = self.grid.n_elem;
        let h = self.grid.h();
        let m = self.tgrid.n_steps;
        let values = (0..=m).map(|i| if i == m { 0.0 } else { -phi.at(i, n - 1) / h }).collect();
        Signal::new(self.tgrid, values).expect("finite observation")
    }

    /// `Lᵀλ` expressed as `w_n · observation_n`.
    pub fn apply_lt(&self, lambda: &[f64]) -> Result<Vec<f64>> {
        let obs = self.observation(&self.adjoint_field(lambda)?);
        Ok(obs.values().iter().zip(self.tgrid.trapezoid_weights()).map(|(o, w)| o * w).collect())
    }

    /// Control `η · observation` generated by `λ`.
    pub fn control_from(&self, lambda: &[f64]) -> Result<Signal> {
        let obs = self.observation(&self.adjoint_field(lambda)?);
        obs.product(&self.eta)
    }

    /// `G λ = L diag(η/w) Lᵀ λ`.
    pub fn gram(&self, lambda: &[f64]) -> Result<Vec<f64>> {
        self.apply_l(&self.control_from(lambda)?)
    }

    /// `J(λ) = ½ Σ w η |obs|² + λ · s`.
    pub fn functional(&self, lambda: &[f64], s: &[f64]) -> Result<f64> {
        let obs = self.observation(&self.adjoint_field(lambda)?);
        let w = self.tgrid.trapezoid_weights();
        let quad: f64 = (0..obs.values().len())
            .map(|i| w[i] * self.eta.values()[i] * obs.values()[i].powi(2))
            .sum();
        Ok(0.5 * quad + lambda.iter().zip(s).map(|(a, b)| a * b).sum::<f64>())
    }

    /// `‖(y(T), y_t(T))‖_{H¹×L²}` of a final pair, velocity by backward difference.
    pub fn state_norm(&self, pair: &[f64]) -> f64 {
        let ni = self.n_int();
        let (h, dt) = (self.grid.h(), self.tgrid.dt());
        let (a, b) = pair.split_at(ni);
        let mut grad = 0.0;
        for j in 0..=ni {
            let left = if j == 0 { 0.0 } else { b[j - 1] };
            let right = if j == ni { 0.0 } else { b[j] };
            grad += (right - left).powi(2) / h;
        }
        let vel: f64 = a.iter().zip(b).map(|(p, q)| ((q - p) / dt).powi(2)).sum::<f64>() * h;
        (grad + vel).sqrt()
    }

    /// `L² × H⁻¹` Riesz map applied to a final-pair residual.
    fn metric(&self, r: &[f64]) -> Vec<f64> {
        let ni = self.n_int();
        let (h, dt) = (self.grid.h(), self.tgrid.dt());
        let (ra, rb) = r.split_at(ni);
        let pos: Vec<f64> = ra.iter().zip(rb).map(|(a, b)| 0.5 * h * (a + b)).collect();
        let vel: Vec<f64> = ra.iter().zip(rb).map(|(a, b)| h * (b - a) / dt).collect();
        let vel = self.laplacian.solve(&vel).iter().map(|v| h * v).collect::<Vec<_>>();
        let mut z = vec![0.0; 2 * ni];
        for j in 0..ni {
            z[j] = 0.5 * pos[j] - vel[j] / dt;
            z[ni + j] = 0.5 * pos[j] + vel[j] / dt;
        }
        z
    }

    /// Minimal control driving the free final pair `s` to zero.
    pub fn solve_rhs(&self, s: &[f64]) -> Result<WaveHumSolution> {
        let mut failure = None;
        let outcome = polak_ribiere(
            s,
            |d| match self.gram(d) {
                Ok(g) => g,
                Err(e) => {
                    failure = Some(e);
                    vec![0.0; d.len()]
                }
            },
            |r| self.metric(r),
            |r| self.state_norm(r),
            self.settings,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let adjoint = self.adjoint_field(&outcome.solution)?;
        let observation = self.observation(&adjoint);
        let control = observation.product(&self.eta)?;
        let result = HumResult {
            control,
            adjoint_initial: (adjoint.row(0).to_vec(), adjoint.row(1).to_vec()),
            iterations: outcome.iterations,
            final_residual: outcome.state_residual,
            converged: outcome.converged,
        };
        Ok(WaveHumSolution { result, adjoint, observation, outcome })
    }
}

/// Minimal weighted control `v = η ∂ₓφ(1, ·)` steering `(y₀, y₁)` to rest.
pub fn solve_wave_control(p: &WaveHumProblem) -> Result<HumResult> {
    Ok(solve_wave_control_full(p)?.result)
}

/// As [`solve_wave_control`], also returning the adjoint field.
pub fn solve_wave_control_full(p: &WaveHumProblem) -> Result<WaveHumSolution> {
    let op = p.operator()?;
    let s = op.free_final(&p.data)?;
    op.solve_rhs(&s)
}

/// Relative gap between `⟨∇J(λ), d⟩` and the centered difference of `J` at
/// `λ` along `d`.
pub fn gradient_check_wave(p: &WaveHumProblem, base: &[f64], direction: &[f64], step: f64) -> Result<f64> {
    if !(1e-7..=1e-3).contains(&step) {
        return Err(Error::Invalid(format!("step {step} outside [1e-7, 1e-3]")));
    }
    let op = p.operator()?;
    let s = op.free_final(&p.data)?;
    let g = op.gram(base)?;
    let pairing: f64 = g.iter().zip(&s).zip(direction).map(|((a, b), d)| (a + b) * d).sum();
    let shifted = |sign: f64| -> Vec<f64> { base.iter().zip(direction).map(|(b, d)| b + sign * step * d).collect() };
    let fd = (op.functional(&shifted(1.0), &s)? - op.functional(&shifted(-1.0), &s)?) / (2.0 * step);
    let scale = pairing.abs().max(fd.abs());
    Ok(if scale == 0.0 { 0.0 } else { (fd - pairing).abs() / scale })
}
