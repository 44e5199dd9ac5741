//! Minimal `L²(η)`-weighted Neumann control of the beam.
//!
//! The unknown `λ = (λ_a, λ_b)` is dual to the free final displacement pair
//! `(d[M−1], d[M])`. `Lᵀλ` is the reverse sweep of the Newmark recursion, so
//! the Gramian `L diag(η/w) Lᵀ` is symmetric to rounding. The reverse sweep
//! is itself a homogeneous backward beam solve; the row of the controlled
//! slope dof turns it into `ε φ_xx(1, ·)`.

use crate::banded::BandedCholesky;
use crate::beam::{
    default_elements, default_time_grid, resolution_limit, restrict, solve_beam_stepper, BeamField,
    BeamMatrices, BeamProblem, Stepper,
};
use crate::cg::{polak_ribiere, CgOutcome, CgSettings};
use crate::error::{Error, Result};
use crate::signals::{Signal, SpaceGrid, TimeGrid, WeightFn};
use crate::wave::Direction;
use crate::wave_hum::{HumResult, STATE_TOL};

/// Safeguard on the preconditioned gradient; the state rule normally fires first.
pub const BEAM_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct BeamHumProblem {
    eps: f64,
    grid: SpaceGrid,
    tgrid: TimeGrid,
    position: Vec<f64>,
    velocity: Vec<f64>,
    weight: WeightFn,
    settings: CgSettings,
}

impl BeamHumProblem {
    /// Hermite data `(y₀, y₁)` on `grid`; clamped at both ends.
    pub fn new(
        eps: f64,
        grid: SpaceGrid,
        tgrid: TimeGrid,
        position: Vec<f64>,
        velocity: Vec<f64>,
        weight: WeightFn,
        settings: CgSettings,
    ) -> Result<Self> {
        let t = weight.t_final;
        if !(t > 2.0) {
            return Err(Error::ShortHorizon(t));
        }
        if (tgrid.t_final - t).abs() > 1e-12 * t {
            return Err(Error::GridMismatch("time grid and weight horizons differ".into()));
        }
        let limit = resolution_limit(eps);
        if grid.h() > limit * (1.0 + 1e-12) {
            return Err(Error::Unresolved { h: grid.h(), limit });
        }
        // Validates ε, shapes and clamped conditions.
        BeamProblem::new(eps, grid, tgrid, position.clone(), velocity.clone(), Signal::zeros(tgrid))?;
        Ok(BeamHumProblem { eps, grid, tgrid, position, velocity, weight, settings })
    }

    /// Default mesh and step, Hermite interpolation of `(y₀, y₁)` and the
    /// final-state rule `1e−6`.
    pub fn standard(
        eps: f64,
        y0: (impl Fn(f64) -> f64, impl Fn(f64) -> f64),
        y1: (impl Fn(f64) -> f64, impl Fn(f64) -> f64),
        weight: WeightFn,
    ) -> Result<Self> {
        let grid = SpaceGrid::new(default_elements(eps))?;
        let tgrid = default_time_grid(weight.t_final, grid)?;
        let position = crate::beam::hermite_interpolant(grid, y0.0, y0.1);
        let velocity = crate::beam::hermite_interpolant(grid, y1.0, y1.1);
        let settings = CgSettings { rel_tol: BEAM_REL_TOL, state_tol: STATE_TOL, max_iter: 1000 };
        BeamHumProblem::new(eps, grid, tgrid, position, velocity, weight, settings)
    }

    pub fn with_settings(mut self, settings: CgSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn grid(&self) -> SpaceGrid {
        self.grid
    }

    pub fn tgrid(&self) -> TimeGrid {
        self.tgrid
    }

    pub fn operator(&self) -> Result<BeamHumOperator> {
        BeamHumOperator::new(self.eps, self.grid, self.tgrid, self.weight, self.settings)
    }

    /// The uncontrolled run from the problem data.
    pub fn free_problem(&self) -> Result<BeamProblem> {
        BeamProblem::new(
            self.eps,
            self.grid,
            self.tgrid,
            self.position.clone(),
            self.velocity.clone(),
            Signal::zeros(self.tgrid),
        )
    }
}

pub struct BeamHumOperator {
    eps: f64,
    grid: SpaceGrid,
    tgrid: TimeGrid,
    mats: BeamMatrices,
    stepper: Stepper,
    gain: Vec<f64>,
    /// `(εB + K)_ff` factorized, for the `H⁻²` velocity metric.
    energy: BandedCholesky,
    h2_ff: crate::banded::SymBanded,
    settings: CgSettings,
}

impl BeamHumOperator {
    pub fn new(eps: f64, grid: SpaceGrid, tgrid: TimeGrid, weight: WeightFn, settings: CgSettings) -> Result<Self> {
        let mats = BeamMatrices::assemble(grid)?;
        let stepper = Stepper::new(&mats, eps, tgrid.dt())?;
        let eta = weight.sample(tgrid)?;
        let gain = eta.values().iter().zip(tgrid.trapezoid_weights()).map(|(e, w)| e / w).collect();
        let nd = mats.n_dofs();
        let energy = restrict(&mats.operator(eps), nd).cholesky()?;
        let h2_ff = restrict(&mats.h2_form(), nd);
        Ok(BeamHumOperator { eps, grid, tgrid, mats, stepper, gain, energy, h2_ff, settings })
    }

    pub fn tgrid(&self) -> TimeGrid {
        self.tgrid
    }

    pub fn matrices(&self) -> &BeamMatrices {
        &self.mats
    }

    fn nf(&self) -> usize {
        self.stepper.nf
    }

    /// Free final pair `[d[M−1], d[M]]`.
    pub fn final_pair(&self, u: &BeamField) -> Vec<f64> {
        let m = self.tgrid.n_steps;
        let nd = self.mats.n_dofs();
        let mut out = Vec::with_capacity(2 * self.nf());
        out.extend_from_slice(&u.displacement(m - 1)[2..nd - 2]);
        out.extend_from_slice(&u.displacement(m)[2..nd - 2]);
        out
    }

    pub fn run(&self, p: &BeamProblem) -> Result<BeamField> {
        solve_beam_stepper(p, Direction::Forward, &self.mats, &self.stepper)
    }

    /// Run from rest with the slope at `x = 1` following `c`.
    pub fn controlled_run(&self, c: &Signal) -> Result<BeamField> {
        let nd = self.mats.n_dofs();
        let mut pos = vec![0.0; nd];
        pos[nd - 1] = c.values()[0];
        let vel = vec![0.0; nd];
        let p = BeamProblem::unresolved(self.eps, self.grid, self.tgrid, pos, vel, c.clone())?;
        self.run(&p)
    }

    pub fn apply_l(&self, c: &Signal) -> Result<Vec<f64>> {
        Ok(self.final_pair(&self.controlled_run(c)?))
    }

    /// Reverse sweep `q[1..=M]` seeded by `λ`, `q[0]` unused.
    fn reverse(&self, lambda: &[f64]) -> Result<Vec<Vec<f64>>> {
        let nf = self.nf();
        if lambda.len() != 2 * nf {
            return Err(Error::Shape { expected: 2 * nf, got: lambda.len() });
        }
        let m = self.tgrid.n_steps;
        let st = &self.stepper;
        let mut q = vec![vec![0.0; nf]; m + 2];
        q[m] = st.a_fact.solve(&lambda[nf..]);
        if m >= 2 {
            let mut mu = st.b.mul_vec(&q[m]);
            for (u, l) in mu.iter_mut().zip(&lambda[..nf]) {
                *u = 2.0 * *u + l;
            }
            st.a_fact.solve_in_place(&mut mu);
            q[m - 1] = mu;
        }
        let mut tmp = vec![0.0; nf];
        for n in (1..m.saturating_sub(1)).rev() {
            let mut mu = st.b.mul_vec(&q[n + 1]);
            st.a.mul_vec_into(&q[n + 2], &mut tmp);
            for (u, t) in mu.iter_mut().zip(&tmp) {
                *u = 2.0 * *u - t;
            }
            st.a_fact.solve_in_place(&mut mu);
            q[n] = mu;
        }
        Ok(q)
    }

    /// `Lᵀλ` from the reverse sweep.
    pub fn apply_lt(&self, lambda: &[f64]) -> Result<Vec<f64>> {
        let q = self.reverse(lambda)?;
        let m = self.tgrid.n_steps;
        let st = &self.stepper;
        let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
        let mut g = vec![0.0; m + 1];
        g[0] = dot(&st.b_c, &q[1]) - dot(&st.a_c, &q[2]);
        for k in 1..=m {
            g[k] = -dot(&st.a_c, &q[k]) + 2.0 * dot(&st.b_c, &q[k + 1]);
            if k + 2 <= m {
                g[k] -= dot(&st.a_c, &q[k + 2]);
            }
        }
        Ok(g)
    }

    pub fn control_from(&self, lambda: &[f64]) -> Result<Signal> {
        let g = self.apply_lt(lambda)?;
        Signal::new(self.tgrid, g.iter().zip(&self.gain).map(|(g, k)| g * k).collect())
    }

    pub fn gram(&self, lambda: &[f64]) -> Result<Vec<f64>> {
        self.apply_l(&self.control_from(lambda)?)
    }

    /// `J(λ) = ½ (Lᵀλ)ᵀ diag(η/w) (Lᵀλ) + λ·s`.
    pub fn functional(&self, lambda: &[f64], s: &[f64]) -> Result<f64> {
        let g = self.apply_lt(lambda)?;
        let quad: f64 = g.iter().zip(&self.gain).map(|(g, k)| k * g * g).sum();
        Ok(0.5 * quad + lambda.iter().zip(s).map(|(a, b)| a * b).sum::<f64>())
    }

    /// Discrete final-state norm: `yᵀ(B + K + M)y + v̂ᵀMv̂`, `v̂` the backward difference.
    pub fn state_norm(&self, pair: &[f64]) -> f64 {
        let nf = self.nf();
        let dt = self.tgrid.dt();
        let (a, b) = pair.split_at(nf);
        let v: Vec<f64> = a.iter().zip(b).map(|(p, q)| (q - p) / dt).collect();
        (self.h2_ff.quad_form(b) + self.stepper.m_ff.quad_form(&v)).max(0.0).sqrt()
    }

    /// `L² × H⁻²_ε` Riesz map of a final-pair residual.
    fn metric(&self, r: &[f64]) -> Vec<f64> {
        let nf = self.nf();
        let dt = self.tgrid.dt();
        let (ra, rb) = r.split_at(nf);
        let p: Vec<f64> = ra.iter().zip(rb).map(|(a, b)| 0.5 * (a + b)).collect();
        let v: Vec<f64> = ra.iter().zip(rb).map(|(a, b)| (b - a) / dt).collect();
        let mp = self.stepper.m_ff.mul_vec(&p);
        let mut mv = self.stepper.m_ff.mul_vec(&v);
        self.energy.solve_in_place(&mut mv);
        let mv = self.stepper.m_ff.mul_vec(&mv);
        let mut z = vec![0.0; 2 * nf];
        for j in 0..nf {
            z[j] = 0.5 * mp[j] - mv[j] / dt;
            z[nf + j] = 0.5 * mp[j] + mv[j] / dt;
        }
        z
    }

    /// Adjoint Hermite data `(φ(0), φ_t(0))` with `control = η φ_xx(1, ·)`.
    fn adjoint_initial(&self, lambda: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let q = self.reverse(lambda)?;
        let nd = self.mats.n_dofs();
        let dt = self.tgrid.dt();
        let scale = -self.eps * dt;
        let mut pos = vec![0.0; nd];
        let mut vel = vec![0.0; nd];
        for i in 0..self.nf() {
            pos[i + 2] = scale * q[1][i];
            vel[i + 2] = scale * (q[2][i] - q[1][i]) / dt;
        }
        Ok((pos, vel))
    }

    /// Minimal control cancelling the free final pair `s`.
    pub fn solve_rhs(&self, s: &[f64]) -> Result<(HumResult, CgOutcome)> {
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
        let control = self.control_from(&outcome.solution)?;
        let result = HumResult {
            control,
            adjoint_initial: self.adjoint_initial(&outcome.solution)?,
            iterations: outcome.iterations,
            final_residual: outcome.state_residual,
            converged: outcome.converged,
        };
        Ok((result, outcome))
    }
}

/// Minimal weighted Neumann control `v^ε = η φ_xx(1, ·)` steering the data to rest.
pub fn solve_beam_control(p: &BeamHumProblem) -> Result<HumResult> {
    let op = p.operator()?;
    let s = op.final_pair(&op.run(&p.free_problem()?)?);
    Ok(op.solve_rhs(&s)?.0)
}

/// Final-state norm of the run from the problem data under `control`, with
/// the Newmark velocity.
pub fn certify_beam_control(p: &BeamHumProblem, control: &Signal) -> Result<f64> {
    let op = p.operator()?;
    let run = BeamProblem::new(p.eps, p.grid, p.tgrid, p.position.clone(), p.velocity.clone(), control.clone())?;
    Ok(op.run(&run)?.final_norm(&op.mats))
}

/// Relative gap between `⟨∇J(λ), d⟩` and the centered difference of `J`.
pub fn gradient_check_beam(p: &BeamHumProblem, base: &[f64], direction: &[f64], step: f64) -> Result<f64> {
    if !(1e-7..=1e-3).contains(&step) {
        return Err(Error::Invalid(format!("step {step} outside [1e-7, 1e-3]")));
    }
    let op = p.operator()?;
    let s = op.final_pair(&op.run(&p.free_problem()?)?);
    let g = op.gram(base)?;
    let pairing: f64 = g.iter().zip(&s).zip(direction).map(|((a, b), d)| (a + b) * d).sum();
    let shifted = |sign: f64| -> Vec<f64> { base.iter().zip(direction).map(|(b, d)| b + sign * step * d).collect() };
    let fd = (op.functional(&shifted(1.0), &s)? - op.functional(&shifted(-1.0), &s)?) / (2.0 * step);
    let scale = pairing.abs().max(fd.abs());
    Ok(if scale == 0.0 { 0.0 } else { (fd - pairing).abs() / scale })
}

/// Number of free final-pair unknowns of a problem.
pub fn unknowns(p: &BeamHumProblem) -> usize {
    2 * (2 * p.grid.n_nodes() - 4)
}
