//! Rate diagnostics built on a finished cascade.

use super::{BoundaryLayerProfile, CascadeResult, LayerFactor};
use crate::beam::{
    beam_energy, default_elements, default_time_grid, hermite_eval, hermite_interpolant, solve_beam_with,
    trace_xx_reaction, BeamMatrices, BeamProblem, LayerSource,
};
use crate::error::{Error, Result};
use crate::signals::{cubic_eval, cubic_eval_deriv, fit_rate, l2_norm, signal_time_derivative, Signal, SpaceGrid};
use crate::wave::{Direction, End, WaveField};

/// Largest boundary residual tolerated in corrected adjoint data.
pub const CLAMP_TOL: f64 = 1e-10;

/// Time nodes visited when taking a supremum over `[0, T]`.
const SUP_SAMPLES: usize = 400;

/// `y^{ε,n} = Σ_{j≤n} ε^{j/2}[yʲ − yʲ(0,t)e^{−x/√ε} − yʲ(1,t)e^{−(1−x)/√ε}]`.
#[derive(Debug, Clone)]
pub struct Composite<'a> {
    cascade: &'a CascadeResult,
    eps: f64,
    n: usize,
    /// `½ y⁰_tt(1,·)` and its time derivative, when the `w e^{−w}` term is on.
    tt_layer: Option<(Signal, Signal)>,
}

pub fn composite_approximation(cascade: &CascadeResult, eps: f64, n: usize) -> Result<Composite<'_>> {
    if n > cascade.depth() {
        return Err(Error::Invalid(format!("composite of order {n} needs cascade depth {n}")));
    }
    if !(eps > 0.0) {
        return Err(Error::Invalid(format!("ε must be positive, got {eps}")));
    }
    Ok(Composite { cascade, eps, n, tt_layer: None })
}

impl Composite<'_> {
    /// Adds `−ε (w/2) y⁰_tt(1,t) e^{−w}` at order 2; a diagnostic variant.
    pub fn with_tt_layer(mut self) -> Result<Self> {
        if self.n == 2 {
            let a = self.cascade.traces.y0_tt1.scaled(0.5);
            let da = signal_time_derivative(&a, 1)?;
            self.tt_layer = Some((a, da));
        }
        Ok(self)
    }

    /// Value, `∂ₓ` and `∂ₜ` at `(x, t)`.
    pub fn eval(&self, x: f64, t: f64) -> (f64, f64, f64) {
        let r = self.eps.sqrt();
        let (el, er) = ((-x / r).exp(), (-(1.0 - x) / r).exp());
        let mut out = (0.0, 0.0, 0.0);
        for (j, level) in self.cascade.levels[..=self.n].iter().enumerate() {
            let s = self.eps.powf(j as f64 / 2.0);
            let (v, vx, vt) = level.state.eval(x, t);
            let (a, _, at) = level.state.eval(0.0, t);
            let (b, _, bt) = level.state.eval(1.0, t);
            out.0 += s * (v - a * el - b * er);
            out.1 += s * (vx + a * el / r - b * er / r);
            out.2 += s * (vt - at * el - bt * er);
        }
        if let Some((a, da)) = &self.tt_layer {
            let p = BoundaryLayerProfile { amplitude: a.clone(), side: End::Right, factor: LayerFactor::WExp, eps: self.eps };
            let (f, fx) = p.shape(x);
            out.0 -= self.eps * a.eval(t) * f;
            out.1 -= self.eps * a.eval(t) * fx;
            out.2 -= self.eps * da.eval(t) * f;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeError {
    pub eps: f64,
    pub n: usize,
    /// `sup_t ‖(y^ε − y^{ε,n}, ∂ₜ(y^ε − y^{ε,n}))‖_{H¹×L²}`.
    pub error: f64,
    pub beam_elements: usize,
}

/// Compares the composite against the beam driven by `Σ_{j≤n} ε^{(j−1)/2} vʲ`
/// from the cascade's initial data.
pub fn composite_error(cascade: &CascadeResult, eps: f64, n: usize) -> Result<CompositeError> {
    let composite = composite_approximation(cascade, eps, n)?;
    let input = &cascade.input;
    let grid = SpaceGrid::new(default_elements(eps))?;
    let tgrid = default_time_grid(input.weight.t_final, grid)?;
    let mut control = Signal::zeros(tgrid);
    for (j, level) in cascade.levels[..=n].iter().enumerate() {
        control = control.combine(1.0, &level.control.resample(tgrid)?, eps.powf((j as f64 - 1.0) / 2.0))?;
    }
    let (y0, y1) = (input.y0, input.y1);
    let position = hermite_interpolant(grid, |x| y0.value(x), |x| y0.derivative(x, 1));
    let velocity = hermite_interpolant(grid, |x| y1.value(x), |x| y1.derivative(x, 1));
    let mats = BeamMatrices::assemble(grid)?;
    let beam = solve_beam_with(
        &BeamProblem::new(eps, grid, tgrid, position, velocity, control)?,
        Direction::Forward,
        &mats,
    )?;

    let xs: Vec<f64> = (0..=2 * grid.n_elem).map(|k| k as f64 * grid.h() / 2.0).collect();
    let dx = grid.h() / 2.0;
    let stride = (tgrid.n_steps / SUP_SAMPLES).max(1);
    let mut sup = 0.0f64;
    for i in (0..=tgrid.n_steps).step_by(stride) {
        let t = tgrid.node(i);
        let integrand: Vec<f64> = xs
            .iter()
            .map(|&x| {
                let [w, wx, _] = hermite_eval(grid, beam.displacement(i), x);
                let [wt, _, _] = hermite_eval(grid, beam.velocity(i), x);
                let (c, cx, ct) = composite.eval(x, t);
                (w - c).powi(2) + (wx - cx).powi(2) + (wt - ct).powi(2)
            })
            .collect();
        sup = sup.max(crate::signals::trapezoid(&integrand, dx).sqrt());
    }
    Ok(CompositeError { eps, n, error: sup, beam_elements: grid.n_elem })
}

/// `E_n^ε = ‖√ε v^ε − Σ_{j≤n} ε^{j/2} vʲ‖_{L²(0,T)}` on the grid of `v_eps`.
pub fn expansion_error(v_eps: &Signal, cascade: &CascadeResult, eps: f64, n: usize) -> Result<f64> {
    if n > cascade.depth() {
        return Err(Error::Invalid(format!("expansion of order {n} needs cascade depth {n}")));
    }
    let mut diff = v_eps.scaled(eps.sqrt());
    for (j, level) in cascade.levels[..=n].iter().enumerate() {
        diff = diff.combine(1.0, &level.control.resample(v_eps.grid())?, -eps.powf(j as f64 / 2.0))?;
    }
    Ok(l2_norm(&diff))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjointCheck {
    pub eps: f64,
    pub n: usize,
    /// `‖η √ε ψ_xx(1,·) − Σ_{j≤n} ε^{j/2} vʲ‖_{L²}`.
    pub residual: f64,
    /// Slopes `ψ₀ₓ(0)`, `ψ₀ₓ(1)` removed by the boundary correction.
    pub slope_defect: f64,
    /// Largest clamped-condition residual of the corrected data.
    pub clamp_residual: f64,
}

/// Position and velocity of `Φʲ` at `t = 0`; second-order one-sided velocity.
fn adjoint_data(phi: &WaveField) -> (Vec<f64>, Vec<f64>) {
    let dt = phi.tgrid().dt();
    let (a, b, c) = (phi.row(0), phi.row(1), phi.row(2));
    let vel = (0..a.len()).map(|k| (-3.0 * a[k] + 4.0 * b[k] - c[k]) / (2.0 * dt)).collect();
    (a.to_vec(), vel)
}

/// Hermite dofs of `Σ ε^{j/2}(f_j − f_j(0)e^{−x/√ε} − f_j(1)e^{−(1−x)/√ε})`
/// plus the clamping correction.
fn layered_data(nodal: &[Vec<f64>], wave_h: f64, eps: f64, grid: SpaceGrid) -> (Vec<f64>, f64) {
    let r = eps.sqrt();
    let f = |x: f64| -> (f64, f64) {
        let (el, er) = ((-x / r).exp(), (-(1.0 - x) / r).exp());
        let mut out = (0.0, 0.0);
        for (j, v) in nodal.iter().enumerate() {
            let s = eps.powf(j as f64 / 2.0);
            let (a, b) = (v[0], v[v.len() - 1]);
            out.0 += s * (cubic_eval(v, wave_h, x) - a * el - b * er);
            out.1 += s * (cubic_eval_deriv(v, wave_h, x) + a * el / r - b * er / r);
        }
        out
    };
    // x e^{−x/√ε} and (x − 1) e^{−(1−x)/√ε} carry unit slope at their end.
    let (s0, s1) = (f(0.0).1, f(1.0).1);
    let g = |x: f64| -> (f64, f64) {
        let (el, er) = ((-x / r).exp(), (-(1.0 - x) / r).exp());
        let (v, d) = f(x);
        (
            v - s0 * x * el - s1 * (x - 1.0) * er,
            d - s0 * (1.0 - x / r) * el - s1 * (1.0 + (x - 1.0) / r) * er,
        )
    };
    // Cubic Hermite polynomial removing the remaining exponentially small residuals.
    let (g0, g1) = (g(0.0), g(1.0));
    let p = |x: f64| -> (f64, f64) {
        let (x2, x3) = (x * x, x * x * x);
        let h = [2.0 * x3 - 3.0 * x2 + 1.0, x3 - 2.0 * x2 + x, -2.0 * x3 + 3.0 * x2, x3 - x2];
        let dh = [6.0 * x2 - 6.0 * x, 3.0 * x2 - 4.0 * x + 1.0, -6.0 * x2 + 6.0 * x, 3.0 * x2 - 2.0 * x];
        let c = [g0.0, g0.1, g1.0, g1.1];
        (
            (0..4).map(|k| c[k] * h[k]).sum::<f64>(),
            (0..4).map(|k| c[k] * dh[k]).sum::<f64>(),
        )
    };
    let dofs = hermite_interpolant(grid, |x| g(x).0 - p(x).0, |x| g(x).1 - p(x).1);
    (dofs, s0.abs().max(s1.abs()))
}

/// Builds corrected data from the cascade adjoints, runs the clamped beam
/// from them and compares `η √ε ψ_xx(1,·)` with the truncated expansion.
pub fn adjoint_expansion_check(cascade: &CascadeResult, eps: f64, n: usize) -> Result<AdjointCheck> {
    if n > cascade.depth() {
        return Err(Error::Invalid(format!("check of order {n} needs cascade depth {n}")));
    }
    let levels = &cascade.levels[..=n];
    let wave_h = cascade.input.grid.h();
    let (pos, vel): (Vec<_>, Vec<_>) = levels.iter().map(|l| adjoint_data(&l.adjoint)).unzip();
    let grid = SpaceGrid::new(default_elements(eps))?;
    let tgrid = default_time_grid(cascade.input.weight.t_final, grid)?;
    let (position, d0) = layered_data(&pos, wave_h, eps, grid);
    let (velocity, d1) = layered_data(&vel, wave_h, eps, grid);

    let nd = position.len();
    let scale = 1.0 + position.iter().chain(&velocity).fold(0.0f64, |m, v| m.max(v.abs()));
    let clamp_residual =
        [0, 1, nd - 2, nd - 1].iter().flat_map(|&k| [position[k], velocity[k]]).fold(0.0f64, |m, v| m.max(v.abs()));
    if clamp_residual > CLAMP_TOL * scale {
        return Err(Error::Certificate { what: "clamped adjoint data".into(), residual: clamp_residual, tol: CLAMP_TOL });
    }

    let mats = BeamMatrices::assemble(grid)?;
    let psi = solve_beam_with(
        &BeamProblem::new(eps, grid, tgrid, position, velocity, Signal::zeros(tgrid))?,
        Direction::Forward,
        &mats,
    )?;
    let eta = cascade.input.weight.sample(tgrid)?;
    let mut diff = trace_xx_reaction(&psi, &mats).product(&eta)?.scaled(eps.sqrt());
    for (j, level) in levels.iter().enumerate() {
        diff = diff.combine(1.0, &level.control.resample(tgrid)?, -eps.powf(j as f64 / 2.0))?;
    }
    Ok(AdjointCheck { eps, n, residual: l2_norm(&diff), slope_defect: d0.max(d1), clamp_residual })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerScaling {
    /// `(ε, sup_t √E^ε(t))`.
    pub points: Vec<(f64, f64)>,
    /// `None` when every energy vanishes or fewer than three ε are given.
    pub exponent: Option<f64>,
}

/// Clamped beam from rest under the load `f(t) e^{−x/√ε}`, for each `ε`.
pub fn layer_source_scaling(eps_list: &[f64], f: &Signal) -> Result<LayerScaling> {
    let mut points = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let grid = SpaceGrid::new(default_elements(eps))?;
        let tgrid = default_time_grid(f.grid().t_final, grid)?;
        let zero = vec![0.0; 2 * grid.n_nodes()];
        let p = BeamProblem::new(eps, grid, tgrid, zero.clone(), zero, Signal::zeros(tgrid))?
            .with_source(LayerSource { amplitude: f.resample(tgrid)?, side: End::Left })?;
        let mats = BeamMatrices::assemble(grid)?;
        let u = solve_beam_with(&p, Direction::Forward, &mats)?;
        let sup = beam_energy(&u, &mats).values().iter().fold(0.0f64, |m, e| m.max(e.max(0.0).sqrt()));
        points.push((eps, sup));
    }
    let exponent = if points.iter().all(|p| p.1 > 0.0) { fit_rate(&points).ok() } else { None };
    Ok(LayerScaling { points, exponent })
}
