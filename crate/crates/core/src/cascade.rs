//! The wave cascade `v⁰, v¹, v²` describing `√ε v^ε` as `ε → 0`.
//!
//! Sign convention: `vʲ = −η Φʲ_x(1, ·)` for every level, where `Φ⁰` is the
//! wave HUM adjoint and `Φʲ = φʲ + φ^{a,j}` for `j ≥ 1`, `φʲ` the HUM adjoint
//! of the level and `φ^{a,j}` the correction driven by the previous levels.
//! The level states satisfy `y⁰(1) = −v⁰`, `y¹(1) = y⁰_x(1) − v¹` and
//! `y²(1) = y¹_x(1) + ½ y⁰_tt(1) − v²`, with `yʲ(0) = −y^{j−1}_x(0)`, and all
//! three reach rest at `t = T`.
//!
//! The corrections `φ^{a,j}` start from data matching their boundary values at
//! `t = 0`. Boundary signals of the state problems, which start from rest, are
//! pinned to zero at `t = 0` and `t = T`; the discarded values are kept as
//! `corner_defect`.

mod checks;

pub use checks::{
    adjoint_expansion_check, composite_approximation, composite_error, expansion_error, layer_source_scaling,
    AdjointCheck, Composite, CompositeError, LayerScaling, CLAMP_TOL,
};

use crate::error::{Error, Result};
use crate::signals::{finite_difference, signal_time_derivative, Signal, SpaceGrid, TimeGrid, WeightFn};
use crate::wave::{
    solve_wave, trace_normal_derivative, Direction, End, WaveField, WaveInit, WaveProblem,
    WaveSource,
};
use crate::wave_hum::{WaveHumOperator, STATE_TOL};
use crate::CgSettings;
use std::f64::consts::PI;

/// Wave elements used by [`CascadeInput::standard`].
pub const DEFAULT_WAVE_ELEMENTS: usize = 400;

/// Relative-gradient tolerance of the cascade solves. Small enough that the
/// final-state rule decides termination at every level.
pub const CASCADE_REL_TOL: f64 = 1e-13;

/// Pass threshold of the compatibility residuals.
pub const COMPATIBILITY_TOL: f64 = 1e-8;

/// Final-state tolerances of `y⁰`, `y¹`, `y²`.
pub const LEVEL_TOLERANCES: [f64; 3] = [1e-5, 1e-5, 1e-4];

/// Smooth initial profiles with closed-form derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Zero,
    /// `sin⁴(2πx) = 3/8 − ½ cos 4πx + ⅛ cos 8πx`.
    Sin4,
    /// `sin(kπx)`.
    Sine(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile {
    pub shape: Shape,
    pub amplitude: f64,
}

impl Profile {
    pub const ZERO: Profile = Profile { shape: Shape::Zero, amplitude: 0.0 };

    pub fn new(shape: Shape, amplitude: f64) -> Self {
        Profile { shape, amplitude }
    }

    /// `k`-th derivative at `x`.
    pub fn derivative(&self, x: f64, k: u32) -> f64 {
        // d^k cos(bx) = b^k cos(bx + kπ/2), and likewise for sin.
        let dcos = |b: f64| b.powi(k as i32) * (b * x + k as f64 * PI / 2.0).cos();
        let v = match self.shape {
            Shape::Zero => 0.0,
            Shape::Sin4 => {
                let c0 = if k == 0 { 0.375 } else { 0.0 };
                c0 - 0.5 * dcos(4.0 * PI) + 0.125 * dcos(8.0 * PI)
            }
            Shape::Sine(m) => {
                let b = m as f64 * PI;
                b.powi(k as i32) * (b * x + k as f64 * PI / 2.0).sin()
            }
        };
        self.amplitude * v
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    pub fn scaled(&self, a: f64) -> Profile {
        Profile { shape: self.shape, amplitude: a * self.amplitude }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeInput {
    pub grid: SpaceGrid,
    pub y0: Profile,
    pub y1: Profile,
    pub weight: WeightFn,
    /// Deepest level computed, at most 2.
    pub order: usize,
    pub settings: CgSettings,
}

impl CascadeInput {
    /// `(sin⁴(2πx), 0)`, `T = 2.5`, the standard weight.
    pub fn standard(order: usize) -> Result<Self> {
        CascadeInput::new(
            SpaceGrid::new(DEFAULT_WAVE_ELEMENTS)?,
            Profile::new(Shape::Sin4, 1.0),
            Profile::ZERO,
            WeightFn::standard(2.5),
            order,
        )
    }

    pub fn new(grid: SpaceGrid, y0: Profile, y1: Profile, weight: WeightFn, order: usize) -> Result<Self> {
        if order > 2 {
            return Err(Error::Invalid(format!("cascade order {order} exceeds 2")));
        }
        let settings = CgSettings { rel_tol: CASCADE_REL_TOL, state_tol: STATE_TOL, max_iter: 4 * grid.n_elem };
        Ok(CascadeInput { grid, y0, y1, weight, order, settings })
    }

    pub fn scaled(&self, a: f64) -> CascadeInput {
        CascadeInput { y0: self.y0.scaled(a), y1: self.y1.scaled(a), ..self.clone() }
    }
}

/// One line of a compatibility report.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityLine {
    pub label: &'static str,
    pub end: End,
    pub residual: f64,
    pub passed: bool,
}

/// Evaluates the corner conditions for the order-`n` cascade. Later levels
/// start from rest, so every condition reads `y₀^{(k)}(end) = 0` for
/// `k ∈ {1, 3}` (`n ≥ 1`) and additionally `k = 4` (`n = 2`).
pub fn check_compatibility(input: &CascadeInput, n: usize) -> Vec<CompatibilityLine> {
    let mut orders: Vec<(u32, &'static str)> = Vec::new();
    if n >= 1 {
        orders.push((1, "first derivative"));
        orders.push((3, "third derivative"));
    }
    if n >= 2 {
        orders.push((4, "fourth derivative"));
    }
    let mut out = Vec::new();
    for (k, label) in orders {
        for (end, x) in [(End::Left, 0.0), (End::Right, 1.0)] {
            let residual = input.y0.derivative(x, k).abs();
            out.push(CompatibilityLine { label, end, residual, passed: residual <= COMPATIBILITY_TOL });
        }
    }
    out
}

/// Everything one cascade level produces.
#[derive(Debug, Clone)]
pub struct Level {
    /// `vʲ`.
    pub control: Signal,
    /// `yʲ`.
    pub state: WaveField,
    /// `Φʲ`.
    pub adjoint: WaveField,
    /// `Φʲ_x(1, ·)`, so that `vʲ = −η Φʲ_x(1, ·)`.
    pub adjoint_trace: Signal,
    /// `φ^{a,j}` for `j ≥ 1`.
    pub correction: Option<WaveField>,
    /// `(gʲ₀, gʲ₁) = −(ŷʲ, ŷʲ_t)` at `t = 0` for `j ≥ 1`.
    pub data: Option<(Vec<f64>, Vec<f64>)>,
    pub iterations: usize,
    pub converged: bool,
    /// `‖(yʲ(T), yʲ_t(T))‖_{H¹×L²}`.
    pub final_residual: f64,
    /// Largest boundary value discarded by corner pinning.
    pub corner_defect: f64,
}

#[derive(Debug, Clone)]
pub struct Traces {
    pub y0_x0: Signal,
    pub y0_x1: Signal,
    pub y0_tt1: Signal,
    pub y1_x0: Option<Signal>,
    pub y1_x1: Option<Signal>,
}

#[derive(Debug, Clone)]
pub struct CascadeResult {
    pub input: CascadeInput,
    pub eta: Signal,
    pub levels: Vec<Level>,
    pub traces: Traces,
}

impl CascadeResult {
    pub fn tgrid(&self) -> TimeGrid {
        self.eta.grid()
    }

    /// `vʲ`.
    pub fn control(&self, j: usize) -> Option<&Signal> {
        self.levels.get(j).map(|l| &l.control)
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }
}

struct Context {
    grid: SpaceGrid,
    tgrid: TimeGrid,
    eta: Signal,
    weight: WeightFn,
    op: WaveHumOperator,
}

impl Context {
    fn solve(&self, init: WaveInit, left: Signal, right: Signal, source: WaveSource, dir: Direction) -> Result<WaveField> {
        solve_wave(&WaveProblem::new(self.grid, self.tgrid, init, left, right, source)?, dir)
    }

    /// Solves `z_tt − z_xx = −w_xxxx` for a homogeneous wave solution `w`
    /// (no source when `w` is `None`) as `z = P + r` with the particular
    /// solution `P = −(t − t₀) w_ttt / 2`, `t₀` the starting time, and `r`
    /// a homogeneous solve. Only third differences of `w` enter, which stay
    /// bounded where `w_ttt` jumps.
    fn solve_minus_fourth(
        &self,
        (position, velocity): (Vec<f64>, Vec<f64>),
        left: Signal,
        right: Signal,
        w: Option<&WaveField>,
        dir: Direction,
    ) -> Result<WaveField> {
        let Some(w) = w else {
            return self.solve(WaveInit::Taylor { position, velocity }, left, right, WaveSource::None, dir);
        };
        let (nn, nt, dt) = (self.grid.n_nodes(), self.tgrid.len(), self.tgrid.dt());
        let mut w3 = vec![0.0; nn * nt];
        for j in 0..nn {
            let col = finite_difference(w.column(j).values(), dt, 3)?;
            for (i, v) in col.into_iter().enumerate() {
                w3[i * nn + j] = v;
            }
        }
        let start = match dir {
            Direction::Forward => 0,
            Direction::Backward => nt - 1,
        };
        let t0 = self.tgrid.node(start);
        let p: Vec<f64> = (0..nn * nt).map(|k| -0.5 * (self.tgrid.node(k / nn) - t0) * w3[k]).collect();
        let p = WaveField::from_data(self.grid, self.tgrid, p);
        let velocity = velocity.iter().zip(&w3[start * nn..(start + 1) * nn]).map(|(v, d)| v + 0.5 * d).collect();
        let r = self.solve(
            WaveInit::Taylor { position, velocity },
            left.combine(1.0, &p.column(0), -1.0)?,
            right.combine(1.0, &p.column(nn - 1), -1.0)?,
            WaveSource::None,
            dir,
        )?;
        r.combine(1.0, &p, 1.0)
    }

    /// `−φ[n][N−1]/h` at every node, the trace consistent with the HUM transpose.
    fn observation(&self, phi: &WaveField) -> Signal {
        let n = self.grid.n_elem;
        let h = self.grid.h();
        Signal::new(self.tgrid, (0..self.tgrid.len()).map(|i| -phi.at(i, n - 1) / h).collect())
            .expect("finite observation")
    }

    /// Linear interpolants of the boundary values and their time derivatives
    /// at `t = 0`. Any initial data give the same `Φʲ`, since the HUM part
    /// absorbs them; these avoid a corner jump the discrete observation cannot see.
    fn corner_data(&self, left: &Signal, right: &Signal) -> (Vec<f64>, Vec<f64>) {
        let dt = self.tgrid.dt();
        let start = |s: &Signal| {
            let v = s.values();
            (v[0], (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dt))
        };
        let ((a, da), (b, db)) = (start(left), start(right));
        (self.grid.sample(|x| (1.0 - x) * a + x * b), self.grid.sample(|x| (1.0 - x) * da + x * db))
    }

    fn times_eta(&self, s: &Signal) -> Signal {
        s.product(&self.eta).expect("shared grid")
    }

    /// `(η o)''` by the product rule with closed-form weight derivatives.
    fn second_derivative_times_eta(&self, o: &Signal) -> Result<Signal> {
        let o1 = signal_time_derivative(o, 1)?;
        let o2 = signal_time_derivative(o, 2)?;
        let values = self
            .tgrid
            .nodes()
            .enumerate()
            .map(|(i, t)| {
                let [e0, e1, e2] = self.weight.eval_derivatives(t)?;
                Ok(e2 * o.values()[i] + 2.0 * e1 * o1.values()[i] + e0 * o2.values()[i])
            })
            .collect::<Result<Vec<f64>>>()?;
        Signal::new(self.tgrid, values)
    }
}

/// Zeroes the first (and optionally last) sample; returns the largest removed value.
fn pin(s: &Signal, last: bool) -> (Signal, f64) {
    let mut v = s.values().to_vec();
    let m = v.len() - 1;
    let mut defect = v[0].abs();
    v[0] = 0.0;
    if last {
        defect = defect.max(v[m].abs());
        v[m] = 0.0;
    }
    (Signal::new(s.grid(), v).expect("finite"), defect)
}

/// Inputs of a level `j ≥ 1`. Sources are `−w_xxxx` for the given fields.
struct LevelSpec<'a> {
    /// Boundary data and source of `φ^{a,j}`.
    corr_left: Signal,
    corr_right: Signal,
    corr_source: Option<&'a WaveField>,
    /// Known parts of the level state: `yʲ(0)`, `yʲ(1) + vʲ − η φ^{a,j}_x(1)`, source.
    left: Signal,
    right: Signal,
    source: Option<&'a WaveField>,
}

fn level_zero(ctx: &Context, input: &CascadeInput) -> Result<Level> {
    let init = WaveInit::Taylor {
        position: ctx.grid.sample(|x| input.y0.value(x)),
        velocity: ctx.grid.sample(|x| input.y1.value(x)),
    };
    let sol = ctx.op.solve_rhs(&ctx.op.free_final(&init)?)?;
    let u = sol.result.control.clone();
    let state = ctx.solve(init, Signal::zeros(ctx.tgrid), u.clone(), WaveSource::None, Direction::Forward)?;
    let adjoint_trace = ctx.observation(&sol.adjoint);
    Ok(Level {
        control: u.scaled(-1.0),
        final_residual: ctx.op.state_norm(&ctx.op.final_pair(&state)),
        state,
        adjoint: sol.adjoint,
        adjoint_trace,
        correction: None,
        data: None,
        iterations: sol.result.iterations,
        converged: sol.result.converged,
        corner_defect: 0.0,
    })
}

fn level_next(ctx: &Context, spec: LevelSpec<'_>) -> Result<Level> {
    let zero = || (vec![0.0; ctx.grid.n_nodes()], vec![0.0; ctx.grid.n_nodes()]);
    let init = ctx.corner_data(&spec.corr_left, &spec.corr_right);
    let correction =
        ctx.solve_minus_fourth(init, spec.corr_left, spec.corr_right, spec.corr_source, Direction::Forward)?;
    let corr_trace = trace_normal_derivative(&correction, End::Right);
    let known_right = spec.right.combine(1.0, &ctx.times_eta(&corr_trace), 1.0)?;
    let (left, d3) = pin(&spec.left, true);
    let (known_right, d4) = pin(&known_right, true);

    // Free part: the state driven by the known data only.
    let free = ctx.solve_minus_fourth(zero(), left.clone(), known_right.clone(), spec.source, Direction::Forward)?;
    let backward = ctx.solve_minus_fourth(zero(), left.clone(), known_right.clone(), spec.source, Direction::Backward)?;
    let (b0, b1) = backward.initial_state();
    let data = (b0.iter().map(|v| -v).collect(), b1.iter().map(|v| -v).collect());

    let sol = ctx.op.solve_rhs(&ctx.op.final_pair(&free))?;
    let u = sol.result.control.clone();
    let adjoint = sol.adjoint.combine(1.0, &correction, 1.0)?;
    let adjoint_trace = ctx.observation(&sol.adjoint).combine(1.0, &corr_trace, 1.0)?;
    let control = ctx.times_eta(&adjoint_trace).scaled(-1.0);
    let right = known_right.combine(1.0, &u, 1.0)?;
    let state = ctx.solve_minus_fourth(zero(), left, right, spec.source, Direction::Forward)?;
    Ok(Level {
        control,
        final_residual: ctx.op.state_norm(&ctx.op.final_pair(&state)),
        state,
        adjoint,
        adjoint_trace,
        correction: Some(correction),
        data: Some(data),
        iterations: sol.result.iterations,
        converged: sol.result.converged,
        corner_defect: d3.max(d4),
    })
}

/// Runs levels `0..=input.order`.
pub fn run_cascade(input: &CascadeInput) -> Result<CascadeResult> {
    let op = WaveHumOperator::new(input.grid, input.weight, input.settings)?;
    let tgrid = op.tgrid();
    let ctx = Context { grid: input.grid, tgrid, eta: input.weight.sample(tgrid)?, weight: input.weight, op };

    let l0 = level_zero(&ctx, input)?;
    let traces0 = Traces {
        y0_x0: trace_normal_derivative(&l0.state, End::Left),
        y0_x1: trace_normal_derivative(&l0.state, End::Right),
        y0_tt1: ctx.second_derivative_times_eta(&l0.adjoint_trace)?,
        y1_x0: None,
        y1_x1: None,
    };
    let mut traces = traces0;
    let mut levels = vec![l0];

    if input.order >= 1 {
        let l0 = &levels[0];
        let spec = LevelSpec {
            corr_left: trace_normal_derivative(&l0.adjoint, End::Left).scaled(-1.0),
            corr_right: l0.adjoint_trace.clone(),
            corr_source: None,
            left: traces.y0_x0.scaled(-1.0),
            right: traces.y0_x1.clone(),
            source: None,
        };
        let l1 = level_next(&ctx, spec)?;
        traces.y1_x0 = Some(trace_normal_derivative(&l1.state, End::Left));
        traces.y1_x1 = Some(trace_normal_derivative(&l1.state, End::Right));
        levels.push(l1);
    }
    if input.order >= 2 {
        let (l0, l1) = (&levels[0], &levels[1]);
        let y1_x0 = traces.y1_x0.as_ref().expect("level 1 traces");
        let y1_x1 = traces.y1_x1.as_ref().expect("level 1 traces");
        let spec = LevelSpec {
            corr_left: trace_normal_derivative(&l1.adjoint, End::Left).scaled(-1.0),
            corr_right: l1.adjoint_trace.clone(),
            corr_source: Some(&l0.adjoint),
            left: y1_x0.scaled(-1.0),
            right: y1_x1.combine(1.0, &traces.y0_tt1, 0.5)?,
            source: Some(&l0.state),
        };
        levels.push(level_next(&ctx, spec)?);
    }
    Ok(CascadeResult { input: input.clone(), eta: ctx.eta, levels, traces })
}

/// `v⁰` with its state, adjoint and traces.
pub fn compute_v0(input: &CascadeInput) -> Result<CascadeResult> {
    run_cascade(&CascadeInput { order: 0, ..input.clone() })
}

/// Levels 0 and 1.
pub fn compute_v1(input: &CascadeInput) -> Result<CascadeResult> {
    run_cascade(&CascadeInput { order: 1, ..input.clone() })
}

/// Levels 0, 1 and 2.
pub fn compute_v2(input: &CascadeInput) -> Result<CascadeResult> {
    run_cascade(&CascadeInput { order: 2, ..input.clone() })
}

/// Checks every level's final state against [`LEVEL_TOLERANCES`].
pub fn certify(result: &CascadeResult) -> Result<()> {
    for (j, level) in result.levels.iter().enumerate() {
        if level.final_residual > LEVEL_TOLERANCES[j] {
            return Err(Error::Certificate {
                what: format!("level {j} final state"),
                residual: level.final_residual,
                tol: LEVEL_TOLERANCES[j],
            });
        }
    }
    Ok(())
}

/// Factor of a boundary-layer profile in the stretched variable `d/√ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerFactor {
    Exp,
    /// `(d/√ε) e^{−d/√ε}`.
    WExp,
}

/// `amplitude(t) · factor(d/√ε)`, `d` the distance to the profile's end.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryLayerProfile {
    pub amplitude: Signal,
    pub side: End,
    pub factor: LayerFactor,
    pub eps: f64,
}

impl BoundaryLayerProfile {
    /// Value and `x`-derivative of the spatial factor.
    pub fn shape(&self, x: f64) -> (f64, f64) {
        let r = self.eps.sqrt();
        let (d, sign) = match self.side {
            End::Left => (x, 1.0),
            End::Right => (1.0 - x, -1.0),
        };
        let z = d / r;
        let e = (-z).exp();
        match self.factor {
            LayerFactor::Exp => (e, -sign * e / r),
            LayerFactor::WExp => (z * e, sign * (1.0 - z) * e / r),
        }
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        self.amplitude.eval(t) * self.shape(x).0
    }
}
