//! Cubic Hermite elements for `ε y_xxxx − y_xx` and Newmark average
//! acceleration (`β = 1/4`, `γ = 1/2`) for the clamped beam whose slope at
//! `x = 1` is prescribed.
//!
//! Dofs are interleaved per node: `2j` is the value, `2j + 1` the slope. The
//! value dofs at both ends and the slope at `x = 0` are zero; the slope at
//! `x = 1` follows the control. The displacement recursion on free dofs is
//!
//! `(M + dt²/4 K)(d⁺ + d⁻) = 2 (M − dt²/4 K) d + dt²/4 (F⁺ + 2F + F⁻)`,
//!
//! which conserves `vᵀMv + dᵀKd` with `v⁺ = 2 (d⁺ − d)/dt − v`.

use crate::banded::{BandedCholesky, SymBanded};
use crate::error::{Error, Result};
use crate::signals::{Signal, SpaceGrid, TimeGrid};
use crate::wave::{Direction, End};

/// Half-bandwidth of the interleaved Hermite matrices.
const KD: usize = 3;

/// Tolerance on the clamped and control constraints of the initial data.
const CONSTRAINT_TOL: f64 = 1e-10;

/// Mass `∫uv`, stiffness `∫u'v'` and bending `∫u''v''` over all Hermite dofs.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamMatrices {
    pub grid: SpaceGrid,
    pub mass: SymBanded,
    pub stiffness: SymBanded,
    pub bending: SymBanded,
}

/// Element matrices `(mass, stiffness, bending)` on an element of length `h`.
pub fn element_matrices(h: f64) -> ([[f64; 4]; 4], [[f64; 4]; 4], [[f64; 4]; 4]) {
    let (h2, h3) = (h * h, h * h * h);
    let m = [
        [156.0, 22.0 * h, 54.0, -13.0 * h],
        [22.0 * h, 4.0 * h2, 13.0 * h, -3.0 * h2],
        [54.0, 13.0 * h, 156.0, -22.0 * h],
        [-13.0 * h, -3.0 * h2, -22.0 * h, 4.0 * h2],
    ]
    .map(|r| r.map(|v| v * h / 420.0));
    let k = [
        [36.0, 3.0 * h, -36.0, 3.0 * h],
        [3.0 * h, 4.0 * h2, -3.0 * h, -h2],
        [-36.0, -3.0 * h, 36.0, -3.0 * h],
        [3.0 * h, -h2, -3.0 * h, 4.0 * h2],
    ]
    .map(|r| r.map(|v| v / (30.0 * h)));
    let b = [
        [12.0, 6.0 * h, -12.0, 6.0 * h],
        [6.0 * h, 4.0 * h2, -6.0 * h, 2.0 * h2],
        [-12.0, -6.0 * h, 12.0, -6.0 * h],
        [6.0 * h, 2.0 * h2, -6.0 * h, 4.0 * h2],
    ]
    .map(|r| r.map(|v| v / h3));
    (m, k, b)
}

/// Hermite shape functions and their first two derivatives at `ξ ∈ [0, 1]`
/// on an element of length `h`.
pub fn hermite_basis(xi: f64, h: f64) -> [[f64; 4]; 3] {
    let (x2, x3) = (xi * xi, xi * xi * xi);
    [
        [1.0 - 3.0 * x2 + 2.0 * x3, h * (xi - 2.0 * x2 + x3), 3.0 * x2 - 2.0 * x3, h * (x3 - x2)],
        [(-6.0 * xi + 6.0 * x2) / h, 1.0 - 4.0 * xi + 3.0 * x2, (6.0 * xi - 6.0 * x2) / h, 3.0 * x2 - 2.0 * xi],
        [(-6.0 + 12.0 * xi) / (h * h), (-4.0 + 6.0 * xi) / h, (6.0 - 12.0 * xi) / (h * h), (-2.0 + 6.0 * xi) / h],
    ]
}

impl BeamMatrices {
    pub fn assemble(grid: SpaceGrid) -> Result<Self> {
        if grid.n_elem < 2 {
            return Err(Error::Invalid("beam needs at least 2 elements".into()));
        }
        let n = 2 * grid.n_nodes();
        let (me, ke, be) = element_matrices(grid.h());
        let mut mass = SymBanded::zeros(n, KD);
        let mut stiffness = SymBanded::zeros(n, KD);
        let mut bending = SymBanded::zeros(n, KD);
        for e in 0..grid.n_elem {
            for a in 0..4 {
                for b in 0..=a {
                    let (i, j) = (2 * e + a, 2 * e + b);
                    mass.add(i, j, me[a][b]);
                    stiffness.add(i, j, ke[a][b]);
                    bending.add(i, j, be[a][b]);
                }
            }
        }
        Ok(BeamMatrices { grid, mass, stiffness, bending })
    }

    pub fn n_dofs(&self) -> usize {
        2 * self.grid.n_nodes()
    }

    /// `ε B + K`.
    pub fn operator(&self, eps: f64) -> SymBanded {
        self.bending.combine(eps, &self.stiffness, 1.0)
    }

    /// `B + K + M`, the quadratic form of the final-position norm.
    pub fn h2_form(&self) -> SymBanded {
        self.bending.combine(1.0, &self.stiffness, 1.0).combine(1.0, &self.mass, 1.0)
    }

    /// Load vector `∫ g(x) N_i(x) dx` by five-point Gauss quadrature per element.
    pub fn load(&self, g: impl Fn(f64) -> f64) -> Vec<f64> {
        const XG: [f64; 5] = [-0.906_179_845_938_664, -0.538_469_310_105_683, 0.0, 0.538_469_310_105_683, 0.906_179_845_938_664];
        const WG: [f64; 5] = [0.236_926_885_056_189, 0.478_628_670_499_366, 0.568_888_888_888_889, 0.478_628_670_499_366, 0.236_926_885_056_189];
        let h = self.grid.h();
        let mut f = vec![0.0; self.n_dofs()];
        for e in 0..self.grid.n_elem {
            let x0 = self.grid.x(e);
            for (xg, wg) in XG.iter().zip(WG) {
                let xi = 0.5 * (xg + 1.0);
                let val = g(x0 + xi * h) * 0.5 * h * wg;
                let basis = hermite_basis(xi, h)[0];
                for a in 0..4 {
                    f[2 * e + a] += val * basis[a];
                }
            }
        }
        f
    }
}

/// Hermite dofs interpolating `f` and its derivative `df` at the nodes.
pub fn hermite_interpolant(grid: SpaceGrid, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut d = Vec::with_capacity(2 * grid.n_nodes());
    for j in 0..grid.n_nodes() {
        let x = grid.x(j);
        d.push(f(x));
        d.push(df(x));
    }
    d
}

/// Value, slope and curvature of a Hermite field at `x`.
pub fn hermite_eval(grid: SpaceGrid, dofs: &[f64], x: f64) -> [f64; 3] {
    let h = grid.h();
    let e = ((x / h).floor() as usize).min(grid.n_elem - 1);
    let xi = (x - grid.x(e)) / h;
    let basis = hermite_basis(xi, h);
    let mut out = [0.0; 3];
    for (k, row) in basis.iter().enumerate() {
        out[k] = (0..4).map(|a| row[a] * dofs[2 * e + a]).sum();
    }
    out
}

/// Distributed load `f(t) e^{−x/√ε}` (left) or `f(t) e^{−(1−x)/√ε}` (right).
#[derive(Debug, Clone, PartialEq)]
pub struct LayerSource {
    pub amplitude: Signal,
    pub side: End,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamProblem {
    eps: f64,
    grid: SpaceGrid,
    tgrid: TimeGrid,
    position: Vec<f64>,
    velocity: Vec<f64>,
    control: Signal,
    source: Option<LayerSource>,
}

/// Largest element size resolving a layer of width `√ε`.
pub fn resolution_limit(eps: f64) -> f64 {
    eps.sqrt() / 4.0
}

/// Default mesh `max(200, ⌈4/√ε⌉)` elements.
pub fn default_elements(eps: f64) -> usize {
    ((4.0 / eps.sqrt()).ceil() as usize).max(200)
}

/// Default time grid with `dt = min(h, T/2000)`.
pub fn default_time_grid(t_final: f64, grid: SpaceGrid) -> Result<TimeGrid> {
    TimeGrid::with_max_step(t_final, grid.h().min(t_final / 2000.0))
}

impl BeamProblem {
    /// Refuses meshes coarser than `√ε/4`.
    pub fn new(
        eps: f64,
        grid: SpaceGrid,
        tgrid: TimeGrid,
        position: Vec<f64>,
        velocity: Vec<f64>,
        control: Signal,
    ) -> Result<Self> {
        let p = BeamProblem::unresolved(eps, grid, tgrid, position, velocity, control)?;
        let limit = resolution_limit(eps);
        if grid.h() > limit * (1.0 + 1e-12) {
            return Err(Error::Unresolved { h: grid.h(), limit });
        }
        Ok(p)
    }

    /// As [`BeamProblem::new`] without the layer-resolution rule.
    pub fn unresolved(
        eps: f64,
        grid: SpaceGrid,
        tgrid: TimeGrid,
        position: Vec<f64>,
        velocity: Vec<f64>,
        control: Signal,
    ) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Invalid(format!("ε must be positive, got {eps}")));
        }
        let nd = 2 * grid.n_nodes();
        for v in [&position, &velocity] {
            if v.len() != nd {
                return Err(Error::Shape { expected: nd, got: v.len() });
            }
        }
        if control.grid() != tgrid {
            return Err(Error::GridMismatch("control grid differs from the time grid".into()));
        }
        let last = nd - 1;
        let scale = 1.0 + position.iter().chain(&velocity).fold(0.0f64, |m, v| m.max(v.abs()));
        let clamped = [0, 1, nd - 2];
        for v in [&position, &velocity] {
            if clamped.iter().any(|&i| v[i].abs() > CONSTRAINT_TOL * scale) {
                return Err(Error::Invalid("initial data violate the clamped conditions".into()));
            }
        }
        if (position[last] - control.values()[0]).abs() > CONSTRAINT_TOL * scale {
            return Err(Error::Invalid("initial slope at x = 1 differs from the control".into()));
        }
        Ok(BeamProblem { eps, grid, tgrid, position, velocity, control, source: None })
    }

    pub fn with_source(mut self, source: LayerSource) -> Result<Self> {
        if source.amplitude.grid() != self.tgrid {
            return Err(Error::GridMismatch("source grid differs from the time grid".into()));
        }
        self.source = Some(source);
        Ok(self)
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
}

/// Hermite displacement and velocity dofs at every time node.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamField {
    grid: SpaceGrid,
    tgrid: TimeGrid,
    eps: f64,
    disp: Vec<f64>,
    vel: Vec<f64>,
}

impl BeamField {
    pub fn grid(&self) -> SpaceGrid {
        self.grid
    }

    pub fn tgrid(&self) -> TimeGrid {
        self.tgrid
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    fn nd(&self) -> usize {
        2 * self.grid.n_nodes()
    }

    pub fn displacement(&self, i: usize) -> &[f64] {
        let nd = self.nd();
        &self.disp[i * nd..(i + 1) * nd]
    }

    pub fn velocity(&self, i: usize) -> &[f64] {
        let nd = self.nd();
        &self.vel[i * nd..(i + 1) * nd]
    }

    pub fn max_abs(&self) -> f64 {
        self.disp.iter().chain(&self.vel).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `sqrt(yᵀ(B + K + M)y + ẏᵀMẏ)` at `t = T`.
    pub fn final_norm(&self, mats: &BeamMatrices) -> f64 {
        let m = self.tgrid.n_steps;
        state_h2_norm(mats, self.displacement(m), self.velocity(m))
    }
}

/// `sqrt(yᵀ(B + K + M)y + ẏᵀMẏ)`.
pub fn state_h2_norm(mats: &BeamMatrices, y: &[f64], v: &[f64]) -> f64 {
    (mats.h2_form().quad_form(y) + mats.mass.quad_form(v)).max(0.0).sqrt()
}

/// Newmark step matrices restricted to the free dofs `2..2N`, with the
/// coupling columns of the controlled slope dof.
pub(crate) struct Stepper {
    pub nf: usize,
    pub dt: f64,
    /// `M + dt²/4 K` factorized.
    pub a_fact: BandedCholesky,
    pub a: SymBanded,
    /// `M − dt²/4 K`.
    pub b: SymBanded,
    pub m_ff: SymBanded,
    /// `M_fc + dt²/4 K_fc` and `M_fc − dt²/4 K_fc` (nonzero in the last three entries).
    pub a_c: Vec<f64>,
    pub b_c: Vec<f64>,
    pub m_c: Vec<f64>,
}

pub(crate) fn restrict(full: &SymBanded, nd: usize) -> SymBanded {
    let nf = nd - 4;
    let mut out = SymBanded::zeros(nf, KD);
    for i in 0..nf {
        for k in 0..=KD.min(i) {
            out.add(i, i - k, full.get(i + 2, i + 2 - k));
        }
    }
    out
}

impl Stepper {
    pub fn new(mats: &BeamMatrices, eps: f64, dt: f64) -> Result<Self> {
        let nd = mats.n_dofs();
        let kop = mats.operator(eps);
        let m_ff = restrict(&mats.mass, nd);
        let k_ff = restrict(&kop, nd);
        let q = 0.25 * dt * dt;
        let a = m_ff.combine(1.0, &k_ff, q);
        let b = m_ff.combine(1.0, &k_ff, -q);
        let a_fact = a.cholesky()?;
        let nf = nd - 4;
        let c = nd - 1;
        let col = |s: &SymBanded| (0..nf).map(|i| s.get(i + 2, c)).collect::<Vec<f64>>();
        let (mc, kc) = (col(&mats.mass), col(&kop));
        let a_c = mc.iter().zip(&kc).map(|(m, k)| m + q * k).collect();
        let b_c = mc.iter().zip(&kc).map(|(m, k)| m - q * k).collect();
        Ok(Stepper { nf, dt, a_fact, a, b, m_ff, a_c, b_c, m_c: mc })
    }
}

/// Runs the Newmark recursion in the requested direction.
pub fn solve_beam(p: &BeamProblem, direction: Direction) -> Result<BeamField> {
    let mats = BeamMatrices::assemble(p.grid)?;
    solve_beam_with(p, direction, &mats)
}

/// As [`solve_beam`] with preassembled matrices.
pub fn solve_beam_with(p: &BeamProblem, direction: Direction, mats: &BeamMatrices) -> Result<BeamField> {
    let dt = p.tgrid.dt();
    let st = Stepper::new(mats, p.eps, dt)?;
    solve_beam_stepper(p, direction, mats, &st)
}

pub(crate) fn solve_beam_stepper(
    p: &BeamProblem,
    direction: Direction,
    mats: &BeamMatrices,
    st: &Stepper,
) -> Result<BeamField> {
    let nd = mats.n_dofs();
    let nf = st.nf;
    let m = p.tgrid.n_steps;
    let dt = st.dt;
    let q = 0.25 * dt * dt;
    let rev = direction == Direction::Backward;
    let idx = |k: usize| if rev { m - k } else { k };
    let sign = if rev { -1.0 } else { 1.0 };
    let c: Vec<f64> = (0..=m).map(|k| p.control.values()[idx(k)]).collect();
    let load = p.source.as_ref().map(|s| {
        let root = p.eps.sqrt();
        let shape = match s.side {
            End::Left => mats.load(|x| (-x / root).exp()),
            End::Right => mats.load(|x| (-(1.0 - x) / root).exp()),
        };
        let amp: Vec<f64> = (0..=m).map(|k| s.amplitude.values()[idx(k)]).collect();
        (shape[2..nd - 2].to_vec(), amp)
    });
    let force = |k0: usize, w: [f64; 3], out: &mut [f64]| {
        if let Some((shape, amp)) = &load {
            let s: f64 = (0..3).filter(|&i| k0 + i <= m).map(|i| w[i] * amp[k0 + i]).sum::<f64>() * q;
            for (o, f) in out.iter_mut().zip(shape) {
                *o += s * f;
            }
        }
    };

    let mut disp = vec![0.0; nd * (m + 1)];
    let mut vel = vec![0.0; nd * (m + 1)];
    disp[..nd].copy_from_slice(&p.position);
    for (v, x) in vel[..nd].iter_mut().zip(&p.velocity) {
        *v = sign * x;
    }
    disp[nd - 1] = c[0];

    let mut rhs = vec![0.0; nf];
    let mut tmp = vec![0.0; nf];
    if m >= 1 {
        // A d¹ = B d⁰ + dt (M v⁰)_f − a_c c¹ + b_c c⁰ + dt²/4 (F⁰ + F¹)
        let d0 = &disp[2..nd - 2];
        st.b.mul_vec_into(d0, &mut rhs);
        let v0: Vec<f64> = vel[..nd].to_vec();
        st.m_ff.mul_vec_into(&v0[2..nd - 2], &mut tmp);
        for i in 0..nf {
            rhs[i] += dt * (tmp[i] + st.m_c[i] * v0[nd - 1]) - st.a_c[i] * c[1] + st.b_c[i] * c[0];
        }
        force(0, [1.0, 1.0, 0.0], &mut rhs);
        st.a_fact.solve_in_place(&mut rhs);
        disp[nd + 2..2 * nd - 2].copy_from_slice(&rhs);
        disp[2 * nd - 1] = c[1];
    }
    for k in 1..m {
        let (past, future) = disp.split_at_mut((k + 1) * nd);
        let prev = &past[(k - 1) * nd..k * nd];
        let cur = &past[k * nd..(k + 1) * nd];
        st.b.mul_vec_into(&cur[2..nd - 2], &mut rhs);
        st.a.mul_vec_into(&prev[2..nd - 2], &mut tmp);
        for i in 0..nf {
            rhs[i] = 2.0 * rhs[i] - tmp[i] - st.a_c[i] * (c[k + 1] + c[k - 1]) + 2.0 * st.b_c[i] * c[k];
        }
        force(k - 1, [1.0, 2.0, 1.0], &mut rhs);
        st.a_fact.solve_in_place(&mut rhs);
        let next = &mut future[..nd];
        next[2..nd - 2].copy_from_slice(&rhs);
        next[nd - 1] = c[k + 1];
    }
    for k in 0..m {
        for i in 0..nd {
            let d = 2.0 * (disp[(k + 1) * nd + i] - disp[k * nd + i]) / dt;
            vel[(k + 1) * nd + i] = d - vel[k * nd + i];
        }
    }

    if rev {
        let flip = |a: &[f64], s: f64| {
            let mut out = vec![0.0; a.len()];
            for k in 0..=m {
                for i in 0..nd {
                    out[(m - k) * nd + i] = s * a[k * nd + i];
                }
            }
            out
        };
        disp = flip(&disp, 1.0);
        vel = flip(&vel, -1.0);
    }
    Ok(BeamField { grid: p.grid, tgrid: p.tgrid, eps: p.eps, disp, vel })
}

/// `y_xx(1, t)` from the last element's dofs:
/// `6 (w_{N−1} − w_N)/h² + (2 s_{N−1} + 4 s_N)/h`.
pub fn trace_xx_at_one(u: &BeamField) -> Signal {
    let nd = u.nd();
    let h = u.grid.h();
    let values = (0..u.tgrid.len())
        .map(|i| {
            let d = u.displacement(i);
            6.0 * (d[nd - 4] - d[nd - 2]) / (h * h) + (2.0 * d[nd - 3] + 4.0 * d[nd - 1]) / h
        })
        .collect();
    Signal::new(u.tgrid, values).expect("finite trace")
}

/// `y_xx(1, t)` recovered from the discrete equation row of the slope dof at
/// `x = 1`: `(M_c·δ²d/dt² + K_c·(d⁺ + 2d + d⁻)/4) / ε`. Exact moments make it
/// far more accurate than [`trace_xx_at_one`] inside a boundary layer.
/// Valid for runs without distributed load.
pub fn trace_xx_reaction(u: &BeamField, mats: &BeamMatrices) -> Signal {
    let nd = u.nd();
    let m = u.tgrid.n_steps;
    let dt = u.tgrid.dt();
    let c = nd - 1;
    let kop = mats.operator(u.eps);
    let rows: Vec<(usize, f64, f64)> =
        (nd.saturating_sub(4)..nd).map(|i| (i, mats.mass.get(c, i), kop.get(c, i))).collect();
    let mut values = vec![0.0; m + 1];
    for k in 1..m {
        let (a, b, cc) = (u.displacement(k - 1), u.displacement(k), u.displacement(k + 1));
        values[k] = rows
            .iter()
            .map(|&(i, mm, kk)| mm * (cc[i] - 2.0 * b[i] + a[i]) / (dt * dt) + kk * 0.25 * (cc[i] + 2.0 * b[i] + a[i]))
            .sum::<f64>()
            / u.eps;
    }
    if m >= 3 {
        values[0] = 3.0 * values[1] - 3.0 * values[2] + values[3];
        values[m] = 3.0 * values[m - 1] - 3.0 * values[m - 2] + values[m - 3];
    }
    Signal::new(u.tgrid, values).expect("finite trace")
}

/// `E(t) = ẏᵀMẏ + yᵀ(εB + K)y` at every time node.
pub fn beam_energy(u: &BeamField, mats: &BeamMatrices) -> Signal {
    let kop = mats.operator(u.eps);
    let values = (0..u.tgrid.len())
        .map(|i| mats.mass.quad_form(u.velocity(i)) + kop.quad_form(u.displacement(i)))
        .collect();
    Signal::new(u.tgrid, values).expect("finite energy")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss_element(h: f64) -> ([[f64; 4]; 4], [[f64; 4]; 4], [[f64; 4]; 4]) {
        // Four-point Gauss is exact through degree 7; the mass integrand has degree 6.
        let a = (3.0 / 7.0 - 2.0 / 7.0 * (1.2f64).sqrt()).sqrt();
        let b = (3.0 / 7.0 + 2.0 / 7.0 * (1.2f64).sqrt()).sqrt();
        let wa = (18.0 + 30f64.sqrt()) / 36.0;
        let wb = (18.0 - 30f64.sqrt()) / 36.0;
        let mut out = ([[0.0; 4]; 4], [[0.0; 4]; 4], [[0.0; 4]; 4]);
        for (x, w) in [(-b, wb), (-a, wa), (a, wa), (b, wb)] {
            let xi = 0.5 * (x + 1.0);
            let wq = 0.5 * w * h;
            let bs = hermite_basis(xi, h);
            for i in 0..4 {
                for j in 0..4 {
                    out.0[i][j] += wq * bs[0][i] * bs[0][j];
                    out.1[i][j] += wq * bs[1][i] * bs[1][j];
                    out.2[i][j] += wq * bs[2][i] * bs[2][j];
                }
            }
        }
        out
    }

    #[test]
    fn element_matrices_match_quadrature() {
        let h = 0.37;
        let (m, k, b) = element_matrices(h);
        let (mq, kq, bq) = gauss_element(h);
        for a in 0..4 {
            for c in 0..4 {
                assert!((m[a][c] - mq[a][c]).abs() < 1e-12);
                assert!((k[a][c] - kq[a][c]).abs() < 1e-12);
                assert!((b[a][c] - bq[a][c]).abs() < 1e-9 * bq[a][c].abs().max(1.0));
            }
        }
    }

    #[test]
    fn constants_in_kernels() {
        let g = SpaceGrid::new(8).unwrap();
        let mats = BeamMatrices::assemble(g).unwrap();
        let c = hermite_interpolant(g, |_| 1.0, |_| 0.0);
        assert!(mats.stiffness.mul_vec(&c).iter().all(|v| v.abs() < 1e-12));
        assert!(mats.bending.mul_vec(&c).iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn curvature_of_quadratic_is_exact() {
        let g = SpaceGrid::new(10).unwrap();
        let tg = TimeGrid::new(0.01, 5).unwrap();
        let d = hermite_interpolant(g, |x| x * x, |x| 2.0 * x);
        let field = BeamField {
            grid: g,
            tgrid: tg,
            eps: 1.0,
            disp: d.iter().cycle().take(d.len() * 6).copied().collect(),
            vel: vec![0.0; d.len() * 6],
        };
        assert!(trace_xx_at_one(&field).values().iter().all(|v| (v - 2.0).abs() < 1e-9));
    }

    #[test]
    fn zero_problem_stays_zero() {
        let g = SpaceGrid::new(10).unwrap();
        let tg = TimeGrid::new(1.0, 50).unwrap();
        let p = BeamProblem::new(1.0, g, tg, vec![0.0; 22], vec![0.0; 22], Signal::zeros(tg)).unwrap();
        assert_eq!(solve_beam(&p, Direction::Forward).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn unresolved_mesh_is_refused() {
        let g = SpaceGrid::new(10).unwrap();
        let tg = TimeGrid::new(1.0, 50).unwrap();
        let e = BeamProblem::new(1e-3, g, tg, vec![0.0; 22], vec![0.0; 22], Signal::zeros(tg)).unwrap_err();
        assert!(matches!(e, Error::Unresolved { .. }));
    }
}
