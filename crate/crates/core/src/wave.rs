//! Courant-one leapfrog for `u_tt − u_xx = f` on `(0,1) × (0,T)` with
//! Dirichlet data on both ends.
//!
//! At `dt = h` the scheme `u[i+1][j] = u[i][j+1] + u[i][j−1] − u[i−1][j] + dt² f`
//! transports exactly along characteristics, so homogeneous problems with
//! piecewise-linear data reproduce d'Alembert's formula at the nodes.

use crate::error::{Error, Result};
use crate::signals::{cubic_eval, cubic_eval_deriv, Signal, SpaceGrid, TimeGrid};

/// Relative tolerance on `dt = h`.
const COURANT_TOL: f64 = 1e-12;

/// Relative tolerance on corner compatibility between data and boundary signals.
const CORNER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Left,
    Right,
}

/// Starting data, given at `t = 0` (forward) or `t = T` (backward).
#[derive(Debug, Clone, PartialEq)]
pub enum WaveInit {
    /// Position and time derivative; the second level comes from a Taylor step.
    Taylor { position: Vec<f64>, velocity: Vec<f64> },
    /// The first two time levels in the direction of integration.
    Levels { first: Vec<f64>, second: Vec<f64> },
}

impl WaveInit {
    pub fn zero(grid: SpaceGrid) -> Self {
        let z = vec![0.0; grid.n_nodes()];
        WaveInit::Taylor { position: z.clone(), velocity: z }
    }

    fn scale_add(&self, a: f64, other: &WaveInit, b: f64) -> Option<WaveInit> {
        let lin = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect();
        match (self, other) {
            (WaveInit::Taylor { position: p, velocity: v }, WaveInit::Taylor { position: q, velocity: w }) => {
                Some(WaveInit::Taylor { position: lin(p, q), velocity: lin(v, w) })
            }
            (WaveInit::Levels { first: p, second: v }, WaveInit::Levels { first: q, second: w }) => {
                Some(WaveInit::Levels { first: lin(p, q), second: lin(v, w) })
            }
            _ => None,
        }
    }
}

/// Right-hand side `f(x, t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum WaveSource {
    None,
    /// Row-major nodal values, one row per time node.
    Array(Vec<f64>),
    /// `f₁(t) e^{−x/√ε} + f₂(t) e^{−(1−x)/√ε}`, evaluated in closed form.
    Layers { left: Signal, right: Signal, eps: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveProblem {
    grid: SpaceGrid,
    tgrid: TimeGrid,
    init: WaveInit,
    left: Signal,
    right: Signal,
    source: WaveSource,
}

impl WaveProblem {
    pub fn new(
        grid: SpaceGrid,
        tgrid: TimeGrid,
        init: WaveInit,
        left: Signal,
        right: Signal,
        source: WaveSource,
    ) -> Result<Self> {
        let (dt, h) = (tgrid.dt(), grid.h());
        if ((dt - h) / h).abs() > COURANT_TOL {
            return Err(Error::Courant { dt, h });
        }
        for s in [&left, &right] {
            if s.grid() != tgrid {
                return Err(Error::GridMismatch("boundary signal grid differs from the time grid".into()));
            }
        }
        let nn = grid.n_nodes();
        let (a, b) = match &init {
            WaveInit::Taylor { position, velocity } => (position, velocity),
            WaveInit::Levels { first, second } => (first, second),
        };
        for v in [a, b] {
            if v.len() != nn {
                return Err(Error::Shape { expected: nn, got: v.len() });
            }
        }
        match &source {
            WaveSource::Array(f) if f.len() != nn * tgrid.len() => {
                return Err(Error::Shape { expected: nn * tgrid.len(), got: f.len() });
            }
            WaveSource::Layers { left: l, right: r, eps } => {
                if l.grid() != tgrid || r.grid() != tgrid {
                    return Err(Error::GridMismatch("source signal grid differs from the time grid".into()));
                }
                if !(*eps > 0.0) {
                    return Err(Error::Invalid(format!("layer source needs ε > 0, got {eps}")));
                }
            }
            _ => {}
        }
        Ok(WaveProblem { grid, tgrid, init, left, right, source })
    }

    /// Homogeneous Dirichlet data, no source.
    pub fn free(grid: SpaceGrid, tgrid: TimeGrid, init: WaveInit) -> Result<Self> {
        WaveProblem::new(grid, tgrid, init, Signal::zeros(tgrid), Signal::zeros(tgrid), WaveSource::None)
    }

    pub fn grid(&self) -> SpaceGrid {
        self.grid
    }

    pub fn tgrid(&self) -> TimeGrid {
        self.tgrid
    }

    /// `a·self + b·other`; `None` when the data kinds differ.
    pub fn combine(&self, a: f64, other: &WaveProblem, b: f64) -> Option<WaveProblem> {
        if self.grid != other.grid || self.tgrid != other.tgrid {
            return None;
        }
        let init = self.init.scale_add(a, &other.init, b)?;
        let source = match (&self.source, &other.source) {
            (WaveSource::None, WaveSource::None) => WaveSource::None,
            (WaveSource::Array(f), WaveSource::Array(g)) => {
                WaveSource::Array(f.iter().zip(g).map(|(p, q)| a * p + b * q).collect())
            }
            _ => return None,
        };
        Some(WaveProblem {
            grid: self.grid,
            tgrid: self.tgrid,
            init,
            left: self.left.combine(a, &other.left, b).ok()?,
            right: self.right.combine(a, &other.right, b).ok()?,
            source,
        })
    }

    fn source_row(&self, i: usize, out: &mut [f64]) {
        match &self.source {
            WaveSource::None => out.iter_mut().for_each(|v| *v = 0.0),
            WaveSource::Array(f) => {
                let nn = self.grid.n_nodes();
                out.copy_from_slice(&f[i * nn..(i + 1) * nn]);
            }
            WaveSource::Layers { left, right, eps } => {
                let s = eps.sqrt();
                let (a, b) = (left.values()[i], right.values()[i]);
                for (j, v) in out.iter_mut().enumerate() {
                    let x = self.grid.x(j);
                    *v = a * (-x / s).exp() + b * (-(1.0 - x) / s).exp();
                }
            }
        }
    }
}

/// Nodal values `u[i][j]`, time index `i`, space index `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    grid: SpaceGrid,
    tgrid: TimeGrid,
    data: Vec<f64>,
}

impl WaveField {
    pub(crate) fn from_data(grid: SpaceGrid, tgrid: TimeGrid, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), grid.n_nodes() * tgrid.len());
        WaveField { grid, tgrid, data }
    }

    pub fn zeros(grid: SpaceGrid, tgrid: TimeGrid) -> Self {
        WaveField { grid, tgrid, data: vec![0.0; grid.n_nodes() * tgrid.len()] }
    }

    pub fn grid(&self) -> SpaceGrid {
        self.grid
    }

    pub fn tgrid(&self) -> TimeGrid {
        self.tgrid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.grid.n_nodes() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let nn = self.grid.n_nodes();
        &self.data[i * nn..(i + 1) * nn]
    }

    pub fn column(&self, j: usize) -> Signal {
        let values = (0..self.tgrid.len()).map(|i| self.at(i, j)).collect();
        Signal::new(self.tgrid, values).expect("column of a finite field")
    }

    /// `a·self + b·other` on shared grids.
    pub fn combine(&self, a: f64, other: &WaveField, b: f64) -> Result<WaveField> {
        if self.grid != other.grid || self.tgrid != other.tgrid {
            return Err(Error::GridMismatch("wave fields on different grids".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(x, y)| a * x + b * y).collect();
        Ok(WaveField { grid: self.grid, tgrid: self.tgrid, data })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Last two levels `(u[M−1], u[M])`.
    pub fn final_levels(&self) -> (&[f64], &[f64]) {
        let m = self.tgrid.n_steps;
        (self.row(m - 1), self.row(m))
    }

    /// Position and backward-difference velocity at `t = T`.
    pub fn final_state(&self) -> (Vec<f64>, Vec<f64>) {
        let (a, b) = self.final_levels();
        let dt = self.tgrid.dt();
        (b.to_vec(), b.iter().zip(a).map(|(p, q)| (p - q) / dt).collect())
    }

    /// Position and forward-difference velocity at `t = 0`.
    pub fn initial_state(&self) -> (Vec<f64>, Vec<f64>) {
        let dt = self.tgrid.dt();
        let (a, b) = (self.row(0), self.row(1));
        (a.to_vec(), b.iter().zip(a).map(|(p, q)| (p - q) / dt).collect())
    }

    /// Kinetic part from forward time differences plus the staggered product
    /// of spatial differences; conserved exactly by the homogeneous scheme.
    pub fn energy(&self, i: usize) -> f64 {
        let (h, dt) = (self.grid.h(), self.tgrid.dt());
        let (a, b) = (self.row(i), self.row(i + 1));
        let kinetic: f64 = a.iter().zip(b).map(|(p, q)| ((q - p) / dt).powi(2)).sum::<f64>() * h;
        let potential: f64 = (0..self.grid.n_elem)
            .map(|j| (a[j + 1] - a[j]) * (b[j + 1] - b[j]) / (h * h))
            .sum::<f64>()
            * h;
        kinetic + potential
    }

    /// Value, `∂ₓ` and `∂ₜ` at an arbitrary point by tensor cubic interpolation.
    pub fn eval(&self, x: f64, t: f64) -> (f64, f64, f64) {
        let nn = self.grid.n_nodes();
        let h = self.grid.h();
        let dt = self.tgrid.dt();
        let nt = self.tgrid.len();
        let s = (t / dt).clamp(0.0, (nt - 1) as f64);
        let i0 = (s.floor() as isize - 1).clamp(0, nt as isize - 4) as usize;
        let rows: Vec<usize> = (i0..i0 + 4).collect();
        let mut vals = [0.0; 4];
        let mut dxs = [0.0; 4];
        for (k, &i) in rows.iter().enumerate() {
            let r = self.row(i);
            vals[k] = cubic_eval(r, h, x);
            dxs[k] = if nn >= 4 { cubic_eval_deriv(r, h, x) } else { 0.0 };
        }
        let local = |c: &[f64; 4]| cubic_eval(c, dt, t - i0 as f64 * dt);
        (local(&vals), local(&dxs), cubic_eval_deriv(&vals, dt, t - i0 as f64 * dt))
    }
}

/// Solves the leapfrog recursion in the requested direction.
pub fn solve_wave(p: &WaveProblem, direction: Direction) -> Result<WaveField> {
    let nn = p.grid.n_nodes();
    let m = p.tgrid.n_steps;
    let dt = p.tgrid.dt();
    let dt2 = dt * dt;
    let rev = direction == Direction::Backward;
    // Integration step k corresponds to physical time index idx(k).
    let idx = |k: usize| if rev { m - k } else { k };
    let (g1, g2) = (p.left.values(), p.right.values());
    let mut u = vec![0.0; nn * (m + 1)];
    let mut f = vec![0.0; nn];

    match &p.init {
        WaveInit::Taylor { position, velocity } => {
            check_corner(position[0], g1[idx(0)])?;
            check_corner(position[nn - 1], g2[idx(0)])?;
            u[..nn].copy_from_slice(position);
            u[0] = g1[idx(0)];
            u[nn - 1] = g2[idx(0)];
            p.source_row(idx(0), &mut f);
            let sign = if rev { -1.0 } else { 1.0 };
            let (prev, next) = u.split_at_mut(nn);
            for j in 1..nn - 1 {
                next[j] = 0.5 * (prev[j + 1] + prev[j - 1]) + sign * dt * velocity[j] + 0.5 * dt2 * f[j];
            }
        }
        WaveInit::Levels { first, second } => {
            check_corner(first[0], g1[idx(0)])?;
            check_corner(first[nn - 1], g2[idx(0)])?;
            check_corner(second[0], g1[idx(1)])?;
            check_corner(second[nn - 1], g2[idx(1)])?;
            u[..nn].copy_from_slice(first);
            u[nn..2 * nn].copy_from_slice(second);
            u[0] = g1[idx(0)];
            u[nn - 1] = g2[idx(0)];
        }
    }
    u[nn] = g1[idx(1)];
    u[2 * nn - 1] = g2[idx(1)];

    for k in 1..m {
        p.source_row(idx(k), &mut f);
        let (past, future) = u.split_at_mut((k + 1) * nn);
        let prev = &past[(k - 1) * nn..k * nn];
        let cur = &past[k * nn..(k + 1) * nn];
        let next = &mut future[..nn];
        for j in 1..nn - 1 {
            next[j] = cur[j + 1] + cur[j - 1] - prev[j] + dt2 * f[j];
        }
        next[0] = g1[idx(k + 1)];
        next[nn - 1] = g2[idx(k + 1)];
    }

    if rev {
        let mut out = vec![0.0; u.len()];
        for k in 0..=m {
            out[(m - k) * nn..(m - k + 1) * nn].copy_from_slice(&u[k * nn..(k + 1) * nn]);
        }
        u = out;
    }
    Ok(WaveField { grid: p.grid, tgrid: p.tgrid, data: u })
}

fn check_corner(data: f64, boundary: f64) -> Result<()> {
    if (data - boundary).abs() > CORNER_TOL * (1.0 + boundary.abs()) {
        return Err(Error::Invalid(format!(
            "initial value {data:e} at a corner disagrees with boundary datum {boundary:e}"
        )));
    }
    Ok(())
}

/// `∂ₓu` at one end by the one-sided second-order difference.
pub fn trace_normal_derivative(u: &WaveField, end: End) -> Signal {
    let n = u.grid.n_elem;
    let h = u.grid.h();
    let values = (0..u.tgrid.len())
        .map(|i| {
            let r = u.row(i);
            match end {
                End::Left if n >= 2 => (-3.0 * r[0] + 4.0 * r[1] - r[2]) / (2.0 * h),
                End::Right if n >= 2 => (3.0 * r[n] - 4.0 * r[n - 1] + r[n - 2]) / (2.0 * h),
                _ => (r[n] - r[0]) / h,
            }
        })
        .collect();
    Signal::new(u.tgrid, values).expect("trace of a finite field")
}

/// Time derivative of order `k` of the boundary column at `end`.
pub fn trace_time_derivative(u: &WaveField, end: End, k: u8) -> Result<Signal> {
    let j = match end {
        End::Left => 0,
        End::Right => u.grid.n_elem,
    };
    crate::signals::signal_time_derivative(&u.column(j), k)
}

/// `∂ₓ⁴u` through the identity `∂ₓ⁴u = ∂ₜ⁴u` of wave solutions: five-point
/// centered differences in time, six-point one-sided ones at the temporal ends.
pub fn fourth_x_derivative(u: &WaveField) -> Result<Vec<f64>> {
    let nt = u.tgrid.len();
    if nt < 6 {
        return Err(Error::Invalid(format!("fourth derivative needs 6 time levels, got {nt}")));
    }
    let nn = u.grid.n_nodes();
    let c = 1.0 / u.tgrid.dt().powi(4);
    let mut out = vec![0.0; u.data.len()];
    for j in 0..nn {
        let col: Vec<f64> = (0..nt).map(|i| u.at(i, j)).collect();
        let d = fourth_difference(&col, c);
        for i in 0..nt {
            out[i * nn + j] = d[i];
        }
    }
    Ok(out)
}

fn fourth_difference(v: &[f64], c: f64) -> Vec<f64> {
    const START0: [f64; 6] = [3.0, -14.0, 26.0, -24.0, 11.0, -2.0];
    const START1: [f64; 6] = [2.0, -9.0, 16.0, -14.0, 6.0, -1.0];
    let n = v.len();
    let mut d = vec![0.0; n];
    for i in 2..n - 2 {
        d[i] = c * (v[i + 2] - 4.0 * v[i + 1] + 6.0 * v[i] - 4.0 * v[i - 1] + v[i - 2]);
    }
    let dot = |w: &[f64; 6], s: &[f64]| w.iter().zip(s).map(|(a, b)| a * b).sum::<f64>();
    d[0] = c * dot(&START0, &v[..6]);
    d[1] = c * dot(&START1, &v[..6]);
    let rv: Vec<f64> = v[n - 6..].iter().rev().copied().collect();
    d[n - 1] = c * dot(&START0, &rv);
    d[n - 2] = c * dot(&START1, &rv);
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grids(n: usize, t: f64) -> (SpaceGrid, TimeGrid) {
        let g = SpaceGrid::new(n).unwrap();
        (g, TimeGrid::new(t, (t * n as f64).round() as usize).unwrap())
    }

    #[test]
    fn separated_solution_and_right_trace() {
        let err = |n: usize| {
            let (g, tg) = grids(n, 1.0);
            let init = WaveInit::Taylor { position: g.sample(|x| (PI * x).sin()), velocity: vec![0.0; n + 1] };
            let u = solve_wave(&WaveProblem::free(g, tg, init).unwrap(), Direction::Forward).unwrap();
            let mut e = 0.0f64;
            for i in 0..tg.len() {
                for j in 0..=n {
                    let exact = (PI * g.x(j)).sin() * (PI * tg.node(i)).cos();
                    e = e.max((u.at(i, j) - exact).abs());
                }
            }
            let tr = trace_normal_derivative(&u, End::Right);
            let te = tg
                .nodes()
                .zip(tr.values())
                .map(|(t, v)| (v + PI * (PI * t).cos()).abs())
                .fold(0.0, f64::max);
            (e, te)
        };
        let (e1, t1) = err(50);
        let (e2, t2) = err(100);
        // Courant one reproduces d'Alembert on the nodes.
        assert!(e1 < 1e-12 && e2 < 1e-12, "{e1} {e2}");
        assert!((3.5..4.5).contains(&(t1 / t2)), "trace ratio {}", t1 / t2);
    }

    #[test]
    fn courant_violation_is_rejected() {
        let g = SpaceGrid::new(10).unwrap();
        let tg = TimeGrid::new(1.0, 20).unwrap();
        assert!(matches!(WaveProblem::free(g, tg, WaveInit::zero(g)), Err(Error::Courant { .. })));
    }

    #[test]
    fn fourth_derivative_of_separated_solution() {
        let (g, tg) = grids(200, 1.0);
        let init = WaveInit::Taylor { position: g.sample(|x| (PI * x).sin()), velocity: vec![0.0; 201] };
        let u = solve_wave(&WaveProblem::free(g, tg, init).unwrap(), Direction::Forward).unwrap();
        let d4 = fourth_x_derivative(&u).unwrap();
        let p4 = PI.powi(4);
        let mut e = 0.0f64;
        for i in 0..tg.len() {
            for j in 0..=200 {
                let exact = p4 * (PI * g.x(j)).sin() * (PI * tg.node(i)).cos();
                e = e.max((d4[i * 201 + j] - exact).abs());
            }
        }
        assert!(e < 1e-2 * p4, "{e}");
    }

    #[test]
    fn one_sided_fourth_stencils_are_exact_on_quartics() {
        let v: Vec<f64> = (0..12).map(|i| {
            let t = i as f64 * 0.1;
            t.powi(4) - 2.0 * t.powi(3) + t
        }).collect();
        let d = fourth_difference(&v, 1e4);
        assert!(d.iter().all(|x| (x - 24.0).abs() < 1e-6), "{d:?}");
    }
}
