//! Time and space grids, sampled signals, the weight `η`, discrete norms and
//! log-log rate fitting.

use crate::banded::SymBanded;
use crate::beam::BeamMatrices;
use crate::error::{Error, Result};

/// Nodes `t_i = i·dt`, `i = 0..=n_steps`, covering `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_final: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, n_steps: usize) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) || n_steps == 0 {
            return Err(Error::Invalid(format!("time grid T = {t_final}, n = {n_steps}")));
        }
        Ok(TimeGrid { t_final, n_steps })
    }

    /// Grid whose step does not exceed `dt_max`.
    pub fn with_max_step(t_final: f64, dt_max: f64) -> Result<Self> {
        let n = (t_final / dt_max - 1e-9).ceil().max(1.0) as usize;
        TimeGrid::new(t_final, n)
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.n_steps as f64
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n_steps {
            self.t_final
        } else {
            i as f64 * self.dt()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_steps).map(move |i| self.node(i))
    }

    /// Trapezoid weights: `dt/2` at the ends, `dt` inside.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let dt = self.dt();
        let mut w = vec![dt; self.len()];
        w[0] = 0.5 * dt;
        w[self.n_steps] = 0.5 * dt;
        w
    }
}

/// Nodes `x_j = j·h`, `j = 0..=n_elem`, covering `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceGrid {
    pub n_elem: usize,
}

impl SpaceGrid {
    pub fn new(n_elem: usize) -> Result<Self> {
        if n_elem == 0 {
            return Err(Error::Invalid("space grid needs at least one element".into()));
        }
        Ok(SpaceGrid { n_elem })
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n_elem as f64
    }

    pub fn n_nodes(&self) -> usize {
        self.n_elem + 1
    }

    pub fn x(&self, j: usize) -> f64 {
        if j == self.n_elem {
            1.0
        } else {
            j as f64 * self.h()
        }
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..=self.n_elem).map(|j| f(self.x(j))).collect()
    }
}

/// Real function of time sampled on every node of a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl Signal {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape { expected: grid.len(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("non-finite signal value at node {i}")));
        }
        Ok(Signal { grid, values })
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Signal { grid, values: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Self {
        Signal { grid, values: grid.nodes().map(f).collect() }
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Signal {
        Signal { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scaled(&self, a: f64) -> Signal {
        self.map(|v| a * v)
    }

    /// `a·self + b·other` on a shared grid.
    pub fn combine(&self, a: f64, other: &Signal, b: f64) -> Result<Signal> {
        self.same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Ok(Signal { grid: self.grid, values })
    }

    /// Pointwise product on a shared grid.
    pub fn product(&self, other: &Signal) -> Result<Signal> {
        self.same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| x * y).collect();
        Ok(Signal { grid: self.grid, values })
    }

    fn same_grid(&self, other: &Signal) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        Ok(())
    }

    /// Local four-point Lagrange interpolation; exact for cubics.
    pub fn eval(&self, t: f64) -> f64 {
        cubic_eval(&self.values, self.grid.dt(), t)
    }

    /// Cubic resampling onto another grid with the same final time.
    pub fn resample(&self, grid: TimeGrid) -> Result<Signal> {
        if (grid.t_final - self.grid.t_final).abs() > 1e-12 * self.grid.t_final {
            return Err(Error::GridMismatch(format!(
                "final times {} and {}",
                self.grid.t_final, grid.t_final
            )));
        }
        if grid == self.grid {
            return Ok(self.clone());
        }
        Ok(Signal::from_fn(grid, |t| self.eval(t)))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Four-point Lagrange interpolation of uniformly spaced samples.
pub(crate) fn cubic_eval(values: &[f64], dt: f64, t: f64) -> f64 {
    let n = values.len();
    if n < 4 {
        let s = (t / dt).clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n.saturating_sub(2));
        let f = s - i as f64;
        return if n == 1 { values[0] } else { values[i] * (1.0 - f) + values[i + 1] * f };
    }
    let s = (t / dt).clamp(0.0, (n - 1) as f64);
    let i0 = (s.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let u = s - i0 as f64;
    // Lagrange basis on nodes 0, 1, 2, 3 in local coordinate u.
    let l0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
    let l1 = u * (u - 2.0) * (u - 3.0) / 2.0;
    let l2 = -u * (u - 1.0) * (u - 3.0) / 2.0;
    let l3 = u * (u - 1.0) * (u - 2.0) / 6.0;
    l0 * values[i0] + l1 * values[i0 + 1] + l2 * values[i0 + 2] + l3 * values[i0 + 3]
}

/// Derivative of the four-point Lagrange interpolant.
pub(crate) fn cubic_eval_deriv(values: &[f64], dt: f64, t: f64) -> f64 {
    let n = values.len();
    assert!(n >= 4, "cubic derivative needs four samples");
    let s = (t / dt).clamp(0.0, (n - 1) as f64);
    let i0 = (s.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let u = s - i0 as f64;
    let d0 = -((u - 2.0) * (u - 3.0) + (u - 1.0) * (u - 3.0) + (u - 1.0) * (u - 2.0)) / 6.0;
    let d1 = ((u - 2.0) * (u - 3.0) + u * (u - 3.0) + u * (u - 2.0)) / 2.0;
    let d2 = -((u - 1.0) * (u - 3.0) + u * (u - 3.0) + u * (u - 1.0)) / 2.0;
    let d3 = ((u - 1.0) * (u - 2.0) + u * (u - 2.0) + u * (u - 1.0)) / 6.0;
    (d0 * values[i0] + d1 * values[i0 + 1] + d2 * values[i0 + 2] + d3 * values[i0 + 3]) / dt
}

/// `η(t) = ((1 − e^{−a t})(1 − e^{−a (T − t)}))^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightFn {
    pub t_final: f64,
    pub a: f64,
    pub p: f64,
}

/// Below this value the weight is treated as zero support.
pub const WEIGHT_ZERO: f64 = 1e-14;

/// Largest control magnitude tolerated where the weight is zero.
pub const WEIGHT_ZERO_CONTROL: f64 = 1e-12;

impl WeightFn {
    pub fn new(t_final: f64, a: f64, p: f64) -> Result<Self> {
        if !(t_final > 0.0 && a > 0.0 && p > 0.0) {
            return Err(Error::Invalid(format!("weight T = {t_final}, a = {a}, p = {p}")));
        }
        Ok(WeightFn { t_final, a, p })
    }

    /// Steepness 40 and exponent 3.
    pub fn standard(t_final: f64) -> Self {
        WeightFn { t_final, a: 40.0, p: 3.0 }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let slack = 1e-12 * self.t_final;
        if !(t >= -slack && t <= self.t_final + slack) {
            return Err(Error::TimeOutOfRange { t, final_time: self.t_final });
        }
        let t = t.clamp(0.0, self.t_final);
        let f = (-(-self.a * t).exp_m1()) * (-(-self.a * (self.t_final - t)).exp_m1());
        Ok(f.powf(self.p))
    }

    /// `(η, η', η'')` at `t`, in closed form.
    pub fn eval_derivatives(&self, t: f64) -> Result<[f64; 3]> {
        let eta = self.eval(t)?;
        let t = t.clamp(0.0, self.t_final);
        let (ea, eb) = ((-self.a * t).exp(), (-self.a * (self.t_final - t)).exp());
        let (fa, fb) = (-(-self.a * t).exp_m1(), -(-self.a * (self.t_final - t)).exp_m1());
        let f = fa * fb;
        let f1 = self.a * ea * fb - self.a * fa * eb;
        let f2 = -self.a * self.a * (ea * fb + fa * eb) - 2.0 * self.a * self.a * ea * eb;
        if f == 0.0 {
            // `p ≥ 2` makes both derivatives vanish with `f`; smaller `p` is singular there.
            let d = if self.p >= 2.0 { 0.0 } else { f64::NAN };
            return Ok([eta, d, d]);
        }
        let p = self.p;
        let d1 = p * f.powf(p - 1.0) * f1;
        let d2 = p * (p - 1.0) * f.powf(p - 2.0) * f1 * f1 + p * f.powf(p - 1.0) * f2;
        Ok([eta, d1, d2])
    }

    pub fn sample(&self, grid: TimeGrid) -> Result<Signal> {
        if (grid.t_final - self.t_final).abs() > 1e-12 * self.t_final {
            return Err(Error::GridMismatch(format!(
                "weight T = {} vs grid T = {}",
                self.t_final, grid.t_final
            )));
        }
        let values = grid.nodes().map(|t| self.eval(t)).collect::<Result<Vec<_>>>()?;
        Signal::new(grid, values)
    }
}

/// Whether the weight multiplies or divides the integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    TimesEta,
    OverEta,
}

/// Composite trapezoid rule on uniform samples.
pub fn trapezoid(values: &[f64], dt: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => dt * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1])),
    }
}

/// Trapezoid quadrature of `η|v|²` or `|v|²/η` (the squared weighted norm).
pub fn weighted_l2_norm(v: &Signal, w: &WeightFn, mode: WeightMode) -> Result<f64> {
    let eta = w.sample(v.grid())?;
    let mut integrand = Vec::with_capacity(v.values.len());
    for (i, (&vi, &ei)) in v.values.iter().zip(eta.values()).enumerate() {
        let f = match mode {
            WeightMode::TimesEta => ei * vi * vi,
            WeightMode::OverEta if ei < WEIGHT_ZERO => {
                if vi.abs() >= WEIGHT_ZERO_CONTROL {
                    return Err(Error::NotInWeightedSpace { t: v.grid.node(i), value: vi });
                }
                0.0
            }
            WeightMode::OverEta => vi * vi / ei,
        };
        integrand.push(f);
    }
    Ok(trapezoid(&integrand, v.grid.dt()))
}

/// `‖v‖_{L²(0,T)}` by the trapezoid rule.
pub fn l2_norm(v: &Signal) -> f64 {
    let sq: Vec<f64> = v.values.iter().map(|x| x * x).collect();
    trapezoid(&sq, v.grid.dt()).sqrt()
}

/// A spatial field on a [`SpaceGrid`].
#[derive(Debug, Clone, Copy)]
pub enum SpaceField<'a> {
    /// One value per node (piecewise-linear interpretation).
    Nodal(&'a [f64]),
    /// Interleaved value and slope per node (cubic Hermite interpretation).
    Hermite(&'a [f64]),
}

/// `L²` norm (order 0), `H¹` seminorm (order 1) or `H²` seminorm (order 2).
pub fn sobolev_norm(field: SpaceField<'_>, grid: SpaceGrid, order: u8) -> Result<f64> {
    if order > 2 {
        return Err(Error::Invalid(format!("norm order {order} exceeds 2")));
    }
    match field {
        SpaceField::Nodal(u) => {
            if u.len() != grid.n_nodes() {
                return Err(Error::Shape { expected: grid.n_nodes(), got: u.len() });
            }
            let h = grid.h();
            match order {
                0 => {
                    let sq: Vec<f64> = u.iter().map(|x| x * x).collect();
                    Ok(trapezoid(&sq, h).sqrt())
                }
                1 => Ok((u.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() / h).sqrt()),
                _ => Err(Error::Invalid("nodal fields carry no second derivative".into())),
            }
        }
        SpaceField::Hermite(d) => {
            if d.len() != 2 * grid.n_nodes() {
                return Err(Error::Shape { expected: 2 * grid.n_nodes(), got: d.len() });
            }
            let m = BeamMatrices::assemble(grid)?;
            let q = match order {
                0 => m.mass.quad_form(d),
                1 => m.stiffness.quad_form(d),
                _ => m.bending.quad_form(d),
            };
            Ok(q.max(0.0).sqrt())
        }
    }
}

/// Discrete Laplacian `−Δ_h` on interior nodes, scaled as the P1 stiffness matrix.
pub(crate) fn interior_stiffness(grid: SpaceGrid) -> SymBanded {
    let n = grid.n_elem - 1;
    let h = grid.h();
    let mut k = SymBanded::zeros(n, 1);
    for i in 0..n {
        k.add(i, i, 2.0 / h);
        if i > 0 {
            k.add(i, i - 1, -1.0 / h);
        }
    }
    k
}

/// `H⁻¹` norm of the functional `g ↦ h Σ f_j g_j` on interior nodes, via the
/// Riesz map of the discrete Dirichlet Laplacian.
pub fn h_minus1_norm(interior: &[f64], grid: SpaceGrid) -> Result<f64> {
    if interior.len() + 1 != grid.n_elem {
        return Err(Error::Shape { expected: grid.n_elem - 1, got: interior.len() });
    }
    if interior.is_empty() {
        return Ok(0.0);
    }
    let h = grid.h();
    let f: Vec<f64> = interior.iter().map(|v| h * v).collect();
    let u = interior_stiffness(grid).cholesky()?.solve(&f);
    Ok(f.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt())
}

/// Second-order finite differences of order `k ∈ {1, 2, 3}`: centered inside,
/// one-sided at the two ends.
pub fn signal_time_derivative(v: &Signal, k: u8) -> Result<Signal> {
    let values = finite_difference(&v.values, v.grid.dt(), k)?;
    Signal::new(v.grid, values)
}

pub(crate) fn finite_difference(u: &[f64], dt: f64, k: u8) -> Result<Vec<f64>> {
    let n = u.len();
    if n < 5 {
        return Err(Error::Invalid(format!("derivative needs at least 5 samples, got {n}")));
    }
    let mut d = vec![0.0; n];
    match k {
        1 => {
            let c = 0.5 / dt;
            for i in 1..n - 1 {
                d[i] = c * (u[i + 1] - u[i - 1]);
            }
            d[0] = c * (-3.0 * u[0] + 4.0 * u[1] - u[2]);
            d[n - 1] = c * (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]);
        }
        2 => {
            let c = 1.0 / (dt * dt);
            for i in 1..n - 1 {
                d[i] = c * (u[i + 1] - 2.0 * u[i] + u[i - 1]);
            }
            d[0] = c * (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]);
            d[n - 1] = c * (2.0 * u[n - 1] - 5.0 * u[n - 2] + 4.0 * u[n - 3] - u[n - 4]);
        }
        3 => {
            let c = 0.5 / (dt * dt * dt);
            for i in 2..n - 2 {
                d[i] = c * (u[i + 2] - 2.0 * u[i + 1] + 2.0 * u[i - 1] - u[i - 2]);
            }
            const S0: [f64; 5] = [-5.0, 18.0, -24.0, 14.0, -3.0];
            const S1: [f64; 5] = [-3.0, 10.0, -12.0, 6.0, -1.0];
            let dot = |w: &[f64; 5], s: &mut dyn Iterator<Item = f64>| w.iter().zip(s).map(|(a, b)| a * b).sum::<f64>();
            d[0] = c * dot(&S0, &mut u[..5].iter().copied());
            d[1] = c * dot(&S1, &mut u[..5].iter().copied());
            d[n - 1] = -c * dot(&S0, &mut u[n - 5..].iter().rev().copied());
            d[n - 2] = -c * dot(&S1, &mut u[n - 5..].iter().rev().copied());
        }
        _ => return Err(Error::Invalid(format!("derivative order {k} not in {{1, 2, 3}}"))),
    }
    Ok(d)
}

/// Least-squares slope of `log(error)` against `log(ε)`.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::RateFit(format!("{} points", points.len())));
    }
    if let Some(p) = points.iter().find(|(e, r)| !(*e > 0.0 && *r > 0.0 && e.is_finite() && r.is_finite())) {
        return Err(Error::RateFit(format!("non-positive point {p:?}")));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::RateFit("all ε coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn weight_endpoints_and_midpoint() {
        let w = WeightFn::standard(2.5);
        assert_eq!(w.eval(0.0).unwrap(), 0.0);
        assert_eq!(w.eval(2.5).unwrap(), 0.0);
        assert!((w.eval(1.25).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(w.eval(2.6), Err(Error::TimeOutOfRange { .. })));
        assert!(matches!(w.eval(-0.1), Err(Error::TimeOutOfRange { .. })));
    }

    #[test]
    fn weight_derivatives_match_differences() {
        let w = WeightFn::standard(2.5);
        let e = 1e-5;
        for t in [0.01, 0.05, 0.3, 1.25, 2.47] {
            let [_, d1, d2] = w.eval_derivatives(t).unwrap();
            let f = |s: f64| w.eval(s).unwrap();
            let fd1 = (f(t + e) - f(t - e)) / (2.0 * e);
            let fd2 = (f(t + e) - 2.0 * f(t) + f(t - e)) / (e * e);
            assert!((d1 - fd1).abs() < 1e-6 * (1.0 + d1.abs()), "{t}: {d1} {fd1}");
            assert!((d2 - fd2).abs() < 1e-3 * (1.0 + d2.abs()), "{t}: {d2} {fd2}");
        }
        assert_eq!(w.eval_derivatives(0.0).unwrap(), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn derivative_of_quadratic_is_exact() {
        let g = TimeGrid::new(1.0, 20).unwrap();
        let v = Signal::from_fn(g, |t| t * t);
        let d2 = signal_time_derivative(&v, 2).unwrap();
        assert!(d2.values().iter().all(|x| (x - 2.0).abs() < 1e-10));
        let d1 = signal_time_derivative(&v, 1).unwrap();
        for (t, x) in g.nodes().zip(d1.values()) {
            assert!((x - 2.0 * t).abs() < 1e-10);
        }
        let c = Signal::from_fn(g, |_| 3.5);
        for k in [1, 2] {
            assert!(signal_time_derivative(&c, k).unwrap().max_abs() < 1e-9);
        }
        assert!(signal_time_derivative(&c, 4).is_err());
    }

    #[test]
    fn third_derivative_of_cubic_is_exact() {
        let g = TimeGrid::new(2.0, 30).unwrap();
        let v = Signal::from_fn(g, |t| 1.0 - t + 0.5 * t * t - 2.0 * t * t * t);
        let d3 = signal_time_derivative(&v, 3).unwrap();
        assert!(d3.values().iter().all(|x| (x + 12.0).abs() < 1e-7), "{:?}", d3.values());
    }

    #[test]
    fn sine_derivative_is_second_order() {
        let err = |n: usize| {
            let g = TimeGrid::new(1.0, n).unwrap();
            let d = signal_time_derivative(&Signal::from_fn(g, f64::sin), 1).unwrap();
            g.nodes().zip(d.values()).map(|(t, x)| (x - t.cos()).abs()).fold(0.0, f64::max)
        };
        let ratio = err(40) / err(80);
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn exact_power_law_slope() {
        let pts = [(1e-2, 10f64.powf(-1.5)), (1e-3, 10f64.powf(-2.25)), (1e-4, 1e-3)];
        assert!((fit_rate(&pts).unwrap() - 0.75).abs() < 1e-12);
        assert!(fit_rate(&pts[..2]).is_err());
        assert!(fit_rate(&[(1e-2, 1.0), (1e-3, 0.0), (1e-4, 1.0)]).is_err());
    }

    #[test]
    fn nodal_norms_match_integrals() {
        let g = SpaceGrid::new(200).unwrap();
        let s = g.sample(|x| (PI * x).sin());
        let l2 = sobolev_norm(SpaceField::Nodal(&s), g, 0).unwrap();
        assert!((l2 - 0.5f64.sqrt()).abs() < 1e-4);
        let p = g.sample(|x| x * (1.0 - x));
        let h1 = sobolev_norm(SpaceField::Nodal(&p), g, 1).unwrap();
        assert!((h1 - (1.0f64 / 3.0).sqrt()).abs() < 1e-4);
        assert!(sobolev_norm(SpaceField::Nodal(&p), g, 2).is_err());
        assert_eq!(sobolev_norm(SpaceField::Nodal(&vec![0.0; 201]), g, 1).unwrap(), 0.0);
    }

    #[test]
    fn hermite_norms_match_integrals() {
        let g = SpaceGrid::new(20).unwrap();
        let mut d = Vec::new();
        for j in 0..=20 {
            let x = g.x(j);
            d.push((PI * x).sin());
            d.push(PI * (PI * x).cos());
        }
        let l2 = sobolev_norm(SpaceField::Hermite(&d), g, 0).unwrap();
        assert!((l2 - 0.5f64.sqrt()).abs() < 1e-6);
        let h2 = sobolev_norm(SpaceField::Hermite(&d), g, 2).unwrap();
        assert!((h2 - PI * PI * 0.5f64.sqrt()).abs() < 1e-2);
    }

    #[test]
    fn h_minus1_of_sine_mode() {
        // −u'' = sin(πx) gives u = sin(πx)/π², so ‖sin(πx)‖_{H⁻¹}² = 1/(2π²).
        let g = SpaceGrid::new(400).unwrap();
        let f: Vec<f64> = (1..400).map(|j| (PI * g.x(j)).sin()).collect();
        let n = h_minus1_norm(&f, g).unwrap();
        assert!((n - (0.5f64).sqrt() / PI).abs() < 1e-5);
    }

    #[test]
    fn cubic_resampling_is_exact_for_cubics() {
        let g = TimeGrid::new(2.0, 13).unwrap();
        let v = Signal::from_fn(g, |t| 1.0 - t + 0.5 * t * t - 0.25 * t.powi(3));
        let fine = v.resample(TimeGrid::new(2.0, 50).unwrap()).unwrap();
        for (t, x) in fine.grid().nodes().zip(fine.values()) {
            assert!((x - (1.0 - t + 0.5 * t * t - 0.25 * t.powi(3))).abs() < 1e-12);
        }
        let dv = cubic_eval_deriv(v.values(), g.dt(), 0.77);
        assert!((dv - (-1.0 + 0.77 - 0.75 * 0.77 * 0.77)).abs() < 1e-12);
        assert!(v.resample(TimeGrid::new(3.0, 10).unwrap()).is_err());
    }

    #[test]
    fn over_eta_rejects_mass_at_zero_weight() {
        let w = WeightFn::standard(2.5);
        let g = TimeGrid::new(2.5, 100).unwrap();
        let one = Signal::from_fn(g, |_| 1.0);
        assert!(matches!(
            weighted_l2_norm(&one, &w, WeightMode::OverEta),
            Err(Error::NotInWeightedSpace { .. })
        ));
        let eta = w.sample(g).unwrap();
        let x = weighted_l2_norm(&eta, &w, WeightMode::OverEta).unwrap();
        let y = weighted_l2_norm(&one, &w, WeightMode::TimesEta).unwrap();
        assert!((x - y).abs() < 1e-13);
    }
}
