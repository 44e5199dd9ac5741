//! Polak-Ribière conjugate gradient for `J(λ) = ½ λᵀGλ + λᵀs` with an exact
//! line search. The gradient `Gλ + s` is the controlled final state, so the
//! state-residual stopping rule reads it directly.

/// Stopping rule: relative gradient decrease or absolute state residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgSettings {
    /// Stop once `‖g_k‖_P ≤ rel_tol · ‖g_0‖_P`.
    pub rel_tol: f64,
    /// Stop once the caller's state norm of the gradient is at most this.
    pub state_tol: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub solution: Vec<f64>,
    /// Final gradient, equal to the controlled final state.
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// State norm of the final gradient.
    pub state_residual: f64,
    /// `(‖g_k‖_P / ‖g_0‖_P, state norm of g_k)` for every iterate.
    pub history: Vec<(f64, f64)>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes from `λ = 0`. `apply_g` is the Gramian, `precond` the inner
/// product on gradients and `state_norm` the norm used by the state rule.
pub(crate) fn polak_ribiere(
    s: &[f64],
    mut apply_g: impl FnMut(&[f64]) -> Vec<f64>,
    precond: impl Fn(&[f64]) -> Vec<f64>,
    state_norm: impl Fn(&[f64]) -> f64,
    settings: CgSettings,
) -> CgOutcome {
    let n = s.len();
    let mut lambda = vec![0.0; n];
    let mut r = s.to_vec();
    let mut z = precond(&r);
    let mut rz = dot(&r, &z);
    let rz0 = rz;
    let mut residual = state_norm(&r);
    let mut d: Vec<f64> = z.iter().map(|v| -v).collect();
    let mut it = 0;
    let ratio = |rz: f64| if rz0 > 0.0 { (rz / rz0).max(0.0).sqrt() } else { 0.0 };
    let mut history = vec![(ratio(rz), residual)];
    let done = |rz: f64, res: f64| res <= settings.state_tol || rz <= settings.rel_tol.powi(2) * rz0 || rz == 0.0;
    while !done(rz, residual) && it < settings.max_iter {
        let q = apply_g(&d);
        let curv = dot(&d, &q);
        if !(curv > 0.0) {
            break;
        }
        let alpha = -dot(&r, &d) / curv;
        for i in 0..n {
            lambda[i] += alpha * d[i];
        }
        let r_old = r.clone();
        for i in 0..n {
            r[i] += alpha * q[i];
        }
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let diff: Vec<f64> = r.iter().zip(&r_old).map(|(a, b)| a - b).collect();
        let beta = (dot(&z, &diff) / rz).max(0.0);
        for i in 0..n {
            d[i] = -z[i] + beta * d[i];
        }
        rz = rz_new;
        residual = state_norm(&r);
        history.push((ratio(rz), residual));
        it += 1;
    }
    CgOutcome {
        converged: done(rz, residual),
        solution: lambda,
        gradient: r,
        iterations: it,
        state_residual: residual,
        history,
    }
}
