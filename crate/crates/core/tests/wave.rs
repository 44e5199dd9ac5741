use proptest::prelude::*;
use singctrl_core::signals::{Signal, SpaceGrid, TimeGrid};
use singctrl_core::wave::*;
use std::f64::consts::PI;

fn grids(n: usize, t: f64) -> (SpaceGrid, TimeGrid) {
    let g = SpaceGrid::new(n).unwrap();
    (g, TimeGrid::new(t, (t * n as f64).round() as usize).unwrap())
}

fn at_rest(position: Vec<f64>) -> WaveInit {
    let velocity = vec![0.0; position.len()];
    WaveInit::Taylor { position, velocity }
}

/// Odd, 2-periodic extension of a function on `[0, 1]`.
fn odd_periodic(f: &dyn Fn(f64) -> f64, x: f64) -> f64 {
    let y = x.rem_euclid(2.0);
    if y <= 1.0 {
        f(y)
    } else {
        -f(2.0 - y)
    }
}

/// Piecewise-linear hat with kinks at grid nodes.
fn hat(x: f64) -> f64 {
    if (0.25..=0.5).contains(&x) {
        4.0 * (x - 0.25)
    } else if (0.5..=0.75).contains(&x) {
        4.0 * (0.75 - x)
    } else {
        0.0
    }
}

#[test]
fn dalembert_exactness_with_reflections() {
    let (g, tg) = grids(40, 3.3);
    let u = solve_wave(&WaveProblem::free(g, tg, at_rest(g.sample(hat))).unwrap(), Direction::Forward).unwrap();
    let mut worst: f64 = 0.0;
    for (i, t) in tg.nodes().enumerate() {
        for j in 0..g.n_nodes() {
            let x = g.x(j);
            let exact = 0.5 * (odd_periodic(&hat, x - t) + odd_periodic(&hat, x + t));
            worst = worst.max((u.at(i, j) - exact).abs());
        }
    }
    assert!(worst <= 1e-12, "max deviation {worst:e}");
}

#[test]
fn separated_solution_at_nodes() {
    let err = |n: usize| {
        let (g, tg) = grids(n, 1.0);
        let u = solve_wave(&WaveProblem::free(g, tg, at_rest(g.sample(|x| (PI * x).sin()))).unwrap(), Direction::Forward)
            .unwrap();
        let mut e: f64 = 0.0;
        for (i, t) in tg.nodes().enumerate() {
            for j in 0..g.n_nodes() {
                e = e.max((u.at(i, j) - (PI * g.x(j)).sin() * (PI * t).cos()).abs());
            }
        }
        e
    };
    assert!(err(50) < 1e-3);
}

#[test]
fn right_trace_converges_at_second_order() {
    let err = |n: usize| {
        let (g, tg) = grids(n, 1.0);
        let u = solve_wave(&WaveProblem::free(g, tg, at_rest(g.sample(|x| (PI * x).sin()))).unwrap(), Direction::Forward)
            .unwrap();
        let tr = trace_normal_derivative(&u, End::Right);
        tg.nodes().zip(tr.values()).map(|(t, v)| (v + PI * (PI * t).cos()).abs()).fold(0.0, f64::max)
    };
    let ratio = err(40) / err(80);
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn zero_field_has_zero_traces() {
    let (g, tg) = grids(10, 2.5);
    let u = WaveField::zeros(g, tg);
    for end in [End::Left, End::Right] {
        assert_eq!(trace_normal_derivative(&u, end).max_abs(), 0.0);
        assert_eq!(trace_time_derivative(&u, end, 2).unwrap().max_abs(), 0.0);
    }
}

#[test]
fn boundary_time_derivatives() {
    let (g, tg) = grids(20, 1.0);
    let z = vec![0.0; g.n_nodes()];
    let p = WaveProblem::new(
        g,
        tg,
        WaveInit::Taylor { position: z.clone(), velocity: z },
        Signal::from_fn(tg, |t| t * t),
        Signal::from_fn(tg, f64::sin),
        WaveSource::None,
    )
    .unwrap();
    let u = solve_wave(&p, Direction::Forward).unwrap();
    let d2 = trace_time_derivative(&u, End::Left, 2).unwrap();
    assert!(d2.values().iter().all(|v| (v - 2.0).abs() < 1e-9));
    let d1 = trace_time_derivative(&u, End::Right, 1).unwrap();
    let e = tg.nodes().zip(d1.values()).map(|(t, v)| (v - t.cos()).abs()).fold(0.0, f64::max);
    assert!(e < 2e-3, "{e}");
}

#[test]
fn cubic_boundary_datum_gives_zero_interior_residual() {
    let (g, tg) = grids(50, 2.0);
    let cut = |t: f64| t.powi(3) * (-(t - 1.0).powi(2)).exp();
    let p = WaveProblem::new(g, tg, WaveInit::zero(g), Signal::zeros(tg), Signal::from_fn(tg, cut), WaveSource::None)
        .unwrap();
    let u = solve_wave(&p, Direction::Forward).unwrap();
    let (h, dt) = (g.h(), tg.dt());
    let mut worst: f64 = 0.0;
    for i in 1..tg.n_steps {
        for j in 1..g.n_elem {
            let utt = (u.at(i + 1, j) - 2.0 * u.at(i, j) + u.at(i - 1, j)) / (dt * dt);
            let uxx = (u.at(i, j + 1) - 2.0 * u.at(i, j) + u.at(i, j - 1)) / (h * h);
            worst = worst.max((utt - uxx).abs());
        }
    }
    assert!(worst <= 1e-10, "{worst:e}");
}

#[test]
fn fourth_derivative_vanishes_on_affine_fields() {
    let (g, tg) = grids(20, 1.0);
    // u = x + t solves the wave equation with matching Dirichlet data.
    let p = WaveProblem::new(
        g,
        tg,
        WaveInit::Taylor { position: g.sample(|x| x), velocity: vec![1.0; g.n_nodes()] },
        Signal::from_fn(tg, |t| t),
        Signal::from_fn(tg, |t| 1.0 + t),
        WaveSource::None,
    )
    .unwrap();
    let u = solve_wave(&p, Direction::Forward).unwrap();
    let d4 = fourth_x_derivative(&u).unwrap();
    assert!(d4.iter().all(|v| v.abs() < 1e-6), "{}", d4.iter().fold(0.0f64, |m, v| m.max(v.abs())));
}

#[test]
fn fourth_derivative_of_two_mode_solution() {
    let (g, tg) = grids(200, 1.0);
    let exact = |x: f64, t: f64| (PI * x).sin() * (PI * t).cos() + 0.5 * (2.0 * PI * x).sin() * (2.0 * PI * t).cos();
    let d4_exact = |x: f64, t: f64| {
        PI.powi(4) * (PI * x).sin() * (PI * t).cos() + 8.0 * PI.powi(4) * (2.0 * PI * x).sin() * (2.0 * PI * t).cos()
    };
    let u = solve_wave(&WaveProblem::free(g, tg, at_rest(g.sample(|x| exact(x, 0.0)))).unwrap(), Direction::Forward)
        .unwrap();
    let d4 = fourth_x_derivative(&u).unwrap();
    let nn = g.n_nodes();
    let (mut num, mut den) = (0.0, 0.0);
    for (i, t) in tg.nodes().enumerate() {
        for j in 0..nn {
            let e = d4_exact(g.x(j), t);
            num += (d4[i * nn + j] - e).powi(2);
            den += e * e;
        }
    }
    assert!((num / den).sqrt() < 0.01, "relative error {}", (num / den).sqrt());
}

#[test]
fn energy_is_conserved() {
    let (g, tg) = grids(64, 2.5);
    let p = WaveProblem::free(
        g,
        tg,
        WaveInit::Taylor { position: g.sample(singctrl_core::sin4), velocity: g.sample(|x| (3.0 * PI * x).sin()) },
    )
    .unwrap();
    let u = solve_wave(&p, Direction::Forward).unwrap();
    let e0 = u.energy(0);
    let drift = (0..tg.n_steps).map(|i| (u.energy(i) - e0).abs() / e0).fold(0.0, f64::max);
    assert!(drift <= 1e-10, "{drift:e}");
}

#[test]
fn backward_solve_recovers_initial_levels() {
    let (g, tg) = grids(64, 2.5);
    let p = WaveProblem::free(
        g,
        tg,
        WaveInit::Taylor { position: g.sample(singctrl_core::sin4), velocity: g.sample(|x| x * (1.0 - x)) },
    )
    .unwrap();
    let u = solve_wave(&p, Direction::Forward).unwrap();
    let (a, b) = u.final_levels();
    let back = WaveProblem::free(g, tg, WaveInit::Levels { first: b.to_vec(), second: a.to_vec() }).unwrap();
    let v = solve_wave(&back, Direction::Backward).unwrap();
    for i in 0..2 {
        let d = u.row(i).iter().zip(v.row(i)).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        assert!(d <= 1e-10, "level {i}: {d:e}");
    }
}

#[test]
fn unit_courant_number_is_enforced() {
    let g = SpaceGrid::new(20).unwrap();
    let tg = TimeGrid::new(1.0, 21).unwrap();
    assert!(WaveProblem::free(g, tg, WaveInit::zero(g)).is_err());
}

fn problem(n: usize, coeffs: &[f64], amp: f64) -> WaveProblem {
    let (g, tg) = grids(n, 2.5);
    let position = g.sample(|x| coeffs.iter().enumerate().map(|(k, c)| c * ((k + 1) as f64 * PI * x).sin()).sum());
    let velocity = g.sample(|x| amp * x * x * (1.0 - x));
    let ramp = |t: f64| amp * t * t * (2.5 - t);
    WaveProblem::new(
        g,
        tg,
        WaveInit::Taylor { position, velocity },
        Signal::from_fn(tg, |t| 0.5 * ramp(t)),
        Signal::from_fn(tg, ramp),
        WaveSource::None,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solve_is_linear(
        c1 in prop::collection::vec(-1.0f64..1.0, 4),
        c2 in prop::collection::vec(-1.0f64..1.0, 4),
        a1 in -1.0f64..1.0,
        a2 in -1.0f64..1.0,
        alpha in -2.0f64..2.0,
        beta in -2.0f64..2.0,
    ) {
        let (p, q) = (problem(32, &c1, a1), problem(32, &c2, a2));
        let r = p.combine(alpha, &q, beta).unwrap();
        let up = solve_wave(&p, Direction::Forward).unwrap();
        let uq = solve_wave(&q, Direction::Forward).unwrap();
        let ur = solve_wave(&r, Direction::Forward).unwrap();
        let lin = up.combine(alpha, &uq, beta).unwrap();
        let scale = 1.0 + ur.max_abs();
        let gap = lin.data().iter().zip(ur.data()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        prop_assert!(gap <= 1e-12 * scale, "gap {gap:e}");
    }

    #[test]
    fn boundary_columns_follow_the_data(c in prop::collection::vec(-1.0f64..1.0, 4), a in -1.0f64..1.0) {
        let p = problem(16, &c, a);
        let u = solve_wave(&p, Direction::Forward).unwrap();
        let tg = p.tgrid();
        for (i, t) in tg.nodes().enumerate() {
            let ramp = a * t * t * (2.5 - t);
            prop_assert!((u.at(i, 16) - ramp).abs() < 1e-14);
            prop_assert!((u.at(i, 0) - 0.5 * ramp).abs() < 1e-14);
        }
    }
}
