use rwave::cascade::run_cascade;
use rwave::config::RunConfig;
use rwave::dynamics::{
    free_trace, solve_adapted_linear, solve_nlw, solve_per_cube, w_picard_from_zero, SolverConfig, WProblem,
};
use rwave::randomization::{covering_radius, draw_gaussians, randomize, Distribution};
use rwave::spectral::{make_grid, PartitionSpec, SpectralField};

#[test]
fn time_stepping_is_second_order() {
    let grid = make_grid(3, 1.0, 16).unwrap();
    let f0 = SpectralField::from_fn(&grid, |x| 0.3 * (x[0] + x[1]).cos() + 0.2 * (2.0 * x[2]).sin());
    let f1 = SpectralField::from_fn(&grid, |x| 0.1 * (x[1] - x[2]).cos());
    let finals: Vec<SpectralField> = [0.05, 0.025, 0.0125]
        .iter()
        .map(|&dt| {
            let cfg = SolverConfig { dt, ..Default::default() };
            solve_nlw(&f0, &f1, &cfg).unwrap().trace.u.last().unwrap().clone()
        })
        .collect();
    let e1 = (&finals[0] - &finals[1]).sobolev_norm(1.0);
    let e2 = (&finals[1] - &finals[2]).sobolev_norm(1.0);
    let order = (e1 / e2).log2();
    assert!((order - 2.0).abs() < 0.2, "observed order {order} ({e1:e}, {e2:e})");
}

#[test]
fn adapted_evolution_is_linear_over_cubes() {
    let grid = make_grid(2, 1.0, 32).unwrap();
    let cfg = SolverConfig { dt: 0.05, ..Default::default() };
    let steps = cfg.steps().unwrap();
    let f0 = SpectralField::from_fn(&grid, |x| (3.0 * x[0]).cos() + 0.5 * (2.0 * x[0] - 3.0 * x[1]).sin());
    let f1 = f0.scale(0.2);
    let b0 = SpectralField::from_fn(&grid, |x| 0.05 * (x[0] + x[1]).cos());
    let background = free_trace(&b0, &SpectralField::zeros(&grid, true), cfg.dt, steps).unwrap();
    let theta: Vec<f64> = (0..=steps).map(|j| 1.0 - 0.5 * j as f64 / steps as f64).collect();
    let p = PartitionSpec::default();
    let draw = draw_gaussians(2, 2, covering_radius(&grid), true, Distribution::Gaussian).unwrap();
    let a = randomize(&f0, &draw, &p).unwrap();
    let b = randomize(&f1, &draw, &p).unwrap();
    let whole = solve_adapted_linear(&a, &b, Some(&background), &theta, 4, 0.88, &cfg).unwrap();
    assert!(whole.residual.unwrap() < 1e-9);
    let mut acc = vec![SpectralField::zeros(&grid, false); steps + 1];
    for (k, g) in draw.iter() {
        let piece = solve_per_cube(*k, &f0, &f1, &p, Some(&background), &theta, 4, 0.88, &cfg).unwrap();
        for (slot, u) in acc.iter_mut().zip(&piece.trace.u) {
            slot.axpy(1.0, &u.scale_complex(*g)).unwrap();
        }
    }
    let scale = whole.trace.u.iter().map(|u| u.l2_norm()).fold(0.0, f64::max);
    for (x, y) in acc.iter().zip(&whole.trace.u) {
        assert!(x.max_abs_diff(y) < 1e-12 * scale);
    }
}

#[test]
fn picard_from_zero_reaches_the_marched_remainder() {
    let cfg = RunConfig::parse(
        "grid.resolution = 16\ncascade.n_max = 1\ntime.dt = 0.05\ndata.profile = power\ndata.amplitude = 1e-6\n",
    )
    .unwrap();
    let grid = cfg.grid().unwrap();
    let (f0, f1) = cfg.data(&grid).unwrap();
    let draw = cfg.draw(&grid, 3).unwrap();
    let r = run_cascade(&f0, &f1, &draw, &cfg.cascade()).unwrap();
    let level = &r.levels[1];
    let problem = WProblem {
        f: &level.f,
        u_prev: Some(&r.levels[0].u),
        theta_prev: &level.cutoffs.theta_prev,
        theta_f: &level.cutoffs.theta_f,
        n: level.shell,
        params: &r.params,
    };
    let (w, gaps) = w_picard_from_zero(&problem, 6, &cfg.solver()).unwrap();
    assert!(gaps.last().unwrap() < &(1e-8 * gaps[0]), "{gaps:?}");
    let size = level.w.u.iter().map(|u| u.l2_norm()).fold(0.0, f64::max);
    assert!(size > 0.0);
    for (a, b) in w.u.iter().zip(&level.w.u) {
        assert!(a.max_abs_diff(b) < 1e-8 * size);
    }
}
