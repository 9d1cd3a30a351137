use rwave::dynamics::SolverConfig;
use rwave::experiments::{ensemble_norms, probabilistic_strichartz_exponent, scaling_fit, strichartz_ladder};
use rwave::norms::ParameterPoint;
use rwave::verify::{bilinear_stability, non_optimal_point, paraproduct_exactness, solver_accuracy};

#[test]
fn exact_power_law_fits_exactly() {
    let ns = [8, 16, 32, 64];
    let values: Vec<f64> = ns.iter().map(|&n| 3.0 * (n as f64).powf(-0.25)).collect();
    let fit = scaling_fit("q", &ns, &values, -0.25, 0.05).unwrap();
    assert!((fit.slope + 0.25).abs() < 1e-12);
    assert!(fit.ci < 1e-10);
    assert!(fit.pass);
    let strict = scaling_fit("q", &ns, &values, -0.4, 0.05).unwrap();
    assert!(!strict.pass);
}

#[test]
fn degenerate_ladders_are_rejected() {
    assert!(scaling_fit("q", &[8, 16], &[1.0, 2.0], 0.0, 0.05).is_err());
    assert!(scaling_fit("q", &[8, 8, 16], &[1.0, 1.0, 2.0], 0.0, 0.05).is_err());
    assert!(scaling_fit("q", &[8, 16, 32], &[1.0, 0.0, 2.0], 0.0, 0.05).is_err());
}

#[test]
fn ensembles_need_eight_seeds() {
    let seeds: Vec<u64> = (0..7).collect();
    assert!(ensemble_norms(&seeds, 1, |s| Ok(s as f64)).is_err());
    let seeds: Vec<u64> = (0..8).collect();
    let stats = ensemble_norms(&seeds, 2, |s| Ok(s as f64)).unwrap();
    assert_eq!(stats.values, (0..8).map(|s| s as f64).collect::<Vec<_>>());
}

#[test]
fn strichartz_exponents_of_the_two_points() {
    let p = ParameterPoint::reference();
    assert!(probabilistic_strichartz_exponent(&p).abs() < 1e-4);
    assert!((probabilistic_strichartz_exponent(&non_optimal_point()) + 0.06).abs() < 1e-3);
}

#[test]
fn small_strichartz_ladder_is_decreasing_and_reproducible() {
    let p = ParameterPoint::reference();
    let seeds: Vec<u64> = (0..8).collect();
    let solver = SolverConfig { dt: 0.05, ..Default::default() };
    let a = strichartz_ladder(&p, &[2, 4, 8], &seeds, 2, &solver).unwrap();
    let b = strichartz_ladder(&p, &[2, 4, 8], &seeds, 1, &solver).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.stats.values, y.stats.values);
    }
    let ns: Vec<u32> = a.iter().map(|l| l.n).collect();
    let rms: Vec<f64> = a.iter().map(|l| l.stats.rms).collect();
    assert!(rms.windows(2).all(|w| w[1] < w[0]), "{rms:?}");
    let fit = scaling_fit("strichartz", &ns, &rms, probabilistic_strichartz_exponent(&p), 0.05).unwrap();
    assert!(fit.pass, "{fit:?}");
}

#[test]
fn bilinear_ratios_are_stable_on_a_short_ladder() {
    let o = bilinear_stability(&[4, 8, 16], &[0, 1], 2).unwrap();
    assert!(o.passed, "{}", o.detail);
}

#[test]
fn paraproduct_regimes_are_exact() {
    let o = paraproduct_exactness(16).unwrap();
    assert!(o.passed, "{}", o.detail);
}

#[test]
fn solver_is_third_order_and_certified() {
    let o = solver_accuracy(16).unwrap();
    assert!(o.passed, "{}", o.detail);
}
