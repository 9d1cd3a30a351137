use proptest::prelude::*;

use rwave::config::RunConfig;
use rwave::data::Profile;
use rwave::norms::ParameterPoint;
use rwave::randomization::Distribution;

prop_compose! {
    fn params()(
        d in 10.0f64..20.0,
        extra in 0.1f64..30.0,
        d_dprime in 1.0f64..100.0,
        delta in 1e-7f64..1e-4,
        eps_loss in 1e-5f64..1e-1,
        eta_at in 0.05f64..0.95,
    ) -> ParameterPoint {
        let mut p = ParameterPoint { d, d_prime: 2.0 * d + extra, d_dprime, delta, eps_loss, ..ParameterPoint::reference() };
        let (lo, hi) = p.eta_window();
        p.eta = lo + eta_at * (hi - lo);
        p
    }
}

prop_compose! {
    fn config()(
        dim in 1usize..=3,
        log_res in 4u32..=6,
        box_scale in prop::sample::select(vec![1.0, 2.0, 1.5]),
        t0 in 0.01f64..=1.0,
        steps in 1usize..60,
        level in 0u32..4,
        params in params(),
        tol in 1e-14f64..1e-3,
        max_iters in 1usize..500,
        flags in any::<[bool; 3]>(),
        noise_floor in 0.0f64..1e-8,
        seed in any::<u64>(),
        signs in any::<bool>(),
        partition_width in 1.0f64..=2.0,
        profile in 0usize..4,
        amplitude in -1e3f64..1e3,
    ) -> RunConfig {
        let resolution = 1usize << log_res;
        let mut cfg = RunConfig {
            dim,
            resolution,
            box_scale,
            t0,
            dt: t0 / steps as f64,
            n_max: 0,
            params,
            tol,
            max_iters,
            dealias: flags[0],
            oversample: flags[1],
            noise_floor,
            seed,
            real_conditioning: flags[2],
            distribution: if signs { Distribution::Signs } else { Distribution::Gaussian },
            partition_width,
            profile: match profile {
                0 => Profile::Zero,
                1 => Profile::Power,
                2 => Profile::Gaussian,
                _ => Profile::Snapshot(format!("/data/run {seed}.rwav").into()),
            },
            amplitude,
        };
        let nyquist = cfg.grid().unwrap().nyquist();
        let budget = nyquist.max(2).ilog2() - 1;
        cfg.n_max = level.min(budget);
        cfg
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn emitted_text_parses_back_exactly(cfg in config()) {
        prop_assume!(cfg.validate().is_ok());
        let text = cfg.emit();
        let back = RunConfig::parse(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.emit(), text);
    }
}

#[test]
fn user_text_normalizes_once() {
    let text = "# study\n\ndata.profile = power\n  grid.resolution=64 \ncascade.n_max = 3\ntime.dt = 0.05\n";
    let cfg = RunConfig::parse(text).unwrap();
    assert_eq!(cfg.resolution, 64);
    assert_eq!(cfg.n_max, 3);
    let canonical = cfg.emit();
    assert_eq!(RunConfig::parse(&canonical).unwrap().emit(), canonical);
    assert_eq!(canonical.lines().count(), 27);
}

#[test]
fn config_errors_name_the_condition() {
    let cases = [
        ("exponents.s = 2.0\n", "ν > 2 > s"),
        ("exponents.nu = 1.9\n", "ν > 2 > s"),
        ("cascade.gamma = 1.0\n", "γ"),
        ("exponents.D_prime = 15\n", "D′ > 2D"),
        ("time.T0 = 1.5\n", "T0"),
        ("time.dt = 0.3\n", "divide"),
        ("cascade.n_max = 3\n", "nyquist"),
        ("randomization.partition_width = 3\n", "width"),
        ("grid.resolution = 24\n", "power of two"),
    ];
    for (line, needle) in cases {
        let err = RunConfig::parse(&format!("data.profile = zero\n{line}")).unwrap_err();
        assert!(err.to_string().contains(needle), "{line:?}: {err}");
    }
}
