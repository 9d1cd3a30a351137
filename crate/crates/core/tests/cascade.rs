use std::fs;

use rwave::cascade::{convergence_report, run_cascade};
use rwave::config::RunConfig;
use rwave::output::write_run;
use rwave::randomization::q_block;
use rwave::verify::cascade_reconstruction;

fn small(extra: &str) -> RunConfig {
    RunConfig::parse(&format!(
        "grid.resolution = 16\ncascade.n_max = 1\ntime.dt = 0.05\ndata.profile = power\ndata.amplitude = 1e-9\n{extra}"
    ))
    .unwrap()
}

fn run(cfg: &RunConfig) -> rwave::cascade::CascadeResult {
    let grid = cfg.grid().unwrap();
    let (f0, f1) = cfg.data(&grid).unwrap();
    let draw = cfg.draw(&grid, cfg.seed).unwrap();
    run_cascade(&f0, &f1, &draw, &cfg.cascade()).unwrap()
}

#[test]
fn zero_data_stays_zero() {
    let cfg = RunConfig::parse("grid.resolution = 16\ncascade.n_max = 1\ntime.dt = 0.05\ndata.profile = zero\n").unwrap();
    let r = run(&cfg);
    assert_eq!(r.levels.len(), 2);
    for l in &r.levels {
        assert!(l.f.is_zero() && l.w.is_zero() && l.u.is_zero());
        assert!(l.cutoffs.all_one());
        assert!(l.curves.w_y.iter().all(|&v| v == 0.0));
    }
    assert_eq!(r.times.t, cfg.t0);
}

#[test]
fn single_level_is_linear_plus_correction() {
    let r = run(&RunConfig { n_max: 0, ..small("") });
    assert_eq!(r.levels.len(), 1);
    let l = &r.levels[0];
    let sum = l.f.add(&l.w).unwrap();
    for (a, b) in sum.u.iter().zip(&l.u.u) {
        assert!(a.max_abs_diff(b) == 0.0);
    }
}

#[test]
fn each_level_starts_from_its_block() {
    let cfg = small("");
    let grid = cfg.grid().unwrap();
    let (f0, _) = cfg.data(&grid).unwrap();
    let draw = cfg.draw(&grid, cfg.seed).unwrap();
    let r = run(&cfg);
    for l in &r.levels {
        let block = q_block(&f0, l.shell, &draw, &cfg.partition()).unwrap();
        assert!(l.f.u[0].max_abs_diff(&block) <= 1e-12 * block.l2_norm().max(1e-300));
        assert!(l.w.u[0].is_zero());
    }
}

#[test]
fn truncated_cascade_reproduces_direct_solve() {
    let o = cascade_reconstruction(16, 1, 1e-10, 0.05).unwrap();
    assert!(o.passed, "{}", o.detail);
}

#[test]
fn convergence_report_covers_every_level() {
    let r = run(&small(""));
    let report = convergence_report(&r, false).unwrap();
    assert_eq!(report.levels.len(), 2);
    assert_eq!(report.cauchy.len(), 2);
    assert!(report.cauchy[1][0] > 0.0);
    assert!(report.decay_rate.is_none());
}

#[test]
fn run_directories_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let cfg = small("randomization.seed = 4\n");
    write_run(a.path(), &cfg, &run(&cfg), None).unwrap();
    write_run(b.path(), &cfg, &run(&cfg), None).unwrap();
    let other = small("randomization.seed = 5\n");
    write_run(c.path(), &other, &run(&other), None).unwrap();
    for file in ["norms.csv", "cutoffs.csv", "diagnostics.csv", "config.cfg", "metadata.json"] {
        assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap(), "{file}");
    }
    let norms = |d: &tempfile::TempDir| fs::read_to_string(d.path().join("norms.csv")).unwrap();
    assert_ne!(norms(&a), norms(&c));
    let header = norms(&a).lines().next().unwrap().to_string();
    assert_eq!(header, "run_id,quantity,M,value,window_end");
    let meta: serde_json::Value = serde_json::from_slice(&fs::read(a.path().join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["format_version"], 1);
    assert_eq!(meta["seed"], 4);
    let again = RunConfig::parse(&fs::read_to_string(a.path().join("config.cfg")).unwrap()).unwrap();
    assert_eq!(again, cfg);
}
