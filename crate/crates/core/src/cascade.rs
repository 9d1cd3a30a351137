//! The iteration `u_n = u_{n−1} + F_n + w_n` over dyadic data blocks, with
//! running cutoffs, random stopping times and convergence diagnostics.

use serde::Serialize;

use crate::dynamics::{
    evaluate_cutoffs, history_argument, integral_residual, nlw_forcing, solve_adapted_linear, solve_w_fixed_point,
    CutoffState, FieldTrace, LevelCurves, SolverConfig, WProblem,
};
use crate::error::{Error, Result};
use crate::norms::{Component, Lebesgue, ParameterPoint, ShellSeries, YSeries};
use crate::randomization::{q_block, PartitionSpec, RandomDraw};
use crate::spectral::{bessel_derivative, SpectralField};

/// Everything that shapes a cascade apart from the data.
#[derive(Clone, Debug)]
pub struct CascadeConfig {
    pub solver: SolverConfig,
    pub params: ParameterPoint,
    pub partition: PartitionSpec,
    pub n_max: u32,
}

/// One finished level of the cascade.
#[derive(Clone, Debug)]
pub struct Level {
    pub n: u32,
    /// `N = 2^n`
    pub shell: u32,
    pub f: FieldTrace,
    pub w: FieldTrace,
    pub u: FieldTrace,
    pub curves: LevelCurves,
    pub cutoffs: CutoffState,
    pub f_residual: Option<f64>,
    pub w_certificate: f64,
    pub w_iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StoppingTimes {
    pub t1: f64,
    pub t2: f64,
    pub t: f64,
}

#[derive(Clone, Debug)]
pub struct CascadeResult {
    pub seed: u64,
    pub params: ParameterPoint,
    pub levels: Vec<Level>,
    pub times: StoppingTimes,
}

impl CascadeResult {
    pub fn horizon(&self) -> f64 {
        self.levels[0].u.horizon()
    }

    pub fn last(&self) -> &Level {
        self.levels.last().expect("a cascade has at least one level")
    }
}

fn check_budget(cfg: &CascadeConfig, nyquist: u32) -> Result<()> {
    if cfg.n_max >= 31 || (2u64 << cfg.n_max) > nyquist as u64 {
        return Err(Error::InvalidArgument(format!(
            "n_max = {} needs 2^(n_max+1) <= nyquist shell {}",
            cfg.n_max, nyquist
        )));
    }
    if cfg.solver.horizon > 1.0 {
        return Err(Error::InvalidArgument("the horizon T0 must not exceed 1".into()));
    }
    Ok(())
}

fn at_level(n: u32) -> impl Fn(Error) -> Error {
    move |e| Error::AtLevel { level: n, source: Box::new(e) }
}

/// Run levels `n = 0..=n_max` for the data `(f₀, f₁)` randomized by `draw`.
pub fn run_cascade(f0: &SpectralField, f1: &SpectralField, draw: &RandomDraw, cfg: &CascadeConfig) -> Result<CascadeResult> {
    let grid = f0.grid().clone();
    if f1.grid() != &grid {
        return Err(Error::GridMismatch);
    }
    check_budget(cfg, grid.nyquist())?;
    cfg.params.validate()?;
    let p = &cfg.params;
    let sc = &cfg.solver;
    let steps = sc.steps()?;
    let times: Vec<f64> = (0..=steps).map(|j| j as f64 * sc.dt).collect();
    let mut levels: Vec<Level> = Vec::new();
    for n in 0..=cfg.n_max {
        let big_n = 1u32 << n;
        let level = (|| {
            let a = q_block(f0, big_n, draw, &cfg.partition)?;
            let b = q_block(f1, big_n, draw, &cfg.partition)?;
            let history: Vec<LevelCurves> = levels.iter().map(|l| l.curves.clone()).collect();
            let theta_prev = evaluate_cutoffs(&sc.cutoff, &history_argument(&history, steps + 1));
            let u_prev = levels.last().map(|l| &l.u);
            let fsol = solve_adapted_linear(&a, &b, u_prev, &theta_prev, big_n, p.gamma, sc)?;
            let fs = ShellSeries::from_trace(&fsol.trace, Component::Field, p.sigma_prime, Lebesgue::S, sc.oversample)?;
            let f_s_centered = fs.curve(&p.centered_prime(big_n));
            let f_s_cumulative = fs.curve(&p.cumulative_prime(big_n));
            let theta_f = evaluate_cutoffs(&sc.cutoff, &f_s_centered);
            let problem = WProblem {
                f: &fsol.trace,
                u_prev,
                theta_prev: &theta_prev,
                theta_f: &theta_f,
                n: big_n,
                params: p,
            };
            let wsol = solve_w_fixed_point(&problem, sc)?;
            let w = &wsol.trace;
            let curves = LevelCurves {
                level: n,
                f_s_cumulative,
                f_s_centered,
                w_s_cumulative: ShellSeries::from_trace(w, Component::Field, p.sigma(), Lebesgue::S, sc.oversample)?
                    .curve(&p.cumulative(big_n)),
                w_x_cumulative: ShellSeries::from_trace(w, Component::Field, p.nu, Lebesgue::X, sc.oversample)?
                    .curve(&p.cumulative(big_n)),
                w_y: YSeries::from_trace(w, p, sc.oversample)?.curve(p, big_n),
            };
            let u = match u_prev {
                Some(prev) => prev.add(&fsol.trace)?.add(w)?,
                None => fsol.trace.add(w)?,
            };
            Ok(Level {
                n,
                shell: big_n,
                cutoffs: CutoffState {
                    times: times.clone(),
                    theta_prev,
                    theta_f,
                    theta_w: wsol.theta_w.clone(),
                },
                f_residual: fsol.residual,
                w_certificate: wsol.certificate,
                w_iterations: wsol.iterations,
                f: fsol.trace,
                w: wsol.trace,
                u,
                curves,
            })
        })()
        .map_err(at_level(n))?;
        levels.push(level);
    }
    let mut result = CascadeResult {
        seed: draw.seed,
        params: *p,
        levels,
        times: StoppingTimes { t1: 0.0, t2: 0.0, t: 0.0 },
    };
    result.times = random_time(&result);
    Ok(result)
}

/// `sup{t ≤ T₀ : curve(t) ≤ threshold}` for a nondecreasing sampled curve,
/// located by bisection and refined by linear interpolation.
pub fn crossing_time(curve: &[f64], dt: f64, threshold: f64) -> f64 {
    let last = curve.len() - 1;
    if curve[last] <= threshold {
        return last as f64 * dt;
    }
    if curve[0] > threshold {
        return 0.0;
    }
    let (mut lo, mut hi) = (0usize, last);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if curve[mid] <= threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let frac = (threshold - curve[lo]) / (curve[hi] - curve[lo]);
    (lo as f64 + frac.clamp(0.0, 1.0)) * dt
}

fn summed(levels: &[Level], pick: impl Fn(&LevelCurves) -> &[f64]) -> Vec<f64> {
    let len = levels[0].u.len();
    (0..len).map(|j| levels.iter().map(|l| pick(&l.curves)[j]).sum()).collect()
}

/// `T₁` over `Σ_m ‖⟨∇⟩^{σ′}F_m‖_{S_{M,D′}}`, `T₂` over `Σ_m ‖w_m‖_{Y_M}`,
/// each at threshold ½, and `T = min(T₁, T₂)`.
pub fn random_time(result: &CascadeResult) -> StoppingTimes {
    let dt = result.levels[0].u.dt;
    let t1 = crossing_time(&summed(&result.levels, |c| &c.f_s_centered), dt, 0.5);
    let t2 = crossing_time(&summed(&result.levels, |c| &c.w_y), dt, 0.5);
    StoppingTimes { t1, t2, t: t1.min(t2) }
}

/// Size of one level's pieces in the spaces of the convergence argument.
#[derive(Clone, Debug, Serialize)]
pub struct LevelNorms {
    pub n: u32,
    /// `C⁰H^s × C⁰H^{s−1}`
    pub f_energy: f64,
    pub w_energy: f64,
    /// `L²_t W^{σ,∞}`
    pub f_strichartz: f64,
    pub w_strichartz: f64,
    /// `‖u_n − u_{n−1}‖` in `C⁰H^s × C⁰H^{s−1}`
    pub increment: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub levels: Vec<LevelNorms>,
    /// `cauchy[n][m] = ‖u_n − u_m‖_{C⁰H^s × C⁰H^{s−1}}` for `m < n`.
    pub cauchy: Vec<Vec<f64>>,
    /// Least-squares slope of `log₂ increment` against `n` over the nonzero
    /// increments with `n ≥ 1`; `None` with fewer than two such levels.
    pub decay_rate: Option<f64>,
}

fn energy_norm(trace: &FieldTrace, s: f64) -> Result<f64> {
    crate::dynamics::energy_sup(trace, s)
}

/// `(∫ ‖⟨∇⟩^σ u‖²_{L^∞} dt)^{1/2}` by the trapezoid rule.
pub fn strichartz_norm(trace: &FieldTrace, sigma: f64, oversample: bool) -> f64 {
    let v: Vec<f64> = trace
        .u
        .iter()
        .map(|u| if u.is_zero() { 0.0 } else { bessel_derivative(u, sigma).linf_norm(oversample) })
        .collect();
    let acc: f64 = v.windows(2).map(|p| 0.5 * trace.dt * (p[0] * p[0] + p[1] * p[1])).sum();
    acc.sqrt()
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn convergence_report(result: &CascadeResult, oversample: bool) -> Result<ConvergenceReport> {
    if result.levels.len() < 2 {
        return Err(Error::InvalidArgument("a convergence report needs at least two levels".into()));
    }
    let p = &result.params;
    let mut levels = Vec::new();
    let mut prev: Option<&FieldTrace> = None;
    for l in &result.levels {
        let increment = match prev {
            Some(u) => energy_norm(&l.u.sub(u)?, p.s)?,
            None => energy_norm(&l.u, p.s)?,
        };
        levels.push(LevelNorms {
            n: l.n,
            f_energy: energy_norm(&l.f, p.s)?,
            w_energy: energy_norm(&l.w, p.s)?,
            f_strichartz: strichartz_norm(&l.f, p.sigma(), oversample),
            w_strichartz: strichartz_norm(&l.w, p.sigma(), oversample),
            increment,
        });
        prev = Some(&l.u);
    }
    let mut cauchy = Vec::new();
    for (i, a) in result.levels.iter().enumerate() {
        let row = result.levels[..i]
            .iter()
            .map(|b| energy_norm(&a.u.sub(&b.u)?, p.s))
            .collect::<Result<Vec<_>>>()?;
        cauchy.push(row);
    }
    let pts: Vec<(f64, f64)> = levels
        .iter()
        .filter(|l| l.n >= 1 && l.increment > 0.0)
        .map(|l| (l.n as f64, l.increment.log2()))
        .collect();
    let decay_rate = (pts.len() >= 2).then(|| {
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        ls_slope(&x, &y)
    });
    Ok(ConvergenceReport { levels, cauchy, decay_rate })
}

/// `‖u − W(t)(f₀, f₁) − ∫ sin((t−s)|∇|)/|∇| sign·|∇u|² ds‖_{C⁰H^s([0,T])}`
/// with the integral evaluated by direct quadrature.
pub fn residual_check(
    u: &FieldTrace,
    f0: &SpectralField,
    f1: &SpectralField,
    window_end: f64,
    s: f64,
    cfg: &SolverConfig,
) -> Result<f64> {
    let g = nlw_forcing(u, cfg)?;
    integral_residual(u, f0, f1, &g, s, window_end)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_of_linear_curve() {
        let c: Vec<f64> = (0..=10).map(|j| j as f64 * 0.1).collect();
        assert!((crossing_time(&c, 0.05, 0.5) - 0.25).abs() < 1e-12);
        assert_eq!(crossing_time(&c, 0.05, 2.0), 0.5);
        let flat = vec![0.0; 11];
        assert_eq!(crossing_time(&flat, 0.05, 0.5), 0.5);
    }

    #[test]
    fn crossing_of_square_root_curve() {
        // S-type norm of a steady single mode: a·√t, crossing ½ at τ = 1/(4a²).
        let a = 1.3f64;
        let dt = 0.01;
        let c: Vec<f64> = (0..=50).map(|j| a * (j as f64 * dt).sqrt()).collect();
        let tau = 1.0 / (4.0 * a * a);
        assert!((crossing_time(&c, dt, 0.5) - tau).abs() < dt);
    }

    #[test]
    fn slope_of_exact_power() {
        let x = [1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| -0.5 * v + 2.0).collect();
        assert!((ls_slope(&x, &y) + 0.5).abs() < 1e-12);
    }
}
