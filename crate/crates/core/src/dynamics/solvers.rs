use num_complex::Complex64;

use super::cutoff::CutoffSpec;
use super::propagator::{duhamel, free_trace, march};
use super::residual::{duhamel_direct, integral_residual};
use super::trace::FieldTrace;
use crate::error::{Error, Result};
use crate::norms::{shell_spatial_norms, weight, Component, Lebesgue, ParameterPoint, ShellSeries, YSeries};
use crate::randomization::PartitionSpec;
use crate::spectral::{gradient_physical, grad_dot, project_high, project_low, unit_cube_block, Products, SpectralField};

/// Time stepping and certification settings shared by all solvers.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub dt: f64,
    pub horizon: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub products: Products,
    pub oversample: bool,
    /// `+1` solves the integral forms as written; `−1` flips the nonlinearity.
    pub sign: f64,
    /// Check every output against the direct Duhamel quadrature.
    pub certify: bool,
    pub cutoff: CutoffSpec,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: 0.025,
            horizon: 0.5,
            tol: 1e-10,
            max_iters: 50,
            products: Products::default(),
            oversample: false,
            sign: 1.0,
            certify: true,
            cutoff: CutoffSpec::default(),
        }
    }
}

impl SolverConfig {
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.horizon > 0.0) {
            return Err(Error::InvalidArgument("dt and horizon must be positive".into()));
        }
        let r = self.horizon / self.dt;
        let k = r.round();
        if (r - k).abs() > 1e-9 * r.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "dt = {} does not divide the horizon {}",
                self.dt, self.horizon
            )));
        }
        Ok(k as usize)
    }
}

/// Largest shell of `P_{≤N^γ}`: `2^{⌈γ log₂ N⌉}`, capped at the grid.
pub fn low_cut(n: u32, gamma: f64, nyquist: u32) -> u32 {
    let e = (gamma * (n as f64).log2() - 1e-12).ceil().max(0.0) as u32;
    (1u32 << e).min(nyquist)
}

/// A solver output with its forcing samples and integral-form residual.
#[derive(Clone, Debug)]
pub struct Solution {
    pub trace: FieldTrace,
    pub forcing: Vec<SpectralField>,
    pub residual: Option<f64>,
}

fn data_scale(f0: &SpectralField, f1: &SpectralField) -> f64 {
    1.0 + f0.sobolev_norm(1.0) + f1.l2_norm()
}

fn certify(sol: &mut Solution, f0: &SpectralField, f1: &SpectralField, cfg: &SolverConfig) -> Result<()> {
    if !cfg.certify {
        return Ok(());
    }
    let r = integral_residual(&sol.trace, f0, f1, &sol.forcing, 1.0, sol.trace.horizon())?;
    sol.residual = Some(r);
    if r > cfg.tol * data_scale(f0, f1) {
        return Err(Error::NonConvergence {
            iterations: 0,
            residual: r,
            history: vec![r],
        });
    }
    Ok(())
}

/// `u_tt − Δu = sign·|∇u|²` by explicit variation-of-constants stepping.
pub fn solve_nlw(f0: &SpectralField, f1: &SpectralField, cfg: &SolverConfig) -> Result<Solution> {
    let steps = cfg.steps()?;
    let (trace, forcing) = march(f0, f1, cfg.dt, steps, |_, u| Ok(grad_dot(u, u, cfg.products)?.scale(cfg.sign)))?;
    let mut sol = Solution { trace, forcing, residual: None };
    certify(&mut sol, f0, f1, cfg)?;
    Ok(sol)
}

/// Recompute `sign·|∇u|²` from a stored trace.
pub fn nlw_forcing(trace: &FieldTrace, cfg: &SolverConfig) -> Result<Vec<SpectralField>> {
    trace
        .u
        .iter()
        .map(|u| Ok(grad_dot(u, u, cfg.products)?.scale(cfg.sign)))
        .collect()
}

/// Picard iterates `u⁽⁰⁾ = W(t)(f₀, f₁)`, `u⁽ʲ⁾ = u⁽⁰⁾ + Duhamel(|∇u⁽ʲ⁻¹⁾|²)`.
pub fn picard_iterates(f0: &SpectralField, f1: &SpectralField, j_max: usize, cfg: &SolverConfig) -> Result<Vec<FieldTrace>> {
    let steps = cfg.steps()?;
    let free = free_trace(f0, f1, cfg.dt, steps)?;
    let mut out = vec![free.clone()];
    for _ in 0..j_max {
        let prev = out.last().unwrap();
        let g = nlw_forcing(prev, cfg)?;
        let d = duhamel(&g, cfg.dt)?;
        out.push(free.add(&d)?);
    }
    Ok(out)
}

/// `sup_t (‖|∇|u‖² + ‖∂_t u‖²)^{1/2}` of each iterate.
pub fn energy_norms(iterates: &[FieldTrace]) -> Result<Vec<f64>> {
    iterates
        .iter()
        .map(|tr| {
            let ut = tr.derivative()?;
            Ok(tr
                .u
                .iter()
                .zip(ut)
                .map(|(u, v)| (u.homogeneous_norm(1.0).powi(2) + v.l2_norm().powi(2)).sqrt())
                .fold(0.0, f64::max))
        })
        .collect()
}

fn adapted_forcing(
    f: &SpectralField,
    low: Option<&SpectralField>,
    theta: f64,
    cfg: &SolverConfig,
) -> Result<SpectralField> {
    match low {
        Some(b) if theta != 0.0 && !b.is_zero() => Ok(grad_dot(b, f, cfg.products)?.scale(2.0 * theta * cfg.sign)),
        _ => Ok(SpectralField::zeros(f.grid(), f.is_real())),
    }
}

fn low_background(background: Option<&FieldTrace>, n: u32, gamma: f64) -> Result<Option<Vec<SpectralField>>> {
    match background {
        None => Ok(None),
        Some(b) if b.is_zero() => Ok(None),
        Some(b) => {
            let cut = low_cut(n, gamma, b.grid().nyquist());
            Ok(Some(b.u.iter().map(|u| project_low(u, cut)).collect::<Result<_>>()?))
        }
    }
}

/// Adapted linear evolution
/// `F_tt − ΔF = 2θ_{≤n−1} ∇P_{≤N^γ}u_{n−1} · ∇F` with data `(f₀, f₁)`.
///
/// `theta` holds the history cutoff at each sample; a missing background
/// means `u_{n−1} = 0` and the evolution is free.
pub fn solve_adapted_linear(
    f0: &SpectralField,
    f1: &SpectralField,
    background: Option<&FieldTrace>,
    theta: &[f64],
    n: u32,
    gamma: f64,
    cfg: &SolverConfig,
) -> Result<Solution> {
    let steps = cfg.steps()?;
    if theta.len() != steps + 1 {
        return Err(Error::InvalidArgument("cutoff curve length differs from step count".into()));
    }
    let low = low_background(background, n, gamma)?;
    if let Some(b) = background {
        if b.len() != steps + 1 {
            return Err(Error::InvalidArgument("background sampling differs from solver".into()));
        }
    }
    let Some(low) = low else {
        let trace = free_trace(f0, f1, cfg.dt, steps)?;
        let forcing = vec![SpectralField::zeros(f0.grid(), true); steps + 1];
        return Ok(Solution { trace, forcing, residual: Some(0.0) });
    };
    let (trace, forcing) = march(f0, f1, cfg.dt, steps, |j, f| adapted_forcing(f, Some(&low[j]), theta[j], cfg))?;
    let mut sol = Solution { trace, forcing, residual: None };
    if cfg.certify {
        let recomputed = sol
            .trace
            .u
            .iter()
            .enumerate()
            .map(|(j, f)| adapted_forcing(f, Some(&low[j]), theta[j], cfg))
            .collect::<Result<Vec<_>>>()?;
        sol.forcing = recomputed;
        certify(&mut sol, f0, f1, cfg)?;
    }
    Ok(sol)
}

/// Recompute the adapted forcing from stored traces.
pub fn adapted_forcing_from(
    f: &FieldTrace,
    background: Option<&FieldTrace>,
    theta: &[f64],
    n: u32,
    gamma: f64,
    cfg: &SolverConfig,
) -> Result<Vec<SpectralField>> {
    let low = low_background(background, n, gamma)?;
    f.u.iter()
        .enumerate()
        .map(|(j, fj)| adapted_forcing(fj, low.as_ref().map(|l| &l[j]), theta[j], cfg))
        .collect()
}

/// The same evolution started from the single cube block `P_k(f₀, f₁)`.
#[allow(clippy::too_many_arguments)]
pub fn solve_per_cube(
    k: [i64; 3],
    f0: &SpectralField,
    f1: &SpectralField,
    partition: &PartitionSpec,
    background: Option<&FieldTrace>,
    theta: &[f64],
    n: u32,
    gamma: f64,
    cfg: &SolverConfig,
) -> Result<Solution> {
    let a = unit_cube_block(f0, k, partition)?;
    let b = unit_cube_block(f1, k, partition)?;
    solve_adapted_linear(&a, &b, background, theta, n, gamma, cfg)
}

/// Inputs of the nonlinear-remainder equation at level `n`.
pub struct WProblem<'a> {
    pub f: &'a FieldTrace,
    pub u_prev: Option<&'a FieldTrace>,
    pub theta_prev: &'a [f64],
    pub theta_f: &'a [f64],
    pub n: u32,
    pub params: &'a ParameterPoint,
}

/// Output of the nonlinear-remainder solve.
#[derive(Clone, Debug)]
pub struct WSolution {
    pub trace: FieldTrace,
    pub forcing: Vec<SpectralField>,
    pub theta_w: Vec<f64>,
    /// Applications of the integral map `Γ` used for certification.
    pub iterations: usize,
    /// `‖Γ(w) − w‖_{Y_N}` at acceptance.
    pub certificate: f64,
}

struct WTerms {
    grad_f: Vec<Vec<Complex64>>,
    grad_u: Option<Vec<Vec<Complex64>>>,
    grad_high: Option<Vec<Vec<Complex64>>>,
}

impl WProblem<'_> {
    fn terms(&self, j: usize) -> Result<WTerms> {
        let grad_f = gradient_physical(&self.f.u[j]);
        let (grad_u, grad_high) = match self.u_prev {
            Some(u) if !u.u[j].is_zero() => {
                let cut = low_cut(self.n, self.params.gamma, u.grid().nyquist());
                let high = project_high(&u.u[j], cut)?;
                let gh = if high.is_zero() { None } else { Some(gradient_physical(&high)) };
                (Some(gradient_physical(&u.u[j])), gh)
            }
            _ => (None, None),
        };
        Ok(WTerms { grad_f, grad_u, grad_high })
    }

    /// `θ_F(|∇F|² + 2∇F·∇w) + θ_w|∇w|² + θ_{≤}(2∇u_{n−1}·∇w + 2∇P_{>N^γ}u_{n−1}·∇F)`.
    fn forcing(&self, j: usize, w: &SpectralField, theta_w: f64, cfg: &SolverConfig) -> Result<SpectralField> {
        let grid = w.grid();
        let t = self.terms(j)?;
        let gw = gradient_physical(w);
        let (tf, tp) = (self.theta_f[j], self.theta_prev[j]);
        let len = grid.len();
        let dim = grid.dim();
        let mut acc = vec![Complex64::default(); len];
        for a in 0..dim {
            let f = &t.grad_f[a];
            let wv = &gw[a];
            for i in 0..len {
                let mut v = f[i] * (f[i] + wv[i] * 2.0) * tf + wv[i] * wv[i] * theta_w;
                if let Some(gu) = &t.grad_u {
                    v += gu[a][i] * wv[i] * (2.0 * tp);
                }
                if let Some(gh) = &t.grad_high {
                    v += gh[a][i] * f[i] * (2.0 * tp);
                }
                acc[i] += v;
            }
        }
        let real = w.is_real() && self.f.u[j].is_real() && self.u_prev.is_none_or(|u| u.u[j].is_real());
        Ok(cfg.products.finish(grid, acc, real).scale(cfg.sign))
    }

    fn theta_w_curve(&self, w: &FieldTrace, cfg: &SolverConfig) -> Result<Vec<f64>> {
        let p = self.params;
        let s = ShellSeries::from_trace(w, Component::Field, p.sigma(), Lebesgue::S, cfg.oversample)?;
        let x = ShellSeries::from_trace(w, Component::Field, p.nu, Lebesgue::X, cfg.oversample)?;
        let spec = p.cumulative(self.n);
        let a = s.curve(&spec);
        let b = x.curve(&spec);
        Ok(a.iter().zip(&b).map(|(u, v)| cfg.cutoff.theta(u + v)).collect())
    }

    /// `Γ(w)` through the direct quadrature, with its forcing and cutoff.
    fn gamma_map(&self, w: &FieldTrace, cfg: &SolverConfig) -> Result<(FieldTrace, Vec<SpectralField>, Vec<f64>)> {
        let theta_w = self.theta_w_curve(w, cfg)?;
        let forcing = w
            .u
            .iter()
            .enumerate()
            .map(|(j, wj)| self.forcing(j, wj, theta_w[j], cfg))
            .collect::<Result<Vec<_>>>()?;
        Ok((duhamel_direct(&forcing, w.dt)?, forcing, theta_w))
    }
}

/// Running `θ_w` argument: cumulative `S` and `X` norms of `w` on `[0, t_j]`.
struct RunningCutoff<'a> {
    params: &'a ParameterPoint,
    weights: Vec<f64>,
    s_acc: Vec<f64>,
    s_prev: Vec<f64>,
    x_max: Vec<f64>,
    started: bool,
}

impl<'a> RunningCutoff<'a> {
    fn new(params: &'a ParameterPoint, n: u32, shells: &[u32]) -> Self {
        let spec = params.cumulative(n);
        RunningCutoff {
            params,
            weights: shells.iter().map(|&m| weight(&spec, m)).collect(),
            s_acc: vec![0.0; shells.len()],
            s_prev: vec![0.0; shells.len()],
            x_max: vec![0.0; shells.len()],
            started: false,
        }
    }

    fn push(&mut self, w: &SpectralField, dt: f64, oversample: bool) -> f64 {
        let s = shell_spatial_norms(w, self.params.sigma(), Lebesgue::S, oversample);
        let x = shell_spatial_norms(w, self.params.nu, Lebesgue::X, oversample);
        let mut total = 0.0;
        for i in 0..self.weights.len() {
            if self.started {
                self.s_acc[i] += 0.5 * dt * (self.s_prev[i] * self.s_prev[i] + s[i] * s[i]);
            }
            self.s_prev[i] = s[i];
            self.x_max[i] = self.x_max[i].max(x[i]);
            total += self.weights[i] * (self.s_acc[i].sqrt() + self.x_max[i]);
        }
        self.started = true;
        total
    }
}

/// Solve the nonlinear-remainder equation `w = Γ(w)` on the sample grid.
///
/// The discrete map is strictly causal in `w` (the forcing at `t_{j+1}`
/// only enters the derivative), so forward marching yields its exact fixed
/// point. The result is then certified as `‖Γ(w) − w‖_{Y_N} < tol·(1 + ‖Γ(w)‖_{Y_N})`
/// with `Γ` evaluated by direct quadrature; failing that, Picard steps `w ← Γ(w)`
/// are applied up to `max_iters`.
pub fn solve_w_fixed_point(problem: &WProblem<'_>, cfg: &SolverConfig) -> Result<WSolution> {
    let steps = cfg.steps()?;
    let grid = problem.f.grid().clone();
    if problem.f.len() != steps + 1 || problem.theta_prev.len() != steps + 1 || problem.theta_f.len() != steps + 1 {
        return Err(Error::InvalidArgument("sampling of the w problem differs from solver".into()));
    }
    let real = problem.f.u.iter().all(|f| f.is_real());
    let zero = SpectralField::zeros(&grid, real);
    let shells = grid.shells();
    let mut running = RunningCutoff::new(problem.params, problem.n, &shells);
    let mut theta_w = Vec::with_capacity(steps + 1);
    let (trace, forcing) = march(&zero, &zero, cfg.dt, steps, |j, w| {
        let th = cfg.cutoff.theta(running.push(w, cfg.dt, cfg.oversample));
        theta_w.push(th);
        problem.forcing(j, w, th, cfg)
    })?;
    let mut sol = WSolution {
        trace,
        forcing,
        theta_w,
        iterations: 0,
        certificate: 0.0,
    };
    if !cfg.certify {
        return Ok(sol);
    }
    let mut history = Vec::new();
    for it in 1..=cfg.max_iters.max(1) {
        let (next, forcing, theta_w) = problem.gamma_map(&sol.trace, cfg)?;
        let diff = next.sub(&sol.trace)?;
        let ys = YSeries::from_trace(&diff, problem.params, cfg.oversample)?;
        let r = *ys.curve(problem.params, problem.n).last().unwrap();
        let size = *YSeries::from_trace(&next, problem.params, cfg.oversample)?
            .curve(problem.params, problem.n)
            .last()
            .unwrap();
        history.push(r);
        sol.iterations = it;
        sol.certificate = r;
        if r < cfg.tol * (1.0 + size) {
            sol.forcing = forcing;
            sol.theta_w = theta_w;
            return Ok(sol);
        }
        sol.trace = next;
        sol.forcing = forcing;
        sol.theta_w = theta_w;
    }
    Err(Error::NonConvergence {
        iterations: sol.iterations,
        residual: sol.certificate,
        history,
    })
}

/// Plain Picard iteration `w ← Γ(w)` from `w = 0`, returning the
/// `Y_N` distance to the previous iterate at each step.
pub fn w_picard_from_zero(problem: &WProblem<'_>, iterations: usize, cfg: &SolverConfig) -> Result<(FieldTrace, Vec<f64>)> {
    let steps = cfg.steps()?;
    let mut w = FieldTrace::zeros(problem.f.grid(), cfg.dt, steps);
    let mut gaps = Vec::new();
    for _ in 0..iterations {
        let (next, _, _) = problem.gamma_map(&w, cfg)?;
        let diff = next.sub(&w)?;
        let ys = YSeries::from_trace(&diff, problem.params, cfg.oversample)?;
        gaps.push(*ys.curve(problem.params, problem.n).last().unwrap());
        w = next;
    }
    Ok((w, gaps))
}
