//! Empirical counterparts of the linear and bilinear estimates: measured
//! ratios, seeded ensembles and scaling fits.
//!
//! Every `≲` is tested as a constant-stability statement. Ratios are reported
//! without implicit constants and compared across a ladder, never against an
//! absolute threshold.

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{duhamel, free_trace, low_cut, paraproduct, FieldTrace, Regime, SolverConfig};
use crate::error::{Error, Result};
use crate::norms::{Component, Lebesgue, ParameterPoint, ShellSeries, WeightSpec, YSeries};
use crate::data::{build_data, Profile};
use crate::randomization::{draw_gaussians, q_block, CubeIndex, Distribution, PartitionSpec, RandomDraw};
use crate::spectral::{bessel_derivative, grad_dot, make_grid, project_high, project_shell, Grid, ShellSpec, SpectralField};

/// Time-trapezoid `L^q_t` of a sampled nonnegative function.
fn lq_time(values: &[f64], dt: f64, q: f64) -> f64 {
    let acc: f64 = values.windows(2).map(|p| 0.5 * dt * (p[0].powf(q) + p[1].powf(q))).sum();
    acc.powf(1.0 / q)
}

/// `‖u‖_{L^q_t L^p_x}` on the sampled window.
pub fn lq_lp_norm(trace: &FieldTrace, q: f64, p: f64) -> f64 {
    let v: Vec<f64> = trace.u.iter().map(|u| if u.is_zero() { 0.0 } else { u.lp_norm(p) }).collect();
    lq_time(&v, trace.dt, q)
}

fn weighted(trace: &FieldTrace, order: f64, lebesgue: Lebesgue, spec: &WeightSpec, oversample: bool) -> Result<f64> {
    let series = ShellSeries::from_trace(trace, Component::Field, order, lebesgue, oversample)?;
    Ok(*series.curve(spec).last().expect("non-empty trace"))
}

/// Free-evolution ratio
/// `(‖u‖_{C⁰H^ν} + ‖∂_t u‖_{C⁰H^{ν−1}} + ‖⟨∇⟩^σ u‖_{L²L^∞}) / (‖f₀‖_{H^ν} + ‖f₁‖_{H^{ν−1}})`.
pub fn strichartz_constant(f0: &SpectralField, f1: &SpectralField, params: &ParameterPoint, cfg: &SolverConfig) -> Result<f64> {
    let den = f0.sobolev_norm(params.nu) + f1.sobolev_norm(params.nu - 1.0);
    if den == 0.0 {
        return Err(Error::Undefined("zero data in Strichartz ratio".into()));
    }
    let tr = free_trace(f0, f1, cfg.dt, cfg.steps()?)?;
    let ut = tr.derivative()?;
    let energy = tr.u.iter().map(|u| u.sobolev_norm(params.nu)).fold(0.0, f64::max)
        + ut.iter().map(|v| v.sobolev_norm(params.nu - 1.0)).fold(0.0, f64::max);
    let sup: Vec<f64> = tr
        .u
        .iter()
        .map(|u| bessel_derivative(u, params.sigma()).linf_norm(cfg.oversample))
        .collect();
    Ok((energy + lq_time(&sup, tr.dt, 2.0)) / den)
}

/// A sharp wave-admissible pair, `1/q + 1/p = 1/2` with `2 ≤ q, p < ∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StrichartzPair {
    pub q: f64,
    pub p: f64,
}

impl Default for StrichartzPair {
    fn default() -> Self {
        StrichartzPair { q: 4.0, p: 4.0 }
    }
}

impl StrichartzPair {
    pub fn new(q: f64, p: f64) -> Result<Self> {
        if !(q >= 2.0 && p >= 2.0 && q.is_finite() && p.is_finite()) || (1.0 / q + 1.0 / p - 0.5).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("({q}, {p}) is not sharp wave-admissible")));
        }
        Ok(StrichartzPair { q, p })
    }

    /// Exponent of the `M/N` gain.
    pub fn gain_exponent(&self) -> f64 {
        0.5 - 1.0 / self.p
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RefinedGain {
    pub m: u32,
    pub n: u32,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// `‖∫ sin((t−s)|∇|)/|∇| P_{M;k}F ds‖_{L^qL^p}` over
/// `(M/N)^{1/2−1/p} N^{−1} N^{3/2−1/q−3/p} ‖F‖_{L¹L²}`.
pub fn refined_strichartz_gain(
    forcing: &[SpectralField],
    dt: f64,
    k: CubeIndex,
    m: u32,
    n: u32,
    pair: StrichartzPair,
) -> Result<RefinedGain> {
    if m == 0 || 4 * m > n {
        return Err(Error::InvalidArgument(format!("need 1 <= M <= N/4, got M = {m}, N = {n}")));
    }
    let projected = forcing
        .iter()
        .map(|f| project_shell(f, &ShellSpec::recentered(m, k)))
        .collect::<Result<Vec<_>>>()?;
    let lhs = lq_lp_norm(&duhamel(&projected, dt)?, pair.q, pair.p);
    let l2: Vec<f64> = forcing.iter().map(|f| f.l2_norm()).collect();
    let l1l2: f64 = l2.windows(2).map(|p| 0.5 * dt * (p[0] + p[1])).sum();
    let (mf, nf) = (m as f64, n as f64);
    let rhs = (mf / nf).powf(pair.gain_exponent()) * nf.powf(0.5 - 1.0 / pair.q - 3.0 / pair.p) * l1l2;
    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(RefinedGain { m, n, lhs, rhs, ratio })
}

/// Second-moment summary of a seeded ensemble.
#[derive(Clone, Debug, Serialize)]
pub struct EnsembleStats {
    pub seeds: Vec<u64>,
    pub values: Vec<f64>,
    /// `(mean value²)^{1/2}`
    pub rms: f64,
    /// Delta-method standard error of `rms`.
    pub se: f64,
}

impl EnsembleStats {
    pub fn from_values(seeds: Vec<u64>, values: Vec<f64>) -> Self {
        let n = values.len() as f64;
        let sq: Vec<f64> = values.iter().map(|v| v * v).collect();
        let mean = sq.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            sq.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let rms = mean.sqrt();
        let se = if rms > 0.0 { (var / n).sqrt() / (2.0 * rms) } else { 0.0 };
        EnsembleStats { seeds, values, rms, se }
    }
}

/// Run `work` for every seed on at most `jobs` workers. Every seed is
/// attempted and the results keep the seed order.
pub fn for_each_seed<T, F>(seeds: &[u64], jobs: usize, work: F) -> Result<Vec<Result<T>>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(pool.install(|| seeds.par_iter().map(|&s| work(s)).collect()))
}

/// `L²_ω` estimate of `measure` over the seeds.
pub fn ensemble_norms<F>(seeds: &[u64], jobs: usize, measure: F) -> Result<EnsembleStats>
where
    F: Fn(u64) -> Result<f64> + Sync,
{
    if seeds.len() < 8 {
        return Err(Error::InvalidArgument("an ensemble needs at least 8 seeds".into()));
    }
    let values = for_each_seed(seeds, jobs, measure)?.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(EnsembleStats::from_values(seeds.to_vec(), values))
}

/// Inputs of the block Strichartz measurement at one dyadic `N`.
#[derive(Clone, Debug)]
pub struct BlockProblem {
    pub f0: SpectralField,
    pub f1: SpectralField,
    pub n: u32,
    pub params: ParameterPoint,
    pub partition: PartitionSpec,
    pub solver: SolverConfig,
}

impl BlockProblem {
    /// `‖(P̃_N f₀, P̃_N f₁)‖_{H^s × H^{s−1}}`.
    pub fn data_norm(&self) -> Result<f64> {
        let spec = ShellSpec::fattened(self.n);
        let a = project_shell(&self.f0, &spec)?;
        let b = project_shell(&self.f1, &spec)?;
        Ok((a.sobolev_norm(self.params.s).powi(2) + b.sobolev_norm(self.params.s - 1.0).powi(2)).sqrt())
    }

    /// `‖⟨∇⟩^{σ′}F_n^ω‖_{S_{N,D′}([0,T₀])}` for the block evolution without
    /// background, i.e. the small-amplitude limit of the adapted evolution.
    pub fn strichartz_norm(&self, draw: &RandomDraw) -> Result<f64> {
        let a = q_block(&self.f0, self.n, draw, &self.partition)?;
        let b = q_block(&self.f1, self.n, draw, &self.partition)?;
        let tr = free_trace(&a, &b, self.solver.dt, self.solver.steps()?)?;
        weighted(
            &tr,
            self.params.sigma_prime,
            Lebesgue::S,
            &self.params.centered_prime(self.n),
            self.solver.oversample,
        )
    }
}

/// One ladder point of the probabilistic Strichartz measurement.
#[derive(Clone, Debug, Serialize)]
pub struct LadderPoint {
    pub n: u32,
    pub data_norm: f64,
    /// Per-seed `‖⟨∇⟩^{σ′}F_n^ω‖_{S_{N,D′}} / ‖(P̃_N f₀, P̃_N f₁)‖_{H^s×H^{s−1}}`.
    pub stats: EnsembleStats,
}

/// Block Strichartz ratios for the builtin power-law data over a ladder of
/// `N`. Each `N` gets its own grid of resolution `4N`, whose top shell is
/// `N`, and time step `dt` over `[0, T₀]`.
pub fn strichartz_ladder(
    params: &ParameterPoint,
    ns: &[u32],
    seeds: &[u64],
    jobs: usize,
    solver: &SolverConfig,
) -> Result<Vec<LadderPoint>> {
    let mut out = Vec::new();
    for &n in ns {
        if !n.is_power_of_two() || n < 2 {
            return Err(Error::NotDyadic(n));
        }
        let grid = make_grid(3, 1.0, 4 * n as usize)?;
        let (f0, f1) = build_data(&grid, &Profile::Power, 1.0, params.s)?;
        let problem = BlockProblem {
            f0,
            f1,
            n,
            params: *params,
            partition: PartitionSpec::default(),
            solver: solver.clone(),
        };
        let data_norm = problem.data_norm()?;
        // Cubes meeting the annulus `Q_N` lie within `‖k‖ < N`.
        let radius = n as f64 + 2.0;
        let stats = ensemble_norms(seeds, jobs, |seed| {
            let draw = draw_gaussians(3, seed, radius, true, Distribution::Gaussian)?;
            Ok(problem.strichartz_norm(&draw)? / data_norm)
        })?;
        out.push(LadderPoint { n, data_norm, stats });
    }
    Ok(out)
}

/// Exponent of the interaction term of the probabilistic Strichartz bound,
/// `σ′ − s + 1 − γ(σ−1) − ½(1−γ) + 2δ`.
pub fn probabilistic_strichartz_exponent(p: &ParameterPoint) -> f64 {
    p.sigma_prime - p.s + 1.0 - p.gamma * (p.sigma() - 1.0) - 0.5 * (1.0 - p.gamma) + 2.0 * p.delta
}

/// The two exponents controlling the nonlinear component,
/// `ν − s − γ(σ′−1)` and `(1−γ)(ν−1) + 1 − σ′`.
pub fn nonlinear_exponents(p: &ParameterPoint) -> (f64, f64) {
    (
        p.nu - p.s - p.gamma * (p.sigma_prime - 1.0),
        (1.0 - p.gamma) * (p.nu - 1.0) + 1.0 - p.sigma_prime,
    )
}

/// One-sided log-log fit against an upper-bound exponent.
#[derive(Clone, Debug, Serialize)]
pub struct ScalingFit {
    pub quantity: String,
    pub ns: Vec<u32>,
    pub values: Vec<f64>,
    pub slope: f64,
    /// Two-standard-error half-width of the slope (zero for exact fits).
    pub ci: f64,
    pub predicted: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn scaling_fit(quantity: &str, ns: &[u32], values: &[f64], predicted: f64, tolerance: f64) -> Result<ScalingFit> {
    if ns.len() < 3 || ns.len() != values.len() {
        return Err(Error::InvalidArgument("a scaling fit needs at least three ladder points".into()));
    }
    let mut distinct = ns.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() != ns.len() || values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument("degenerate ladder: repeated N or non-positive values".into()));
    }
    let x: Vec<f64> = ns.iter().map(|&n| (n as f64).log2()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.log2()).collect();
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / sxx;
    let rss: f64 = x.iter().zip(&y).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum();
    let ci = 2.0 * (rss / (k - 2.0) / sxx).sqrt();
    Ok(ScalingFit {
        quantity: quantity.to_string(),
        ns: ns.to_vec(),
        values: values.to_vec(),
        slope,
        ci,
        predicted,
        tolerance,
        pass: slope <= predicted + tolerance,
    })
}

/// Per-shell ratio `‖Σ_k g_k F_k‖_{L²_ω} / (Σ_k ‖F_k‖²)^{1/2}`.
#[derive(Clone, Debug, Serialize)]
pub struct DecouplingReport {
    pub shells: Vec<u32>,
    pub ratio: Vec<f64>,
    /// Standard error of each ratio.
    pub se: Vec<f64>,
}

/// `norm` maps a trace to per-shell values in a deterministic norm.
pub fn decoupling_check<N>(cubes: &[(CubeIndex, FieldTrace)], draws: &[RandomDraw], norm: N) -> Result<DecouplingReport>
where
    N: Fn(&FieldTrace) -> Result<Vec<f64>>,
{
    if cubes.is_empty() || draws.is_empty() {
        return Err(Error::InvalidArgument("decoupling needs cubes and draws".into()));
    }
    let shells = cubes[0].1.grid().shells();
    let mut det = vec![0.0; shells.len()];
    for (_, tr) in cubes {
        for (d, v) in det.iter_mut().zip(norm(tr)?) {
            *d += v * v;
        }
    }
    let mut per_seed: Vec<Vec<f64>> = vec![Vec::new(); shells.len()];
    for draw in draws {
        let mut acc: Option<FieldTrace> = None;
        for (k, tr) in cubes {
            let g = draw.get(*k).ok_or(Error::MissingCube(*k))?;
            let term = tr.map(|u| Ok(u.scale_complex(g)))?;
            acc = Some(match acc {
                Some(a) => a.add(&term)?,
                None => term,
            });
        }
        let values = norm(&acc.expect("non-empty cube list"))?;
        for (slot, v) in per_seed.iter_mut().zip(values) {
            slot.push(v);
        }
    }
    let mut ratio = Vec::new();
    let mut se = Vec::new();
    for (vals, d) in per_seed.into_iter().zip(&det) {
        let stats = EnsembleStats::from_values(Vec::new(), vals);
        let den = d.sqrt();
        if den > 0.0 {
            ratio.push(stats.rms / den);
            se.push(stats.se / den);
        } else {
            ratio.push(0.0);
            se.push(0.0);
        }
    }
    Ok(DecouplingReport { shells, ratio, se })
}

/// The displayed bilinear inequalities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BilinearCase {
    LowHighFF,
    LowHighHighGF,
    LowHighHighVF,
    LowHighFw,
    LowHighVw,
    HighLowFF,
    HighLowVF,
    HighLowFw,
    HighLowVw,
    HighHighFF,
    HighHighVF,
    HighHighFw,
    HighHighVw,
    Inhomogeneous,
}

impl BilinearCase {
    pub const ALL: [BilinearCase; 14] = [
        BilinearCase::LowHighFF,
        BilinearCase::LowHighHighGF,
        BilinearCase::LowHighHighVF,
        BilinearCase::LowHighFw,
        BilinearCase::LowHighVw,
        BilinearCase::HighLowFF,
        BilinearCase::HighLowVF,
        BilinearCase::HighLowFw,
        BilinearCase::HighLowVw,
        BilinearCase::HighHighFF,
        BilinearCase::HighHighVF,
        BilinearCase::HighHighFw,
        BilinearCase::HighHighVw,
        BilinearCase::Inhomogeneous,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BilinearCase::LowHighFF => "low-high G,F",
            BilinearCase::LowHighHighGF => "low-high P>G,F",
            BilinearCase::LowHighHighVF => "low-high P>v,F",
            BilinearCase::LowHighFw => "low-high G,w",
            BilinearCase::LowHighVw => "low-high v,w",
            BilinearCase::HighLowFF => "high-low G,F",
            BilinearCase::HighLowVF => "high-low v,F",
            BilinearCase::HighLowFw => "high-low G,w",
            BilinearCase::HighLowVw => "high-low v,w",
            BilinearCase::HighHighFF => "high-high G,F",
            BilinearCase::HighHighVF => "high-high v,F",
            BilinearCase::HighHighFw => "high-high G,w",
            BilinearCase::HighHighVw => "high-high v,w",
            BilinearCase::Inhomogeneous => "grad P>u . grad F",
        }
    }

    fn regime(&self) -> Option<Regime> {
        use BilinearCase::*;
        match self {
            LowHighFF | LowHighHighGF | LowHighHighVF | LowHighFw | LowHighVw => Some(Regime::LowHigh),
            HighLowFF | HighLowVF | HighLowFw | HighLowVw => Some(Regime::HighLow),
            HighHighFF | HighHighVF | HighHighFw | HighHighVw => Some(Regime::HighHigh),
            Inhomogeneous => None,
        }
    }

    /// Shells of the two standard inputs relative to `N`, as `(num, den)`.
    pub fn placement(&self) -> ((u32, u32), (u32, u32)) {
        use BilinearCase::*;
        match self {
            LowHighFF | LowHighFw | LowHighVw => ((1, 4), (1, 1)),
            LowHighHighGF | LowHighHighVF => ((2, 1), (8, 1)),
            HighLowFF | HighLowVF | HighLowFw | HighLowVw => ((1, 1), (1, 4)),
            HighHighFF | HighHighVF | HighHighFw | HighHighVw => ((1, 1), (1, 1)),
            Inhomogeneous => ((2, 1), (1, 1)),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BilinearRatio {
    pub n: u32,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// `‖LHS‖_{Y_N}` over the displayed right side with `T^{1/2}` and the power
/// of `N`, for inputs `a` (first slot) and `b` (second slot).
///
/// In the `P_{>N^γ}u · ∇F` case the right side carries no norm of `u`; it
/// is multiplied by `‖⟨∇⟩^{σ′}u‖_{S_{≤N,D′}} + ‖⟨∇⟩^ν u‖_{X_{≤N,D}}`, the
/// quantity the cutoff bounds by one, so that both sides are bilinear.
pub fn bilinear_ratio(
    case: BilinearCase,
    a: &FieldTrace,
    b: &FieldTrace,
    n: u32,
    params: &ParameterPoint,
    cfg: &SolverConfig,
) -> Result<BilinearRatio> {
    use BilinearCase::*;
    let p = params;
    let os = cfg.oversample;
    let t_half = a.horizon().sqrt();
    let cut = low_cut(n, p.gamma, a.grid().nyquist());
    let high = |tr: &FieldTrace| tr.map(|u| project_high(u, cut));
    let lhs_trace = match case {
        Inhomogeneous => {
            let ah = high(a)?;
            let g = ah
                .u
                .iter()
                .zip(&b.u)
                .map(|(x, y)| grad_dot(x, y, cfg.products))
                .collect::<Result<Vec<_>>>()?;
            duhamel(&g, a.dt)?
        }
        LowHighHighGF | LowHighHighVF => paraproduct(&high(a)?, b, Regime::LowHigh, cfg)?,
        c => paraproduct(a, b, c.regime().expect("paraproduct case"), cfg)?,
    };
    let lhs = *YSeries::from_trace(&lhs_trace, p, os)?.curve(p, n).last().unwrap();
    let nf = n as f64;
    let s_n = |tr: &FieldTrace, order: f64, spec: WeightSpec| weighted(tr, order, Lebesgue::S, &spec, os);
    let x_n = |tr: &FieldTrace, order: f64, spec: WeightSpec| weighted(tr, order, Lebesgue::X, &spec, os);
    let x_both = |tr: &FieldTrace| -> Result<f64> {
        Ok(x_n(tr, p.nu, p.centered_eta(n))?.max(x_n(tr, p.nu, p.cumulative(n))?))
    };
    let e_ff = p.nu - p.s + 1.0 - p.sigma_prime;
    let (e_b, e_c) = (p.nu - p.s + p.gamma * (1.0 - p.sigma_prime), (1.0 - p.gamma) * (p.nu - 1.0) + 1.0 - p.sigma_prime);
    let rhs = t_half
        * match case {
            LowHighFF => {
                nf.powf(e_ff) * s_n(a, p.sigma_prime, p.centered_prime(n))? * x_n(b, p.s, p.centered_prime(n))?
            }
            LowHighHighGF => {
                nf.powf(e_b) * s_n(a, p.sigma_prime, p.cumulative_prime(n))? * x_n(b, p.s, p.centered_prime(n))?
            }
            LowHighHighVF => nf.powf(e_c) * x_n(a, p.nu, p.cumulative(n))? * s_n(b, p.sigma_prime, p.centered_prime(n))?,
            LowHighFw => s_n(a, p.sigma_prime, p.cumulative_prime(n))? * x_both(b)?,
            LowHighVw => s_n(a, p.sigma(), p.cumulative(n))? * x_both(b)?,
            HighLowFF => {
                nf.powf(e_ff) * s_n(a, p.sigma_prime, p.cumulative_prime(n))? * x_n(b, p.s, p.centered_prime(n))?
            }
            HighLowVF => nf.powf(1.0 - p.sigma_prime) * x_n(a, p.nu, p.cumulative(n))? * s_n(b, p.sigma_prime, p.centered_prime(n))?,
            HighLowFw => s_n(a, p.sigma_prime, p.cumulative_prime(n))? * x_n(b, p.nu, p.centered_eta(n))?,
            HighLowVw => x_n(a, p.nu, p.cumulative(n))? * s_n(b, p.sigma(), p.centered_eta(n))?,
            HighHighFF => nf.powf(e_ff) * s_n(a, p.sigma_prime, p.cumulative(n))? * x_n(b, p.s, p.centered_prime(n))?,
            HighHighVF => nf.powf(1.0 - p.sigma_prime) * x_n(a, p.nu, p.cumulative(n))? * s_n(b, p.sigma_prime, p.centered_prime(n))?,
            HighHighFw => s_n(a, p.sigma_prime, p.cumulative_prime(n))? * x_n(b, p.nu, p.centered_eta(n))?,
            HighHighVw => s_n(a, p.sigma(), p.cumulative(n))? * x_both(b)?,
            Inhomogeneous => {
                let ku = s_n(a, p.sigma_prime, p.cumulative_prime(n))? + x_n(a, p.nu, p.cumulative(n))?;
                let kf = x_n(b, p.s, p.centered_prime(n))? + s_n(b, p.sigma_prime, p.centered_prime(n))?;
                (nf.powf(e_b) + nf.powf(e_c)) * ku * kf
            }
        };
    if !(rhs > 0.0) {
        return Err(Error::Undefined(format!("right side of {} vanishes", case.name())));
    }
    Ok(BilinearRatio { n, lhs, rhs, ratio: lhs / rhs })
}

/// Random parameters of one bilinear input family, shared across the ladder.
#[derive(Clone, Copy, Debug)]
pub struct WavePair {
    pub amplitudes: [f64; 2],
    pub phases: [f64; 2],
    /// Common propagation direction, `±1`.
    pub direction: f64,
}

impl WavePair {
    pub fn from_seed(seed: u64) -> Self {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let tau = std::f64::consts::TAU;
        WavePair {
            amplitudes: [rng.random_range(0.5..2.0), rng.random_range(0.5..2.0)],
            phases: [rng.random_range(0.0..tau), rng.random_range(0.0..tau)],
            direction: if rng.random::<bool>() { 1.0 } else { -1.0 },
        }
    }
}

/// One-dimensional standard inputs for `case` at dyadic `n`: co-propagating
/// plane waves `A cos(m(x ∓ t) + φ)` with `|m|` at the shells given by
/// [`BilinearCase::placement`], on a grid whose top shell is `16N`, with
/// `10N` time steps.
pub fn bilinear_inputs(
    case: BilinearCase,
    n: u32,
    waves: &WavePair,
    horizon: f64,
) -> Result<(FieldTrace, FieldTrace, SolverConfig)> {
    let grid: Grid = make_grid(1, 1.0, 64 * n as usize)?;
    let steps = 10 * n as usize;
    let cfg = SolverConfig {
        dt: horizon / steps as f64,
        horizon,
        ..Default::default()
    };
    let (pa, pb) = case.placement();
    let build = |(num, den): (u32, u32), i: usize| -> Result<FieldTrace> {
        let m = (n * num / den) as i64;
        let (amp, ph) = (waves.amplitudes[i], waves.phases[i]);
        let f0 = SpectralField::cosine_mode(&grid, [m, 0, 0], amp, ph)?;
        // ∂_t cos(m(x − ct) + φ) = c·m·sin(m x + φ) at t = 0
        let f1 = SpectralField::cosine_mode(&grid, [m, 0, 0], waves.direction * amp * m as f64, ph - std::f64::consts::FRAC_PI_2)?;
        free_trace(&f0, &f1, cfg.dt, steps)
    };
    Ok((build(pa, 0)?, build(pb, 1)?, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_fit() {
        let ns = [8, 16, 32, 64];
        let v: Vec<f64> = ns.iter().map(|&n| 3.0 * (n as f64).powf(-0.5)).collect();
        let f = scaling_fit("q", &ns, &v, -0.4, 0.0).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12);
        assert!(f.ci < 1e-10);
        assert!(f.pass);
        assert!(scaling_fit("q", &[8, 16], &v[..2], 0.0, 0.0).is_err());
        assert!(scaling_fit("q", &[8, 8, 16], &v[..3], 0.0, 0.0).is_err());
    }

    #[test]
    fn predicted_exponents() {
        let p = ParameterPoint { delta: 0.0, ..ParameterPoint::reference() };
        assert!((probabilistic_strichartz_exponent(&p) + 3.8e-5).abs() < 1e-9);
        let q = ParameterPoint { s: 2.0, nu: 2.2, sigma_prime: 1.2, gamma: 0.8, delta: 0.0, ..p };
        assert!((probabilistic_strichartz_exponent(&q) + 0.06).abs() < 1e-12);
    }

    #[test]
    fn admissible_pairs() {
        assert!(StrichartzPair::new(4.0, 4.0).is_ok());
        assert!(StrichartzPair::new(3.0, 6.0).is_ok());
        assert!(StrichartzPair::new(2.0, 2.0).is_err());
        assert_eq!(StrichartzPair::default().gain_exponent(), 0.25);
    }

    #[test]
    fn rms_and_standard_error() {
        let s = EnsembleStats::from_values(vec![], vec![1.0, 1.0, 1.0, 1.0]);
        assert_eq!(s.rms, 1.0);
        assert_eq!(s.se, 0.0);
        let s = EnsembleStats::from_values(vec![], vec![0.0, 2.0]);
        assert!((s.rms - 2f64.sqrt()).abs() < 1e-15);
    }
}
