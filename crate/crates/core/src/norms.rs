//! Frequency-weighted space-time norms.
//!
//! A norm is a weighted `ℓ¹` sum over dyadic shells of `‖P_M u‖` in either
//! `L^∞_t L²_x` (the X family) or `L²_t L^∞_x` (the S family). Spatial `L²`
//! uses Parseval with the box measure, spatial `L^∞` the grid maximum, time
//! `L^∞` the sample maximum, time `L²` the trapezoid rule.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{window_len, FieldTrace};
use crate::error::{Error, Result};
use crate::spectral::{psi, shifted_abs, Grid, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lebesgue {
    /// `L^∞_t L²_x`
    X,
    /// `L²_t L^∞_x`
    S,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightSpec {
    /// `max(N/M, M/N)^D`
    Centered { n: u32, d: f64 },
    /// `max(1, M/N)^D`
    Cumulative { n: u32, d: f64 },
    /// `M^ρ max(1, M/N^γ)^D`
    Besov { n: u32, d: f64, rho: f64, gamma: f64 },
}

/// Weight assigned to shell `m`.
pub fn weight(spec: &WeightSpec, m: u32) -> f64 {
    let mf = m as f64;
    match *spec {
        WeightSpec::Centered { n, d } => {
            let nf = n as f64;
            (nf / mf).max(mf / nf).powf(d)
        }
        WeightSpec::Cumulative { n, d } => (mf / n as f64).max(1.0).powf(d),
        WeightSpec::Besov { n, d, rho, gamma } => {
            mf.powf(rho) * (mf / (n as f64).powf(gamma)).max(1.0).powf(d)
        }
    }
}

/// Exponents, weight powers and margins shared by all norms and estimates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterPoint {
    pub s: f64,
    pub nu: f64,
    pub sigma_prime: f64,
    pub gamma: f64,
    pub delta: f64,
    pub eta: f64,
    pub d: f64,
    pub d_prime: f64,
    pub d_dprime: f64,
    pub eps_loss: f64,
}

impl ParameterPoint {
    /// The nearly optimal point with the runtime margins used throughout.
    pub fn reference() -> Self {
        let mut p = ParameterPoint {
            s: 1.984,
            nu: 2.1001,
            sigma_prime: 1.13205,
            gamma: 0.88,
            delta: 1e-5,
            eta: 0.0,
            d: 10.0,
            d_prime: 25.0,
            d_dprime: 60.0,
            eps_loss: 1e-3,
        };
        p.eta = p.eta_midpoint();
        p
    }

    /// `σ = ν − 1 − δ`
    pub fn sigma(&self) -> f64 {
        self.nu - 1.0 - self.delta
    }

    /// `ρ = σ − 1 − δ`
    pub fn rho(&self) -> f64 {
        self.sigma() - 1.0 - self.delta
    }

    pub fn eta_window(&self) -> (f64, f64) {
        ((self.nu - self.sigma_prime).max(self.sigma() - 1.0), self.nu - 1.0)
    }

    pub fn eta_midpoint(&self) -> f64 {
        let (lo, hi) = self.eta_window();
        0.5 * (lo + hi)
    }

    /// Conditions every estimate relies on.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.nu > 2.0 && 2.0 > self.s && self.s > 1.0) {
            return fail("condition ν > 2 > s > 1 violated");
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return fail("condition γ ∈ (0, 1) violated");
        }
        if !(self.delta > 0.0) {
            return fail("condition δ > 0 violated");
        }
        if !(self.sigma_prime > self.sigma()) {
            return fail("condition σ′ > σ = ν − 1 − δ violated");
        }
        let (lo, hi) = self.eta_window();
        if !(self.eta > lo && self.eta < hi) {
            return fail("condition max(ν − σ′, σ − 1) < η < ν − 1 violated");
        }
        if !(self.d > self.eta) {
            return fail("condition D > η violated");
        }
        if !(self.d_prime > 2.0 * self.d) {
            return fail("condition D′ > 2D violated");
        }
        if !(self.d_dprime > 0.0) {
            return fail("condition D″ > 0 violated");
        }
        Ok(())
    }

    pub fn centered(&self, n: u32) -> WeightSpec {
        WeightSpec::Centered { n, d: self.d }
    }

    pub fn centered_prime(&self, n: u32) -> WeightSpec {
        WeightSpec::Centered { n, d: self.d_prime }
    }

    pub fn centered_eta(&self, n: u32) -> WeightSpec {
        WeightSpec::Centered { n, d: self.eta }
    }

    pub fn cumulative(&self, n: u32) -> WeightSpec {
        WeightSpec::Cumulative { n, d: self.d }
    }

    pub fn cumulative_prime(&self, n: u32) -> WeightSpec {
        WeightSpec::Cumulative { n, d: self.d_prime }
    }
}

/// Spatial norm of `⟨∇⟩^order P_M f` for every shell of the grid.
pub fn shell_spatial_norms(f: &SpectralField, order: f64, space: Lebesgue, oversample: bool) -> Vec<f64> {
    let grid = f.grid();
    let m_max = grid.nyquist();
    let xi = grid.xi_abs();
    let shells = grid.shells();
    match space {
        Lebesgue::X => {
            let mut acc = vec![0.0; shells.len()];
            for (c, &r) in f.coeffs().iter().zip(xi) {
                let a = c.norm_sqr();
                if a == 0.0 {
                    continue;
                }
                let w = (1.0 + r * r).powf(order);
                for (slot, &m) in acc.iter_mut().zip(&shells) {
                    let p = psi(m, m_max, r);
                    if p != 0.0 {
                        *slot += a * w * p * p;
                    }
                }
            }
            let vol = grid.volume();
            acc.into_iter().map(|v| (vol * v).sqrt()).collect()
        }
        Lebesgue::S => {
            let weighted = f.multiply_radial(|r| (1.0 + r * r).powf(order / 2.0));
            let pieces: Vec<SpectralField> = shells
                .iter()
                .map(|&m| weighted.multiply_radial(|r| psi(m, m_max, r)))
                .collect();
            if !f.is_real() {
                return pieces.iter().map(|p| p.linf_norm(oversample)).collect();
            }
            // Two real fields share one inverse transform as real and
            // imaginary parts.
            let mut out = vec![0.0; shells.len()];
            let live: Vec<usize> = (0..pieces.len()).filter(|&i| !pieces[i].is_zero()).collect();
            for pair in live.chunks(2) {
                if let [i] = pair {
                    out[*i] = pieces[*i].linf_norm(oversample);
                    continue;
                }
                let (i, j) = (pair[0], pair[1]);
                let packed: Vec<Complex64> = pieces[i]
                    .coeffs()
                    .iter()
                    .zip(pieces[j].coeffs())
                    .map(|(a, b)| a + Complex64::i() * b)
                    .collect();
                let packed = SpectralField::from_coeffs(grid, packed, false).expect("same grid");
                let values = if oversample { packed.refine().to_physical() } else { packed.to_physical() };
                out[i] = values.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
                out[j] = values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
            }
            out
        }
    }
}

/// Per-shell spatial norms at every time sample: `values[shell][j]`.
#[derive(Clone, Debug)]
pub struct ShellSeries {
    pub lebesgue: Lebesgue,
    pub dt: f64,
    pub shells: Vec<u32>,
    pub values: Vec<Vec<f64>>,
}

/// Which component of a trace a norm refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    Field,
    Derivative,
}

impl ShellSeries {
    pub fn empty(grid: &Grid, lebesgue: Lebesgue, dt: f64) -> Self {
        let shells = grid.shells();
        ShellSeries {
            lebesgue,
            dt,
            values: vec![Vec::new(); shells.len()],
            shells,
        }
    }

    pub fn from_trace(
        trace: &FieldTrace,
        component: Component,
        order: f64,
        lebesgue: Lebesgue,
        oversample: bool,
    ) -> Result<Self> {
        let samples = match component {
            Component::Field => &trace.u[..],
            Component::Derivative => trace.derivative()?,
        };
        let mut out = ShellSeries::empty(trace.grid(), lebesgue, trace.dt);
        for f in samples {
            out.push(&shell_spatial_norms(f, order, lebesgue, oversample));
        }
        Ok(out)
    }

    pub fn push(&mut self, per_shell: &[f64]) {
        for (v, &x) in self.values.iter_mut().zip(per_shell) {
            v.push(x);
        }
    }

    pub fn len(&self) -> usize {
        self.values.first().map_or(0, |v| v.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn reduce(&self, shell: usize, count: usize) -> f64 {
        let h = &self.values[shell][..count];
        match self.lebesgue {
            Lebesgue::X => h.iter().copied().fold(0.0, f64::max),
            Lebesgue::S => {
                if count < 2 {
                    return 0.0;
                }
                let mut s = 0.5 * (h[0] * h[0] + h[count - 1] * h[count - 1]);
                for x in &h[1..count - 1] {
                    s += x * x;
                }
                (self.dt * s).sqrt()
            }
        }
    }

    /// Shell norms over the window `[0, τ]`.
    pub fn profile(&self, window_end: f64) -> Result<DyadicProfile> {
        let count = window_len(self.dt, self.len(), window_end)?;
        Ok(DyadicProfile {
            lebesgue: self.lebesgue,
            window_end,
            shells: self.shells.clone(),
            values: (0..self.shells.len()).map(|i| self.reduce(i, count)).collect(),
        })
    }

    /// Weighted norm over `[0, t_j]` for every sample `j`.
    pub fn curve(&self, spec: &WeightSpec) -> Vec<f64> {
        let w: Vec<f64> = self.shells.iter().map(|&m| weight(spec, m)).collect();
        let len = self.len();
        let mut out = Vec::with_capacity(len);
        let mut run = vec![0.0f64; self.shells.len()];
        for j in 0..len {
            let mut total = 0.0;
            for (i, h) in self.values.iter().enumerate() {
                let x = h[j];
                let v = match self.lebesgue {
                    Lebesgue::X => {
                        run[i] = run[i].max(x);
                        run[i]
                    }
                    Lebesgue::S => {
                        if j > 0 {
                            let prev = h[j - 1];
                            run[i] += 0.5 * self.dt * (prev * prev + x * x);
                        }
                        run[i].sqrt()
                    }
                };
                total += w[i] * v;
            }
            out.push(total);
        }
        out
    }
}

/// Shell norms `‖P_M u‖` over a fixed window.
#[derive(Clone, Debug, Serialize)]
pub struct DyadicProfile {
    pub lebesgue: Lebesgue,
    pub window_end: f64,
    pub shells: Vec<u32>,
    pub values: Vec<f64>,
}

/// Profile of `⟨∇⟩^order` applied to one component of a trace.
pub fn dyadic_profile(
    trace: &FieldTrace,
    component: Component,
    order: f64,
    lebesgue: Lebesgue,
    window_end: f64,
    oversample: bool,
) -> Result<DyadicProfile> {
    trace.window_len(window_end)?;
    ShellSeries::from_trace(trace, component, order, lebesgue, oversample)?.profile(window_end)
}

/// `Σ_M w(M) ‖P_M u‖`.
pub fn weighted_norm(profile: &DyadicProfile, spec: &WeightSpec) -> f64 {
    profile
        .shells
        .iter()
        .zip(&profile.values)
        .map(|(&m, &v)| if v == 0.0 { 0.0 } else { weight(spec, m) * v })
        .sum()
}

/// The three shell series entering `Y_N`.
#[derive(Clone, Debug)]
pub struct YSeries {
    pub field_x: ShellSeries,
    pub deriv_x: ShellSeries,
    pub field_s: ShellSeries,
}

impl YSeries {
    pub fn from_trace(trace: &FieldTrace, params: &ParameterPoint, oversample: bool) -> Result<Self> {
        Ok(YSeries {
            field_x: ShellSeries::from_trace(trace, Component::Field, params.nu, Lebesgue::X, oversample)?,
            deriv_x: ShellSeries::from_trace(trace, Component::Derivative, params.nu - 1.0, Lebesgue::X, oversample)?,
            field_s: ShellSeries::from_trace(trace, Component::Field, params.sigma(), Lebesgue::S, oversample)?,
        })
    }

    /// `‖u‖_{Y_N([0, t_j])}` for every sample.
    pub fn curve(&self, params: &ParameterPoint, n: u32) -> Vec<f64> {
        let both = |s: &ShellSeries| {
            let a = s.curve(&params.centered_eta(n));
            let b = s.curve(&params.cumulative(n));
            a.into_iter().zip(b).map(|(x, y)| x.max(y)).collect::<Vec<_>>()
        };
        let a = both(&self.field_x);
        let b = both(&self.deriv_x);
        let c = both(&self.field_s);
        a.iter().zip(&b).zip(&c).map(|((x, y), z)| x + y + z).collect()
    }
}

/// `‖u‖_{Y_N([0, τ])}`: the intersection norms are realized as maxima.
pub fn y_norm(trace: &FieldTrace, params: &ParameterPoint, n: u32, window_end: f64, oversample: bool) -> Result<f64> {
    let count = trace.window_len(window_end)?;
    let series = YSeries::from_trace(trace, params, oversample)?;
    Ok(series.curve(params, n)[count - 1])
}

/// Dyadic shell `N` with `N/2 ≤ ‖k‖₂ < N` (and `1` for `k = 0`).
pub fn cube_scale(k: [i64; 3]) -> u32 {
    let r2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    let mut n = 1u32;
    while (n as i64) * (n as i64) <= r2 {
        n *= 2;
    }
    n
}

/// `‖f‖_{B_k} = Σ_M c^{ρ,γ}_{k,D″}(M) ‖P_{M;k} f‖_{L²}`.
pub fn bk_norm(f: &SpectralField, k: [i64; 3], params: &ParameterPoint) -> Result<f64> {
    let grid = f.grid();
    let n = cube_scale(k);
    let spec = WeightSpec::Besov {
        n,
        d: params.d_dprime,
        rho: params.rho(),
        gamma: params.gamma,
    };
    let dist = shifted_abs(grid, k);
    let m_max = grid.nyquist();
    let vol = grid.volume();
    let mut total = 0.0;
    for m in grid.shells() {
        let s: f64 = f
            .coeffs()
            .iter()
            .zip(&dist)
            .map(|(c, &r)| {
                let p = psi(m, m_max, r);
                c.norm_sqr() * p * p
            })
            .sum();
        if s > 0.0 {
            total += weight(&spec, m) * (vol * s).sqrt();
        }
    }
    Ok(total)
}

/// Rows `(quantity, M, value, window_end)` of a profile for CSV export.
pub fn profile_rows(quantity: &str, profile: &DyadicProfile) -> Vec<(String, u32, f64, f64)> {
    profile
        .shells
        .iter()
        .zip(&profile.values)
        .map(|(&m, &v)| (quantity.to_string(), m, v, profile.window_end))
        .collect()
}
