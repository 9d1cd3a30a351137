use num_complex::Complex64;

use super::trace::FieldTrace;
use crate::error::{Error, Result};
use crate::spectral::{Grid, SpectralField};

/// `(u, ∂_t u)` at time `t` for free data:
/// `û = cos(t|ξ|) f̂₀ + sin(t|ξ|)/|ξ| f̂₁`, with multiplier `t` at `ξ = 0`.
pub fn half_wave_propagate(f0: &SpectralField, f1: &SpectralField, t: f64) -> Result<(SpectralField, SpectralField)> {
    if f0.grid() != f1.grid() {
        return Err(Error::GridMismatch);
    }
    let xi = f0.grid().xi_abs();
    let n = xi.len();
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    let zero = Complex64::default();
    for i in 0..n {
        let a = f0.coeffs()[i];
        let b = f1.coeffs()[i];
        if a == zero && b == zero {
            u.push(zero);
            v.push(zero);
            continue;
        }
        let w = xi[i];
        let (s, c) = (t * w).sin_cos();
        let sinc = if w == 0.0 { t } else { s / w };
        u.push(a * c + b * sinc);
        v.push(-a * (w * s) + b * c);
    }
    let real = f0.is_real() && f1.is_real();
    Ok((
        SpectralField::from_coeffs(f0.grid(), u, real)?,
        SpectralField::from_coeffs(f0.grid(), v, real)?,
    ))
}

/// Free evolution sampled at `t_j = j·dt`, evaluated exactly at each sample.
pub fn free_trace(f0: &SpectralField, f1: &SpectralField, dt: f64, steps: usize) -> Result<FieldTrace> {
    let mut u = Vec::with_capacity(steps + 1);
    let mut ut = Vec::with_capacity(steps + 1);
    for j in 0..=steps {
        let (a, b) = half_wave_propagate(f0, f1, j as f64 * dt)?;
        u.push(a);
        ut.push(b);
    }
    FieldTrace::new(dt, u, Some(ut))
}

/// One-step multipliers of the exact free flow.
pub(crate) struct StepTables {
    cos: Vec<f64>,
    sinc: Vec<f64>,
    wsin: Vec<f64>,
}

impl StepTables {
    pub(crate) fn new(grid: &Grid, dt: f64) -> Self {
        let xi = grid.xi_abs();
        let mut cos = Vec::with_capacity(xi.len());
        let mut sinc = Vec::with_capacity(xi.len());
        let mut wsin = Vec::with_capacity(xi.len());
        for &w in xi {
            let (s, c) = (w * dt).sin_cos();
            cos.push(c);
            sinc.push(if w == 0.0 { dt } else { s / w });
            wsin.push(w * s);
        }
        StepTables { cos, sinc, wsin }
    }
}

/// Integrate `u_tt − Δu = G(j, u_j)` by variation of constants with the
/// trapezoid rule in the Duhamel integral.
///
/// Each step is
/// `u_{j+1} = c u_j + (s/ω)(v_j + ½Δt G_j)` and
/// `v_{j+1} = −ωs u_j + c(v_j + ½Δt G_j) + ½Δt G_{j+1}`,
/// which unrolls to the composite trapezoid sum of the Duhamel integral.
/// `u_{j+1}` never needs `G_{j+1}`, so the scheme is explicit. The forcing
/// samples are returned alongside the trace.
pub fn march<F>(
    f0: &SpectralField,
    f1: &SpectralField,
    dt: f64,
    steps: usize,
    mut forcing: F,
) -> Result<(FieldTrace, Vec<SpectralField>)>
where
    F: FnMut(usize, &SpectralField) -> Result<SpectralField>,
{
    if f0.grid() != f1.grid() {
        return Err(Error::GridMismatch);
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument("time step must be positive".into()));
    }
    let grid = f0.grid().clone();
    let tables = StepTables::new(&grid, dt);
    let half = 0.5 * dt;
    let mut us = Vec::with_capacity(steps + 1);
    let mut vs = Vec::with_capacity(steps + 1);
    let mut gs = Vec::with_capacity(steps + 1);
    us.push(f0.clone());
    vs.push(f1.clone());
    gs.push(forcing(0, f0)?);
    for j in 0..steps {
        let (u, v, g) = (&us[j], &vs[j], &gs[j]);
        let n = grid.len();
        let mut un = Vec::with_capacity(n);
        let mut vh = Vec::with_capacity(n);
        for i in 0..n {
            let h: Complex64 = v.coeffs()[i] + g.coeffs()[i] * half;
            let a = u.coeffs()[i];
            un.push(a * tables.cos[i] + h * tables.sinc[i]);
            vh.push(-a * tables.wsin[i] + h * tables.cos[i]);
        }
        let real = u.is_real() && v.is_real() && g.is_real();
        let un = SpectralField::from_coeffs(&grid, un, real)?;
        let gn = forcing(j + 1, &un)?;
        let mut vn = SpectralField::from_coeffs(&grid, vh, real)?;
        vn.axpy(half, &gn)?;
        us.push(un);
        vs.push(vn);
        gs.push(gn);
    }
    Ok((FieldTrace::new(dt, us, Some(vs))?, gs))
}

/// Discrete Duhamel term `∫_0^t sin((t−s)|∇|)/|∇| G(s) ds` of given samples.
pub fn duhamel(forcing: &[SpectralField], dt: f64) -> Result<FieldTrace> {
    if forcing.is_empty() {
        return Err(Error::InvalidArgument("no forcing samples".into()));
    }
    let grid = forcing[0].grid();
    let real = forcing.iter().all(|g| g.is_real());
    let z = SpectralField::zeros(grid, real);
    let (tr, _) = march(&z, &z, dt, forcing.len() - 1, |j, _| Ok(forcing[j].clone()))?;
    Ok(tr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn zero_frequency_grows_linearly() {
        let g = make_grid(1, 1.0, 8).unwrap();
        let f0 = SpectralField::zeros(&g, true);
        let f1 = SpectralField::from_fn(&g, |_| 1.0);
        let (u, v) = half_wave_propagate(&f0, &f1, 0.3).unwrap();
        assert!((u.coeffs()[0].re - 0.3).abs() < 1e-15);
        assert!((v.coeffs()[0].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn plane_wave_matches_closed_form() {
        let g = make_grid(1, 1.0, 16).unwrap();
        let f0 = SpectralField::from_fn(&g, |x| (3.0 * x[0]).cos());
        let f1 = SpectralField::zeros(&g, true);
        let t = 0.4;
        let (u, _) = half_wave_propagate(&f0, &f1, t).unwrap();
        let want = SpectralField::from_fn(&g, |x| (3.0 * t).cos() * (3.0 * x[0]).cos());
        assert!(u.max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn unforced_march_matches_exact_flow() {
        let g = make_grid(2, 1.0, 16).unwrap();
        let f0 = SpectralField::from_fn(&g, |x| (x[0] + 2.0 * x[1]).sin());
        let f1 = SpectralField::from_fn(&g, |x| (3.0 * x[0]).cos());
        let (tr, _) = march(&f0, &f1, 0.05, 10, |_, u| Ok(SpectralField::zeros(u.grid(), true))).unwrap();
        let exact = free_trace(&f0, &f1, 0.05, 10).unwrap();
        for (a, b) in tr.u.iter().zip(&exact.u) {
            assert!(a.max_abs_diff(b) < 1e-13);
        }
    }

    #[test]
    fn constant_forcing_at_zero_frequency() {
        // ü = 1 gives u = t²/2, exactly reproduced by the trapezoid rule.
        let g = make_grid(1, 1.0, 8).unwrap();
        let one = SpectralField::from_fn(&g, |_| 1.0);
        let tr = duhamel(&vec![one; 11], 0.1).unwrap();
        let u = tr.u[10].coeffs()[0].re;
        assert!((u - 0.5).abs() < 1e-14);
        assert!((tr.derivative().unwrap()[10].coeffs()[0].re - 1.0).abs() < 1e-14);
    }
}
