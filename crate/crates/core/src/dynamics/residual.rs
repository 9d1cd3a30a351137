use num_complex::Complex64;

use super::propagator::half_wave_propagate;
use super::trace::FieldTrace;
use crate::error::{Error, Result};
use crate::spectral::SpectralField;

/// Duhamel term evaluated as a direct, non-recursive trapezoid sum
/// `Δt Σ″_i sin((t_j − t_i)|∇|)/|∇| G_i`, with exact multipliers at each lag.
///
/// This shares no state with the stepping scheme and serves as its oracle.
pub fn duhamel_direct(forcing: &[SpectralField], dt: f64) -> Result<FieldTrace> {
    if forcing.is_empty() {
        return Err(Error::InvalidArgument("no forcing samples".into()));
    }
    let grid = forcing[0].grid().clone();
    let xi = grid.xi_abs();
    let len = forcing.len();
    let n = grid.len();
    let real = forcing.iter().all(|g| g.is_real());
    let mut sinc_lag = Vec::with_capacity(len);
    let mut cos_lag = Vec::with_capacity(len);
    for l in 0..len {
        let tau = l as f64 * dt;
        let mut s = Vec::with_capacity(n);
        let mut c = Vec::with_capacity(n);
        for &w in xi {
            let (sn, cs) = (tau * w).sin_cos();
            s.push(if w == 0.0 { tau } else { sn / w });
            c.push(cs);
        }
        sinc_lag.push(s);
        cos_lag.push(c);
    }
    let mut us = Vec::with_capacity(len);
    let mut vs = Vec::with_capacity(len);
    for j in 0..len {
        let mut u = vec![Complex64::default(); n];
        let mut v = vec![Complex64::default(); n];
        if j > 0 {
            for (i, g) in forcing.iter().enumerate().take(j + 1) {
                let wgt = if i == 0 || i == j { 0.5 * dt } else { dt };
                let (s, c) = (&sinc_lag[j - i], &cos_lag[j - i]);
                for (m, gc) in g.coeffs().iter().enumerate() {
                    if gc.re == 0.0 && gc.im == 0.0 {
                        continue;
                    }
                    let x = gc * wgt;
                    u[m] += x * s[m];
                    v[m] += x * c[m];
                }
            }
        }
        us.push(SpectralField::from_coeffs(&grid, u, real)?);
        vs.push(SpectralField::from_coeffs(&grid, v, real)?);
    }
    FieldTrace::new(dt, us, Some(vs))
}

/// Integral-form residual `u − W(t)(f₀, f₁) − Duhamel(G)` measured in
/// `C⁰_t H^s` over samples with `t ≤ window_end`. `forcing` must be
/// recomputed from the stored trace by the caller.
pub fn integral_residual(
    trace: &FieldTrace,
    f0: &SpectralField,
    f1: &SpectralField,
    forcing: &[SpectralField],
    s: f64,
    window_end: f64,
) -> Result<f64> {
    if forcing.len() != trace.len() {
        return Err(Error::InvalidArgument("forcing and trace lengths differ".into()));
    }
    let count = trace.window_len(window_end)?;
    let d = duhamel_direct(&forcing[..count], trace.dt)?;
    let mut worst: f64 = 0.0;
    for j in 0..count {
        let (free, _) = half_wave_propagate(f0, f1, trace.time(j))?;
        let mut r = &trace.u[j] - &free;
        r.axpy(-1.0, &d.u[j])?;
        worst = worst.max(r.sobolev_norm(s));
    }
    Ok(worst)
}

/// Same residual for the time derivative, in `C⁰_t H^{s−1}`.
pub fn integral_residual_derivative(
    trace: &FieldTrace,
    f0: &SpectralField,
    f1: &SpectralField,
    forcing: &[SpectralField],
    s: f64,
) -> Result<f64> {
    let ut = trace.derivative()?;
    let d = duhamel_direct(forcing, trace.dt)?;
    let dv = d.derivative()?;
    let mut worst: f64 = 0.0;
    for j in 0..trace.len() {
        let (_, free) = half_wave_propagate(f0, f1, trace.time(j))?;
        let mut r = &ut[j] - &free;
        r.axpy(-1.0, &dv[j])?;
        worst = worst.max(r.sobolev_norm(s - 1.0));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::duhamel;
    use crate::spectral::make_grid;

    #[test]
    fn direct_sum_matches_recursion() {
        let g = make_grid(2, 1.0, 16).unwrap();
        let forcing: Vec<SpectralField> = (0..9)
            .map(|j| {
                let t = j as f64 * 0.05;
                SpectralField::from_fn(&g, |x| (x[0] + 3.0 * t).sin() * (2.0 * x[1]).cos() + t)
            })
            .collect();
        let a = duhamel(&forcing, 0.05).unwrap();
        let b = duhamel_direct(&forcing, 0.05).unwrap();
        for j in 0..9 {
            assert!(a.u[j].max_abs_diff(&b.u[j]) < 1e-15);
            assert!(a.derivative().unwrap()[j].max_abs_diff(&b.derivative().unwrap()[j]) < 1e-14);
        }
    }
}
