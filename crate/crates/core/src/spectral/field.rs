use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::grid::{Direction, Grid};
use crate::error::{Error, Result};

/// Fourier coefficients of a periodic field, stored in FFT order.
///
/// Physical values are `f(x) = Σ_m f̂_m e^{i ξ·x}` with `ξ = m / R`, so
/// `‖f‖²_{L²} = (2πR)^d Σ |f̂_m|²`. The `real` flag records conjugate
/// symmetry of the coefficients and lets products drop the imaginary part.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
    real: bool,
}

impl SpectralField {
    pub fn zeros(grid: &Grid, real: bool) -> Self {
        SpectralField {
            grid: grid.clone(),
            coeffs: vec![Complex64::default(); grid.len()],
            real,
        }
    }

    pub fn from_coeffs(grid: &Grid, coeffs: Vec<Complex64>, real: bool) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(SpectralField {
            grid: grid.clone(),
            coeffs,
            real,
        })
    }

    /// Transform physical samples to coefficients. With `real` set the
    /// imaginary part of the samples is discarded first.
    pub fn from_physical(grid: &Grid, mut values: Vec<Complex64>, real: bool) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if real {
            for v in values.iter_mut() {
                v.im = 0.0;
            }
        }
        grid.fft(&mut values, Direction::Forward);
        let scale = 1.0 / grid.len() as f64;
        for v in values.iter_mut() {
            *v *= scale;
        }
        Ok(SpectralField {
            grid: grid.clone(),
            coeffs: values,
            real,
        })
    }

    /// Build from a function of the physical point `x ∈ [0, 2πR)^d`.
    pub fn from_fn<F: Fn([f64; 3]) -> f64>(grid: &Grid, f: F) -> Self {
        let n = grid.resolution();
        let h = 2.0 * std::f64::consts::PI * grid.box_scale() / n as f64;
        let dim = grid.dim();
        let values: Vec<Complex64> = (0..grid.len())
            .map(|flat| {
                let mut x = [0.0; 3];
                let mut rest = flat;
                for a in (0..dim).rev() {
                    x[a] = (rest % n) as f64 * h;
                    rest /= n;
                }
                Complex64::new(f(x), 0.0)
            })
            .collect();
        Self::from_physical(grid, values, true).expect("length matches grid")
    }

    /// Exact coefficients of `a cos(ξ·x + φ)` for the lattice vector `m`
    /// (`ξ = m / R`).
    pub fn cosine_mode(grid: &Grid, m: [i64; 3], amplitude: f64, phase: f64) -> Result<Self> {
        let i = grid
            .index_of(m)
            .ok_or_else(|| Error::InvalidArgument(format!("mode {m:?} is not on the grid")))?;
        let j = grid.conjugate_index(i);
        let mut coeffs = vec![Complex64::default(); grid.len()];
        let z = Complex64::from_polar(0.5 * amplitude, phase);
        coeffs[i] += z;
        coeffs[j] += z.conj();
        Ok(SpectralField {
            grid: grid.clone(),
            coeffs,
            real: true,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn with_real(mut self, real: bool) -> Self {
        self.real = real;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// Physical samples on the grid.
    pub fn to_physical(&self) -> Vec<Complex64> {
        let mut values = self.coeffs.clone();
        self.grid.fft(&mut values, Direction::Inverse);
        if self.real {
            for v in values.iter_mut() {
                v.im = 0.0;
            }
        }
        values
    }

    /// Apply a real Fourier multiplier given as a function of `ξ`. The
    /// multiplier is not evaluated where the coefficient vanishes.
    pub fn multiply<F: Fn(usize) -> f64>(&self, m: F) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| if c.re == 0.0 && c.im == 0.0 { *c } else { c * m(i) })
            .collect();
        SpectralField {
            grid: self.grid.clone(),
            coeffs,
            real: self.real,
        }
    }

    /// Apply a radial multiplier `m(|ξ|)`.
    pub fn multiply_radial<F: Fn(f64) -> f64>(&self, m: F) -> Self {
        let xi = self.grid.xi_abs();
        self.multiply(|i| m(xi[i]))
    }

    pub fn scale(&self, a: f64) -> Self {
        self.multiply(|_| a)
    }

    /// Complex scalar multiple; clears the real flag unless `a` is real.
    pub fn scale_complex(&self, a: Complex64) -> Self {
        SpectralField {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
            real: self.real && a.im == 0.0,
        }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y * a;
        }
        self.real &= other.real;
        Ok(())
    }

    /// Zero every mode outside the two-thirds box.
    pub fn dealias(&self) -> Self {
        let g = &self.grid;
        self.multiply(|i| if g.dealias_keep(i) { 1.0 } else { 0.0 })
    }

    /// `‖f‖_{L²}` of the box, by Parseval.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        (self.grid.volume() * s).sqrt()
    }

    /// `‖⟨∇⟩^s f‖_{L²}`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let xi = self.grid.xi_abs();
        let sum: f64 = self
            .coeffs
            .iter()
            .zip(xi)
            .map(|(c, &r)| c.norm_sqr() * (1.0 + r * r).powf(s))
            .sum();
        (self.grid.volume() * sum).sqrt()
    }

    /// `‖ |∇|^s f ‖_{L²}` (homogeneous).
    pub fn homogeneous_norm(&self, s: f64) -> f64 {
        let xi = self.grid.xi_abs();
        let sum: f64 = self
            .coeffs
            .iter()
            .zip(xi)
            .filter(|(_, &r)| r > 0.0)
            .map(|(c, &r)| c.norm_sqr() * r.powf(2.0 * s))
            .sum();
        (self.grid.volume() * sum).sqrt()
    }

    /// Grid maximum of `|f|`; `oversample` evaluates on a twice finer grid.
    pub fn linf_norm(&self, oversample: bool) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let values = if oversample {
            self.refine().to_physical()
        } else {
            self.to_physical()
        };
        values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `(∫|f|^p)^{1/p}` with the grid quadrature.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let values = self.to_physical();
        let cell = self.grid.volume() / self.grid.len() as f64;
        let s: f64 = values.iter().map(|v| v.norm().powf(p)).sum();
        (cell * s).powf(1.0 / p)
    }

    /// Zero-padded copy on the refined grid (same physical field).
    pub fn refine(&self) -> SpectralField {
        let fine = self.grid.refined();
        let mut coeffs = vec![Complex64::default(); fine.len()];
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            let j = fine
                .index_of(self.grid.lattice(i))
                .expect("coarse lattice embeds in the refined grid");
            coeffs[j] = *c;
        }
        SpectralField {
            grid: fine,
            coeffs,
            real: self.real,
        }
    }

    /// Largest deviation from conjugate symmetry, relative to the largest
    /// coefficient.
    pub fn conjugate_defect(&self) -> f64 {
        let max = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for (i, c) in self.coeffs.iter().enumerate() {
            let j = self.grid.conjugate_index(i);
            worst = worst.max((c - self.coeffs[j].conj()).norm());
        }
        worst / max
    }

    /// Largest difference of coefficients against another field.
    pub fn max_abs_diff(&self, other: &SpectralField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        assert!(self.grid == rhs.grid, "grid mismatch");
        SpectralField {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
            real: self.real && rhs.real,
        }
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        assert!(self.grid == rhs.grid, "grid mismatch");
        SpectralField {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
            real: self.real && rhs.real,
        }
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        self.scale(rhs)
    }
}

/// `⟨∇⟩^order f`.
pub fn bessel_derivative(f: &SpectralField, order: f64) -> SpectralField {
    if order == 0.0 {
        return f.clone();
    }
    f.multiply_radial(|r| (1.0 + r * r).powf(order / 2.0))
}

/// Components `∂_j f`, one per spatial axis.
pub fn gradient(f: &SpectralField) -> Vec<SpectralField> {
    let g = f.grid();
    (0..g.dim())
        .map(|axis| {
            let coeffs = f
                .coeffs()
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let m = g.lattice(i);
                    // The unpaired Nyquist mode has no symmetric derivative.
                    if m[axis] == -(g.resolution() as i64) / 2 {
                        return Complex64::default();
                    }
                    c * Complex64::new(0.0, g.xi(i)[axis])
                })
                .collect();
            SpectralField {
                grid: g.clone(),
                coeffs,
                real: f.is_real(),
            }
        })
        .collect()
}

/// `Δf`.
pub fn laplacian(f: &SpectralField) -> SpectralField {
    f.multiply_radial(|r| -r * r)
}

/// Physical samples of `∇f`, one vector per axis.
pub fn gradient_physical(f: &SpectralField) -> Vec<Vec<Complex64>> {
    if f.is_zero() {
        return vec![vec![Complex64::default(); f.grid().len()]; f.grid().dim()];
    }
    gradient(f).iter().map(|c| c.to_physical()).collect()
}

/// Post-processing applied to every pseudospectral product.
///
/// `noise_floor` zeroes coefficients below that fraction of the coefficient
/// `ℓ²` norm. FFT round-off otherwise spreads to every mode, where the large
/// dyadic weights of the frequency-localized norms would amplify it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Products {
    pub dealias: bool,
    pub noise_floor: f64,
}

impl Default for Products {
    fn default() -> Self {
        Products {
            dealias: true,
            noise_floor: 1e-14,
        }
    }
}

impl Products {
    /// Transform physical product samples back and clean them up.
    pub fn finish(&self, grid: &Grid, values: Vec<Complex64>, real: bool) -> SpectralField {
        let mut f = SpectralField::from_physical(grid, values, real).expect("length matches grid");
        if self.dealias {
            f = f.dealias();
        }
        if self.noise_floor > 0.0 {
            f.chop(self.noise_floor);
        }
        f
    }
}

impl SpectralField {
    /// Zero coefficients with `|c| ≤ rel · ‖ĉ‖_{ℓ²}`.
    pub fn chop(&mut self, rel: f64) {
        let norm: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let cut = rel * norm;
        for c in self.coeffs.iter_mut() {
            if c.norm() <= cut {
                *c = Complex64::default();
            }
        }
    }
}

/// Pointwise `Σ_j a_j b_j` of physical vector fields, transformed back.
pub fn dot_physical(grid: &Grid, a: &[Vec<Complex64>], b: &[Vec<Complex64>], real: bool, opts: Products) -> SpectralField {
    let mut acc = vec![Complex64::default(); grid.len()];
    for (aj, bj) in a.iter().zip(b) {
        for ((o, x), y) in acc.iter_mut().zip(aj).zip(bj) {
            *o += x * y;
        }
    }
    opts.finish(grid, acc, real)
}

/// Bilinear form `∇a · ∇b` (no conjugation).
pub fn grad_dot(a: &SpectralField, b: &SpectralField, opts: Products) -> Result<SpectralField> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    let real = a.is_real() && b.is_real();
    if a.is_zero() || b.is_zero() {
        return Ok(SpectralField::zeros(a.grid(), real));
    }
    let ga = gradient_physical(a);
    let gb = if std::ptr::eq(a, b) {
        ga.clone()
    } else {
        gradient_physical(b)
    };
    Ok(dot_physical(a.grid(), &ga, &gb, real, opts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn parseval_uses_box_measure() {
        let g = make_grid(1, 1.0, 16).unwrap();
        let f = SpectralField::from_fn(&g, |x| x[0].cos());
        // ∫_0^{2π} cos² = π
        assert!((f.l2_norm().powi(2) - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn gradient_of_plane_wave() {
        let g = make_grid(2, 1.0, 16).unwrap();
        let f = SpectralField::from_fn(&g, |x| (2.0 * x[0] + 3.0 * x[1]).sin());
        let grad = gradient(&f);
        let want_x = SpectralField::from_fn(&g, |x| 2.0 * (2.0 * x[0] + 3.0 * x[1]).cos());
        let want_y = SpectralField::from_fn(&g, |x| 3.0 * (2.0 * x[0] + 3.0 * x[1]).cos());
        assert!(grad[0].max_abs_diff(&want_x) < 1e-12);
        assert!(grad[1].max_abs_diff(&want_y) < 1e-12);
    }

    #[test]
    fn product_of_resolved_modes_is_exact() {
        let g = make_grid(1, 1.0, 32).unwrap();
        let a = SpectralField::from_fn(&g, |x| (3.0 * x[0]).sin());
        let b = SpectralField::from_fn(&g, |x| (4.0 * x[0]).cos());
        let p = grad_dot(&a, &b, Products::default()).unwrap();
        // 3cos(3x) · (-4 sin(4x)) = -6 (sin 7x + sin x)
        let want = SpectralField::from_fn(&g, |x| -6.0 * ((7.0 * x[0]).sin() + x[0].sin()));
        assert!(p.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn noise_floor_clears_roundoff_only() {
        let g = make_grid(3, 1.0, 16).unwrap();
        let a = SpectralField::cosine_mode(&g, [1, 2, 0], 1.0, 0.3).unwrap();
        let b = SpectralField::cosine_mode(&g, [0, 1, 1], 1.0, 0.0).unwrap();
        let raw = grad_dot(&a, &b, Products { dealias: true, noise_floor: 0.0 }).unwrap();
        let clean = grad_dot(&a, &b, Products::default()).unwrap();
        let nz = |f: &SpectralField| f.coeffs().iter().filter(|c| c.norm() > 0.0).count();
        assert!(nz(&raw) > 4);
        assert_eq!(nz(&clean), 4);
        assert!(raw.max_abs_diff(&clean) < 1e-15);
    }

    #[test]
    fn oversampled_sup_norm_is_at_least_grid_max() {
        let g = make_grid(1, 1.0, 16).unwrap();
        let f = SpectralField::from_fn(&g, |x| (5.0 * x[0] + 0.3).sin());
        assert!(f.linf_norm(true) >= f.linf_norm(false) - 1e-14);
        assert!(f.linf_norm(true) <= 1.0 + 1e-12);
    }

    #[test]
    fn bessel_derivative_composes() {
        let g = make_grid(3, 1.0, 8).unwrap();
        let f = SpectralField::from_fn(&g, |x| (x[0] + 2.0 * x[2]).cos());
        let a = bessel_derivative(&bessel_derivative(&f, 0.7), 0.6);
        let b = bessel_derivative(&f, 1.3);
        assert!(a.max_abs_diff(&b) < 1e-13);
    }
}
