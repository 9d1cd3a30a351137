use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Ratio between the grid Nyquist frequency and the largest dyadic shell,
/// chosen so that quadratic products of admissible shells stay resolvable.
pub const DEALIAS_FACTOR: f64 = 1.5;

/// Periodic box `[0, 2πR)^d` sampled on `n^d` points.
///
/// Lattice frequencies are `ξ = m / R` with integer `m` in FFT order.
/// Cloning is cheap; FFT plans and wavenumber tables are shared.
#[derive(Clone)]
pub struct Grid(Arc<GridData>);

struct GridData {
    dim: usize,
    box_scale: f64,
    resolution: usize,
    nyquist: u32,
    len: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    xi_abs: Vec<f64>,
    fine: OnceLock<Grid>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.0.dim)
            .field("box_scale", &self.0.box_scale)
            .field("resolution", &self.0.resolution)
            .field("nyquist", &self.0.nyquist)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.dim == other.0.dim
                && self.0.resolution == other.0.resolution
                && self.0.box_scale == other.0.box_scale)
    }
}

/// Build a grid. `resolution` must be a power of two and at least 8.
pub fn make_grid(dim: usize, box_scale: f64, resolution: usize) -> Result<Grid> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidGrid(format!("dim must be 1, 2 or 3, got {dim}")));
    }
    if !resolution.is_power_of_two() || resolution < 8 {
        return Err(Error::InvalidGrid(format!(
            "resolution must be a power of two >= 8, got {resolution}"
        )));
    }
    if !(box_scale.is_finite() && box_scale >= 1.0) {
        return Err(Error::InvalidGrid(format!("box scale must be >= 1, got {box_scale}")));
    }
    let limit = resolution as f64 / (2.0 * box_scale * DEALIAS_FACTOR);
    if limit < 1.0 {
        return Err(Error::InvalidGrid(format!(
            "resolution {resolution} too coarse for box scale {box_scale}"
        )));
    }
    let mut nyquist = 1u32;
    while (2 * nyquist) as f64 <= limit {
        nyquist *= 2;
    }
    let len = resolution.pow(dim as u32);
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(resolution);
    let inv = planner.plan_fft_inverse(resolution);

    let mut xi_abs = Vec::with_capacity(len);
    for flat in 0..len {
        let m = lattice_of(flat, dim, resolution);
        let r2: f64 = m[..dim].iter().map(|&v| (v as f64) * (v as f64)).sum();
        xi_abs.push(r2.sqrt() / box_scale);
    }

    Ok(Grid(Arc::new(GridData {
        dim,
        box_scale,
        resolution,
        nyquist,
        len,
        fwd,
        inv,
        xi_abs,
        fine: OnceLock::new(),
    })))
}

fn signed(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

fn lattice_of(flat: usize, dim: usize, n: usize) -> [i64; 3] {
    let mut m = [0i64; 3];
    let mut rest = flat;
    for a in (0..dim).rev() {
        m[a] = signed(rest % n, n);
        rest /= n;
    }
    m
}

#[derive(Clone, Copy)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

impl Grid {
    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn box_scale(&self) -> f64 {
        self.0.box_scale
    }

    pub fn resolution(&self) -> usize {
        self.0.resolution
    }

    /// Largest admissible dyadic shell `M_max`.
    pub fn nyquist(&self) -> u32 {
        self.0.nyquist
    }

    /// Number of lattice points `n^d`.
    pub fn len(&self) -> usize {
        self.0.len
    }

    pub fn is_empty(&self) -> bool {
        self.0.len == 0
    }

    /// Box measure `(2πR)^d`.
    pub fn volume(&self) -> f64 {
        (2.0 * std::f64::consts::PI * self.0.box_scale).powi(self.0.dim as i32)
    }

    /// Dyadic shells `1, 2, 4, ..., M_max`.
    pub fn shells(&self) -> Vec<u32> {
        let mut out = Vec::new();
        let mut m = 1u32;
        while m <= self.0.nyquist {
            out.push(m);
            m *= 2;
        }
        out
    }

    /// Integer lattice vector `m` of a flat index (unused axes are zero).
    pub fn lattice(&self, flat: usize) -> [i64; 3] {
        lattice_of(flat, self.0.dim, self.0.resolution)
    }

    /// Frequency vector `ξ = m / R`.
    pub fn xi(&self, flat: usize) -> [f64; 3] {
        let m = self.lattice(flat);
        let r = self.0.box_scale;
        [m[0] as f64 / r, m[1] as f64 / r, m[2] as f64 / r]
    }

    /// `|ξ|` for every lattice point in storage order.
    pub fn xi_abs(&self) -> &[f64] {
        &self.0.xi_abs
    }

    /// Flat index of a lattice vector, if it is representable.
    pub fn index_of(&self, m: [i64; 3]) -> Option<usize> {
        let n = self.0.resolution as i64;
        let mut flat = 0usize;
        for (a, &v) in m.iter().enumerate() {
            if a >= self.0.dim {
                if v != 0 {
                    return None;
                }
                continue;
            }
            if v < -n / 2 || v >= n / 2 {
                return None;
            }
            flat = flat * self.0.resolution + v.rem_euclid(n) as usize;
        }
        Some(flat)
    }

    /// Flat index of `-m`.
    pub fn conjugate_index(&self, flat: usize) -> usize {
        let n = self.0.resolution;
        let mut rest = flat;
        let mut out = 0usize;
        let mut mult = 1usize;
        for _ in 0..self.0.dim {
            let i = rest % n;
            rest /= n;
            out += ((n - i) % n) * mult;
            mult *= n;
        }
        out
    }

    /// Per-axis two-thirds rule: keep `|m_j| <= n/3`.
    pub fn dealias_keep(&self, flat: usize) -> bool {
        let cut = (self.0.resolution / 3) as i64;
        let m = self.lattice(flat);
        m[..self.0.dim].iter().all(|v| v.abs() <= cut)
    }

    /// Twice-finer grid on the same box, used for oversampled sup norms.
    pub fn refined(&self) -> Grid {
        self.0
            .fine
            .get_or_init(|| {
                make_grid(self.0.dim, self.0.box_scale, 2 * self.0.resolution)
                    .expect("refining a valid grid cannot fail")
            })
            .clone()
    }

    /// Unnormalized multidimensional FFT in place.
    pub(crate) fn fft(&self, data: &mut [Complex64], dir: Direction) {
        assert_eq!(data.len(), self.0.len);
        let n = self.0.resolution;
        let plan = match dir {
            Direction::Forward => &self.0.fwd,
            Direction::Inverse => &self.0.inv,
        };
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        // Strided axes are gathered TILE lines at a time so that each read of
        // the source touches contiguous memory.
        const TILE: usize = 32;
        let mut lines: Vec<Complex64> = vec![Complex64::default(); TILE * n];
        for axis in 0..self.0.dim {
            let stride = n.pow((self.0.dim - 1 - axis) as u32);
            if stride == 1 {
                plan.process_with_scratch(data, &mut scratch);
                continue;
            }
            let block = n * stride;
            for chunk in data.chunks_mut(block) {
                let mut start = 0;
                while start < stride {
                    let width = TILE.min(stride - start);
                    let buf = &mut lines[..width * n];
                    for k in 0..n {
                        let src = &chunk[k * stride + start..k * stride + start + width];
                        for (b, v) in src.iter().enumerate() {
                            buf[b * n + k] = *v;
                        }
                    }
                    plan.process_with_scratch(buf, &mut scratch);
                    for k in 0..n {
                        let dst = &mut chunk[k * stride + start..k * stride + start + width];
                        for (b, v) in dst.iter_mut().enumerate() {
                            *v = buf[b * n + k];
                        }
                    }
                    start += width;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nyquist_shell_matches_dealias_budget() {
        assert_eq!(make_grid(3, 1.0, 32).unwrap().nyquist(), 8);
        assert_eq!(make_grid(3, 1.0, 64).unwrap().nyquist(), 16);
        assert_eq!(make_grid(1, 1.0, 4096).unwrap().nyquist(), 1024);
        assert_eq!(make_grid(3, 2.0, 64).unwrap().nyquist(), 8);
    }

    #[test]
    fn rejects_bad_resolution() {
        assert!(matches!(make_grid(3, 1.0, 48), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(3, 1.0, 4), Err(Error::InvalidGrid(_))));
        assert!(make_grid(3, 0.5, 32).is_err());
        assert!(make_grid(4, 1.0, 32).is_err());
    }

    #[test]
    fn index_roundtrip() {
        let g = make_grid(3, 1.0, 8).unwrap();
        for flat in 0..g.len() {
            let m = g.lattice(flat);
            assert_eq!(g.index_of(m), Some(flat));
            let c = g.conjugate_index(flat);
            let mc = g.lattice(c);
            for a in 0..3 {
                assert_eq!((m[a] + mc[a]).rem_euclid(8), 0);
            }
        }
    }

    #[test]
    fn fft_roundtrip_is_identity_up_to_scale() {
        let g = make_grid(3, 1.0, 8).unwrap();
        let orig: Vec<Complex64> = (0..g.len())
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let mut data = orig.clone();
        g.fft(&mut data, Direction::Forward);
        g.fft(&mut data, Direction::Inverse);
        let scale = g.len() as f64;
        for (a, b) in data.iter().zip(&orig) {
            assert!((a / scale - b).norm() < 1e-12);
        }
    }
}
