//! Wiener randomization over unit frequency cubes.
//!
//! Each cube `k` gets a coefficient `g_k` drawn from a counter-based stream
//! keyed on `(seed, k)`, so the value of a cube never depends on which other
//! cubes were requested. Complex Gaussians have independent `N(0, ½)` real and
//! imaginary parts. Under real conditioning the draw on the lexicographically
//! positive half-space is mirrored, `g_{−k} = conj g_k`, and `g_0` is real
//! `N(0, 1)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub use crate::spectral::PartitionSpec;
use crate::error::{Error, Result};
use crate::spectral::SpectralField;

pub type CubeIndex = [i64; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Distribution {
    Gaussian,
    /// Uniform random signs; real under either conditioning.
    Signs,
}

#[derive(Clone, Debug)]
pub struct RandomDraw {
    pub seed: u64,
    pub dim: usize,
    pub max_cube_radius: f64,
    pub real_conditioning: bool,
    pub distribution: Distribution,
    coefficients: BTreeMap<CubeIndex, Complex64>,
}

impl RandomDraw {
    pub fn get(&self, k: CubeIndex) -> Option<Complex64> {
        self.coefficients.get(&k).copied()
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CubeIndex, &Complex64)> {
        self.coefficients.iter()
    }

    /// Replace every coefficient by one (the deterministic draw).
    pub fn constant_one(mut self) -> Self {
        for v in self.coefficients.values_mut() {
            *v = Complex64::new(1.0, 0.0);
        }
        self
    }
}

/// Lexicographic sign: the first nonzero component decides.
fn is_positive(k: CubeIndex) -> bool {
    for v in k {
        if v != 0 {
            return v > 0;
        }
    }
    false
}

fn stream_id(k: CubeIndex) -> u64 {
    // 21 bits per axis, offset to be non-negative.
    let enc = |v: i64| ((v + (1 << 20)) as u64) & 0x1f_ffff;
    (enc(k[0]) << 42) | (enc(k[1]) << 21) | enc(k[2])
}

fn cube_rng(seed: u64, k: CubeIndex) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(k));
    rng
}

fn sample(seed: u64, k: CubeIndex, dist: Distribution, real: bool) -> Complex64 {
    let mut rng = cube_rng(seed, k);
    match dist {
        Distribution::Gaussian => {
            let a: f64 = rng.sample(StandardNormal);
            if real {
                Complex64::new(a, 0.0)
            } else {
                let b: f64 = rng.sample(StandardNormal);
                Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
            }
        }
        Distribution::Signs => {
            let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
            Complex64::new(s, 0.0)
        }
    }
}

/// Coefficients for every cube with `‖k‖₂ ≤ max_cube_radius`.
pub fn draw_gaussians(
    dim: usize,
    seed: u64,
    max_cube_radius: f64,
    real_conditioning: bool,
    distribution: Distribution,
) -> Result<RandomDraw> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidArgument(format!("dim must be 1..=3, got {dim}")));
    }
    if !(max_cube_radius.is_finite() && max_cube_radius >= 0.0) {
        return Err(Error::InvalidArgument("cube radius must be finite and non-negative".into()));
    }
    let r = max_cube_radius.floor() as i64;
    let r2 = max_cube_radius * max_cube_radius;
    let mut coefficients = BTreeMap::new();
    let range = |a: usize| if a < dim { -r..=r } else { 0..=0 };
    for k0 in range(0) {
        for k1 in range(1) {
            for k2 in range(2) {
                let k = [k0, k1, k2];
                if ((k0 * k0 + k1 * k1 + k2 * k2) as f64) > r2 {
                    continue;
                }
                let g = if !real_conditioning {
                    sample(seed, k, distribution, false)
                } else if k == [0, 0, 0] {
                    sample(seed, k, distribution, true)
                } else if is_positive(k) {
                    sample(seed, k, distribution, false)
                } else {
                    sample(seed, [-k0, -k1, -k2], distribution, false).conj()
                };
                coefficients.insert(k, g);
            }
        }
    }
    Ok(RandomDraw {
        seed,
        dim,
        max_cube_radius,
        real_conditioning,
        distribution,
        coefficients,
    })
}

fn norm2(k: CubeIndex) -> i64 {
    k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
}

/// Cube membership of the annulus block `Q_N`: `k = 0` for `N = 1`, else
/// `N/2 ≤ ‖k‖₂ < N`, decided in integers.
pub fn in_annulus(k: CubeIndex, n: u32) -> bool {
    let n2 = (n as i64) * (n as i64);
    if n == 1 {
        return norm2(k) == 0;
    }
    4 * norm2(k) >= n2 && norm2(k) < n2
}

/// `Σ_k g_k φ(D − k) f` over the cubes accepted by `select`.
pub fn randomize_where<P: Fn(CubeIndex) -> bool>(
    f: &SpectralField,
    draw: &RandomDraw,
    partition: &PartitionSpec,
    select: P,
) -> Result<SpectralField> {
    partition.validate()?;
    let grid = f.grid();
    if grid.dim() != draw.dim {
        return Err(Error::InvalidArgument("draw dimension differs from grid".into()));
    }
    let mut out = vec![Complex64::default(); grid.len()];
    let mut missing = None;
    for (i, c) in f.coeffs().iter().enumerate() {
        if c.re == 0.0 && c.im == 0.0 {
            continue;
        }
        let mut acc = Complex64::default();
        partition.for_each_cube(grid, i, |k, w| {
            if !select(k) {
                return;
            }
            match draw.get(k) {
                Some(g) => acc += g * w,
                None => missing = Some(k),
            }
        });
        out[i] = acc * c;
    }
    if let Some(k) = missing {
        return Err(Error::MissingCube(k));
    }
    let real = f.is_real() && draw.real_conditioning;
    if real {
        // On a Nyquist plane the stored conjugate of `m` is an aliased point
        // whose multiplier comes from other cubes, so the pair is projected
        // onto its Hermitian part.
        let edge = -(grid.resolution() as i64) / 2;
        for i in 0..out.len() {
            let j = grid.conjugate_index(i);
            if j < i || !grid.lattice(i).contains(&edge) {
                continue;
            }
            let h = 0.5 * (out[i] + out[j].conj());
            out[i] = h;
            out[j] = h.conj();
        }
    }
    SpectralField::from_coeffs(grid, out, real)
}

/// `f^ω = Σ_k g_k P_k f`.
pub fn randomize(f: &SpectralField, draw: &RandomDraw, partition: &PartitionSpec) -> Result<SpectralField> {
    randomize_where(f, draw, partition, |_| true)
}

/// `Q_N f^ω`.
pub fn q_block(f: &SpectralField, n: u32, draw: &RandomDraw, partition: &PartitionSpec) -> Result<SpectralField> {
    if !n.is_power_of_two() {
        return Err(Error::NotDyadic(n));
    }
    randomize_where(f, draw, partition, |k| in_annulus(k, n))
}

/// `Q_{≤N} f^ω`, accumulated block by block so that
/// `Q_{≤N} + Q_{2N} = Q_{≤2N}` holds exactly.
pub fn q_cumulative(
    f: &SpectralField,
    n: u32,
    draw: &RandomDraw,
    partition: &PartitionSpec,
) -> Result<SpectralField> {
    if !n.is_power_of_two() {
        return Err(Error::NotDyadic(n));
    }
    let mut acc = q_block(f, 1, draw, partition)?;
    let mut m = 2;
    while m <= n {
        let b = q_block(f, m, draw, partition)?;
        acc = &acc + &b;
        m *= 2;
    }
    Ok(acc)
}

/// Cube radius needed to cover every lattice point of a grid.
pub fn covering_radius(grid: &crate::spectral::Grid) -> f64 {
    let half = grid.resolution() as f64 / (2.0 * grid.box_scale()) + 2.0;
    half * (grid.dim() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_grid, unit_cube_block};
    use proptest::prelude::*;

    #[test]
    fn draws_are_reproducible_and_local() {
        let a = draw_gaussians(3, 7, 3.0, false, Distribution::Gaussian).unwrap();
        let b = draw_gaussians(3, 7, 5.0, false, Distribution::Gaussian).unwrap();
        for (k, g) in a.iter() {
            assert_eq!(b.get(*k), Some(*g));
        }
        let c = draw_gaussians(3, 8, 3.0, false, Distribution::Gaussian).unwrap();
        assert_ne!(a.get([1, 0, 0]), c.get([1, 0, 0]));
    }

    #[test]
    fn real_conditioning_mirrors() {
        let d = draw_gaussians(3, 1, 4.0, true, Distribution::Gaussian).unwrap();
        assert_eq!(d.get([0, 0, 0]).unwrap().im, 0.0);
        for (k, g) in d.iter() {
            let m = d.get([-k[0], -k[1], -k[2]]).unwrap();
            assert_eq!(*g, m.conj());
        }
    }

    #[test]
    fn annulus_boundaries() {
        assert!(in_annulus([0, 0, 0], 1));
        assert!(!in_annulus([1, 0, 0], 1));
        assert!(in_annulus([1, 0, 0], 2));
        assert!(!in_annulus([2, 0, 0], 2));
        assert!(in_annulus([2, 0, 0], 4));
        assert!(in_annulus([3, 2, 0], 4));
        assert!(!in_annulus([4, 0, 0], 4));
    }

    proptest! {
        #[test]
        fn every_cube_in_exactly_one_block(k0 in -40i64..40, k1 in -40i64..40, k2 in -40i64..40) {
            let k = [k0, k1, k2];
            let hits = (0..8).filter(|&j| in_annulus(k, 1 << j)).count();
            prop_assert_eq!(hits, 1);
        }
    }

    #[test]
    fn cumulative_refines_exactly() {
        let g = make_grid(2, 1.0, 32).unwrap();
        let f = SpectralField::from_fn(&g, |x| (x[0]).cos() + (3.0 * x[1]).sin() + (5.0 * x[0] - 2.0 * x[1]).cos());
        let d = draw_gaussians(2, 3, covering_radius(&g), true, Distribution::Gaussian).unwrap();
        let p = PartitionSpec::default();
        let lo = q_cumulative(&f, 4, &d, &p).unwrap();
        let blk = q_block(&f, 8, &d, &p).unwrap();
        let hi = q_cumulative(&f, 8, &d, &p).unwrap();
        let sum = &lo + &blk;
        for (a, b) in sum.coeffs().iter().zip(hi.coeffs()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn randomize_matches_cube_sum() {
        let g = make_grid(2, 2.0, 16).unwrap();
        let f = SpectralField::from_fn(&g, |x| (0.5 * x[0] + x[1]).cos());
        let d = draw_gaussians(2, 11, covering_radius(&g), false, Distribution::Gaussian).unwrap();
        let p = PartitionSpec::default();
        let r = randomize(&f, &d, &p).unwrap();
        let mut acc = SpectralField::zeros(&g, false);
        for (k, gk) in d.iter() {
            let b = unit_cube_block(&f, *k, &p).unwrap().scale_complex(*gk);
            acc.axpy(1.0, &b).unwrap();
        }
        assert!(r.max_abs_diff(&acc) < 1e-14);
    }

    #[test]
    fn missing_cube_is_reported() {
        let g = make_grid(1, 1.0, 16).unwrap();
        let f = SpectralField::from_fn(&g, |x| (4.0 * x[0]).cos());
        let d = draw_gaussians(1, 0, 2.0, false, Distribution::Gaussian).unwrap();
        assert!(matches!(randomize(&f, &d, &PartitionSpec::default()), Err(Error::MissingCube(_))));
    }
}
