use super::field::SpectralField;
use super::grid::Grid;
use super::shells::smoothstep;
use crate::error::{Error, Result};

/// Tensor-product partition of unity on unit frequency cubes.
///
/// One axis profile `χ` is flat on `|x| ≤ 1 − w/2` and vanishes for
/// `|x| ≥ w/2`, so translates by integers overlap only with neighbours and
/// sum to one. `w = 1` is the sharp indicator, with half-integers assigned
/// to the cube farther from the origin so the partition stays even.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartitionSpec {
    pub support_width: f64,
}

impl Default for PartitionSpec {
    fn default() -> Self {
        PartitionSpec { support_width: 2.0 }
    }
}

impl PartitionSpec {
    pub fn sharp() -> Self {
        PartitionSpec { support_width: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1.0..=2.0).contains(&self.support_width) {
            return Err(Error::InvalidArgument(format!(
                "partition support width must lie in [1, 2], got {}",
                self.support_width
            )));
        }
        Ok(())
    }

    fn reach(&self) -> f64 {
        self.support_width / 2.0
    }

    /// One-dimensional profile of cube `k` at frequency `xi`.
    pub fn axis_weight(&self, xi: f64, k: i64) -> f64 {
        let w = self.support_width;
        if w <= 1.0 {
            // f64::round sends half-integers away from zero.
            return if xi.round() as i64 == k { 1.0 } else { 0.0 };
        }
        let flat = 1.0 - w / 2.0;
        let edge = w / 2.0;
        let a = (xi - k as f64).abs();
        if a <= flat {
            1.0
        } else if a >= edge {
            0.0
        } else {
            1.0 - smoothstep((a - flat) / (edge - flat))
        }
    }

    /// Cube indices per axis whose profile can be nonzero at `ξ_a`.
    pub(crate) fn axis_candidates(&self, xi: f64) -> (i64, i64) {
        let r = self.reach();
        ((xi - r).floor() as i64, (xi + r).ceil() as i64)
    }

    /// `φ(ξ − k)` for one lattice point.
    pub fn weight(&self, grid: &Grid, flat: usize, k: [i64; 3]) -> f64 {
        let xi = grid.xi(flat);
        let mut w = 1.0;
        for a in 0..grid.dim() {
            w *= self.axis_weight(xi[a], k[a]);
            if w == 0.0 {
                break;
            }
        }
        w
    }

    /// Visit every cube `k` with `φ(ξ − k) ≠ 0` at one lattice point.
    pub(crate) fn for_each_cube<F: FnMut([i64; 3], f64)>(&self, grid: &Grid, flat: usize, mut f: F) {
        let xi = grid.xi(flat);
        let dim = grid.dim();
        let mut ranges = [(0i64, 0i64); 3];
        let mut per_axis: [[(i64, f64); 4]; 3] = [[(0, 0.0); 4]; 3];
        let mut counts = [1usize; 3];
        for a in 0..3 {
            if a >= dim {
                per_axis[a][0] = (0, 1.0);
                continue;
            }
            ranges[a] = self.axis_candidates(xi[a]);
            let mut c = 0;
            for k in ranges[a].0..=ranges[a].1 {
                let w = self.axis_weight(xi[a], k);
                if w != 0.0 && c < 4 {
                    per_axis[a][c] = (k, w);
                    c += 1;
                }
            }
            counts[a] = c;
        }
        for i in 0..counts[0] {
            for j in 0..counts[1] {
                for l in 0..counts[2] {
                    let (k0, w0) = per_axis[0][i];
                    let (k1, w1) = per_axis[1][j];
                    let (k2, w2) = per_axis[2][l];
                    f([k0, k1, k2], w0 * w1 * w2);
                }
            }
        }
    }
}

/// `P_k f = φ(D − k) f` for one unit cube `k`.
pub fn unit_cube_block(f: &SpectralField, k: [i64; 3], partition: &PartitionSpec) -> Result<SpectralField> {
    partition.validate()?;
    let grid = f.grid().clone();
    for &v in &k[grid.dim()..] {
        if v != 0 {
            return Err(Error::InvalidArgument(format!("cube {k:?} has components beyond dim")));
        }
    }
    let out = f.multiply(|i| partition.weight(&grid, i, k));
    let centered = k.iter().all(|&v| v == 0);
    Ok(out.with_real(f.is_real() && centered))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn axis_profiles_sum_to_one(x in -5.0f64..5.0, w in 1.0f64..=2.0) {
            let p = PartitionSpec { support_width: w };
            let s: f64 = (-8..=8).map(|k| p.axis_weight(x, k)).sum();
            prop_assert!((s - 1.0).abs() < 1e-14);
        }

        #[test]
        fn partition_is_even(x in -3.0f64..3.0, w in 1.0f64..=2.0) {
            let p = PartitionSpec { support_width: w };
            for k in -4i64..=4 {
                prop_assert!((p.axis_weight(x, k) - p.axis_weight(-x, -k)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn sharp_boundary_goes_outward() {
        let p = PartitionSpec::sharp();
        assert_eq!(p.axis_weight(0.5, 1), 1.0);
        assert_eq!(p.axis_weight(0.5, 0), 0.0);
        assert_eq!(p.axis_weight(-0.5, -1), 1.0);
        assert_eq!(p.axis_weight(-0.5, 0), 0.0);
        let s: f64 = (-3..=3).map(|k| p.axis_weight(1.5, k)).sum();
        assert_eq!(s, 1.0);
    }

    #[test]
    fn cube_blocks_reconstruct() {
        let g = make_grid(2, 2.0, 32).unwrap();
        let f = SpectralField::from_fn(&g, |x| (0.5 * x[0]).cos() + (1.5 * x[1] + 0.2).sin());
        let mut acc = SpectralField::zeros(&g, true);
        for k0 in -6..=6 {
            for k1 in -6..=6 {
                let b = unit_cube_block(&f, [k0, k1, 0], &PartitionSpec::default()).unwrap();
                acc.axpy(1.0, &b).unwrap();
            }
        }
        assert!(acc.max_abs_diff(&f) < 1e-14);
    }
}
