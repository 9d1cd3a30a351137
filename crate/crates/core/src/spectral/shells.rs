use super::field::SpectralField;
use super::grid::Grid;
use crate::error::{Error, Result};

/// Quintic smoothstep `6x⁵ − 15x⁴ + 10x³` clamped to `[0, 1]`.
pub fn smoothstep(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
    }
}

/// Radial bump: 1 on `[0, 1]`, 0 on `[2, ∞)`.
pub fn bump(r: f64) -> f64 {
    1.0 - smoothstep(r - 1.0)
}

/// Littlewood–Paley symbol `ψ_M(r)` on a grid whose top shell is `m_max`.
///
/// The top shell absorbs the tail so the shells sum to one everywhere.
/// A mode with `|ξ|` exactly a power of two `M` lies purely in shell `M`.
pub fn psi(m: u32, m_max: u32, r: f64) -> f64 {
    let mf = m as f64;
    if m == 1 {
        if m_max == 1 {
            return 1.0;
        }
        return bump(r);
    }
    if m >= m_max {
        return 1.0 - bump(2.0 * r / mf);
    }
    bump(r / mf) - bump(2.0 * r / mf)
}

/// Fattened symbol `ψ̃_M = ψ_{M/2} + ψ_M + ψ_{2M}`.
pub fn psi_fat(m: u32, m_max: u32, r: f64) -> f64 {
    let mut s = psi(m, m_max, r);
    if m >= 2 {
        s += psi(m / 2, m_max, r);
    }
    if m < m_max {
        s += psi(2 * m, m_max, r);
    }
    s
}

/// Symbol of `P_{≤M} = Σ_{L ≤ M} ψ_L`.
pub fn psi_low(m: u32, m_max: u32, r: f64) -> f64 {
    if m >= m_max {
        return 1.0;
    }
    bump(r / m as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ShellKind {
    Standard,
    Fattened,
    /// Shell around a lattice vector `k` (integer frequency units).
    Recentered([i64; 3]),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShellSpec {
    pub m: u32,
    pub kind: ShellKind,
}

impl ShellSpec {
    pub fn standard(m: u32) -> Self {
        ShellSpec { m, kind: ShellKind::Standard }
    }

    pub fn fattened(m: u32) -> Self {
        ShellSpec { m, kind: ShellKind::Fattened }
    }

    pub fn recentered(m: u32, k: [i64; 3]) -> Self {
        ShellSpec { m, kind: ShellKind::Recentered(k) }
    }
}

fn check_shell(grid: &Grid, m: u32) -> Result<()> {
    if !m.is_power_of_two() {
        return Err(Error::NotDyadic(m));
    }
    if m > grid.nyquist() {
        return Err(Error::ShellAboveNyquist { shell: m, nyquist: grid.nyquist() });
    }
    Ok(())
}

/// Frequency-space distance `|ξ − k|` for every lattice point.
pub(crate) fn shifted_abs(grid: &Grid, k: [i64; 3]) -> Vec<f64> {
    (0..grid.len())
        .map(|i| {
            let xi = grid.xi(i);
            let mut r2 = 0.0;
            for a in 0..grid.dim() {
                let d = xi[a] - k[a] as f64;
                r2 += d * d;
            }
            r2.sqrt()
        })
        .collect()
}

/// `P_M f`, its fattened variant, or the shell recentered at `k`.
pub fn project_shell(f: &SpectralField, spec: &ShellSpec) -> Result<SpectralField> {
    let grid = f.grid();
    check_shell(grid, spec.m)?;
    let m_max = grid.nyquist();
    match spec.kind {
        ShellKind::Standard => Ok(f.multiply_radial(|r| psi(spec.m, m_max, r))),
        ShellKind::Fattened => Ok(f.multiply_radial(|r| psi_fat(spec.m, m_max, r))),
        ShellKind::Recentered(k) => {
            let r = grid.box_scale();
            for &v in &k[..grid.dim()] {
                let scaled = v as f64 * r;
                if (scaled - scaled.round()).abs() > 1e-9 {
                    return Err(Error::CenterOffLattice(k));
                }
            }
            if grid.index_of(scale_center(k, r)).is_none() {
                return Err(Error::CenterOffLattice(k));
            }
            let dist = shifted_abs(grid, k);
            let out = f.multiply(|i| psi(spec.m, m_max, dist[i]));
            let centered = k.iter().all(|&v| v == 0);
            Ok(out.with_real(f.is_real() && centered))
        }
    }
}

fn scale_center(k: [i64; 3], r: f64) -> [i64; 3] {
    [
        (k[0] as f64 * r).round() as i64,
        (k[1] as f64 * r).round() as i64,
        (k[2] as f64 * r).round() as i64,
    ]
}

/// `P_{≤M} f`.
pub fn project_low(f: &SpectralField, m: u32) -> Result<SpectralField> {
    check_shell(f.grid(), m)?;
    let m_max = f.grid().nyquist();
    Ok(f.multiply_radial(|r| psi_low(m, m_max, r)))
}

/// `P_{>M} f = f − P_{≤M} f`.
pub fn project_high(f: &SpectralField, m: u32) -> Result<SpectralField> {
    check_shell(f.grid(), m)?;
    let m_max = f.grid().nyquist();
    Ok(f.multiply_radial(|r| 1.0 - psi_low(m, m_max, r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use proptest::prelude::*;

    #[test]
    fn bump_profile() {
        assert_eq!(bump(0.3), 1.0);
        assert_eq!(bump(1.0), 1.0);
        assert_eq!(bump(2.0), 0.0);
        assert!((bump(1.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dyadic_radius_is_pure() {
        for m in [2u32, 4, 8, 16] {
            assert_eq!(psi(m, 32, m as f64), 1.0);
            assert_eq!(psi(m / 2, 32, m as f64), 0.0);
            assert_eq!(psi(2 * m, 32, m as f64), 0.0);
        }
    }

    proptest! {
        #[test]
        fn shells_partition_unity(r in 0.0f64..200.0, log_max in 0u32..8) {
            let m_max = 1u32 << log_max;
            let mut s = 0.0;
            let mut m = 1;
            while m <= m_max {
                let v = psi(m, m_max, r);
                prop_assert!((-1e-15..=1.0 + 1e-15).contains(&v));
                s += v;
                m *= 2;
            }
            prop_assert!((s - 1.0).abs() < 1e-14);
        }

        #[test]
        fn fattened_dominates(r in 0.0f64..100.0, log_m in 0u32..6) {
            let m = 1u32 << log_m;
            prop_assert!(psi_fat(m, 64, r) >= psi(m, 64, r));
        }
    }

    #[test]
    fn projection_errors() {
        let g = make_grid(3, 1.0, 32).unwrap();
        let f = SpectralField::zeros(&g, true);
        assert!(matches!(
            project_shell(&f, &ShellSpec::standard(16)),
            Err(Error::ShellAboveNyquist { .. })
        ));
        assert!(matches!(project_shell(&f, &ShellSpec::standard(3)), Err(Error::NotDyadic(3))));
        assert!(project_shell(&f, &ShellSpec::recentered(2, [100, 0, 0])).is_err());
        let g2 = make_grid(3, 1.0, 32).unwrap();
        let h = SpectralField::from_fn(&g2, |x| (x[0] + x[1]).cos());
        let p = project_shell(&h, &ShellSpec::recentered(2, [1, 1, 0])).unwrap();
        assert!(!p.is_real());
    }
}
