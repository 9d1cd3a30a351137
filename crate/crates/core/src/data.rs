//! Deterministic initial data `(f₀, f₁)` before randomization.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::spectral::{read_snapshot, Grid, SpectralField};

#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    Zero,
    /// `f̂₀ = a⟨ξ⟩^{−p}`, `f̂₁ = a⟨ξ⟩^{−(p−1)}` with `p = s + d/2 + ½`, so the
    /// pair lies in `H^s × H^{s−1}` with room to spare.
    Power,
    /// `f₀ = a·exp(−|x − c|²/(2·0.5²))` centred in the box, `f₁ = 0`.
    Gaussian,
    /// `f₀` read from a snapshot, `f₁ = 0`.
    Snapshot(PathBuf),
}

impl Profile {
    pub fn parse(name: &str) -> Result<Profile> {
        match name {
            "zero" => Ok(Profile::Zero),
            "power" => Ok(Profile::Power),
            "gaussian" => Ok(Profile::Gaussian),
            _ => match name.strip_prefix("snapshot:") {
                Some(p) if !p.is_empty() => Ok(Profile::Snapshot(PathBuf::from(p))),
                _ => Err(Error::Config(format!(
                    "unknown data profile {name:?} (expected zero, power, gaussian or snapshot:<path>)"
                ))),
            },
        }
    }

    pub fn name(&self) -> String {
        match self {
            Profile::Zero => "zero".into(),
            Profile::Power => "power".into(),
            Profile::Gaussian => "gaussian".into(),
            Profile::Snapshot(p) => format!("snapshot:{}", p.display()),
        }
    }
}

/// Build the data pair for `profile` scaled by `amplitude` at regularity `s`.
pub fn build_data(grid: &Grid, profile: &Profile, amplitude: f64, s: f64) -> Result<(SpectralField, SpectralField)> {
    let zero = SpectralField::zeros(grid, true);
    match profile {
        Profile::Zero => Ok((zero.clone(), zero)),
        Profile::Power => {
            let p = s + grid.dim() as f64 / 2.0 + 0.5;
            let bracket = |flat: usize| {
                let r = grid.xi_abs()[flat];
                (1.0 + r * r).sqrt()
            };
            let ones = SpectralField::from_coeffs(grid, vec![num_complex::Complex64::new(amplitude, 0.0); grid.len()], true)?;
            let f0 = ones.multiply(|i| bracket(i).powf(-p));
            let f1 = ones.multiply(|i| bracket(i).powf(1.0 - p));
            Ok((f0, f1))
        }
        Profile::Gaussian => {
            let c = std::f64::consts::PI * grid.box_scale();
            let dim = grid.dim();
            let f0 = SpectralField::from_fn(grid, |x| {
                let r2: f64 = (0..dim).map(|a| (x[a] - c) * (x[a] - c)).sum();
                amplitude * (-r2 / 0.5).exp()
            });
            Ok((f0, zero))
        }
        Profile::Snapshot(path) => {
            let file = std::io::BufReader::new(std::fs::File::open(path)?);
            let f = read_snapshot(file)?;
            if f.grid().dim() != grid.dim()
                || f.grid().resolution() != grid.resolution()
                || f.grid().box_scale() != grid.box_scale()
            {
                return Err(Error::Config(format!("snapshot {} does not match the configured grid", path.display())));
            }
            let f = SpectralField::from_coeffs(grid, f.coeffs().to_vec(), f.is_real())?;
            Ok((f.scale(amplitude), zero))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn profiles_are_real_and_scale_linearly() {
        let g = make_grid(3, 1.0, 16).unwrap();
        for p in [Profile::Power, Profile::Gaussian] {
            let (a, b) = build_data(&g, &p, 1.0, 1.98).unwrap();
            let (a2, _) = build_data(&g, &p, 2.0, 1.98).unwrap();
            assert!(a.is_real() && b.is_real());
            assert!(a.conjugate_defect() < 1e-14);
            assert!((a2.l2_norm() - 2.0 * a.l2_norm()).abs() < 1e-12 * a.l2_norm());
        }
        let (z0, z1) = build_data(&g, &Profile::Zero, 5.0, 1.98).unwrap();
        assert!(z0.is_zero() && z1.is_zero());
    }

    #[test]
    fn profile_names_roundtrip() {
        for n in ["zero", "power", "gaussian", "snapshot:/tmp/a.rwav"] {
            assert_eq!(Profile::parse(n).unwrap().name(), n);
        }
        assert!(Profile::parse("snapshot:").is_err());
        assert!(Profile::parse("sine").is_err());
    }
}
