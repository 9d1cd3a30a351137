use serde::{Deserialize, Serialize};

use super::propagator::duhamel;
use super::solvers::SolverConfig;
use super::trace::FieldTrace;
use crate::error::{Error, Result};
use crate::spectral::{grad_dot, psi, Products, SpectralField};

/// Frequency regimes of a shell pair `(L, K)` for `∇P_L v · ∇P_K w`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `L < K/2`
    LowHigh,
    /// `L > 2K`
    HighLow,
    /// `K/2 ≤ L ≤ 2K`
    HighHigh,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::LowHigh, Regime::HighLow, Regime::HighHigh];
}

pub fn regime_contains(regime: Regime, l: u32, k: u32) -> bool {
    match regime {
        Regime::LowHigh => 2 * l < k,
        Regime::HighLow => l > 2 * k,
        Regime::HighHigh => 2 * l >= k && l <= 2 * k,
    }
}

/// `Σ_{(L,K) ∈ regime} ∇P_L v · ∇P_K w` at one time.
///
/// For each `K` the admissible `L` shells are merged into one multiplier,
/// which is exact because the form is bilinear.
pub fn paraproduct_forcing(v: &SpectralField, w: &SpectralField, regime: Regime, opts: Products) -> Result<SpectralField> {
    let grid = v.grid();
    if grid != w.grid() {
        return Err(Error::GridMismatch);
    }
    let real = v.is_real() && w.is_real();
    let mut acc = SpectralField::zeros(grid, real);
    if v.is_zero() || w.is_zero() {
        return Ok(acc);
    }
    let m_max = grid.nyquist();
    let shells = grid.shells();
    for &k in &shells {
        let wk = w.multiply_radial(|r| psi(k, m_max, r));
        if wk.is_zero() {
            continue;
        }
        let low: Vec<u32> = shells.iter().copied().filter(|&l| regime_contains(regime, l, k)).collect();
        if low.is_empty() {
            continue;
        }
        let vl = v.multiply_radial(|r| low.iter().map(|&l| psi(l, m_max, r)).sum());
        if vl.is_zero() {
            continue;
        }
        acc.axpy(1.0, &grad_dot(&vl, &wk, opts)?)?;
    }
    Ok(acc.with_real(real))
}

/// `Π_regime(v, w) = ∫_0^t sin((t−s)|∇|)/|∇| Σ ∇P_L v · ∇P_K w ds`.
pub fn paraproduct(v: &FieldTrace, w: &FieldTrace, regime: Regime, cfg: &SolverConfig) -> Result<FieldTrace> {
    if v.len() != w.len() {
        return Err(Error::InvalidArgument("paraproduct inputs have different sampling".into()));
    }
    let forcing = v
        .u
        .iter()
        .zip(&w.u)
        .map(|(a, b)| paraproduct_forcing(a, b, regime, cfg.products))
        .collect::<Result<Vec<_>>>()?;
    duhamel(&forcing, v.dt)
}
