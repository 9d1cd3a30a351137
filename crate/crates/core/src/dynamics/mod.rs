//! Wave propagation, Duhamel integrals and the solvers of the truncated
//! system.
//!
//! All solvers step the first-order system for `(û, ∂_t û)` mode by mode with
//! the exact free flow and the trapezoid rule in the Duhamel integral. The
//! integral forms are used as written, i.e. `u_tt − Δu = G`; the `sign`
//! setting of [`SolverConfig`] flips the nonlinearity, which covers the
//! other sign convention through `u ↦ −u`.

mod cutoff;
mod paraproduct;
mod propagator;
mod residual;
mod solvers;
mod trace;

pub use cutoff::{evaluate_cutoffs, history_argument, CutoffSpec, CutoffState, LevelCurves};
pub use paraproduct::{paraproduct, paraproduct_forcing, regime_contains, Regime};
pub use propagator::{duhamel, free_trace, half_wave_propagate, march};
pub use residual::{duhamel_direct, integral_residual, integral_residual_derivative};
pub use solvers::{
    adapted_forcing_from, energy_norms, low_cut, nlw_forcing, picard_iterates, solve_adapted_linear, solve_nlw,
    solve_per_cube, solve_w_fixed_point, w_picard_from_zero, Solution, SolverConfig, WProblem, WSolution,
};
pub use trace::{energy_sup, FieldTrace};

pub(crate) use trace::window_len;
