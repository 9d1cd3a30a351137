//! Periodic grids, Fourier coefficient fields, Littlewood–Paley shells and
//! unit-cube blocks.
//!
//! The box `[0, 2πR)^d` stands in for ℝ^d. Frequencies live on the lattice
//! `ξ = m / R`; the largest dyadic shell is the largest power of two below
//! `n / (2R · 1.5)`, which keeps quadratic products resolvable after the
//! two-thirds rule.

mod cubes;
mod field;
mod grid;
mod shells;
mod snapshot;

pub use cubes::{unit_cube_block, PartitionSpec};
pub use field::{
    bessel_derivative, dot_physical, grad_dot, gradient, gradient_physical, laplacian, Products, SpectralField,
};
pub use grid::{make_grid, Grid, DEALIAS_FACTOR};
pub use shells::{
    bump, project_high, project_low, project_shell, psi, psi_fat, psi_low, smoothstep, ShellKind, ShellSpec,
};
pub use snapshot::{read_snapshot, write_snapshot};

pub(crate) use shells::shifted_abs;
