//! Numerical laboratory for `−u_tt + Δu = |∇u|²` with Wiener-randomized
//! supercritical data on a periodic box.

pub mod cascade;
pub mod config;
pub mod data;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod norms;
pub mod output;
pub mod param_lp;
pub mod randomization;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
