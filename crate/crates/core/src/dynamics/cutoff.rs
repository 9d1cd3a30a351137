use serde::Serialize;

use crate::spectral::bump;

/// Smooth cutoff: 1 on `[0, 1]`, 0 on `[2, ∞)`, quintic in between.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffSpec {
    pub enabled: bool,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        CutoffSpec { enabled: true }
    }
}

impl CutoffSpec {
    pub fn theta(&self, x: f64) -> f64 {
        if self.enabled {
            bump(x)
        } else {
            1.0
        }
    }
}

/// Norm curves of one finished level `m` (shell `M = 2^m`), sampled at the
/// window ends `t_j`.
#[derive(Clone, Debug, Default, Serialize)]
pub struct LevelCurves {
    pub level: u32,
    /// `‖⟨∇⟩^{σ′} F_m‖_{S_{≤M,D′}([0,t])}`
    pub f_s_cumulative: Vec<f64>,
    /// `‖⟨∇⟩^{σ′} F_m‖_{S_{M,D′}([0,t])}`
    pub f_s_centered: Vec<f64>,
    /// `‖⟨∇⟩^σ w_m‖_{S_{≤M,D}([0,t])}`
    pub w_s_cumulative: Vec<f64>,
    /// `‖⟨∇⟩^ν w_m‖_{X_{≤M,D}([0,t])}`
    pub w_x_cumulative: Vec<f64>,
    /// `‖w_m‖_{Y_M([0,t])}`
    pub w_y: Vec<f64>,
}

impl LevelCurves {
    /// This level's contribution to the argument of `θ_{F,w;≤n−1}`.
    pub fn history_argument(&self, j: usize) -> f64 {
        self.f_s_cumulative[j] + self.w_s_cumulative[j] + self.w_x_cumulative[j]
    }
}

/// Argument of `θ_{F,w;≤n−1}` at every sample.
pub fn history_argument(history: &[LevelCurves], samples: usize) -> Vec<f64> {
    (0..samples)
        .map(|j| history.iter().map(|c| c.history_argument(j)).sum())
        .collect()
}

/// Cutoff values of one level at every sample.
#[derive(Clone, Debug, Default, Serialize)]
pub struct CutoffState {
    pub times: Vec<f64>,
    pub theta_prev: Vec<f64>,
    pub theta_f: Vec<f64>,
    pub theta_w: Vec<f64>,
}

impl CutoffState {
    pub fn all_one(&self) -> bool {
        self.theta_prev
            .iter()
            .chain(&self.theta_f)
            .chain(&self.theta_w)
            .all(|&v| v == 1.0)
    }

    /// All three cutoffs are one at every sample with `t ≤ t_end`.
    pub fn one_until(&self, t_end: f64) -> bool {
        self.times.iter().enumerate().all(|(j, &t)| {
            t > t_end + 1e-12 || (self.theta_prev[j] == 1.0 && self.theta_f[j] == 1.0 && self.theta_w[j] == 1.0)
        })
    }
}

/// Apply `θ` to each entry of an argument curve.
pub fn evaluate_cutoffs(spec: &CutoffSpec, argument: &[f64]) -> Vec<f64> {
    argument.iter().map(|&x| spec.theta(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_profile() {
        let c = CutoffSpec::default();
        assert_eq!(c.theta(0.0), 1.0);
        assert_eq!(c.theta(1.0), 1.0);
        assert!((c.theta(1.5) - 0.5).abs() < 1e-15);
        assert_eq!(c.theta(2.0), 0.0);
        assert_eq!(c.theta(7.0), 0.0);
        assert_eq!(CutoffSpec { enabled: false }.theta(7.0), 1.0);
    }

    #[test]
    fn empty_history_leaves_cutoff_inactive() {
        let arg = history_argument(&[], 4);
        assert_eq!(evaluate_cutoffs(&CutoffSpec::default(), &arg), vec![1.0; 4]);
    }
}
