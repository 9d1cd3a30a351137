use crate::error::{Error, Result};
use crate::spectral::{Grid, SpectralField};

/// Time samples `t_j = j·dt` of a field and, optionally, its time derivative.
#[derive(Clone, Debug)]
pub struct FieldTrace {
    pub dt: f64,
    pub u: Vec<SpectralField>,
    pub ut: Option<Vec<SpectralField>>,
}

impl FieldTrace {
    pub fn new(dt: f64, u: Vec<SpectralField>, ut: Option<Vec<SpectralField>>) -> Result<Self> {
        if u.is_empty() {
            return Err(Error::InvalidArgument("trace needs at least one sample".into()));
        }
        if let Some(v) = &ut {
            if v.len() != u.len() {
                return Err(Error::InvalidArgument("derivative samples differ in count".into()));
            }
        }
        Ok(FieldTrace { dt, u, ut })
    }

    /// A trace that is identically zero.
    pub fn zeros(grid: &Grid, dt: f64, steps: usize) -> Self {
        let z = SpectralField::zeros(grid, true);
        FieldTrace {
            dt,
            u: vec![z.clone(); steps + 1],
            ut: Some(vec![z; steps + 1]),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.u[0].grid()
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.u.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.steps() as f64 * self.dt
    }

    pub fn time(&self, j: usize) -> f64 {
        j as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.time(j)).collect()
    }

    pub fn derivative(&self) -> Result<&[SpectralField]> {
        self.ut.as_deref().ok_or(Error::MissingTimeDerivative)
    }

    pub fn is_zero(&self) -> bool {
        self.u.iter().all(|f| f.is_zero()) && self.ut.as_ref().is_none_or(|v| v.iter().all(|f| f.is_zero()))
    }

    fn check(&self, other: &FieldTrace) -> Result<()> {
        if self.len() != other.len() || (self.dt - other.dt).abs() > 1e-15 || self.grid() != other.grid() {
            return Err(Error::InvalidArgument("traces have different sampling".into()));
        }
        Ok(())
    }

    fn combine(&self, other: &FieldTrace, a: f64, b: f64) -> Result<FieldTrace> {
        self.check(other)?;
        let lin = |x: &SpectralField, y: &SpectralField| {
            let mut out = x.scale(a);
            out.axpy(b, y).expect("grids checked");
            out
        };
        let u = self.u.iter().zip(&other.u).map(|(x, y)| lin(x, y)).collect();
        let ut = match (&self.ut, &other.ut) {
            (Some(p), Some(q)) => Some(p.iter().zip(q).map(|(x, y)| lin(x, y)).collect()),
            _ => None,
        };
        Ok(FieldTrace { dt: self.dt, u, ut })
    }

    pub fn add(&self, other: &FieldTrace) -> Result<FieldTrace> {
        self.combine(other, 1.0, 1.0)
    }

    pub fn sub(&self, other: &FieldTrace) -> Result<FieldTrace> {
        self.combine(other, 1.0, -1.0)
    }

    pub fn scale(&self, a: f64) -> FieldTrace {
        FieldTrace {
            dt: self.dt,
            u: self.u.iter().map(|f| f.scale(a)).collect(),
            ut: self.ut.as_ref().map(|v| v.iter().map(|f| f.scale(a)).collect()),
        }
    }

    /// Apply the same spatial operator to every sample of both components.
    pub fn map<F: Fn(&SpectralField) -> Result<SpectralField>>(&self, f: F) -> Result<FieldTrace> {
        let u = self.u.iter().map(&f).collect::<Result<Vec<_>>>()?;
        let ut = match &self.ut {
            Some(v) => Some(v.iter().map(&f).collect::<Result<Vec<_>>>()?),
            None => None,
        };
        Ok(FieldTrace { dt: self.dt, u, ut })
    }

    /// Number of samples with `t_j ≤ τ`.
    pub fn window_len(&self, tau: f64) -> Result<usize> {
        window_len(self.dt, self.len(), tau)
    }
}

pub(crate) fn window_len(dt: f64, len: usize, tau: f64) -> Result<usize> {
    let horizon = (len - 1) as f64 * dt;
    let slack = 1e-9 * dt.max(1e-300);
    if !(tau >= 0.0) || tau > horizon + slack {
        return Err(Error::EmptyWindow(tau));
    }
    let j = ((tau + slack) / dt).floor() as usize;
    Ok((j + 1).min(len))
}

/// `sup_t (‖⟨∇⟩^{s} u‖_{L²} + ‖⟨∇⟩^{s−1} u_t‖_{L²})` over the whole trace.
pub fn energy_sup(trace: &FieldTrace, s: f64) -> Result<f64> {
    let ut = trace.derivative()?;
    Ok(trace
        .u
        .iter()
        .zip(ut)
        .map(|(u, v)| u.sobolev_norm(s) + v.sobolev_norm(s - 1.0))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn window_counts_samples() {
        let g = make_grid(1, 1.0, 8).unwrap();
        let tr = FieldTrace::zeros(&g, 0.1, 5);
        assert_eq!(tr.window_len(0.0).unwrap(), 1);
        assert_eq!(tr.window_len(0.3).unwrap(), 4);
        assert_eq!(tr.window_len(0.35).unwrap(), 4);
        assert_eq!(tr.window_len(0.5).unwrap(), 6);
        assert!(matches!(tr.window_len(0.6), Err(Error::EmptyWindow(_))));
        assert!(matches!(tr.window_len(-0.1), Err(Error::EmptyWindow(_))));
    }
}
