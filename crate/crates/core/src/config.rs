//! Run configuration as flat `section.key = value` lines.
//!
//! Blank lines and `#` comments are ignored. Every key is optional except
//! `data.profile`; unknown or repeated keys are errors. [`RunConfig::emit`]
//! writes every key in a fixed order with round-trip float formatting, so
//! parsing the emitted text reproduces the configuration exactly.

use std::collections::BTreeMap;

use crate::cascade::CascadeConfig;
use crate::data::{build_data, Profile};
use crate::dynamics::{CutoffSpec, SolverConfig};
use crate::error::{Error, Result};
use crate::norms::ParameterPoint;
use crate::randomization::{covering_radius, draw_gaussians, Distribution, PartitionSpec, RandomDraw};
use crate::spectral::{make_grid, Grid, Products, SpectralField};

const KEYS: &[&str] = &[
    "grid.dim",
    "grid.resolution",
    "grid.box_scale",
    "time.T0",
    "time.dt",
    "cascade.n_max",
    "cascade.gamma",
    "exponents.s",
    "exponents.nu",
    "exponents.sigma_prime",
    "exponents.delta",
    "exponents.eta",
    "exponents.D",
    "exponents.D_prime",
    "exponents.D_dprime",
    "exponents.eps_loss",
    "solver.tol",
    "solver.max_iters",
    "solver.dealias",
    "solver.oversample",
    "solver.noise_floor",
    "randomization.seed",
    "randomization.real_conditioning",
    "randomization.distribution",
    "randomization.partition_width",
    "data.profile",
    "data.amplitude",
];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub resolution: usize,
    pub box_scale: f64,
    pub t0: f64,
    pub dt: f64,
    pub n_max: u32,
    pub params: ParameterPoint,
    pub tol: f64,
    pub max_iters: usize,
    pub dealias: bool,
    pub oversample: bool,
    pub noise_floor: f64,
    pub seed: u64,
    pub real_conditioning: bool,
    pub distribution: Distribution,
    pub partition_width: f64,
    pub profile: Profile,
    pub amplitude: f64,
}

fn distribution_name(d: Distribution) -> &'static str {
    match d {
        Distribution::Gaussian => "gaussian",
        Distribution::Signs => "signs",
    }
}

struct Fields(BTreeMap<String, String>);

impl Fields {
    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn num<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("{key}: cannot parse {v:?} as a number"))),
        }
    }

    fn flag(&self, key: &str, default: bool) -> Result<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(v) => Err(Error::Config(format!("{key}: expected true or false, got {v:?}"))),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `section.key = value`", i + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(Error::Config(format!("line {}: unknown key {k:?}", i + 1)));
            }
            if map.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::Config(format!("line {}: key {k:?} given twice", i + 1)));
            }
        }
        let f = Fields(map);
        let reference = ParameterPoint::reference();
        let mut params = ParameterPoint {
            s: f.num("exponents.s", reference.s)?,
            nu: f.num("exponents.nu", reference.nu)?,
            sigma_prime: f.num("exponents.sigma_prime", reference.sigma_prime)?,
            gamma: f.num("cascade.gamma", reference.gamma)?,
            delta: f.num("exponents.delta", reference.delta)?,
            eta: 0.0,
            d: f.num("exponents.D", reference.d)?,
            d_prime: f.num("exponents.D_prime", reference.d_prime)?,
            d_dprime: f.num("exponents.D_dprime", reference.d_dprime)?,
            eps_loss: f.num("exponents.eps_loss", reference.eps_loss)?,
        };
        params.eta = f.num("exponents.eta", params.eta_midpoint())?;
        let profile = match f.raw("data.profile") {
            Some(p) => Profile::parse(p)?,
            None => return Err(Error::Config("missing mandatory key data.profile".into())),
        };
        let distribution = match f.raw("randomization.distribution").unwrap_or("gaussian") {
            "gaussian" => Distribution::Gaussian,
            "signs" => Distribution::Signs,
            v => return Err(Error::Config(format!("randomization.distribution: unknown {v:?}"))),
        };
        let cfg = RunConfig {
            dim: f.num("grid.dim", 3)?,
            resolution: f.num("grid.resolution", 32)?,
            box_scale: f.num("grid.box_scale", 1.0)?,
            t0: f.num("time.T0", 0.5)?,
            dt: f.num("time.dt", 0.025)?,
            n_max: f.num("cascade.n_max", 2)?,
            params,
            tol: f.num("solver.tol", 1e-10)?,
            max_iters: f.num("solver.max_iters", 50)?,
            dealias: f.flag("solver.dealias", true)?,
            oversample: f.flag("solver.oversample", false)?,
            noise_floor: f.num("solver.noise_floor", 1e-14)?,
            seed: f.num("randomization.seed", 0)?,
            real_conditioning: f.flag("randomization.real_conditioning", true)?,
            distribution,
            partition_width: f.num("randomization.partition_width", 2.0)?,
            profile,
            amplitude: f.num("data.amplitude", 1.0)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Cross-field checks; the message names the failing condition.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        self.params.validate()?;
        if !(self.t0 > 0.0 && self.t0 <= 1.0) {
            return Err(Error::Config("condition 0 < T0 <= 1 violated".into()));
        }
        self.solver().steps().map_err(|e| Error::Config(e.to_string()))?;
        if self.n_max >= 31 || (2u64 << self.n_max) > grid.nyquist() as u64 {
            return Err(Error::Config(format!(
                "condition 2^(n_max+1) <= nyquist shell {} violated",
                grid.nyquist()
            )));
        }
        if !(self.tol > 0.0) || self.max_iters == 0 {
            return Err(Error::Config("solver.tol and solver.max_iters must be positive".into()));
        }
        if !(self.noise_floor >= 0.0 && self.noise_floor < 1e-6) {
            return Err(Error::Config("condition 0 <= solver.noise_floor < 1e-6 violated".into()));
        }
        PartitionSpec { support_width: self.partition_width }
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if !self.amplitude.is_finite() {
            return Err(Error::Config("data.amplitude must be finite".into()));
        }
        Ok(())
    }

    /// Canonical text: every key, fixed order, round-trip floats.
    pub fn emit(&self) -> String {
        let p = &self.params;
        let b = |v: bool| if v { "true" } else { "false" }.to_string();
        let f = |v: f64| format!("{v:?}");
        let values = [
            self.dim.to_string(),
            self.resolution.to_string(),
            f(self.box_scale),
            f(self.t0),
            f(self.dt),
            self.n_max.to_string(),
            f(p.gamma),
            f(p.s),
            f(p.nu),
            f(p.sigma_prime),
            f(p.delta),
            f(p.eta),
            f(p.d),
            f(p.d_prime),
            f(p.d_dprime),
            f(p.eps_loss),
            f(self.tol),
            self.max_iters.to_string(),
            b(self.dealias),
            b(self.oversample),
            f(self.noise_floor),
            self.seed.to_string(),
            b(self.real_conditioning),
            distribution_name(self.distribution).to_string(),
            f(self.partition_width),
            self.profile.name(),
            f(self.amplitude),
        ];
        KEYS.iter().zip(values).map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// Replace the seed by `RW_SEED` when that variable is set.
    pub fn apply_env_seed(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var("RW_SEED") {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("RW_SEED: cannot parse {v:?} as a seed")))?;
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        make_grid(self.dim, self.box_scale, self.resolution).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            dt: self.dt,
            horizon: self.t0,
            tol: self.tol,
            max_iters: self.max_iters,
            products: Products {
                dealias: self.dealias,
                noise_floor: self.noise_floor,
            },
            oversample: self.oversample,
            sign: 1.0,
            certify: true,
            cutoff: CutoffSpec::default(),
        }
    }

    pub fn partition(&self) -> PartitionSpec {
        PartitionSpec { support_width: self.partition_width }
    }

    pub fn cascade(&self) -> CascadeConfig {
        CascadeConfig {
            solver: self.solver(),
            params: self.params,
            partition: self.partition(),
            n_max: self.n_max,
        }
    }

    pub fn data(&self, grid: &Grid) -> Result<(SpectralField, SpectralField)> {
        build_data(grid, &self.profile, self.amplitude, self.params.s)
    }

    pub fn draw(&self, grid: &Grid, seed: u64) -> Result<RandomDraw> {
        draw_gaussians(self.dim, seed, covering_radius(grid), self.real_conditioning, self.distribution)
    }
}
