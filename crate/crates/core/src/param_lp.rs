//! Exponent conditions of the convergence argument and the small linear
//! program that minimizes `s` over them.
//!
//! For fixed `γ` every condition is linear in `(s, ν, σ′)`, so the optimum is
//! a vertex of at most a dozen half-spaces. The optimizer enumerates all
//! triples of constraints, solves each 3×3 system and keeps the feasible
//! vertex with the smallest `s`.

use serde::Serialize;

/// One exponent point of the linear program.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LpPoint {
    pub gamma: f64,
    pub s: f64,
    pub nu: f64,
    pub sigma_prime: f64,
}

impl LpPoint {
    /// The exponents used throughout the construction.
    pub const REFERENCE: LpPoint = LpPoint {
        gamma: 0.88,
        s: 1.9840,
        nu: 2.1001,
        sigma_prime: 1.13205,
    };
}

/// A named condition written as `slack < 0`.
#[derive(Clone, Debug, Serialize)]
pub struct Condition {
    pub name: &'static str,
    pub slack: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstraintReport {
    pub slack_a: f64,
    pub slack_b: f64,
    pub slack_c: f64,
    pub basic: Vec<Condition>,
    pub minor: Vec<Condition>,
    pub eta_window: (f64, f64),
    pub eta_window_empty: bool,
    pub feasible: bool,
    /// Names of conditions with `|slack| < activity tolerance`.
    pub active: Vec<&'static str>,
}

pub const ACTIVITY_TOL: f64 = 1e-6;

pub fn slack_a(p: &LpPoint, delta: f64) -> f64 {
    let sigma = p.nu - 1.0 - delta;
    p.sigma_prime - p.s + 1.0 - p.gamma * (sigma - 1.0) - 0.5 * (1.0 - p.gamma)
}

pub fn slack_b(p: &LpPoint) -> f64 {
    p.nu - p.s - p.gamma * (p.sigma_prime - 1.0)
}

pub fn slack_c(p: &LpPoint) -> f64 {
    (1.0 - p.gamma) * (p.nu - 1.0) + 1.0 - p.sigma_prime
}

/// `(max(ν−σ′, σ−1), ν−1)`.
pub fn eta_window(p: &LpPoint, delta: f64) -> (f64, f64) {
    let sigma = p.nu - 1.0 - delta;
    ((p.nu - p.sigma_prime).max(sigma - 1.0), p.nu - 1.0)
}

/// Evaluate every condition; strict inequalities must hold with margin `eps`.
pub fn feasible(p: &LpPoint, delta: f64, eps: f64) -> ConstraintReport {
    let sigma = p.nu - 1.0 - delta;
    let basic = vec![
        Condition { name: "nu > 2", slack: 2.0 - p.nu },
        Condition { name: "s < 2", slack: p.s - 2.0 },
        Condition { name: "s > 1", slack: 1.0 - p.s },
        Condition { name: "sigma' > sigma", slack: sigma - p.sigma_prime },
        Condition { name: "gamma > 0", slack: -p.gamma },
        Condition { name: "gamma < 1", slack: p.gamma - 1.0 },
    ];
    let minor = vec![
        Condition { name: "nu < 5/2", slack: p.nu - 2.5 },
        Condition { name: "s > sigma'", slack: p.sigma_prime - p.s },
    ];
    let (a, b, c) = (slack_a(p, delta), slack_b(p), slack_c(p));
    let w = eta_window(p, delta);
    let eta_window_empty = w.0 >= w.1 - eps;
    let named = [("A", a), ("B", b), ("C", c)]
        .into_iter()
        .chain(basic.iter().map(|c| (c.name, c.slack)))
        .chain(minor.iter().map(|c| (c.name, c.slack)));
    let mut ok = !eta_window_empty;
    let mut active = Vec::new();
    for (name, v) in named {
        ok &= v < -eps || (eps == 0.0 && v < 0.0);
        if v.abs() < ACTIVITY_TOL {
            active.push(name);
        }
    }
    ConstraintReport {
        slack_a: a,
        slack_b: b,
        slack_c: c,
        basic,
        minor,
        eta_window: w,
        eta_window_empty,
        feasible: ok,
        active,
    }
}

/// Half-spaces `row · (s, ν, σ′) ≤ rhs` for fixed `γ`.
fn constraints(gamma: f64, delta: f64, eps: f64) -> Vec<([f64; 3], f64)> {
    let g = gamma;
    vec![
        ([-1.0, -g, 1.0], -eps - 1.0 - g * (2.0 + delta) + 0.5 * (1.0 - g)),
        ([-1.0, 1.0, -g], -eps - g),
        ([0.0, 1.0 - g, -1.0], -eps - g),
        ([0.0, -1.0, 0.0], -2.0 - eps),
        ([0.0, 1.0, 0.0], 2.5 - eps),
        ([1.0, 0.0, 0.0], 2.0 - eps),
        ([-1.0, 0.0, 0.0], -1.0 - eps),
        ([0.0, 1.0, -1.0], 1.0 + delta - eps),
        ([-1.0, 0.0, 1.0], -eps),
        // nonempty η window: ν − σ′ < ν − 1
        ([0.0, 0.0, -1.0], -1.0 - eps),
    ]
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    if d.abs() < 1e-12 {
        return None;
    }
    let mut x = [0.0; 3];
    for (col, xc) in x.iter_mut().enumerate() {
        let mut m = a;
        for r in 0..3 {
            m[r][col] = b[r];
        }
        *xc = det(m) / d;
    }
    Some(x)
}

/// Minimize `s` at fixed `γ`; `None` when the conditions are infeasible.
pub fn optimize_gamma(gamma: f64, delta: f64, eps: f64) -> Option<LpPoint> {
    let cons = constraints(gamma, delta, eps);
    let tol = 1e-12;
    let mut best: Option<[f64; 3]> = None;
    let n = cons.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let a = [cons[i].0, cons[j].0, cons[k].0];
                let Some(x) = solve3(a, [cons[i].1, cons[j].1, cons[k].1]) else {
                    continue;
                };
                let inside = cons.iter().all(|(row, rhs)| row[0] * x[0] + row[1] * x[1] + row[2] * x[2] <= rhs + tol);
                if inside && best.is_none_or(|b| x[0] < b[0]) {
                    best = Some(x);
                }
            }
        }
    }
    best.map(|x| LpPoint {
        gamma,
        s: x[0],
        nu: x[1],
        sigma_prime: x[2],
    })
}

/// `γ_min, γ_min + step, …` up to `γ_max` inclusive, free of accumulated drift.
pub fn gamma_grid(gamma_min: f64, gamma_max: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || gamma_max < gamma_min {
        return Vec::new();
    }
    let count = ((gamma_max - gamma_min) / step + 1e-9).floor() as usize;
    (0..=count).map(|i| gamma_min + i as f64 * step).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct LpOutcome {
    /// Per grid point: `γ` and the optimal `s`, or `None` if infeasible.
    pub table: Vec<(f64, Option<f64>)>,
    pub best: Option<(LpPoint, ConstraintReport)>,
}

/// Grid-global minimizer of `s`.
pub fn optimize(gammas: &[f64], delta: f64, eps: f64) -> LpOutcome {
    let mut table = Vec::new();
    let mut best: Option<LpPoint> = None;
    for &g in gammas {
        let p = optimize_gamma(g, delta, eps);
        table.push((g, p.map(|p| p.s)));
        if let Some(p) = p {
            if best.is_none_or(|b| p.s < b.s) {
                best = Some(p);
            }
        }
    }
    LpOutcome {
        table,
        best: best.map(|p| (p, feasible(&p, delta, 0.0))),
    }
}

/// JSON body of the `params` command.
#[derive(Clone, Debug, Serialize)]
pub struct ParamsJson {
    pub gamma: f64,
    pub s: f64,
    pub nu: f64,
    pub sigma_prime: f64,
    pub delta: f64,
    pub eps: f64,
    pub slacks: Slacks,
    pub eta_window: [f64; 2],
}

#[derive(Clone, Debug, Serialize)]
#[allow(non_snake_case)]
pub struct Slacks {
    pub A: f64,
    pub B: f64,
    pub C: f64,
}

impl ParamsJson {
    pub fn new(p: &LpPoint, delta: f64, eps: f64) -> Self {
        let w = eta_window(p, delta);
        ParamsJson {
            gamma: p.gamma,
            s: p.s,
            nu: p.nu,
            sigma_prime: p.sigma_prime,
            delta,
            eps,
            slacks: Slacks {
                A: slack_a(p, delta),
                B: slack_b(p),
                C: slack_c(p),
            },
            eta_window: [w.0, w.1],
        }
    }
}
