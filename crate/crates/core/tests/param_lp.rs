//! The vertex-enumeration optimizer against a textbook two-phase simplex
//! written from the conditions directly.

use rwave::param_lp::{feasible, gamma_grid, optimize, optimize_gamma, LpPoint};

/// Minimize `c·x` subject to `A x ≤ b`, `x ≥ 0`, by the two-phase tableau
/// method with Bland's rule. Returns `None` when infeasible.
fn simplex(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let m = a.len();
    let n = c.len();
    // Columns: x (n), slacks (m), artificials (m), rhs.
    let width = n + 2 * m + 1;
    let mut t = vec![vec![0.0; width]; m];
    let mut basis = vec![0usize; m];
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = sign * a[i][j];
        }
        t[i][n + i] = sign;
        t[i][n + m + i] = 1.0;
        t[i][width - 1] = sign * b[i];
        basis[i] = n + m + i;
    }
    let pivot = |t: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, r: usize, col: usize| {
        let p = t[r][col];
        for v in t[r].iter_mut() {
            *v /= p;
        }
        for i in 0..t.len() {
            if i != r {
                let f = t[i][col];
                if f != 0.0 {
                    for j in 0..width {
                        t[i][j] -= f * t[r][j];
                    }
                }
            }
        }
        basis[r] = col;
    };
    let run = |t: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, cost: &[f64], allowed: usize| {
        loop {
            let reduced = |j: usize, t: &Vec<Vec<f64>>, basis: &Vec<usize>| {
                cost[j] - (0..m).map(|i| cost[basis[i]] * t[i][j]).sum::<f64>()
            };
            let Some(col) = (0..allowed).find(|&j| !basis.contains(&j) && reduced(j, t, basis) < -1e-12) else {
                return;
            };
            let mut best: Option<(f64, usize)> = None;
            for i in 0..m {
                if t[i][col] > 1e-12 {
                    let ratio = t[i][width - 1] / t[i][col];
                    let better = match best {
                        None => true,
                        Some((r, bi)) => ratio < r - 1e-14 || ((ratio - r).abs() <= 1e-14 && basis[i] < basis[bi]),
                    };
                    if better {
                        best = Some((ratio, i));
                    }
                }
            }
            let (_, r) = best.expect("the programs here are bounded");
            pivot(t, basis, r, col);
        }
    };
    let mut phase1 = vec![0.0; n + 2 * m];
    for v in phase1.iter_mut().skip(n + m) {
        *v = 1.0;
    }
    run(&mut t, &mut basis, &phase1, n + 2 * m);
    let infeasibility: f64 = (0..m).filter(|&i| basis[i] >= n + m).map(|i| t[i][width - 1]).sum();
    if infeasibility > 1e-9 {
        return None;
    }
    for r in 0..m {
        if basis[r] >= n + m {
            if let Some(col) = (0..n + m).find(|&j| t[r][j].abs() > 1e-12) {
                pivot(&mut t, &mut basis, r, col);
            }
        }
    }
    let mut phase2 = vec![0.0; n + 2 * m];
    phase2[..n].copy_from_slice(c);
    run(&mut t, &mut basis, &phase2, n + m);
    let mut x = vec![0.0; n];
    for i in 0..m {
        if basis[i] < n {
            x[basis[i]] = t[i][width - 1];
        }
    }
    Some(x)
}

/// The conditions in `x = (s, ν, σ′)`, each written as `row · x ≤ rhs`
/// with the strict inequalities closed up to the margin `eps`.
fn conditions(g: f64, delta: f64, eps: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut push = |row: [f64; 3], rhs: f64| {
        a.push(row.to_vec());
        b.push(rhs - eps);
    };
    // σ′ − s + 1 − γ(ν − 2 − δ) − (1 − γ)/2 < 0
    push([-1.0, -g, 1.0], -1.0 - g * (2.0 + delta) + 0.5 * (1.0 - g));
    // ν − s − γ(σ′ − 1) < 0
    push([-1.0, 1.0, -g], -g);
    // (1 − γ)(ν − 1) + 1 − σ′ < 0
    push([0.0, 1.0 - g, -1.0], -g);
    push([0.0, -1.0, 0.0], -2.0);
    push([0.0, 1.0, 0.0], 2.5);
    push([1.0, 0.0, 0.0], 2.0);
    push([-1.0, 0.0, 0.0], -1.0);
    // σ′ > ν − 1 − δ
    push([0.0, 1.0, -1.0], 1.0 + delta);
    // s > σ′
    push([-1.0, 0.0, 1.0], 0.0);
    // ν − σ′ < ν − 1
    push([0.0, 0.0, -1.0], -1.0);
    (a, b)
}

fn oracle(g: f64, delta: f64, eps: f64) -> Option<[f64; 3]> {
    let (a, b) = conditions(g, delta, eps);
    simplex(&[1.0, 0.0, 0.0], &a, &b).map(|x| [x[0], x[1], x[2]])
}

#[test]
fn optimum_matches_simplex_on_the_grid() {
    for g in gamma_grid(0.5, 0.99, 0.01) {
        for delta in [0.0, 1e-5] {
            let ours = optimize_gamma(g, delta, 0.0);
            let theirs = oracle(g, delta, 0.0);
            match (ours, theirs) {
                (Some(p), Some(x)) => {
                    // s is unique; ν and σ′ may sit on a face, so compare s and
                    // check that our vertex satisfies every closed condition.
                    assert!((p.s - x[0]).abs() < 1e-9, "γ={g}: {} vs {}", p.s, x[0]);
                    let (a, b) = conditions(g, delta, 0.0);
                    for (row, rhs) in a.iter().zip(&b) {
                        let v = row[0] * p.s + row[1] * p.nu + row[2] * p.sigma_prime;
                        assert!(v <= rhs + 1e-9);
                    }
                }
                (None, None) => {}
                (a, b) => panic!("γ={g}: feasibility differs, {a:?} vs {b:?}"),
            }
        }
    }
}

#[test]
fn reference_vertex_at_point_eighty_eight() {
    let x = oracle(0.88, 0.0, 0.0).unwrap();
    let p = optimize_gamma(0.88, 0.0, 0.0).unwrap();
    assert!((p.s - 1.9839265).abs() < 1e-6, "{p:?}");
    assert!((x[0] - 1.9839265).abs() < 1e-6);
    assert!((p.nu - 2.1000967).abs() < 1e-6);
    assert!((p.sigma_prime - 1.1320116).abs() < 1e-6);
    let r = feasible(&p, 0.0, 0.0);
    for name in ["A", "B", "C"] {
        assert!(r.active.contains(&name), "{:?}", r.active);
    }
}

#[test]
fn grid_optimum_is_the_documented_point() {
    let out = optimize(&gamma_grid(0.5, 0.99, 0.01), 0.0, 0.0);
    let (p, _) = out.best.unwrap();
    let reference = LpPoint::REFERENCE;
    assert!((p.gamma - reference.gamma).abs() < 1e-12);
    assert!((p.s - reference.s).abs() < 1e-3);
    assert!((p.nu - reference.nu).abs() < 1e-3);
    assert!((p.sigma_prime - reference.sigma_prime).abs() < 1e-3);
}

#[test]
fn margins_only_raise_the_optimum() {
    let grid = gamma_grid(0.5, 0.99, 0.01);
    let mut last = f64::NEG_INFINITY;
    for eps in [0.0, 1e-6, 1e-5, 1e-4, 1e-3, 5e-3] {
        let (p, _) = optimize(&grid, 1e-5, eps).best.unwrap();
        assert!(p.s >= last - 1e-12, "eps={eps}: {} < {last}", p.s);
        let x = grid
            .iter()
            .filter_map(|&g| oracle(g, 1e-5, eps).map(|x| x[0]))
            .fold(f64::INFINITY, f64::min);
        assert!((p.s - x).abs() < 1e-9);
        last = p.s;
    }
}
