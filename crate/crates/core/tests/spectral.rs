use proptest::prelude::*;

use rwave::spectral::{make_grid, project_shell, psi, ShellSpec};
use rwave::verify::{energy_conservation, random_field, spectral_reconstruction};

#[test]
fn shells_and_cubes_resolve_the_identity() {
    let o = spectral_reconstruction(16, 20).unwrap();
    assert!(o.passed, "{}", o.detail);
}

#[test]
fn free_flow_conserves_energy() {
    let o = energy_conservation(16).unwrap();
    assert!(o.passed, "{}", o.detail);
}

#[test]
fn shell_projections_are_orthogonal_up_to_neighbours() {
    let grid = make_grid(3, 1.0, 32).unwrap();
    let f = random_field(&grid, 5);
    let shells = grid.shells();
    let pieces: Vec<_> = shells
        .iter()
        .map(|&m| project_shell(&f, &ShellSpec::standard(m)).unwrap())
        .collect();
    for (a, pa) in pieces.iter().enumerate() {
        for (b, pb) in pieces.iter().enumerate().skip(a + 2) {
            let overlap: f64 = pa.coeffs().iter().zip(pb.coeffs()).map(|(x, y)| (x * y.conj()).norm()).sum();
            assert_eq!(overlap, 0.0, "shells {} and {}", shells[a], shells[b]);
        }
    }
}

proptest! {
    #[test]
    fn psi_partition_sums_to_one(r in 0.0f64..200.0, log_top in 1u32..8) {
        let top = 1u32 << log_top;
        let mut total = 0.0;
        let mut m = 1;
        while m <= top {
            total += psi(m, top, r);
            m *= 2;
        }
        prop_assert!((total - 1.0).abs() < 1e-12);
    }
}
