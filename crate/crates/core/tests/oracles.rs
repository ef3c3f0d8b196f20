use nehari_core::branches::{minimize_branch, BranchOptions};
use nehari_core::discretization::{build_interval_mesh, Weight};
use nehari_core::extremal::{minimize_lambda, ExtremalOptions};
use nehari_core::oracles::{scan_slopes, shoot, SHOOTING_STEPS};
use nehari_core::{Branch, Exponents, Problem};

#[test]
fn shooting_finds_two_positive_profiles_matching_branches() {
    let e = Exponents::new(2.0, 1.5, 2.5).unwrap();
    let cells = 256;
    let mesh = build_interval_mesh(cells, 1.0).unwrap();
    let pr = Problem::new(Weight::constant(&mesh, 1.0), e).unwrap();
    let ext = minimize_lambda(&pr, &ExtremalOptions { starts: 4, ..Default::default() }).unwrap();
    let lam = 0.3 * ext.lambda_star;
    let brackets = scan_slopes(lam, &|_| 1.0, e, 1e-2, 1e4, 200, SHOOTING_STEPS).unwrap();
    assert_eq!(brackets.len(), 2);
    let stride = SHOOTING_STEPS / cells;
    // Brackets come in increasing slope order: small solution first.
    for (b, branch) in brackets.into_iter().zip([Branch::Plus, Branch::Minus]) {
        let s = shoot(lam, |_| 1.0, e, b, SHOOTING_STEPS).unwrap();
        assert!(s.positive);
        let p = minimize_branch(&pr, lam, branch, Some(&ext.direction.interior_values()), &BranchOptions::default()).unwrap();
        let err = p
            .field
            .values()
            .iter()
            .enumerate()
            .map(|(i, &v): (usize, &f64)| (v - s.u[i * stride]).abs())
            .fold(0.0, f64::max);
        // Second-order discretization error relative to the profile height.
        assert!(err / p.field.max_abs() < 1e-4, "{branch}: {err:e}");
    }
}
