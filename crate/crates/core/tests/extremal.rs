use nehari_core::discretization::{build_interval_mesh, Weight, WeightFormula};
use nehari_core::extremal::{minimize_lambda, ExtremalOptions};
use nehari_core::fiber::lambda_of;
use nehari_core::{Exponents, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sine_problem(cells: usize) -> Problem<f64> {
    let mesh = build_interval_mesh(cells, 1.0).unwrap();
    let w = Weight::from_formula(
        &mesh,
        WeightFormula::Sine {
            amplitude: 1.0,
            frequency: 1.0,
            offset: 0.5,
        },
    );
    Problem::new(w, Exponents::new(2.0, 1.5, 2.5).unwrap()).unwrap()
}

// Reference value from an independent dense BFGS minimization of A²/(4BC)
// on the same 64-cell grid.
const LAMBDA_STAR_64: f64 = 36.682825170122;

#[test]
fn sine_weight_extremal_value_matches_reference() {
    let pr = sine_problem(64);
    let res = minimize_lambda(&pr, &ExtremalOptions::default()).unwrap();
    assert!((res.lambda_star - LAMBDA_STAR_64).abs() < 1e-8);
    assert!(res.relative_residual < 1e-6);
}

#[test]
fn extremal_value_bounds_random_directions() {
    let pr = sine_problem(32);
    let res = minimize_lambda(&pr, &ExtremalOptions { starts: 8, ..Default::default() }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    while checked < 300 {
        let x: Vec<f64> = (0..pr.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let d = pr.coefficients(&x);
        if d.c <= 0.0 {
            continue;
        }
        let lam = lambda_of(&d).unwrap();
        assert!(lam >= res.lambda_star - 1e-8);
        // 0-homogeneity
        for s in [0.5, 2.0, 10.0] {
            let ls = lambda_of(&d.scaled(s)).unwrap();
            assert!((ls - lam).abs() <= 1e-12 * lam);
        }
        checked += 1;
    }
}
