use nehari_core::asymptotics::{solve_lane_emden, verify_scaling, LaneEmdenOptions};
use nehari_core::branches::{solve_branches, BranchOptions};
use nehari_core::discretization::{build_interval_mesh, Weight, WeightFormula};
use nehari_core::{Exponents, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn plus_branch_rescales_to_lane_emden_profile() {
    let e = Exponents::new(2.0, 1.5, 2.5).unwrap();
    let mesh = build_interval_mesh(64, 1.0).unwrap();
    let w = Weight::from_formula(
        &mesh,
        WeightFormula::Sine {
            amplitude: 1.0,
            frequency: 1.0,
            offset: 0.5,
        },
    );
    let pr = Problem::new(w, e).unwrap();
    let lane = solve_lane_emden(&mesh, e, &LaneEmdenOptions::default()).unwrap();
    assert!(lane.unique);
    assert!(lane.residual < 1e-10);
    assert!(lane.energy < 0.0);

    let lambdas = [1e-1, 1e-2, 1e-3];
    let d = solve_branches(&pr, &[1e-3, 1e-2, 1e-1], None, &BranchOptions::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let dirs: Vec<Vec<f64>> = (0..16)
        .map(|_| (0..pr.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let tab = verify_scaling(&pr, &d.plus, &lane, &lambdas, &dirs).unwrap();
    assert!(tab.violations().is_empty(), "{:?}", tab.violations());
    assert!(tab.scalar_ratios().iter().all(|&r| r >= 5.0));
    assert!(tab.rows[2].energy_ratio_error < 0.1);
}
