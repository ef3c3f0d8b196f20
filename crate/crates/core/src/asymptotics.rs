//! The `λ ↓ 0` limit of the plus branch: the Lane–Emden problem
//! `−Δ_p z = z^{q−1}` and the scaling `u_λ ≈ λ^{1/(p−q)} z`.

use std::io::Write;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::branches::BranchPoint;
use crate::discretization::{Field, Mesh, Weight};
use crate::error::{Branch, Error, Result};
use crate::fiber::project;
use crate::functionals::{Exponents, Problem};
use crate::optimize::{damped_newton, descend, DescentOptions, Metric};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
pub struct LaneEmdenOptions<T> {
    pub starts: usize,
    pub seed: u64,
    /// Relative residual target for the Newton polish.
    pub tol: T,
    /// Relative spread below which all starts count as the same solution.
    pub uniqueness_tol: T,
}

impl<T: Scalar> Default for LaneEmdenOptions<T> {
    fn default() -> Self {
        Self {
            starts: 8,
            seed: 0,
            tol: T::of(1e-11),
            uniqueness_tol: T::of(1e-6),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LaneEmdenResult<T> {
    pub field: Field<T>,
    /// `Φ₀(z) = A/p − B/q`, the least energy on the limit Nehari set.
    pub energy: T,
    /// Relative residual of `∇A/p − ∇B/q`.
    pub residual: T,
    /// Unit direction `z/‖z‖`.
    pub direction: Field<T>,
    /// `‖ẑ‖_q^{q/(p−q)}`, so that `z = scale·ẑ`.
    pub scale: T,
    /// Largest relative distance between the solutions of different starts.
    pub spread: T,
    pub unique: bool,
}

/// `(q ln A − p ln B)/(p − q)`; its minimizers over the sphere are the
/// Lane–Emden directions.
fn objective<T: Scalar>(problem: &Problem<T>, x: &[T]) -> Option<(T, Vec<T>)> {
    let e = problem.exponents();
    let g = problem.gradients(x);
    let d = g.data;
    if !(d.a > T::zero() && d.b > T::zero()) {
        return None;
    }
    let k = (e.p - e.q).recip();
    let val = k * (e.q * d.a.ln() - e.p * d.b.ln());
    Some((val, g.combine(k * e.q / d.a, -k * e.p / d.b, T::zero())))
}

pub fn solve_lane_emden<T: Scalar>(
    mesh: &Arc<Mesh<T>>,
    exps: Exponents<T>,
    opts: &LaneEmdenOptions<T>,
) -> Result<LaneEmdenResult<T>> {
    let problem = Problem::new(Weight::constant(mesh, T::zero()), exps)?;
    let metric = Metric::new(&problem);
    let dopts = DescentOptions {
        max_iter: 5_000,
        tol: T::of(1e-13),
        value_scale: T::one(),
        memory: 8,
    };
    let k = (exps.p - exps.q).recip();
    let mut solutions: Vec<(T, Vec<T>)> = Vec::new();
    let mut worst = T::zero();
    for start in 0..opts.starts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(start as u64);
        let x0: Vec<T> = (0..problem.n_dofs())
            .map(|_| T::of(rng.gen_range(0.05..1.0)))
            .collect();
        let out = descend(&problem, &metric, &x0, &dopts, |x| objective(&problem, x))
            .expect("positive starts are feasible");
        let x: Vec<T> = out.x.iter().map(|v| v.abs()).collect();
        let d = problem.coefficients(&x);
        let t = (d.b / d.a).powf(k);
        let z0: Vec<T> = x.iter().map(|&v| t * v).collect();
        let newton = damped_newton(
            z0,
            |z| problem.energy_gradient(z, T::one()),
            |z| problem.energy_hessian(z, T::one()),
            |z| problem.relative_residual(z, T::one()),
            |z| z.iter().all(|&v| v > T::zero()),
            opts.tol,
            50,
        );
        worst = worst.max(newton.measure);
        if !newton.converged {
            return Err(Error::NonConvergence {
                what: format!("Lane-Emden start {start}"),
                residual: newton.measure.as_f64(),
                best: problem.field(&newton.x).values().iter().map(|v| v.as_f64()).collect(),
            });
        }
        let energy = problem.energy(&newton.x, T::one());
        solutions.push((energy, newton.x));
    }
    solutions.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let (energy, z) = solutions[0].clone();
    let znorm = problem.norm(&z);
    let spread = solutions
        .iter()
        .map(|(_, w)| {
            let diff: Vec<T> = w.iter().zip(&z).map(|(&a, &b)| a - b).collect();
            problem.norm(&diff) / znorm
        })
        .fold(T::zero(), T::max);
    let direction: Vec<T> = z.iter().map(|&v| v / znorm).collect();
    let scale = problem.coefficients(&direction).b.powf(k);
    Ok(LaneEmdenResult {
        field: problem.field(&z),
        energy,
        residual: problem.relative_residual(&z, T::one()),
        direction: problem.field(&direction),
        scale,
        unique: spread <= opts.uniqueness_tol,
        spread,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow<T> {
    pub lambda: T,
    /// `‖u_λ/λ^{1/(p−q)} − z‖`.
    pub field_error: T,
    /// `max_v |t⁺_λ(v)/λ^{1/(p−q)} − ‖v‖_q^{q/(p−q)}|` over the sampled directions.
    pub scalar_error: T,
    /// `|Ĵ⁺_λ/λ^{p/(p−q)} − Φ₀(z)| / |Φ₀(z)|`.
    pub energy_ratio_error: T,
}

#[derive(Debug, Clone)]
pub struct ScalingTable<T> {
    /// In the order of the requested `λ` list.
    pub rows: Vec<ScalingRow<T>>,
    pub field_monotone: bool,
    pub scalar_monotone: bool,
    pub energy_monotone: bool,
}

impl<T: Scalar> ScalingTable<T> {
    /// Ratios of consecutive scalar errors.
    pub fn scalar_ratios(&self) -> Vec<T> {
        self.rows
            .windows(2)
            .map(|w| w[0].scalar_error / w[1].scalar_error)
            .collect()
    }

    /// Names of the error columns that fail to decrease along the list.
    pub fn violations(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if !self.field_monotone {
            v.push("field_error");
        }
        if !self.scalar_monotone {
            v.push("scalar_error");
        }
        if !self.energy_monotone {
            v.push("energy_ratio_error");
        }
        v
    }

    /// CSV with header `lambda,field_error,scalar_error,energy_ratio_error`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(["lambda", "field_error", "scalar_error", "energy_ratio_error"])?;
        for r in &self.rows {
            w.write_record([
                format!("{:e}", r.lambda),
                format!("{:e}", r.field_error),
                format!("{:e}", r.scalar_error),
                format!("{:e}", r.energy_ratio_error),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn decreasing<T: Scalar>(v: impl Iterator<Item = T>) -> bool {
    let v: Vec<T> = v.collect();
    v.windows(2).all(|w| w[1] < w[0])
}

/// Compares plus-branch points at each `λ` of a decreasing list with the
/// Lane–Emden limit. `directions` are the sampled directions for the
/// scalar error (normalized internally).
pub fn verify_scaling<T: Scalar>(
    problem: &Problem<T>,
    plus: &[BranchPoint<T>],
    lane: &LaneEmdenResult<T>,
    lambdas: &[T],
    directions: &[Vec<T>],
) -> Result<ScalingTable<T>> {
    let e = problem.exponents();
    let k = (e.p - e.q).recip();
    let z = lane.field.interior_values();
    let dirs: Vec<Vec<T>> = directions
        .iter()
        .filter_map(|v| problem.normalize(v))
        .collect();
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let point = plus
            .iter()
            .find(|p| p.branch == Branch::Plus && (p.lambda - lambda).abs() <= T::of(1e-12) * lambda)
            .ok_or_else(|| {
                Error::IncompleteData(format!("no plus-branch point at lambda = {lambda:e}"))
            })?;
        let s = lambda.powf(k);
        let u = point.field.interior_values();
        let diff: Vec<T> = u.iter().zip(&z).map(|(&a, &b)| a / s - b).collect();
        let field_error = problem.norm(&diff);
        let mut scalar_error = T::zero();
        for v in &dirs {
            let d = problem.coefficients(v);
            let t = project(&d, lambda, Branch::Plus)?;
            scalar_error = scalar_error.max((t / s - d.b.powf(k)).abs());
        }
        let ratio = point.energy / lambda.powf(e.p * k);
        let energy_ratio_error = ((ratio - lane.energy) / lane.energy).abs();
        rows.push(ScalingRow {
            lambda,
            field_error,
            scalar_error,
            energy_ratio_error,
        });
    }
    Ok(ScalingTable {
        field_monotone: decreasing(rows.iter().map(|r| r.field_error)),
        scalar_monotone: decreasing(rows.iter().map(|r| r.scalar_error)),
        energy_monotone: decreasing(rows.iter().map(|r| r.energy_ratio_error)),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branches::{minimize_branch, BranchOptions};
    use crate::discretization::build_interval_mesh;

    fn exps() -> Exponents<f64> {
        Exponents::new(2.0, 1.5, 2.5).unwrap()
    }

    #[test]
    fn single_dof_lane_emden() {
        let mesh = build_interval_mesh(2, 1.0).unwrap();
        let le = solve_lane_emden(&mesh, exps(), &LaneEmdenOptions::default()).unwrap();
        assert!((le.field.values()[1] - 0.015625).abs() < 1e-14);
        assert!((le.scale - 0.03125).abs() < 1e-14);
        assert!(le.energy < 0.0);
        assert!(le.residual < 1e-9);
        assert!(le.unique);
    }

    #[test]
    fn single_dof_scalar_error_decays_linearly() {
        let mesh = build_interval_mesh(2, 1.0).unwrap();
        let pr = Problem::new(Weight::constant(&mesh, 1.0), exps()).unwrap();
        let le = solve_lane_emden(&mesh, exps(), &LaneEmdenOptions::default()).unwrap();
        let lambdas = [1e-1, 1e-2, 1e-3];
        let plus: Vec<_> = lambdas
            .iter()
            .map(|&l| minimize_branch(&pr, l, Branch::Plus, None, &BranchOptions::default()).unwrap())
            .collect();
        let table = verify_scaling(&pr, &plus, &le, &lambdas, &[vec![0.5]]).unwrap();
        for r in table.scalar_ratios() {
            assert!((r - 10.0).abs() < 0.5, "{r}");
        }
        assert!(table.violations().is_empty());
    }

    #[test]
    fn increasing_errors_are_flagged() {
        let mesh = build_interval_mesh(2, 1.0).unwrap();
        let pr = Problem::new(Weight::constant(&mesh, 1.0), exps()).unwrap();
        let le = solve_lane_emden(&mesh, exps(), &LaneEmdenOptions::default()).unwrap();
        let lambdas = [1e-3, 1e-2];
        let plus: Vec<_> = lambdas
            .iter()
            .map(|&l| minimize_branch(&pr, l, Branch::Plus, None, &BranchOptions::default()).unwrap())
            .collect();
        let table = verify_scaling(&pr, &plus, &le, &lambdas, &[vec![0.5]]).unwrap();
        assert!(!table.scalar_monotone);
        assert!(table.violations().contains(&"scalar_error"));
    }

    #[test]
    fn missing_point_is_incomplete() {
        let mesh = build_interval_mesh(2, 1.0).unwrap();
        let pr = Problem::new(Weight::constant(&mesh, 1.0), exps()).unwrap();
        let le = solve_lane_emden(&mesh, exps(), &LaneEmdenOptions::default()).unwrap();
        assert!(matches!(
            verify_scaling(&pr, &[], &le, &[0.1], &[vec![0.5]]),
            Err(Error::IncompleteData(_))
        ));
    }
}
