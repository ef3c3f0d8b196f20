//! The extremal value `λ* = inf{λ(u) : F(u) > 0}` and its witnesses.
//!
//! `λ(u)` is 0-homogeneous, so it is minimized over the unit sphere
//! `A(u) = 1` in logarithmic form,
//!
//! ```text
//! ln λ(u) = const + (1 + m) ln A − ln B − m ln C,    m = (p − q)/(γ − p),
//! ```
//!
//! from several random starts supported where `f > 0`. Each local minimum is
//! polished by Newton's method on the degenerate Nehari system
//! `∇A − λ∇B − ∇C = 0`, `A − λB − C = 0` in the unknowns `(u, λ)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::discretization::{Field, Weight};
use crate::error::{Error, Result};
use crate::fiber::{lambda_of, t_of};
use crate::functionals::{Exponents, Problem};
use crate::linalg::DenseMatrix;
use crate::optimize::{damped_newton, descend, DescentOptions, Metric};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
pub struct ExtremalOptions<T> {
    pub starts: usize,
    /// Relative decrease of `λ` below which a descent stops.
    pub tol: T,
    pub max_iter: usize,
    pub seed: u64,
    /// Minima within this relative distance of the best are kept as witnesses.
    pub witness_rtol: T,
}

impl<T: Scalar> Default for ExtremalOptions<T> {
    fn default() -> Self {
        Self {
            starts: 16,
            tol: T::of(1e-12),
            max_iter: 10_000,
            seed: 0,
            witness_rtol: T::of(1e-8),
        }
    }
}

/// A member of the degenerate Nehari set at `λ*`.
#[derive(Debug, Clone)]
pub struct Witness<T> {
    /// Unit direction, `A(v) = 1`.
    pub direction: Field<T>,
    /// `t(v)·v`.
    pub field: Field<T>,
    pub lambda: T,
}

/// Outcome of one descent start.
#[derive(Debug, Clone, Copy)]
pub struct StartRecord<T> {
    pub start: usize,
    pub lambda: T,
    pub iterations: usize,
    pub converged: bool,
    pub polished: bool,
}

#[derive(Debug, Clone)]
pub struct ExtremalResult<T> {
    /// Best value found over all starts. Not a certified global minimum.
    pub lambda_star: T,
    pub direction: Field<T>,
    pub witness: Field<T>,
    /// Euclidean norm of `∇A − λ*∇B − ∇C` at the witness.
    pub residual: T,
    /// The same residual divided by `‖∇A‖ + λ*‖∇B‖ + ‖∇C‖`.
    pub relative_residual: T,
    /// Distinct minimizers within `witness_rtol` of `λ*`, best first.
    pub witnesses: Vec<Witness<T>>,
    pub log: Vec<StartRecord<T>>,
}

impl<T: Scalar> ExtremalResult<T> {
    /// Distance `min ‖u − w‖` over witnesses `w` and their absolute values.
    pub fn distance_to_witnesses(&self, problem: &Problem<T>, u: &[T]) -> T {
        self.witnesses
            .iter()
            .flat_map(|w| {
                let wv = w.field.interior_values();
                let wa: Vec<T> = wv.iter().map(|v| v.abs()).collect();
                [wv, wa]
            })
            .map(|w| {
                let diff: Vec<T> = u.iter().zip(&w).map(|(&a, &b)| a - b).collect();
                problem.norm(&diff)
            })
            .fold(T::infinity(), T::min)
    }
}

/// `ln λ(x)` and its gradient; `None` outside `{F > 0}`.
pub fn log_lambda_and_gradient<T: Scalar>(problem: &Problem<T>, x: &[T]) -> Option<(T, Vec<T>)> {
    let g = problem.gradients(x);
    let d = g.data;
    if !(d.c > T::zero() && d.b > T::zero() && d.a > T::zero()) {
        return None;
    }
    let e = problem.exponents();
    let m = (e.p - e.q) / (e.gamma - e.p);
    let val = lambda_of(&d).ok()?.ln();
    let grad = g.combine((T::one() + m) / d.a, -d.b.recip(), -m / d.c);
    Some((val, grad))
}

/// Norm of the residual of the extreme equation
/// `−pΔ_p u − λq|u|^{q−2}u − γf|u|^{γ−2}u = 0`, i.e. of `∇A − λ∇B − ∇C`.
pub fn extreme_residual<T: Scalar>(
    u: &Field<T>,
    lambda: T,
    f: &Weight<T>,
    e: Exponents<T>,
) -> Result<T> {
    let problem = problem_on(u, f, e)?;
    let g = problem.gradients(&u.interior_values());
    Ok(crate::scalar::norm2(&g.combine(T::one(), -lambda, -T::one())))
}

/// [`extreme_residual`] divided by `‖∇A‖ + λ‖∇B‖ + ‖∇C‖`.
pub fn extreme_relative_residual<T: Scalar>(
    u: &Field<T>,
    lambda: T,
    f: &Weight<T>,
    e: Exponents<T>,
) -> Result<T> {
    let problem = problem_on(u, f, e)?;
    let g = problem.gradients(&u.interior_values());
    Ok(g.relative_norm(T::one(), -lambda, -T::one()))
}

fn problem_on<T: Scalar>(u: &Field<T>, f: &Weight<T>, e: Exponents<T>) -> Result<Problem<T>> {
    if !u.mesh().same_grid(f.mesh()) {
        return Err(Error::Dimension(
            "field and weight live on different meshes".into(),
        ));
    }
    Problem::new(f.clone(), e)
}

/// Random start: uniform values on nodes with `f ≥ 0`, zero where `f < 0`.
fn random_start<T: Scalar>(f_dofs: &[T], rng: &mut ChaCha8Rng) -> Vec<T> {
    f_dofs
        .iter()
        .map(|&fi| {
            let r: f64 = rng.gen_range(0.05..1.0);
            if fi < T::zero() {
                T::zero()
            } else {
                T::of(r)
            }
        })
        .collect()
}

/// Newton on `(u, λ) ↦ (∇A − λ∇B − ∇C, A − λB − C)`. Returns the unit
/// direction of the converged `u`.
fn polish_degenerate<T: Scalar>(problem: &Problem<T>, v: &[T], tol: T) -> Option<Vec<T>> {
    let d = problem.coefficients(v);
    let lam0 = lambda_of(&d).ok()?;
    let t0 = t_of(&d).ok()?;
    let n = v.len();
    let mut z: Vec<T> = v.iter().map(|&x| t0 * x).collect();
    z.push(lam0);

    let residual = |z: &[T]| {
        let (u, lam) = z.split_at(n);
        let g = problem.gradients(u);
        let mut r = g.combine(T::one(), -lam[0], -T::one());
        r.push(g.data.nehari(lam[0]));
        r
    };
    let jacobian = |z: &[T]| {
        let (u, lam) = z.split_at(n);
        let g = problem.gradients(u);
        let h = problem.hessians(u);
        let m: DenseMatrix<T> = h.combine(T::one(), -lam[0], -T::one());
        let col: Vec<T> = g.b.iter().map(|&b| -b).collect();
        let row = g.combine(T::one(), -lam[0], -T::one());
        m.bordered(&col, &row, -g.data.b)
    };
    let measure = |z: &[T]| {
        let (u, lam) = z.split_at(n);
        let g = problem.gradients(u);
        let eq = g.relative_norm(T::one(), -lam[0], -T::one());
        let nh = g.data.nehari(lam[0]).abs() / g.data.nehari_scale(lam[0]);
        eq.max(nh)
    };
    let admissible = |z: &[T]| z[n] > T::zero();
    let out = damped_newton(z, residual, jacobian, measure, admissible, tol, 50);
    let u = &out.x[..n];
    if !out.converged {
        return None;
    }
    // The minimizer is sign-definite; keep the nonnegative representative.
    let flip = u.iter().copied().sum::<T>() < T::zero();
    let u: Vec<T> = u.iter().map(|&x| if flip { -x } else { x }).collect();
    problem.normalize(&u)
}

/// Minimizes `λ(·)` over sphere directions with `F > 0`.
pub fn minimize_lambda<T: Scalar>(
    problem: &Problem<T>,
    opts: &ExtremalOptions<T>,
) -> Result<ExtremalResult<T>> {
    if !problem.weight().has_positive_part() {
        return Err(Error::NoPositiveWeight);
    }
    let f_dofs = problem.weight().interior_values();
    let metric = Metric::new(problem);
    let dopts = DescentOptions {
        max_iter: opts.max_iter,
        tol: opts.tol,
        value_scale: T::one(),
        memory: 8,
    };
    let polish_tol = T::of(1e-11).max(T::of(64.0) * T::epsilon());

    let mut minima: Vec<(T, Vec<T>)> = Vec::new();
    let mut log = Vec::with_capacity(opts.starts);
    for start in 0..opts.starts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(start as u64);
        let x0 = random_start(&f_dofs, &mut rng);
        let Some(out) = descend(problem, &metric, &x0, &dopts, |x| {
            log_lambda_and_gradient(problem, x)
        }) else {
            continue;
        };
        let lam_descent = out.value.exp();
        let mut best = (lam_descent, out.x);
        let mut polished = false;
        if let Some(v) = polish_degenerate(problem, &best.1, polish_tol) {
            if let Ok(lam) = lambda_of(&problem.coefficients(&v)) {
                // Newton lands on a critical point; keep it only if it is no
                // worse than the descent's minimum.
                if lam <= lam_descent * (T::one() + T::of(1e-12)) {
                    best = (lam, v);
                    polished = true;
                }
            }
        }
        log.push(StartRecord {
            start,
            lambda: best.0,
            iterations: out.iterations,
            converged: out.converged,
            polished,
        });
        minima.push(best);
    }
    if minima.is_empty() {
        return Err(Error::NoPositiveWeight);
    }

    // Best first; ties broken by the nodal vector for determinism.
    minima.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| lex_cmp(&a.1, &b.1))
    });
    let lambda_star = minima[0].0;
    let mut kept: Vec<(T, Vec<T>)> = Vec::new();
    for (lam, v) in minima {
        if lam > lambda_star * (T::one() + opts.witness_rtol) {
            continue;
        }
        let duplicate = kept.iter().any(|(_, w)| {
            let diff: Vec<T> = v.iter().zip(w).map(|(&a, &b)| a - b).collect();
            problem.norm(&diff) < T::of(1e-5)
        });
        if !duplicate {
            kept.push((lam, v));
        }
    }
    let witnesses: Vec<Witness<T>> = kept
        .into_iter()
        .map(|(lam, v)| {
            let t = t_of(&problem.coefficients(&v)).expect("F > 0 on minimizers");
            let u: Vec<T> = v.iter().map(|&x| t * x).collect();
            Witness {
                direction: problem.field(&v),
                field: problem.field(&u),
                lambda: lam,
            }
        })
        .collect();

    let best = &witnesses[0];
    let u = best.field.interior_values();
    let g = problem.gradients(&u);
    let residual = crate::scalar::norm2(&g.combine(T::one(), -lambda_star, -T::one()));
    let relative_residual = g.relative_norm(T::one(), -lambda_star, -T::one());
    Ok(ExtremalResult {
        lambda_star,
        direction: best.direction.clone(),
        witness: best.field.clone(),
        residual,
        relative_residual,
        witnesses,
        log,
    })
}

fn lex_cmp<T: Scalar>(a: &[T], b: &[T]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    std::cmp::Ordering::Equal
}
