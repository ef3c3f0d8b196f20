//! Minimization of scale-invariant objectives over the unit sphere
//! `{A(x) = 1}` and a damped Newton iteration for the polishing step.
//!
//! The sphere descent is limited-memory BFGS in the metric of the `p = 2`
//! stiffness matrix. Each trial point is renormalized, and trial points the
//! objective rejects (returns `None`) are treated as infeasible by the line
//! search.

use std::collections::VecDeque;

use crate::functionals::Problem;
use crate::linalg::{DenseMatrix, Lu};
use crate::scalar::{dot, norm2, Scalar};

#[derive(Debug, Clone, Copy)]
pub struct DescentOptions<T> {
    pub max_iter: usize,
    /// Stop once the objective decreases by less than `tol·(|f| + value_scale)`
    /// on three consecutive iterations.
    pub tol: T,
    pub value_scale: T,
    pub memory: usize,
}

impl<T: Scalar> Default for DescentOptions<T> {
    fn default() -> Self {
        Self {
            max_iter: 10_000,
            tol: T::of(1e-12),
            value_scale: T::zero(),
            memory: 8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DescentOutcome<T> {
    pub x: Vec<T>,
    pub value: T,
    pub iterations: usize,
    pub converged: bool,
}

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

/// Metric used by the descent: `‖d‖_K² = dᵀKd` with `K` the stiffness matrix.
pub(crate) struct Metric<T> {
    k: DenseMatrix<T>,
    lu: Lu<T>,
}

impl<T: Scalar> Metric<T> {
    pub(crate) fn new(problem: &Problem<T>) -> Self {
        let k = problem.stiffness();
        let lu = k.clone().lu().expect("stiffness matrix is nonsingular");
        Self { k, lu }
    }

    fn solve(&self, g: &[T]) -> Vec<T> {
        self.lu.solve(g)
    }

    fn norm(&self, d: &[T]) -> T {
        dot(d, &self.k.mul_vec(d)).max(T::zero()).sqrt()
    }
}

/// Minimizes `eval` over the sphere starting from `x0`. Returns `None` when
/// the start itself is infeasible.
pub(crate) fn descend<T, F>(
    problem: &Problem<T>,
    metric: &Metric<T>,
    x0: &[T],
    opts: &DescentOptions<T>,
    mut eval: F,
) -> Option<DescentOutcome<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> Option<(T, Vec<T>)>,
{
    let mut x = problem.normalize(x0)?;
    let (mut f, mut g) = eval(&x)?;
    let mut mem: VecDeque<(Vec<T>, Vec<T>, T)> = VecDeque::with_capacity(opts.memory);
    let c1 = T::of(ARMIJO);
    let half = T::of(0.5);
    let mut quiet = 0;
    let mut converged = false;
    let mut iterations = 0;
    let first_step = T::of(0.25) * metric.norm(&x);

    while iterations < opts.max_iter {
        iterations += 1;
        let mut d = two_loop(metric, &mem, &g);
        let mut slope = dot(&g, &d);
        if !(slope < T::zero()) {
            mem.clear();
            d = two_loop(metric, &mem, &g);
            slope = dot(&g, &d);
            if !(slope < T::zero()) {
                converged = true;
                break;
            }
        }
        if mem.is_empty() {
            // Without curvature information the gradient's magnitude says
            // nothing about the step; start from a fixed length instead.
            let len = metric.norm(&d);
            if len > T::zero() {
                let s = first_step / len;
                d.iter_mut().for_each(|v| *v *= s);
                slope *= s;
            }
        }

        let mut alpha = T::one();
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<T> = x.iter().zip(&d).map(|(&xi, &di)| xi + alpha * di).collect();
            if let Some(xn) = problem.normalize(&trial) {
                if let Some((fnew, gnew)) = eval(&xn) {
                    if fnew.is_finite() && fnew <= f + c1 * alpha * slope {
                        accepted = Some((xn, fnew, gnew));
                        break;
                    }
                }
            }
            alpha *= half;
        }
        let Some((xn, fnew, gnew)) = accepted else {
            // No decrease left at rounding level.
            converged = true;
            break;
        };

        let s: Vec<T> = xn.iter().zip(&x).map(|(&a, &b)| a - b).collect();
        let y: Vec<T> = gnew.iter().zip(&g).map(|(&a, &b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > T::epsilon() * norm2(&s) * norm2(&y) {
            if mem.len() == opts.memory {
                mem.pop_front();
            }
            mem.push_back((s, y, sy.recip()));
        }

        let decrease = f - fnew;
        x = xn;
        f = fnew;
        g = gnew;
        if decrease <= opts.tol * (f.abs() + opts.value_scale) {
            quiet += 1;
            if quiet >= 3 {
                converged = true;
                break;
            }
        } else {
            quiet = 0;
        }
    }
    Some(DescentOutcome {
        x,
        value: f,
        iterations,
        converged,
    })
}

/// L-BFGS two-loop recursion with `K⁻¹` as the initial inverse Hessian.
fn two_loop<T: Scalar>(metric: &Metric<T>, mem: &VecDeque<(Vec<T>, Vec<T>, T)>, g: &[T]) -> Vec<T> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(mem.len());
    for (s, y, rho) in mem.iter().rev() {
        let a = *rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, &yi)| *qi -= a * yi);
        alphas.push(a);
    }
    let mut r = metric.solve(&q);
    if let Some((s, y, _)) = mem.back() {
        let ky = metric.solve(y);
        let yky = dot(y, &ky);
        if yky > T::zero() {
            let scale = dot(s, y) / yky;
            r.iter_mut().for_each(|v| *v *= scale);
        }
    }
    for ((s, y, rho), a) in mem.iter().zip(alphas.into_iter().rev()) {
        let b = *rho * dot(y, &r);
        r.iter_mut().zip(s).for_each(|(ri, &si)| *ri += (a - b) * si);
    }
    r.iter_mut().for_each(|v| *v = -*v);
    r
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome<T> {
    pub x: Vec<T>,
    pub measure: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Damped Newton for `F(x) = 0`: full steps are halved until `‖F‖` decreases
/// and `admissible` accepts the point. `measure` is the scale-free residual
/// compared against `tol`.
pub(crate) fn damped_newton<T, R, J, M, A>(
    x0: Vec<T>,
    residual: R,
    jacobian: J,
    measure: M,
    admissible: A,
    tol: T,
    max_iter: usize,
) -> NewtonOutcome<T>
where
    T: Scalar,
    R: Fn(&[T]) -> Vec<T>,
    J: Fn(&[T]) -> DenseMatrix<T>,
    M: Fn(&[T]) -> T,
    A: Fn(&[T]) -> bool,
{
    let mut x = x0;
    let mut r = residual(&x);
    let mut rn = norm2(&r);
    let mut m = measure(&x);
    let mut iterations = 0;
    let mut extra = 0;
    while iterations < max_iter {
        if m <= tol {
            // One more step usually buys the remaining digits.
            if extra == 1 {
                break;
            }
            extra += 1;
        }
        iterations += 1;
        let Some(lu) = jacobian(&x).lu() else { break };
        let dx = lu.solve(&r);
        if dx.iter().any(|v| !v.is_finite()) {
            break;
        }
        let mut alpha = T::one();
        let mut accepted = false;
        for _ in 0..30 {
            let xn: Vec<T> = x.iter().zip(&dx).map(|(&a, &b)| a - alpha * b).collect();
            if admissible(&xn) {
                let rn_new = residual(&xn);
                let nn = norm2(&rn_new);
                if nn.is_finite() && nn < (T::one() - T::of(1e-4) * alpha) * rn {
                    x = xn;
                    r = rn_new;
                    rn = nn;
                    accepted = true;
                    break;
                }
            }
            alpha *= T::of(0.5);
        }
        if !accepted {
            break;
        }
        m = measure(&x);
    }
    NewtonOutcome {
        converged: m <= tol,
        x,
        measure: m,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{build_interval_mesh, Weight};
    use crate::functionals::Exponents;

    #[test]
    fn rayleigh_quotient_reaches_first_eigenvalue() {
        // min A/‖x‖² over the sphere is the smallest stiffness eigenvalue
        // scaled by h: 4 sin²(πh/2)/h.
        let mesh = build_interval_mesh(32, 1.0).unwrap();
        let w = Weight::constant(&mesh, 1.0);
        let pr = Problem::new(w, Exponents::new(2.0, 1.5, 2.5).unwrap()).unwrap();
        let metric = Metric::new(&pr);
        let n = pr.n_dofs();
        let x0: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7) % 5) as f64).collect();
        let out = descend(&pr, &metric, &x0, &DescentOptions::default(), |x| {
            let g = pr.gradients(x);
            let s = dot(x, x);
            let val = g.data.a / s;
            let grad = g
                .a
                .iter()
                .zip(x)
                .map(|(&ga, &xi)| ga / s - 2.0 * g.data.a * xi / (s * s))
                .collect();
            Some((val, grad))
        })
        .unwrap();
        let h = 1.0 / 32.0;
        let expect = 4.0 * (std::f64::consts::PI * h / 2.0).sin().powi(2) / (h * h) * h;
        assert!(out.converged);
        assert!((out.value - expect).abs() < 1e-9 * expect, "{} vs {expect}", out.value);
    }

    #[test]
    fn newton_solves_scalar_equation() {
        let out = damped_newton(
            vec![3.0f64],
            |x| vec![x[0] * x[0] - 2.0],
            |x| {
                let mut m = DenseMatrix::zeros(1);
                m.set(0, 0, 2.0 * x[0]);
                m
            },
            |x| (x[0] * x[0] - 2.0).abs(),
            |_| true,
            1e-14,
            50,
        );
        assert!(out.converged);
        assert!((out.x[0] - 2f64.sqrt()).abs() < 1e-15);
    }
}
