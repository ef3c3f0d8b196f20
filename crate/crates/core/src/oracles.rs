//! Slow, independent reference computations used to cross-check the
//! solvers: closed-form fiber roots, central-difference gradients, a dense
//! root count along the fiber, and a shooting solver for the `p = 2`
//! boundary value problem on `(0, 1)`.

use crate::error::{Error, Result};
use crate::functionals::{Exponents, FiberData};
use crate::scalar::Scalar;

/// Fiber roots `(t⁺, t⁻)` from the quadratic `C s² − A s + λB = 0` in
/// `s = t^{p−q}`; valid only when `γ − q = 2(p − q)`. A double root is
/// returned twice; `None` when the discriminant is negative.
pub fn closed_form_roots<T: Scalar>(d: &FiberData<T>, lambda: T) -> Result<Option<(T, T)>> {
    let e = d.exps;
    if !e.is_quadratic_family() {
        return Err(Error::UnsupportedExponents(format!(
            "need gamma - q = 2(p - q), got p = {}, q = {}, gamma = {}",
            e.p, e.q, e.gamma
        )));
    }
    if !(d.c > T::zero()) {
        return Err(Error::Precondition("closed-form roots need C > 0".into()));
    }
    let disc = d.a * d.a - T::of(4.0) * lambda * d.b * d.c;
    if disc < T::zero() {
        return Ok(None);
    }
    // Cancellation-free pair: the small root from the product of the roots.
    let big = (d.a + disc.sqrt()) / (T::of(2.0) * d.c);
    let small = lambda * d.b / (d.c * big);
    let k = (e.p - e.q).recip();
    Ok(Some((small.powf(k), big.powf(k))))
}

/// Central-difference gradient of `func` at `x`.
pub fn fd_gradient<T: Scalar>(func: impl Fn(&[T]) -> T, x: &[T], step: T) -> Vec<T> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|i| {
            let xi = x[i];
            y[i] = xi + step;
            let fp = func(&y);
            y[i] = xi - step;
            let fm = func(&y);
            y[i] = xi;
            (fp - fm) / (T::of(2.0) * step)
        })
        .collect()
}

/// Number of sign changes of `g(t) = t^{p−q}A − λB − t^{γ−q}C` on a
/// log-spaced grid of `samples` points in `[t_lo, t_hi]`.
pub fn count_fiber_roots<T: Scalar>(d: &FiberData<T>, lambda: T, t_lo: T, t_hi: T, samples: usize) -> usize {
    let e = d.exps;
    let g = |t: T| t.powf(e.p - e.q) * d.a - lambda * d.b - t.powf(e.gamma - e.q) * d.c;
    let (l0, l1) = (t_lo.ln(), t_hi.ln());
    let n = samples.max(2);
    let mut prev = g(t_lo);
    let mut count = 0;
    for i in 1..n {
        let t = (l0 + (l1 - l0) * T::of(i as f64) / T::of((n - 1) as f64)).exp();
        let cur = g(t);
        if (cur > T::zero()) != (prev > T::zero()) {
            count += 1;
        }
        prev = cur;
    }
    count
}

/// Root counts of the fiber equation over a list of `λ` values, each found
/// by [`count_fiber_roots`] over `t ∈ [1e−12, 1e12]·t_ref`.
pub fn lambda_scan<T: Scalar>(d: &FiberData<T>, lambdas: &[T], samples: usize) -> Vec<(T, usize)> {
    let t_ref = (d.a / d.b.max(T::min_positive_value())).abs().max(T::one());
    let lo = t_ref * T::of(1e-12);
    let hi = t_ref * T::of(1e12);
    lambdas
        .iter()
        .map(|&l| (l, count_fiber_roots(d, l, lo, hi, samples)))
        .collect()
}

/// Integrated solution of `u'' = −λ|u|^{q−2}u − f(x)|u|^{γ−2}u`,
/// `u(0) = 0`, `u'(0) = slope` on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct ShootingResult<T> {
    pub slope: T,
    /// Uniform grid `x_i = i/steps`.
    pub x: Vec<T>,
    pub u: Vec<T>,
    pub du: Vec<T>,
    pub terminal: T,
    /// `(slope, u(1))` for each bisection step.
    pub history: Vec<(T, T)>,
    /// `u > 0` on every grid point in `(0, 1)`.
    pub positive: bool,
}

impl<T: Scalar> ShootingResult<T> {
    /// Cubic Hermite interpolation of the profile at `x ∈ [0, 1]`.
    pub fn sample(&self, x: T) -> T {
        let n = self.x.len() - 1;
        let h = T::one() / T::of(n as f64);
        let pos = (x / h).max(T::zero()).min(T::of(n as f64));
        let i = pos.floor().to_usize().unwrap_or(0).min(n - 1);
        let s = pos - T::of(i as f64);
        let (s2, s3) = (s * s, s * s * s);
        let two = T::of(2.0);
        let three = T::of(3.0);
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = -two * s3 + three * s2;
        let h11 = s3 - s2;
        h00 * self.u[i] + h10 * h * self.du[i] + h01 * self.u[i + 1] + h11 * h * self.du[i + 1]
    }
}

/// Fixed-step RK4 for the shooting problem. Returns `(u, u')` on the grid.
fn integrate<T: Scalar, F: Fn(T) -> T>(
    lambda: T,
    f: &F,
    e: Exponents<T>,
    slope: T,
    steps: usize,
) -> (Vec<T>, Vec<T>) {
    let h = T::one() / T::of(steps as f64);
    let half = T::of(0.5);
    let rhs = |x: T, u: T| {
        let au = u.abs();
        if au == T::zero() {
            return T::zero();
        }
        -(lambda * au.powf(e.q - T::one()) + f(x) * au.powf(e.gamma - T::one())) * u.signum()
    };
    let mut u = Vec::with_capacity(steps + 1);
    let mut du = Vec::with_capacity(steps + 1);
    let (mut y, mut z) = (T::zero(), slope);
    u.push(y);
    du.push(z);
    for i in 0..steps {
        let x = T::of(i as f64) * h;
        let k1y = z;
        let k1z = rhs(x, y);
        let k2y = z + half * h * k1z;
        let k2z = rhs(x + half * h, y + half * h * k1y);
        let k3y = z + half * h * k2z;
        let k3z = rhs(x + half * h, y + half * h * k2y);
        let k4y = z + h * k3z;
        let k4z = rhs(x + h, y + h * k3y);
        y += h / T::of(6.0) * (k1y + T::of(2.0) * k2y + T::of(2.0) * k3y + k4y);
        z += h / T::of(6.0) * (k1z + T::of(2.0) * k2z + T::of(2.0) * k3z + k4z);
        u.push(y);
        du.push(z);
    }
    (u, du)
}

fn check_p2<T: Scalar>(e: Exponents<T>) -> Result<()> {
    if (e.p - T::of(2.0)).abs() > T::epsilon() {
        return Err(Error::Precondition(format!(
            "shooting needs p = 2, got p = {}",
            e.p
        )));
    }
    Ok(())
}

/// Default RK4 step count: `10240 = 40·256`, so that every node of a uniform
/// mesh with 256 cells (or any divisor) is a grid point, and `h < 1e−4`.
pub const SHOOTING_STEPS: usize = 10_240;

/// `u(1; s)` of the shooting problem and whether the profile stays positive
/// on `(0, 1)`.
pub fn shoot_terminal<T: Scalar, F: Fn(T) -> T>(
    lambda: T,
    f: &F,
    e: Exponents<T>,
    slope: T,
    steps: usize,
) -> Result<(T, bool)> {
    check_p2(e)?;
    let (u, _) = integrate(lambda, f, e, slope, steps);
    let positive = u[1..steps].iter().all(|&v| v > T::zero());
    Ok((u[steps], positive))
}

/// Bisection on the initial slope until `|u(1)| < 1e−10`.
pub fn shoot<T: Scalar, F: Fn(T) -> T>(
    lambda: T,
    f: F,
    e: Exponents<T>,
    bracket: (T, T),
    steps: usize,
) -> Result<ShootingResult<T>> {
    check_p2(e)?;
    let (mut lo, mut hi) = bracket;
    let term = |s: T| integrate(lambda, &f, e, s, steps).0[steps];
    let (mut ulo, uhi) = (term(lo), term(hi));
    if ulo.is_nan() || uhi.is_nan() || (ulo > T::zero()) == (uhi > T::zero()) {
        return Err(Error::Bracket {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    let target = T::of(1e-10);
    let mut history = vec![(lo, ulo), (hi, uhi)];
    let mut best = if ulo.abs() < uhi.abs() { (lo, ulo) } else { (hi, uhi) };
    for _ in 0..200 {
        if best.1.abs() < target {
            break;
        }
        let mid = T::of(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let um = term(mid);
        history.push((mid, um));
        if um.abs() < best.1.abs() {
            best = (mid, um);
        }
        if (um > T::zero()) == (ulo > T::zero()) {
            lo = mid;
            ulo = um;
        } else {
            hi = mid;
        }
    }
    if !(best.1.abs() < target) {
        return Err(Error::NonConvergence {
            what: "shooting bisection".into(),
            residual: best.1.abs().as_f64(),
            best: vec![best.0.as_f64()],
        });
    }
    let (u, du) = integrate(lambda, &f, e, best.0, steps);
    let h = T::one() / T::of(steps as f64);
    let x = (0..=steps).map(|i| T::of(i as f64) * h).collect();
    let positive = u[1..steps].iter().all(|&v| v > T::zero());
    Ok(ShootingResult {
        slope: best.0,
        x,
        terminal: best.1,
        u,
        du,
        history,
        positive,
    })
}

/// Log-spaced scan of slopes in `[s_min, s_max]`; returns consecutive slope
/// pairs across which `u(1; s)` changes sign and the side with `u(1) > 0`
/// is positive on the whole interval.
pub fn scan_slopes<T: Scalar, F: Fn(T) -> T>(
    lambda: T,
    f: &F,
    e: Exponents<T>,
    s_min: T,
    s_max: T,
    samples: usize,
    steps: usize,
) -> Result<Vec<(T, T)>> {
    check_p2(e)?;
    let n = samples.max(2);
    let (l0, l1) = (s_min.ln(), s_max.ln());
    let mut out = Vec::new();
    let mut prev: Option<(T, T, bool)> = None;
    for i in 0..n {
        let s = (l0 + (l1 - l0) * T::of(i as f64) / T::of((n - 1) as f64)).exp();
        let (u1, pos) = shoot_terminal(lambda, f, e, s, steps)?;
        if let Some((sp, up, pp)) = prev {
            let changes = (u1 > T::zero()) != (up > T::zero());
            let positive_side = if u1 > T::zero() { pos } else { pp };
            if changes && positive_side {
                out.push((sp, s));
            }
        }
        prev = Some((s, u1, pos));
    }
    Ok(out)
}
