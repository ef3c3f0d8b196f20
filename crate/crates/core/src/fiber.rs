//! Fiber maps `t ↦ Φ_λ(t·u)` reduced to the coefficients `(A, B, C)`.
//!
//! Critical points of the fiber map are the positive roots of
//!
//! ```text
//! g(t) = t^{p−q} A − λ B − t^{γ−q} C
//! ```
//!
//! For `C > 0`, `g` rises from `−λB` to a single maximum at `t(u)` and then
//! falls to `−∞`; the sign of `g(t(u))`, equivalently of `λ(u) − λ`, decides
//! between two roots, a double root, or none. For `C ≤ 0`, `g` is increasing
//! and has exactly one root.

use std::fmt;

use crate::error::{Branch, Error, Result};
use crate::functionals::FiberData;
use crate::scalar::Scalar;

/// Relative band `|λ − λ(u)| ≤ rtol·λ(u)` classified as the degenerate case.
pub const CASE_II_RTOL: f64 = 1e-10;

/// Default relative bracket width for the root finder.
pub const DEFAULT_ROOT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FiberCase {
    /// `F(u) ≤ 0`: one minimum, no maximum.
    FNonPos,
    /// Two critical points `t⁺ < t⁻`.
    CaseI,
    /// A single degenerate (saddle) critical point `t⁰`.
    CaseII,
    /// Strictly decreasing fiber map, no critical points.
    CaseIII,
}

impl FiberCase {
    pub fn label(self) -> &'static str {
        match self {
            FiberCase::FNonPos => "FNonPos",
            FiberCase::CaseI => "I",
            FiberCase::CaseII => "II",
            FiberCase::CaseIII => "III",
        }
    }
}

impl fmt::Display for FiberCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberAnalysis<T> {
    pub case: FiberCase,
    pub t_plus: Option<T>,
    pub t_minus: Option<T>,
    pub t_zero: Option<T>,
    /// Present iff `C > 0`.
    pub lambda_of_u: Option<T>,
    /// Present iff `C > 0`.
    pub t_of_u: Option<T>,
}

impl<T: Scalar> FiberAnalysis<T> {
    /// Root on the requested branch, falling back to `t⁰` in the degenerate case.
    pub fn root(&self, branch: Branch) -> Option<T> {
        match branch {
            Branch::Minus => self.t_minus.or(self.t_zero),
            Branch::Plus => self.t_plus.or(self.t_zero),
        }
    }
}

/// `g(t) = t^{p−q}A − λB − t^{γ−q}C`; roots are the Nehari scales.
pub fn fiber_equation<T: Scalar>(d: &FiberData<T>, lambda: T, t: T) -> T {
    let e = d.exps;
    t.powf(e.p - e.q) * d.a - lambda * d.b - t.powf(e.gamma - e.q) * d.c
}

fn fiber_equation_dt<T: Scalar>(d: &FiberData<T>, t: T) -> T {
    let e = d.exps;
    (e.p - e.q) * t.powf(e.p - e.q - T::one()) * d.a
        - (e.gamma - e.q) * t.powf(e.gamma - e.q - T::one()) * d.c
}

fn check_data<T: Scalar>(d: &FiberData<T>) -> Result<()> {
    if !(d.a > T::zero()) || !(d.b > T::zero()) || !d.c.is_finite() {
        return Err(Error::DegenerateData(format!(
            "need A > 0 and B > 0, got A = {}, B = {}",
            d.a, d.b
        )));
    }
    Ok(())
}

/// Scale `t(u)` at which the fiber map of `u` degenerates.
pub fn t_of<T: Scalar>(d: &FiberData<T>) -> Result<T> {
    if !(d.c > T::zero()) {
        return Err(Error::UndefinedLambda(d.c.as_f64()));
    }
    let e = d.exps;
    Ok(((e.p - e.q) / (e.gamma - e.q) * d.a / d.c).powf((e.gamma - e.p).recip()))
}

/// The unique `λ(u)` at which the fiber map has a degenerate critical point:
///
/// `λ(u) = ((γ−p)/(γ−q))·(A/B)·(((p−q)/(γ−q))·(A/C))^{(p−q)/(γ−p)}`
pub fn lambda_of<T: Scalar>(d: &FiberData<T>) -> Result<T> {
    if !(d.c > T::zero()) {
        return Err(Error::UndefinedLambda(d.c.as_f64()));
    }
    if !(d.a > T::zero()) || !(d.b > T::zero()) {
        return Err(Error::DegenerateData(format!(
            "need A > 0 and B > 0, got A = {}, B = {}",
            d.a, d.b
        )));
    }
    let e = d.exps;
    let m = (e.p - e.q) / (e.gamma - e.p);
    let k = (e.gamma - e.p) / (e.gamma - e.q);
    let c = (e.p - e.q) / (e.gamma - e.q);
    Ok(k * (d.a / d.b) * (c * d.a / d.c).powf(m))
}

fn case_ii_band<T: Scalar>() -> T {
    T::of(CASE_II_RTOL).max(T::of(16.0) * T::epsilon())
}

/// Classifies the fiber map and locates its critical points.
pub fn analyze<T: Scalar>(d: &FiberData<T>, lambda: T, tol: T) -> Result<FiberAnalysis<T>> {
    check_data(d)?;
    if !(lambda > T::zero()) {
        return Err(Error::DegenerateData(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let rtol = tol.max(T::of(4.0) * T::epsilon());
    let e = d.exps;
    // t0: the q- and p-terms balance; g(t0) ≤ 0 whenever C ≥ 0.
    let t0 = (lambda * d.b / d.a).powf((e.p - e.q).recip());

    if d.c <= T::zero() {
        let t = if d.c == T::zero() {
            t0
        } else {
            let nc = -d.c;
            let t2 = (lambda * d.b / nc).powf((e.gamma - e.q).recip());
            let half = T::of(0.5) * lambda * d.b;
            let lo = (half / d.a)
                .powf((e.p - e.q).recip())
                .min((half / nc).powf((e.gamma - e.q).recip()));
            let hi = t0.min(t2);
            bracketed_root(d, lambda, lo, hi, rtol)
        };
        return Ok(FiberAnalysis {
            case: FiberCase::FNonPos,
            t_plus: Some(t),
            t_minus: None,
            t_zero: None,
            lambda_of_u: None,
            t_of_u: None,
        });
    }

    let lam_u = lambda_of(d)?;
    let t_u = t_of(d)?;
    let mut out = FiberAnalysis {
        case: FiberCase::CaseIII,
        t_plus: None,
        t_minus: None,
        t_zero: None,
        lambda_of_u: Some(lam_u),
        t_of_u: Some(t_u),
    };
    if (lambda - lam_u).abs() <= case_ii_band::<T>() * lam_u {
        out.case = FiberCase::CaseII;
        out.t_zero = Some(t_u);
        return Ok(out);
    }
    if lambda > lam_u {
        return Ok(out);
    }
    // t1: beyond it the γ-term dominates the p-term, so g(t1) = −λB < 0.
    let t1 = (d.a / d.c).powf((e.gamma - e.p).recip());
    out.case = FiberCase::CaseI;
    out.t_plus = Some(bracketed_root(d, lambda, t0.min(t_u), t_u, rtol));
    out.t_minus = Some(bracketed_root(d, lambda, t_u, t1.max(t_u), rtol));
    Ok(out)
}

/// Root of `g` on `[lo, hi]` with a single sign change: bisection (geometric
/// while the bracket spans more than a factor 2) followed by one guarded
/// Newton step.
fn bracketed_root<T: Scalar>(d: &FiberData<T>, lambda: T, lo: T, hi: T, rtol: T) -> T {
    let g = |t: T| fiber_equation(d, lambda, t);
    let (mut lo, mut hi) = (lo, hi);
    let (glo, ghi) = (g(lo), g(hi));
    if glo == T::zero() {
        return lo;
    }
    if ghi == T::zero() {
        return hi;
    }
    if glo.signum() == ghi.signum() {
        // Rounding at a near-double root; the closer endpoint is the answer.
        return if glo.abs() < ghi.abs() { lo } else { hi };
    }
    let lo_negative = glo < T::zero();
    let two = T::of(2.0);
    for _ in 0..400 {
        if hi - lo <= rtol * hi {
            break;
        }
        let mid = if lo > T::zero() && hi > two * lo {
            (lo * hi).sqrt()
        } else {
            T::of(0.5) * (lo + hi)
        };
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == T::zero() {
            return mid;
        }
        if (gm < T::zero()) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = T::of(0.5) * (lo + hi);
    let gt = g(t);
    let slope = fiber_equation_dt(d, t);
    if slope != T::zero() && slope.is_finite() {
        let tn = t - gt / slope;
        if tn >= lo && tn <= hi && g(tn).abs() <= gt.abs() {
            return tn;
        }
    }
    t
}

/// Scale `t` placing `t·v` on the requested Nehari set; falls back to the
/// degenerate root `t⁰` when `λ = λ(v)`.
pub fn project<T: Scalar>(d: &FiberData<T>, lambda: T, branch: Branch) -> Result<T> {
    project_with_tol(d, lambda, branch, T::of(DEFAULT_ROOT_TOL))
}

pub fn project_with_tol<T: Scalar>(
    d: &FiberData<T>,
    lambda: T,
    branch: Branch,
    tol: T,
) -> Result<T> {
    analyze(d, lambda, tol)?
        .root(branch)
        .ok_or(Error::NoProjection {
            branch,
            lambda: lambda.as_f64(),
        })
}

/// `∂t_λ^∓/∂λ = t·(t^q B) / H_λ(t·u)` on the requested branch.
pub fn dt_dlambda<T: Scalar>(d: &FiberData<T>, lambda: T, branch: Branch) -> Result<T> {
    let fa = analyze(d, lambda, T::of(DEFAULT_ROOT_TOL))?;
    if fa.case == FiberCase::CaseII {
        return Err(Error::DegenerateDerivative);
    }
    let t = match branch {
        Branch::Minus => fa.t_minus,
        Branch::Plus => fa.t_plus,
    }
    .ok_or(Error::NoRoot(branch))?;
    let dt = d.scaled(t);
    let h = dt.h_indicator(lambda);
    if h == T::zero() {
        return Err(Error::DegenerateDerivative);
    }
    Ok(t * dt.b / h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::Exponents;
    use proptest::prelude::*;

    fn e() -> Exponents<f64> {
        Exponents::new(2.0, 1.5, 2.5).unwrap()
    }

    fn data(a: f64, b: f64, c: f64) -> FiberData<f64> {
        FiberData::new(a, b, c, e())
    }

    // Quadratic-in-sqrt(t) oracle for (2, 1.5, 2.5): C s² − A s + λB = 0.
    fn quad_roots(a: f64, b: f64, c: f64, l: f64) -> (f64, f64) {
        let disc = (a * a - 4.0 * l * b * c).sqrt();
        let s_plus = 2.0 * l * b / (a + disc);
        let s_minus = (a + disc) / (2.0 * c);
        (s_plus * s_plus, s_minus * s_minus)
    }

    #[test]
    fn classification_examples() {
        let fa = analyze(&data(1.0, 1.0, 0.0), 1.0, 1e-13).unwrap();
        assert_eq!(fa.case, FiberCase::FNonPos);
        assert!((fa.t_plus.unwrap() - 1.0).abs() < 1e-14);
        assert!(fa.t_minus.is_none() && fa.t_zero.is_none());

        let fa = analyze(&data(1.0, 1.0, 1.0), 0.2, 1e-13).unwrap();
        assert_eq!(fa.case, FiberCase::CaseI);
        assert!((fa.t_plus.unwrap() - 0.076_393_2).abs() < 1e-7);
        assert!((fa.t_minus.unwrap() - 0.523_606_8).abs() < 1e-7);
        assert!((fa.t_of_u.unwrap() - 0.25).abs() < 1e-15);
        assert!((fa.lambda_of_u.unwrap() - 0.25).abs() < 1e-15);

        let fa = analyze(&data(1.0, 1.0, 1.0), 0.25, 1e-13).unwrap();
        assert_eq!(fa.case, FiberCase::CaseII);
        assert!((fa.t_zero.unwrap() - 0.25).abs() < 1e-15);

        let fa = analyze(&data(1.0, 1.0, 1.0), 0.3, 1e-13).unwrap();
        assert_eq!(fa.case, FiberCase::CaseIII);
        assert!(fa.t_plus.is_none() && fa.t_minus.is_none() && fa.t_zero.is_none());
    }

    #[test]
    fn degenerate_data_rejected() {
        assert!(matches!(
            analyze(&data(0.0, 1.0, 1.0), 0.2, 1e-13),
            Err(Error::DegenerateData(_))
        ));
        assert!(matches!(
            analyze(&data(1.0, 0.0, 1.0), 0.2, 1e-13),
            Err(Error::DegenerateData(_))
        ));
    }

    #[test]
    fn lambda_of_examples() {
        assert!((lambda_of(&data(1.0, 1.0, 1.0)).unwrap() - 0.25).abs() < 1e-15);
        let scaled = data(1.0, 1.0, 1.0).scaled(2.0);
        assert!((lambda_of(&scaled).unwrap() - 0.25).abs() < 1e-15);
        assert!(matches!(
            lambda_of(&data(1.0, 1.0, -1.0)),
            Err(Error::UndefinedLambda(_))
        ));
        // Unnormalized one-dof coefficients.
        assert!((lambda_of(&data(4.0, 0.5, 0.5)).unwrap() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn dt_dlambda_examples() {
        let d = data(1.0, 1.0, 1.0);
        let plus = dt_dlambda(&d, 0.2, Branch::Plus).unwrap();
        assert!((plus - 1.236_068_0).abs() < 1e-7, "{plus}");
        assert!(dt_dlambda(&d, 0.2, Branch::Minus).unwrap() < 0.0);
        assert!(matches!(
            dt_dlambda(&d, 0.25, Branch::Plus),
            Err(Error::DegenerateDerivative)
        ));
        assert!(matches!(
            dt_dlambda(&d, 0.3, Branch::Minus),
            Err(Error::NoRoot(Branch::Minus))
        ));
        assert!(matches!(
            dt_dlambda(&data(1.0, 1.0, -1.0), 0.3, Branch::Minus),
            Err(Error::NoRoot(Branch::Minus))
        ));
        assert!(dt_dlambda(&data(1.0, 1.0, -1.0), 0.3, Branch::Plus).unwrap() > 0.0);
    }

    #[test]
    fn project_examples() {
        let d = data(1.0, 1.0, 1.0);
        assert!((project(&d, 0.2, Branch::Minus).unwrap() - 0.523_606_8).abs() < 1e-7);
        assert!((project(&d, 0.25, Branch::Minus).unwrap() - 0.25).abs() < 1e-15);
        assert!((project(&data(1.0, 1.0, 0.0), 1.0, Branch::Plus).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(
            project(&d, 0.3, Branch::Plus),
            Err(Error::NoProjection { .. })
        ));
        assert!(project(&data(1.0, 1.0, 0.0), 1.0, Branch::Minus).is_err());
    }

    #[test]
    fn sign_patterns_of_g() {
        // Case I: g < 0, > 0, < 0 on the three intervals cut by the roots.
        let d = data(1.0, 1.0, 1.0);
        let fa = analyze(&d, 0.2, 1e-13).unwrap();
        let (tp, tm) = (fa.t_plus.unwrap(), fa.t_minus.unwrap());
        assert!(fiber_equation(&d, 0.2, 0.5 * tp) < 0.0);
        assert!(fiber_equation(&d, 0.2, 0.5 * (tp + tm)) > 0.0);
        assert!(fiber_equation(&d, 0.2, 2.0 * tm) < 0.0);
        // Case III: negative everywhere sampled.
        for k in 1..200 {
            assert!(fiber_equation(&d, 0.3, k as f64 * 0.01) < 0.0);
        }
    }

    #[test]
    fn monotone_roots_in_lambda() {
        let d = data(2.0, 0.7, 1.3);
        let lam_u = lambda_of(&d).unwrap();
        let mut prev: Option<(f64, f64)> = None;
        for k in 1..50 {
            let l = lam_u * k as f64 / 50.0;
            let fa = analyze(&d, l, 1e-13).unwrap();
            let (tp, tm) = (fa.t_plus.unwrap(), fa.t_minus.unwrap());
            if let Some((pp, pm)) = prev {
                assert!(tp > pp, "t+ not increasing");
                assert!(tm < pm, "t- not decreasing");
            }
            prev = Some((tp, tm));
        }
    }

    #[test]
    fn gap_collapses_like_sqrt() {
        let d = data(1.0, 1.0, 1.0);
        let lam_u = lambda_of(&d).unwrap();
        let mut gaps = Vec::new();
        for k in 2..=6 {
            let l = lam_u * (1.0 - 10f64.powi(-k));
            let fa = analyze(&d, l, 1e-13).unwrap();
            gaps.push(fa.t_minus.unwrap() - fa.t_plus.unwrap());
        }
        for w in gaps.windows(2) {
            assert!(w[1] > 0.0 && w[1] < w[0]);
            // Gap ∝ √(λ(u) − λ): a factor √10 per decade.
            assert!((w[0] / w[1] - 10f64.sqrt()).abs() < 0.05, "{}", w[0] / w[1]);
        }
    }

    #[test]
    fn non_quadratic_family_roots() {
        let e = Exponents::new(3.0f64, 1.2, 4.1).unwrap();
        let d = FiberData::new(2.0, 0.4, 0.9, e);
        let lam_u = lambda_of(&d).unwrap();
        let fa = analyze(&d, 0.5 * lam_u, 1e-13).unwrap();
        for t in [fa.t_plus.unwrap(), fa.t_minus.unwrap()] {
            let g = fiber_equation(&d, 0.5 * lam_u, t);
            assert!(g.abs() <= 1e-12 * (d.a + 0.5 * lam_u * d.b + d.c));
        }
        assert!(fa.t_plus < fa.t_of_u && fa.t_of_u < fa.t_minus);
    }

    #[test]
    fn f32_analysis() {
        let e = Exponents::new(2.0f32, 1.5, 2.5).unwrap();
        let fa = analyze(&FiberData::new(1.0f32, 1.0, 1.0, e), 0.2, 1e-13).unwrap();
        assert_eq!(fa.case, FiberCase::CaseI);
        assert!((fa.t_plus.unwrap() - 0.076_393_2).abs() < 1e-6);
        assert!((fa.t_minus.unwrap() - 0.523_606_8).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn roots_satisfy_fiber_equation(
            a in 0.01f64..100.0, b in 0.01f64..100.0, c in -100.0f64..100.0, frac in 0.01f64..3.0,
        ) {
            let d = data(a, b, c);
            let lambda = if c > 0.0 { frac * lambda_of(&d).unwrap() } else { frac };
            let fa = analyze(&d, lambda, 1e-13).unwrap();
            for t in [fa.t_plus, fa.t_minus, fa.t_zero].into_iter().flatten() {
                let g = fiber_equation(&d, lambda, t);
                prop_assert!(g.abs() <= 1e-10 * (a + lambda * b + c.abs()), "g = {g}");
            }
            if fa.case == FiberCase::CaseI {
                prop_assert!(fa.t_plus.unwrap() < fa.t_of_u.unwrap());
                prop_assert!(fa.t_of_u.unwrap() < fa.t_minus.unwrap());
            }
            if fa.case == FiberCase::CaseIII {
                prop_assert!(lambda > fa.lambda_of_u.unwrap());
            }
        }

        #[test]
        fn roots_scale_inversely(
            a in 0.1f64..10.0, b in 0.1f64..10.0, c in 0.1f64..10.0,
            frac in 0.05f64..0.95, s in 0.2f64..5.0,
        ) {
            let d = data(a, b, c);
            let lambda = frac * lambda_of(&d).unwrap();
            let fa = analyze(&d, lambda, 1e-13).unwrap();
            let fs = analyze(&d.scaled(s), lambda, 1e-13).unwrap();
            prop_assert_eq!(fa.case, fs.case);
            for (r, rs) in [(fa.t_plus, fs.t_plus), (fa.t_minus, fs.t_minus)] {
                let (r, rs) = (r.unwrap(), rs.unwrap());
                prop_assert!((rs * s - r).abs() <= 1e-11 * r);
            }
        }

        #[test]
        fn matches_quadratic_oracle(
            a in 0.1f64..10.0, b in 0.1f64..10.0, c in 0.1f64..10.0, frac in 0.0f64..0.999,
        ) {
            let d = data(a, b, c);
            let lambda = (frac * lambda_of(&d).unwrap()).max(1e-6);
            let fa = analyze(&d, lambda, 1e-13).unwrap();
            let (tp, tm) = quad_roots(a, b, c, lambda);
            prop_assert!((fa.t_plus.unwrap() - tp).abs() <= 1e-10 * tp);
            prop_assert!((fa.t_minus.unwrap() - tm).abs() <= 1e-10 * tm);
        }

        #[test]
        fn h_sign_tracks_root_order(
            a in 0.1f64..10.0, b in 0.1f64..10.0, c in -10.0f64..10.0, frac in 0.01f64..0.99,
        ) {
            // u scaled to its own root sits at t = 1 of its fiber; H < 0 iff
            // that root is the larger one.
            let d = data(a, b, c);
            let lambda = if c > 0.0 { frac * lambda_of(&d).unwrap() } else { frac };
            let fa = analyze(&d, lambda, 1e-13).unwrap();
            prop_assert!(d.scaled(fa.t_plus.unwrap()).h_indicator(lambda) > 0.0);
            if let Some(tm) = fa.t_minus {
                prop_assert!(d.scaled(tm).h_indicator(lambda) < 0.0);
            }
        }

        #[test]
        fn dt_dlambda_matches_central_differences(
            a in 0.1f64..10.0, b in 0.1f64..10.0, c in 0.1f64..10.0, frac in 0.05f64..0.9,
        ) {
            let d = data(a, b, c);
            let lambda = frac * lambda_of(&d).unwrap();
            let step = 1e-6 * lambda;
            for branch in Branch::BOTH {
                let fd = (project(&d, lambda + step, branch).unwrap()
                    - project(&d, lambda - step, branch).unwrap()) / (2.0 * step);
                let an = dt_dlambda(&d, lambda, branch).unwrap();
                prop_assert!((fd - an).abs() <= 1e-5 * an.abs(), "{branch}: fd {fd} vs {an}");
            }
        }
    }
}
