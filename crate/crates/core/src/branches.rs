//! The two positive solution branches.
//!
//! For `λ ≤ λ*` each branch point minimizes the reduced functional
//! `J^∓(v) = Φ_λ(t^∓(v)·v)` over unit directions, then is polished by
//! Newton's method on `∇Φ_λ = 0`. Past `λ*` the minus and plus branches are
//! continued with warm starts while the directions are kept away from the
//! degenerate witnesses, until the `H` indicator of one of them collapses.

use std::io::Write;

use crate::discretization::Field;
use crate::error::{Branch, Error, Result};
use crate::extremal::{log_lambda_and_gradient, ExtremalResult};
use crate::fiber::project;
use crate::functionals::Problem;
use crate::optimize::{damped_newton, descend, DescentOptions, Metric};
use crate::scalar::{dot, Scalar};

#[derive(Debug, Clone, Copy)]
pub struct BranchOptions<T> {
    /// Target for the relative PDE residual of a branch point.
    pub tol: T,
    pub descent: DescentOptions<T>,
    pub newton_max_iter: usize,
}

impl<T: Scalar> Default for BranchOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::of(1e-10),
            descent: DescentOptions {
                max_iter: 2_000,
                tol: T::of(1e-12),
                value_scale: T::zero(),
                memory: 8,
            },
            newton_max_iter: 40,
        }
    }
}

/// One solution on a branch.
#[derive(Debug, Clone)]
pub struct BranchPoint<T> {
    pub branch: Branch,
    pub lambda: T,
    pub field: Field<T>,
    /// `Φ_λ(u)`, i.e. the value of `J^∓` at the minimizer.
    pub energy: T,
    /// Relative PDE residual, see [`Problem::relative_residual`].
    pub residual: T,
    /// `|A − λB − C| / (A + λB + |C|)`.
    pub nehari_residual: T,
    pub h: T,
    pub min_interior: T,
    pub norm: T,
    /// Distance of the `λ*` projection of the direction to the witness set.
    pub witness_distance: Option<T>,
}

impl<T: Scalar> BranchPoint<T> {
    fn assemble(problem: &Problem<T>, branch: Branch, lambda: T, u: &[T]) -> Self {
        let d = problem.coefficients(u);
        let field = problem.field(u);
        Self {
            branch,
            lambda,
            energy: d.energy(lambda),
            residual: problem.relative_residual(u, lambda),
            nehari_residual: d.nehari(lambda).abs() / d.nehari_scale(lambda),
            h: d.h_indicator(lambda),
            min_interior: field.min_interior(),
            norm: d.norm(),
            witness_distance: None,
            field,
        }
    }

    /// Unit direction `u/‖u‖`.
    pub fn direction(&self, problem: &Problem<T>) -> Vec<T> {
        problem
            .normalize(&self.field.interior_values())
            .expect("branch points are nonzero")
    }

    /// `|H| / (pA + λq B + γ|C|)`.
    pub fn relative_h(&self, problem: &Problem<T>) -> T {
        let d = problem.coefficients(&self.field.interior_values());
        self.h.abs() / d.h_scale(self.lambda)
    }

    /// Gap in the strict inequality each branch satisfies, positive when it
    /// holds: `(γ−q)C − (p−q)A` on the minus branch and
    /// `λ(γ−q)B − (γ−p)A` on the plus branch. On the Nehari set both are
    /// `∓H`.
    pub fn inequality_margin(&self, problem: &Problem<T>) -> T {
        let d = problem.coefficients(&self.field.interior_values());
        let e = problem.exponents();
        match self.branch {
            Branch::Minus => (e.gamma - e.q) * d.c - (e.p - e.q) * d.a,
            Branch::Plus => self.lambda * (e.gamma - e.q) * d.b - (e.gamma - e.p) * d.a,
        }
    }
}

/// `J^∓` at a unit direction with its Euclidean gradient `t·∇Φ_λ(t·v)`.
fn reduced<T: Scalar>(problem: &Problem<T>, v: &[T], lambda: T, branch: Branch) -> Result<(T, Vec<T>)> {
    let t = project(&problem.coefficients(v), lambda, branch)?;
    let u: Vec<T> = v.iter().map(|&x| t * x).collect();
    let value = problem.energy(&u, lambda);
    let grad = problem
        .energy_gradient(&u, lambda)
        .into_iter()
        .map(|g| t * g)
        .collect();
    Ok((value, grad))
}

/// Value of `J^∓_λ(v) = Φ_λ(t^∓(v)·v)` and its gradient projected onto the
/// tangent space `{w : ∇A(v)·w = 0}` of the unit sphere at `v`.
pub fn j_value_and_gradient<T: Scalar>(
    problem: &Problem<T>,
    v: &[T],
    lambda: T,
    branch: Branch,
) -> Result<(T, Vec<T>)> {
    let (value, mut grad) = reduced(problem, v, lambda, branch)?;
    let normal = problem.gradients(v).a;
    let nn = dot(&normal, &normal);
    if nn > T::zero() {
        let k = dot(&grad, &normal) / nn;
        grad.iter_mut().zip(&normal).for_each(|(g, &n)| *g -= k * n);
    }
    Ok((value, grad))
}

/// Feasibility filter applied on top of the projection requirement.
type Constraint<'a, T> = &'a dyn Fn(&[T]) -> bool;

fn default_start<T: Scalar>(problem: &Problem<T>) -> Vec<T> {
    problem
        .weight()
        .interior_values()
        .into_iter()
        .map(|f| if f < T::zero() { T::zero() } else { T::one() })
        .collect()
}

fn minimize_constrained<T: Scalar>(
    problem: &Problem<T>,
    metric: &Metric<T>,
    lambda: T,
    branch: Branch,
    start: &[T],
    opts: &BranchOptions<T>,
    constraint: Option<Constraint<'_, T>>,
) -> Result<BranchPoint<T>> {
    let allowed = |x: &[T]| constraint.map_or(true, |c| c(x));
    let eval = |x: &[T]| {
        if !allowed(x) {
            return None;
        }
        reduced(problem, x, lambda, branch).ok()
    };
    let mut x0 = problem
        .normalize(start)
        .ok_or_else(|| Error::Infeasible("zero start direction".into()))?;
    if let Err(e) = reduced(problem, &x0, lambda, branch) {
        match e {
            Error::NoProjection { .. } => {
                x0 = restore_projection(problem, metric, &x0, lambda, &allowed).ok_or(e)?;
            }
            other => return Err(Error::Infeasible(other.to_string())),
        }
    }
    if !allowed(&x0) {
        return Err(Error::Infeasible(
            "start direction violates the distance constraint".into(),
        ));
    }
    let first = descend(problem, metric, &x0, &opts.descent, eval)
        .ok_or_else(|| Error::Infeasible("start direction rejected".into()))?;
    // J(|v|) ≤ J(v); restart from the absolute value.
    let abs: Vec<T> = first.x.iter().map(|v| v.abs()).collect();
    let second = descend(problem, metric, &abs, &opts.descent, eval);
    let x = match second {
        Some(s) if s.value <= first.value => s.x,
        _ => first.x,
    };

    let t = project(&problem.coefficients(&x), lambda, branch)?;
    let u0: Vec<T> = x.iter().map(|&v| t * v.abs()).collect();
    let sign_ok = |u: &[T]| {
        let h = problem.coefficients(u).h_indicator(lambda);
        match branch {
            Branch::Minus => h < T::zero(),
            Branch::Plus => h > T::zero(),
        }
    };
    let out = damped_newton(
        u0.clone(),
        |u| problem.energy_gradient(u, lambda),
        |u| problem.energy_hessian(u, lambda),
        |u| problem.relative_residual(u, lambda),
        |u| u.iter().all(|&v| v > T::zero()) && sign_ok(u) && allowed(u),
        opts.tol,
        opts.newton_max_iter,
    );
    let point = BranchPoint::assemble(problem, branch, lambda, &out.x);
    if !out.converged {
        return Err(Error::NonConvergence {
            what: format!("{branch} branch point at lambda = {:e}", lambda.as_f64()),
            residual: out.measure.as_f64(),
            best: point.field.values().iter().map(|v| v.as_f64()).collect(),
        });
    }
    if !(point.min_interior > T::zero()) {
        return Err(Error::Infeasible(format!(
            "{branch} branch point is not positive (min {})",
            point.min_interior
        )));
    }
    Ok(point)
}

/// Raises `λ(v)` above `lambda` by a short ascent on `ln λ` so that both
/// fiber roots exist again; used when a warm start sits just past its own
/// degenerate value.
fn restore_projection<T: Scalar>(
    problem: &Problem<T>,
    metric: &Metric<T>,
    x0: &[T],
    lambda: T,
    allowed: &dyn Fn(&[T]) -> bool,
) -> Option<Vec<T>> {
    let target = (lambda * (T::one() + T::of(1e-8))).ln();
    let opts = DescentOptions {
        max_iter: 50,
        tol: T::zero(),
        value_scale: T::zero(),
        memory: 4,
    };
    let mut found: Option<Vec<T>> = None;
    // Maximize ln λ, stopping at the first iterate past the target.
    descend(problem, metric, x0, &opts, |x| {
        if found.is_some() || !allowed(x) {
            return None;
        }
        let (val, grad) = log_lambda_and_gradient(problem, x)?;
        if val > target {
            found = Some(x.to_vec());
        }
        Some((-val, grad.into_iter().map(|g| -g).collect()))
    });
    found
}

/// Minimizes `J^∓_λ` from `warm_start` (a field or direction; defaults to
/// the indicator of `{f ≥ 0}`) and polishes the minimizer into a positive
/// critical point of `Φ_λ`.
pub fn minimize_branch<T: Scalar>(
    problem: &Problem<T>,
    lambda: T,
    branch: Branch,
    warm_start: Option<&[T]>,
    opts: &BranchOptions<T>,
) -> Result<BranchPoint<T>> {
    let metric = Metric::new(problem);
    let start = warm_start.map_or_else(|| default_start(problem), <[T]>::to_vec);
    minimize_constrained(problem, &metric, lambda, branch, &start, opts, None)
}

/// Where and why continuation past `λ*` stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldReason {
    /// The warm-start directions already have no projection just past `λ*`.
    ProjectionAtStar,
    /// `|H|` fell below the fold tolerance.
    SmallH,
    /// The Nehari projection ceased to exist.
    NoProjection,
    /// The branch point could not be recovered (nonconvergence, loss of
    /// positivity or of the distance constraint).
    Lost,
    /// All requested steps succeeded.
    RangeExhausted,
}

impl FoldReason {
    pub fn as_str(self) -> &'static str {
        match self {
            FoldReason::ProjectionAtStar => "projection-at-star",
            FoldReason::SmallH => "small-H",
            FoldReason::NoProjection => "no-projection",
            FoldReason::Lost => "lost",
            FoldReason::RangeExhausted => "range-exhausted",
        }
    }
}

/// `(λ, H⁻, H⁺)` with both indicators divided by their natural scale.
#[derive(Debug, Clone, Copy)]
pub struct HSample<T> {
    pub lambda: T,
    pub h_minus: T,
    pub h_plus: T,
}

#[derive(Debug, Clone)]
pub struct FoldRecord<T> {
    /// Largest `λ` at which both branches were still found.
    pub lambda_bar: T,
    /// Smallest `λ` at which continuation failed, if it did.
    pub lambda_fail: Option<T>,
    pub reason: FoldReason,
    pub branch: Option<Branch>,
    /// Grid steps accepted beyond `λ*`.
    pub steps: usize,
    /// Largest (closest to zero) relative `H⁻` over accepted steps.
    pub delta_minus: Option<T>,
    /// Smallest relative `H⁺` over accepted steps.
    pub delta_plus: Option<T>,
    /// Relative `H` along the grid and the bisection refinement.
    pub h_trend: Vec<HSample<T>>,
}

#[derive(Debug, Clone, Default)]
pub struct BranchDiagram<T> {
    pub lambdas: Vec<T>,
    pub minus: Vec<BranchPoint<T>>,
    pub plus: Vec<BranchPoint<T>>,
    pub fold: Option<FoldRecord<T>>,
}

impl<T: Scalar> BranchDiagram<T> {
    pub fn points(&self, branch: Branch) -> &[BranchPoint<T>] {
        match branch {
            Branch::Minus => &self.minus,
            Branch::Plus => &self.plus,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.minus.is_empty() && self.plus.is_empty()
    }

    /// `(λ, Ĵ_λ)` along a branch.
    pub fn j_hat(&self, branch: Branch) -> Vec<(T, T)> {
        self.points(branch).iter().map(|p| (p.lambda, p.energy)).collect()
    }

    /// `Ĵ_λ` never increases along increasing `λ`.
    pub fn is_nonincreasing(&self, branch: Branch) -> bool {
        self.points(branch)
            .windows(2)
            .all(|w| w[1].energy <= w[0].energy)
    }

    pub fn plus_energies_negative(&self) -> bool {
        self.plus.iter().all(|p| p.energy < T::zero())
    }

    /// Appends another diagram (e.g. a continuation) and adopts its fold.
    pub fn extend(&mut self, other: BranchDiagram<T>) {
        self.lambdas.extend(other.lambdas);
        self.minus.extend(other.minus);
        self.plus.extend(other.plus);
        if other.fold.is_some() {
            self.fold = other.fold;
        }
    }

    /// CSV with header `branch,lambda,energy,residual,H,min_interior,norm`,
    /// minus points first.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(["branch", "lambda", "energy", "residual", "H", "min_interior", "norm"])?;
        for p in self.minus.iter().chain(&self.plus) {
            w.write_record([
                p.branch.as_str().to_string(),
                format!("{:e}", p.lambda),
                format!("{:e}", p.energy),
                format!("{:e}", p.residual),
                format!("{:e}", p.h),
                format!("{:e}", p.min_interior),
                format!("{:e}", p.norm),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_grid<T: Scalar>(grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Precondition("empty lambda grid".into()));
    }
    if !(grid[0] > T::zero()) || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Precondition(
            "lambda grid must be positive and strictly increasing".into(),
        ));
    }
    Ok(())
}

fn lex_cmp<T: Scalar>(a: &Field<T>, b: &Field<T>) -> std::cmp::Ordering {
    a.values()
        .iter()
        .zip(b.values())
        .find_map(|(x, y)| x.partial_cmp(y).filter(|o| o.is_ne()))
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Continuation on a grid in `(0, λ*]`: each `λ` is warm-started from the
/// previous minimizer and, when available, from the extremal witness; the
/// lower energy wins.
pub fn solve_branches<T: Scalar>(
    problem: &Problem<T>,
    grid: &[T],
    ext: Option<&ExtremalResult<T>>,
    opts: &BranchOptions<T>,
) -> Result<BranchDiagram<T>> {
    check_grid(grid)?;
    if let Some(ext) = ext {
        let top = grid[grid.len() - 1];
        if top > ext.lambda_star * (T::one() + T::of(1e-12)) {
            return Err(Error::Precondition(format!(
                "lambda grid reaches {top}, beyond lambda* = {}",
                ext.lambda_star
            )));
        }
    }
    let metric = Metric::new(problem);
    let seed = ext.map(|e| e.direction.interior_values());
    let mut diagram = BranchDiagram {
        lambdas: grid.to_vec(),
        ..Default::default()
    };
    for branch in Branch::BOTH {
        let mut warm: Option<Vec<T>> = None;
        for &lambda in grid {
            let mut starts: Vec<Vec<T>> = Vec::new();
            starts.extend(warm.clone());
            starts.extend(seed.clone());
            if starts.is_empty() {
                starts.push(default_start(problem));
            }
            let mut best: Option<BranchPoint<T>> = None;
            let mut last_err = None;
            for s in &starts {
                match minimize_constrained(problem, &metric, lambda, branch, s, opts, None) {
                    Ok(p) => {
                        let better = best.as_ref().map_or(true, |b| {
                            p.energy < b.energy
                                || (p.energy == b.energy && lex_cmp(&p.field, &b.field).is_lt())
                        });
                        if better {
                            best = Some(p);
                        }
                    }
                    Err(e) => last_err = Some(e),
                }
            }
            let mut point = best.ok_or_else(|| Error::AtLambda {
                branch,
                lambda: lambda.as_f64(),
                source: Box::new(last_err.expect("at least one start")),
            })?;
            if let Some(ext) = ext {
                point.witness_distance = star_distance(problem, ext, &point.direction(problem), branch);
            }
            warm = Some(point.direction(problem));
            match branch {
                Branch::Minus => diagram.minus.push(point),
                Branch::Plus => diagram.plus.push(point),
            }
        }
    }
    Ok(diagram)
}

/// Distance of `P^∓_{λ*}(v)` to the witness set, `None` without a projection.
fn star_distance<T: Scalar>(
    problem: &Problem<T>,
    ext: &ExtremalResult<T>,
    v: &[T],
    branch: Branch,
) -> Option<T> {
    let t = project(&problem.coefficients(v), ext.lambda_star, branch).ok()?;
    let u: Vec<T> = v.iter().map(|&x| t * x).collect();
    Some(ext.distance_to_witnesses(problem, &u))
}

#[derive(Debug, Clone, Copy)]
pub struct ContinuationOptions<T> {
    /// Continue over `(λ*, λ* + eps_max]`.
    pub eps_max: T,
    pub steps: usize,
    /// Minimal distance of `λ*` projections to the witness set.
    pub d_min: T,
    /// Fold when `|H| < fold_tol·(pA + λqB + γ|C|)`.
    pub fold_tol: T,
    /// Bisection steps locating the fold between grid points.
    pub refine: usize,
    pub branch: BranchOptions<T>,
}

impl<T: Scalar> Default for ContinuationOptions<T> {
    fn default() -> Self {
        Self {
            eps_max: T::of(0.05),
            steps: 20,
            d_min: T::of(1e-3),
            fold_tol: T::of(1e-3),
            refine: 12,
            branch: BranchOptions::default(),
        }
    }
}

type StepFailure = (FoldReason, Branch);

/// Continues both branches past `λ*` on the uniform grid
/// `λ* + k·eps_max/steps`, warm-starting from `at_star` (the branch points at
/// `λ*`, minus then plus) or from the witness direction when absent.
pub fn continue_past_star<T: Scalar>(
    problem: &Problem<T>,
    ext: &ExtremalResult<T>,
    at_star: Option<(&BranchPoint<T>, &BranchPoint<T>)>,
    opts: &ContinuationOptions<T>,
) -> Result<BranchDiagram<T>> {
    if opts.steps == 0 || !(opts.eps_max > T::zero()) {
        return Err(Error::Precondition("need eps_max > 0 and steps > 0".into()));
    }
    let ls = ext.lambda_star;
    let metric = Metric::new(problem);
    let mut warm = match at_star {
        Some((m, p)) => [m.direction(problem), p.direction(problem)],
        None => {
            let v = ext.direction.interior_values();
            [v.clone(), v]
        }
    };
    let step = opts.eps_max / T::of(opts.steps as f64);
    let mut diagram = BranchDiagram::default();

    // A direction that cannot be projected just past λ* means λ* is already
    // the end of the branch.
    let first = ls + step;
    for (v, branch) in warm.iter().zip(Branch::BOTH) {
        if project(&problem.coefficients(v), first, branch).is_err() {
            diagram.fold = Some(FoldRecord {
                lambda_bar: ls,
                lambda_fail: Some(first),
                reason: FoldReason::ProjectionAtStar,
                branch: Some(branch),
                steps: 0,
                delta_minus: None,
                delta_plus: None,
                h_trend: Vec::new(),
            });
            return Ok(diagram);
        }
    }
    if let Some((m, p)) = at_star {
        for (pt, branch) in [(m, Branch::Minus), (p, Branch::Plus)] {
            let d = star_distance(problem, ext, &pt.direction(problem), branch);
            if !d.is_some_and(|d| d > opts.d_min) {
                return Err(Error::Precondition(format!(
                    "{branch} branch point at lambda* is within d_min = {} of the witness set",
                    opts.d_min
                )));
            }
        }
    }

    let attempt = |lambda: T, warm: &[Vec<T>; 2]| -> Result<[BranchPoint<T>; 2], StepFailure> {
        let mut out = Vec::with_capacity(2);
        for (v, branch) in warm.iter().zip(Branch::BOTH) {
            let far = |x: &[T]| star_distance(problem, ext, x, branch).is_some_and(|d| d > opts.d_min);
            let mut p = match minimize_constrained(problem, &metric, lambda, branch, v, &opts.branch, Some(&far)) {
                Ok(p) => p,
                Err(Error::NoProjection { .. }) => return Err((FoldReason::NoProjection, branch)),
                Err(_) => return Err((FoldReason::Lost, branch)),
            };
            if p.relative_h(problem) < opts.fold_tol {
                return Err((FoldReason::SmallH, branch));
            }
            p.witness_distance = star_distance(problem, ext, &p.direction(problem), branch);
            out.push(p);
        }
        let plus = out.pop().expect("two points");
        let minus = out.pop().expect("two points");
        Ok([minus, plus])
    };
    let sample = |pts: &[BranchPoint<T>; 2], lambda: T| {
        let hm = pts[0].h / problem.coefficients(&pts[0].field.interior_values()).h_scale(lambda);
        let hp = pts[1].h / problem.coefficients(&pts[1].field.interior_values()).h_scale(lambda);
        HSample {
            lambda,
            h_minus: hm,
            h_plus: hp,
        }
    };

    let mut record = FoldRecord {
        lambda_bar: ls,
        lambda_fail: None,
        reason: FoldReason::RangeExhausted,
        branch: None,
        steps: 0,
        delta_minus: None,
        delta_plus: None,
        h_trend: Vec::new(),
    };
    for k in 1..=opts.steps {
        let lambda = ls + step * T::of(k as f64);
        match attempt(lambda, &warm) {
            Ok(pts) => {
                let s = sample(&pts, lambda);
                record.delta_minus = Some(record.delta_minus.map_or(s.h_minus, |d: T| d.max(s.h_minus)));
                record.delta_plus = Some(record.delta_plus.map_or(s.h_plus, |d: T| d.min(s.h_plus)));
                record.h_trend.push(s);
                record.steps = k;
                record.lambda_bar = lambda;
                warm = [pts[0].direction(problem), pts[1].direction(problem)];
                diagram.lambdas.push(lambda);
                let [m, p] = pts;
                diagram.minus.push(m);
                diagram.plus.push(p);
            }
            Err((reason, branch)) => {
                record.reason = reason;
                record.branch = Some(branch);
                record.lambda_fail = Some(lambda);
                let (mut lo, mut hi) = (record.lambda_bar, lambda);
                let mut lo_warm = warm.clone();
                for _ in 0..opts.refine {
                    let mid = T::of(0.5) * (lo + hi);
                    match attempt(mid, &lo_warm) {
                        Ok(pts) => {
                            record.h_trend.push(sample(&pts, mid));
                            lo_warm = [pts[0].direction(problem), pts[1].direction(problem)];
                            lo = mid;
                        }
                        Err((reason, branch)) => {
                            record.reason = reason;
                            record.branch = Some(branch);
                            hi = mid;
                        }
                    }
                }
                record.lambda_bar = lo;
                record.lambda_fail = Some(hi);
                break;
            }
        }
    }
    diagram.fold = Some(record);
    Ok(diagram)
}
