//! Scalar coefficients `A = ‖u‖^p`, `B = ‖u‖_q^q`, `C = F(u)`, the energy
//! `Φ_λ = A/p − λB/q − C/γ`, its exact discrete gradient and the
//! second-fiber-derivative indicator `H_λ = pA − λqB − γC`.

use std::sync::Arc;

use crate::discretization::{Field, Mesh, Weight};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::{norm2, signed_pow, Scalar};

/// Exponents `(p, q, γ)` with `1 < q < p < γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents<T> {
    pub p: T,
    pub q: T,
    pub gamma: T,
}

impl<T: Scalar> Exponents<T> {
    /// Checks the ordering `1 < q < p < γ`.
    pub fn new(p: T, q: T, gamma: T) -> Result<Self> {
        let all_finite = p.is_finite() && q.is_finite() && gamma.is_finite();
        if !all_finite || !(T::one() < q) {
            return Err(Error::InvalidExponents(format!("need 1 < q, got q = {q}")));
        }
        if !(q < p) {
            return Err(Error::InvalidExponents(format!(
                "need q < p, got q = {q}, p = {p}"
            )));
        }
        if !(p < gamma) {
            return Err(Error::InvalidExponents(format!(
                "need p < gamma, got p = {p}, gamma = {gamma}"
            )));
        }
        Ok(Self { p, q, gamma })
    }

    /// Also checks `γ < p*` for the spatial dimension `n`.
    pub fn for_dimension(p: T, q: T, gamma: T, n: usize) -> Result<Self> {
        let e = Self::new(p, q, gamma)?;
        if let Some(crit) = e.critical_exponent(n) {
            if !(gamma < crit) {
                return Err(Error::InvalidExponents(format!(
                    "need gamma < p* = {crit} in dimension {n}, got gamma = {gamma}"
                )));
            }
        }
        Ok(e)
    }

    /// Critical Sobolev exponent `Np/(N−p)`, or `None` when `N ≤ p`.
    pub fn critical_exponent(&self, n: usize) -> Option<T> {
        let n = T::of(n as f64);
        (n > self.p).then(|| n * self.p / (n - self.p))
    }

    /// `γ − q == 2(p − q)`: the fiber equation is quadratic in `t^{p−q}`.
    pub fn is_quadratic_family(&self) -> bool {
        let lhs = self.gamma - self.q;
        let rhs = T::of(2.0) * (self.p - self.q);
        (lhs - rhs).abs() <= T::of(1e-12) * rhs.abs().max(T::one())
    }
}

/// The fiber map in three numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberData<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub exps: Exponents<T>,
}

impl<T: Scalar> FiberData<T> {
    pub fn new(a: T, b: T, c: T, exps: Exponents<T>) -> Self {
        Self { a, b, c, exps }
    }

    /// Coefficients of `s·u`.
    pub fn scaled(&self, s: T) -> Self {
        let e = self.exps;
        Self {
            a: s.powf(e.p) * self.a,
            b: s.powf(e.q) * self.b,
            c: s.powf(e.gamma) * self.c,
            exps: e,
        }
    }

    pub fn energy(&self, lambda: T) -> T {
        let e = self.exps;
        self.a / e.p - lambda * self.b / e.q - self.c / e.gamma
    }

    /// `A − λB − C`, i.e. `DΦ_λ(u)·u`.
    pub fn nehari(&self, lambda: T) -> T {
        self.a - lambda * self.b - self.c
    }

    pub fn h_indicator(&self, lambda: T) -> T {
        let e = self.exps;
        e.p * self.a - lambda * e.q * self.b - e.gamma * self.c
    }

    /// `A + λB + |C|`, the natural scale for the Nehari residual.
    pub fn nehari_scale(&self, lambda: T) -> T {
        self.a + lambda * self.b + self.c.abs()
    }

    /// `pA + λqB + γ|C|`, the natural scale for `H`.
    pub fn h_scale(&self, lambda: T) -> T {
        let e = self.exps;
        e.p * self.a + lambda * e.q * self.b + e.gamma * self.c.abs()
    }

    /// The norm `‖u‖ = A^{1/p}`.
    pub fn norm(&self) -> T {
        self.a.powf(self.exps.p.recip())
    }
}

/// Coefficients with their gradients with respect to the interior values.
#[derive(Debug, Clone)]
pub struct CoefficientGradients<T> {
    pub data: FiberData<T>,
    pub a: Vec<T>,
    pub b: Vec<T>,
    pub c: Vec<T>,
}

impl<T: Scalar> CoefficientGradients<T> {
    /// Gradient of `αA + βB + κC`.
    pub fn combine(&self, alpha: T, beta: T, kappa: T) -> Vec<T> {
        self.a
            .iter()
            .zip(&self.b)
            .zip(&self.c)
            .map(|((&ga, &gb), &gc)| alpha * ga + beta * gb + kappa * gc)
            .collect()
    }

    /// `‖Σ‖ / (|α|‖∇A‖ + |β|‖∇B‖ + |κ|‖∇C‖)` for the same combination.
    pub fn relative_norm(&self, alpha: T, beta: T, kappa: T) -> T {
        let num = norm2(&self.combine(alpha, beta, kappa));
        let den = alpha.abs() * norm2(&self.a)
            + beta.abs() * norm2(&self.b)
            + kappa.abs() * norm2(&self.c);
        if den == T::zero() {
            num
        } else {
            num / den
        }
    }
}

/// Dense Hessians of `A`, `B`, `C` at a point.
#[derive(Debug, Clone)]
pub struct CoefficientHessians<T> {
    pub a: DenseMatrix<T>,
    pub b: DenseMatrix<T>,
    pub c: DenseMatrix<T>,
}

impl<T: Scalar> CoefficientHessians<T> {
    pub fn combine(&self, alpha: T, beta: T, kappa: T) -> DenseMatrix<T> {
        let mut m = DenseMatrix::zeros(self.a.dim());
        m.add_scaled(alpha, &self.a);
        m.add_scaled(beta, &self.b);
        m.add_scaled(kappa, &self.c);
        m
    }
}

/// A discretized concave–convex problem: mesh, weight and exponents.
///
/// All methods act on interior nodal values ("dofs").
#[derive(Debug, Clone)]
pub struct Problem<T> {
    mesh: Arc<Mesh<T>>,
    weight: Weight<T>,
    f_dofs: Vec<T>,
    exps: Exponents<T>,
}

impl<T: Scalar> Problem<T> {
    pub fn new(weight: Weight<T>, exps: Exponents<T>) -> Result<Self> {
        let mesh = Arc::clone(weight.mesh());
        if let Some(crit) = exps.critical_exponent(mesh.dimension()) {
            if !(exps.gamma < crit) {
                return Err(Error::InvalidExponents(format!(
                    "need gamma < p* = {crit}, got gamma = {}",
                    exps.gamma
                )));
            }
        }
        let f_dofs = weight.interior_values();
        Ok(Self {
            mesh,
            weight,
            f_dofs,
            exps,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh<T>> {
        &self.mesh
    }

    pub fn weight(&self) -> &Weight<T> {
        &self.weight
    }

    pub fn exponents(&self) -> Exponents<T> {
        self.exps
    }

    pub fn n_dofs(&self) -> usize {
        self.mesh.n_interior()
    }

    pub fn field(&self, dofs: &[T]) -> Field<T> {
        Field::from_interior(&self.mesh, dofs).expect("dof vector matches mesh")
    }

    pub fn coefficients(&self, x: &[T]) -> FiberData<T> {
        let e = self.exps;
        let full = self.mesh.scatter(x);
        let a = self
            .mesh
            .cell_gradients(&full)
            .iter()
            .zip(self.mesh.cell_weights())
            .map(|(g, &w)| w * grad_norm_pow(g, e.p))
            .sum();
        let wn = self.mesh.node_weight();
        let mut b = T::zero();
        let mut c = T::zero();
        for (&xi, &fi) in x.iter().zip(&self.f_dofs) {
            let ax = xi.abs();
            b += ax.powf(e.q);
            c += fi * ax.powf(e.gamma);
        }
        FiberData::new(a, wn * b, wn * c, e)
    }

    /// Norm `‖u‖ = A(u)^{1/p}`.
    pub fn norm(&self, x: &[T]) -> T {
        self.grad_term(x).powf(self.exps.p.recip())
    }

    fn grad_term(&self, x: &[T]) -> T {
        let full = self.mesh.scatter(x);
        self.mesh
            .cell_gradients(&full)
            .iter()
            .zip(self.mesh.cell_weights())
            .map(|(g, &w)| w * grad_norm_pow(g, self.exps.p))
            .sum()
    }

    pub fn gradients(&self, x: &[T]) -> CoefficientGradients<T> {
        let e = self.exps;
        let mesh = &self.mesh;
        let full = mesh.scatter(x);
        let (sx, sy) = mesh.stencil();
        let mut ga_full = vec![T::zero(); mesh.n_nodes()];
        let mut a = T::zero();
        for (cell, (g, &w)) in mesh.cell_gradients(&full).iter().zip(mesh.cell_weights()).enumerate() {
            let r2 = g[0] * g[0] + g[1] * g[1];
            a += w * grad_norm_pow(g, e.p);
            if r2 == T::zero() {
                continue;
            }
            // d|g|^p = p |g|^{p-2} g · dg
            let k = w * e.p * r2.powf((e.p - T::of(2.0)) / T::of(2.0));
            for (j, &node) in mesh.cell(cell).iter().enumerate() {
                ga_full[node] += k * (g[0] * sx[j] + g[1] * sy[j]);
            }
        }
        let wn = mesh.node_weight();
        let n = x.len();
        let mut gb = Vec::with_capacity(n);
        let mut gc = Vec::with_capacity(n);
        let (mut b, mut c) = (T::zero(), T::zero());
        for (&xi, &fi) in x.iter().zip(&self.f_dofs) {
            let ax = xi.abs();
            b += ax.powf(e.q);
            c += fi * ax.powf(e.gamma);
            gb.push(wn * e.q * signed_pow(xi, e.q));
            gc.push(wn * e.gamma * fi * signed_pow(xi, e.gamma));
        }
        CoefficientGradients {
            data: FiberData::new(a, wn * b, wn * c, e),
            a: mesh.gather(&ga_full),
            b: gb,
            c: gc,
        }
    }

    /// Dense Hessians of the three coefficients.
    ///
    /// The `B` Hessian is singular at zero nodal values when `q < 2`; those
    /// entries are evaluated at a floor of `ε·max|x|`.
    pub fn hessians(&self, x: &[T]) -> CoefficientHessians<T> {
        let e = self.exps;
        let mesh = &self.mesh;
        let n = x.len();
        let two = T::of(2.0);
        let full = mesh.scatter(x);
        let (sx, sy) = mesh.stencil();
        let mut ha = DenseMatrix::zeros(n);
        let grads = mesh.cell_gradients(&full);
        let gscale = grads
            .iter()
            .fold(T::zero(), |m, g| m.max((g[0] * g[0] + g[1] * g[1]).sqrt()));
        let gfloor = (gscale * T::epsilon().sqrt()).max(T::min_positive_value());
        for (cell, (g, &w)) in grads.iter().zip(mesh.cell_weights()).enumerate() {
            let r = (g[0] * g[0] + g[1] * g[1]).sqrt();
            // p = 2 is exact at r = 0; p > 2 vanishes there.
            let (k1, k2) = if r == T::zero() && e.p > two {
                (T::zero(), T::zero())
            } else {
                let rr = if e.p < two { r.max(gfloor) } else { r };
                let k1 = w * e.p * if e.p == two { T::one() } else { rr.powf(e.p - two) };
                let k2 = if e.p == two {
                    T::zero()
                } else {
                    w * e.p * (e.p - two) * rr.powf(e.p - T::of(4.0))
                };
                (k1, k2)
            };
            let nodes = mesh.cell(cell);
            for (i, &ni) in nodes.iter().enumerate() {
                let Some(di) = mesh.dof_of_node(ni) else { continue };
                let gi = g[0] * sx[i] + g[1] * sy[i];
                for (j, &nj) in nodes.iter().enumerate() {
                    let Some(dj) = mesh.dof_of_node(nj) else { continue };
                    let gj = g[0] * sx[j] + g[1] * sy[j];
                    let v = k1 * (sx[i] * sx[j] + sy[i] * sy[j]) + k2 * gi * gj;
                    ha.add(di, dj, v);
                }
            }
        }
        let wn = mesh.node_weight();
        let xfloor = (x.iter().fold(T::zero(), |m, v| m.max(v.abs())) * T::epsilon())
            .max(T::min_positive_value());
        let mut hb = DenseMatrix::zeros(n);
        let mut hc = DenseMatrix::zeros(n);
        for (i, (&xi, &fi)) in x.iter().zip(&self.f_dofs).enumerate() {
            let ax = xi.abs();
            let axq = if e.q < two { ax.max(xfloor) } else { ax };
            hb.set(i, i, wn * e.q * (e.q - T::one()) * axq.powf(e.q - two));
            hc.set(i, i, wn * e.gamma * (e.gamma - T::one()) * fi * ax.powf(e.gamma - two));
        }
        CoefficientHessians { a: ha, b: hb, c: hc }
    }

    /// Stiffness matrix of the `p = 2` Dirichlet form; used as a
    /// preconditioner (Sobolev metric) by the sphere descents.
    pub fn stiffness(&self) -> DenseMatrix<T> {
        let mesh = &self.mesh;
        let n = mesh.n_interior();
        let (sx, sy) = mesh.stencil();
        let mut k = DenseMatrix::zeros(n);
        for (cell, &w) in mesh.cell_weights().iter().enumerate() {
            let nodes = mesh.cell(cell);
            for (i, &ni) in nodes.iter().enumerate() {
                let Some(di) = mesh.dof_of_node(ni) else { continue };
                for (j, &nj) in nodes.iter().enumerate() {
                    let Some(dj) = mesh.dof_of_node(nj) else { continue };
                    k.add(di, dj, w * (sx[i] * sx[j] + sy[i] * sy[j]));
                }
            }
        }
        k
    }

    pub fn energy(&self, x: &[T], lambda: T) -> T {
        self.coefficients(x).energy(lambda)
    }

    /// Exact gradient of the discrete energy.
    pub fn energy_gradient(&self, x: &[T], lambda: T) -> Vec<T> {
        let e = self.exps;
        self.gradients(x)
            .combine(e.p.recip(), -lambda / e.q, -e.gamma.recip())
    }

    /// Relative norm of the energy gradient; scale-free measure of how well
    /// `x` solves the discrete PDE.
    pub fn relative_residual(&self, x: &[T], lambda: T) -> T {
        let e = self.exps;
        self.gradients(x)
            .relative_norm(e.p.recip(), -lambda / e.q, -e.gamma.recip())
    }

    pub fn energy_hessian(&self, x: &[T], lambda: T) -> DenseMatrix<T> {
        let e = self.exps;
        self.hessians(x)
            .combine(e.p.recip(), -lambda / e.q, -e.gamma.recip())
    }

    /// Rescales `x` to unit norm `A(x) = 1`.
    pub fn normalize(&self, x: &[T]) -> Option<Vec<T>> {
        let nrm = self.norm(x);
        (nrm > T::zero() && nrm.is_finite()).then(|| x.iter().map(|&v| v / nrm).collect())
    }
}

#[inline]
fn grad_norm_pow<T: Scalar>(g: &[T; 2], p: T) -> T {
    let r2 = g[0] * g[0] + g[1] * g[1];
    if r2 == T::zero() {
        T::zero()
    } else {
        r2.powf(p / T::of(2.0))
    }
}

fn check_same_mesh<T: Scalar>(u: &Field<T>, f: &Weight<T>) -> Result<()> {
    if !u.mesh().same_grid(f.mesh()) {
        return Err(Error::Dimension(
            "field and weight live on different meshes".into(),
        ));
    }
    Ok(())
}

fn problem_for<T: Scalar>(u: &Field<T>, f: &Weight<T>, e: Exponents<T>) -> Result<Problem<T>> {
    check_same_mesh(u, f)?;
    Ok(Problem {
        mesh: Arc::clone(u.mesh()),
        weight: f.clone(),
        f_dofs: f.interior_values(),
        exps: e,
    })
}

/// `(A, B, C) = (‖u‖^p, ‖u‖_q^q, ∫f|u|^γ)` under the discrete quadrature.
pub fn compute_coefficients<T: Scalar>(
    u: &Field<T>,
    f: &Weight<T>,
    e: Exponents<T>,
) -> Result<FiberData<T>> {
    Ok(problem_for(u, f, e)?.coefficients(&u.interior_values()))
}

pub fn energy<T: Scalar>(u: &Field<T>, f: &Weight<T>, e: Exponents<T>, lambda: T) -> Result<T> {
    Ok(compute_coefficients(u, f, e)?.energy(lambda))
}

/// Gradient of the discrete energy with respect to the interior values.
pub fn residual<T: Scalar>(
    u: &Field<T>,
    f: &Weight<T>,
    e: Exponents<T>,
    lambda: T,
) -> Result<Vec<T>> {
    Ok(problem_for(u, f, e)?.energy_gradient(&u.interior_values(), lambda))
}

pub fn h_indicator<T: Scalar>(
    u: &Field<T>,
    f: &Weight<T>,
    e: Exponents<T>,
    lambda: T,
) -> Result<T> {
    Ok(compute_coefficients(u, f, e)?.h_indicator(lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{build_interval_mesh, build_rectangle_mesh, WeightFormula};

    fn exps() -> Exponents<f64> {
        Exponents::new(2.0, 1.5, 2.5).unwrap()
    }

    #[test]
    fn exponent_ordering() {
        assert!(Exponents::new(2.0, 2.5, 3.0).is_err());
        assert!(Exponents::new(2.0, 0.5, 3.0).is_err());
        assert!(Exponents::new(2.0, 1.5, 1.8).is_err());
        // p* = 3·2/(3−2) = 6 for n = 3; no upper bound when n ≤ p.
        assert!(Exponents::for_dimension(2.0, 1.5, 6.5, 3).is_err());
        assert!(Exponents::for_dimension(2.0, 1.5, 5.5, 3).is_ok());
        assert!(Exponents::for_dimension(2.0, 1.5, 60.0, 2).is_ok());
        assert!(exps().is_quadratic_family());
        assert!(!Exponents::new(3.0, 1.5, 4.0).unwrap().is_quadratic_family());
    }

    #[test]
    fn one_dof_coefficients() {
        let m = build_interval_mesh(2, 1.0).unwrap();
        let f = Weight::constant(&m, 1.0);
        let u = Field::from_interior(&m, &[1.0]).unwrap();
        let d = compute_coefficients(&u, &f, exps()).unwrap();
        assert!((d.a - 4.0).abs() < 1e-14);
        assert!((d.b - 0.5).abs() < 1e-14);
        assert!((d.c - 0.5).abs() < 1e-14);

        let d2 = compute_coefficients(&u.scale(2.0), &f, exps()).unwrap();
        assert!((d2.a - 16.0).abs() < 1e-13);
        assert!((d2.b - 1.414_213_6).abs() < 1e-7);
        assert!((d2.c - 2.828_427_1).abs() < 1e-7);

        let z = compute_coefficients(&Field::zeros(&m), &f, exps()).unwrap();
        assert_eq!((z.a, z.b, z.c), (0.0, 0.0, 0.0));
    }

    #[test]
    fn energy_examples() {
        let m = build_interval_mesh(2, 1.0).unwrap();
        let f = Weight::constant(&m, 1.0);
        let u = Field::from_interior(&m, &[1.0]).unwrap();
        assert!((energy(&u, &f, exps(), 1.0).unwrap() - 1.466_666_7).abs() < 1e-7);
        assert_eq!(energy(&Field::zeros(&m), &f, exps(), 3.0).unwrap(), 0.0);
        let f0 = Weight::constant(&m, 0.0);
        assert!((energy(&u, &f0, exps(), 0.0).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn zero_field_has_zero_residual() {
        let m = build_interval_mesh(8, 1.0).unwrap();
        let f = Weight::constant(&m, 1.0);
        let r = residual(&Field::zeros(&m), &f, exps(), 1.0).unwrap();
        assert!(r.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mesh_mismatch_is_reported() {
        let m1 = build_interval_mesh(4, 1.0).unwrap();
        let m2 = build_interval_mesh(8, 1.0).unwrap();
        let f = Weight::constant(&m2, 1.0);
        let u = Field::from_interior(&m1, &[1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            compute_coefficients(&u, &f, exps()),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn h_indicator_scalar_examples() {
        let d = FiberData::new(1.0, 1.0, 1.0, exps());
        let tp = 0.076_393_202_250_021_03_f64;
        let tm = 0.523_606_797_749_979_f64;
        assert!((d.scaled(tp).h_indicator(0.2) - 0.001_304_9).abs() < 1e-7);
        // Closed form: 2t² − 0.3t^{1.5} − 2.5t^{2.5} at t = ((1+√0.2)/2)².
        assert!((d.scaled(tm).h_indicator(0.2) + 0.061_304_951_7).abs() < 1e-9);
        // Double root at lambda = 0.25, t = 0.25.
        assert!(d.scaled(0.25).h_indicator(0.25).abs() < 1e-15);
    }

    #[test]
    fn coercivity_bound_on_nehari_points() {
        let m = build_interval_mesh(16, 1.0).unwrap();
        let f = Weight::from_formula(
            &m,
            WeightFormula::Sine { amplitude: 1.0, frequency: 1.0, offset: 0.5 },
        );
        let prob = Problem::new(f, exps()).unwrap();
        let lambda = 2.0;
        for k in 1..20 {
            let x: Vec<f64> = (0..prob.n_dofs())
                .map(|i| ((i * k) as f64 * 0.37).sin().abs() + 0.1)
                .collect();
            let d = prob.coefficients(&x);
            // Any root of the fiber equation gives a Nehari point.
            let Ok(t) = crate::fiber::project(&d, lambda, crate::error::Branch::Plus) else {
                continue;
            };
            let dt = d.scaled(t);
            assert!(dt.nehari(lambda).abs() < 1e-10 * dt.nehari_scale(lambda));
            let e = dt.exps;
            let bound = (1.0 / e.p - 1.0 / e.gamma) * dt.a
                - (1.0 / e.q - 1.0 / e.gamma) * lambda * dt.b;
            assert!(dt.energy(lambda) >= bound - 1e-12 * dt.nehari_scale(lambda));
        }
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        for p in [2.0, 2.5] {
            let e = Exponents::new(p, 1.5, 3.0).unwrap();
            for mesh in [
                build_interval_mesh(6, 1.0).unwrap(),
                build_rectangle_mesh(4, 3, 1.0, 1.0).unwrap(),
            ] {
                let f = Weight::from_formula(
                    &mesh,
                    WeightFormula::Sine { amplitude: 1.0, frequency: 1.0, offset: 0.2 },
                );
                let prob = Problem::new(f, e).unwrap();
                let n = prob.n_dofs();
                let x: Vec<f64> = (0..n).map(|i| 1.0 + 0.3 * (i as f64).sin()).collect();
                let h = prob.energy_hessian(&x, 0.7);
                let step = 1e-6;
                for j in 0..n {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[j] += step;
                    xm[j] -= step;
                    let gp = prob.energy_gradient(&xp, 0.7);
                    let gm = prob.energy_gradient(&xm, 0.7);
                    for i in 0..n {
                        let fd = (gp[i] - gm[i]) / (2.0 * step);
                        assert!(
                            (fd - h.get(i, j)).abs() < 1e-5 * (1.0 + fd.abs()),
                            "p={p} ({i},{j}): fd {fd} vs {}",
                            h.get(i, j)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn f32_coefficients_agree_with_f64() {
        let m32 = build_interval_mesh::<f32>(8, 1.0).unwrap();
        let m64 = build_interval_mesh::<f64>(8, 1.0).unwrap();
        let x: Vec<f64> = (0..7).map(|i| 0.5 + 0.1 * i as f64).collect();
        let x32: Vec<f32> = x.iter().map(|&v| v as f32).collect();
        let e32 = Exponents::new(2.0f32, 1.5, 2.5).unwrap();
        let d32 = Problem::new(Weight::constant(&m32, 1.0), e32).unwrap().coefficients(&x32);
        let d64 = Problem::new(Weight::constant(&m64, 1.0), exps()).unwrap().coefficients(&x);
        assert!(((d32.a as f64) - d64.a).abs() < 1e-5 * d64.a);
        assert!(((d32.b as f64) - d64.b).abs() < 1e-5 * d64.b);
        assert!(((d32.c as f64) - d64.c).abs() < 1e-5 * d64.c);
    }
}
