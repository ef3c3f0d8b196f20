//! Uniform grids on intervals and rectangles, nodal fields with homogeneous
//! Dirichlet data, and the weight `f`.
//!
//! The discrete energy uses a cell rule for `∫|∇u|^p` and a nodal rule over
//! interior nodes for the lower-order integrals, so every functional is a
//! smooth function of the interior nodal values.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Uniform tensor-product grid on `(0, lx)` or `(0, lx) x (0, ly)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<T> {
    dim: usize,
    cells: [usize; 2],
    lengths: [T; 2],
    spacing: [T; 2],
    coords: Vec<[T; 2]>,
    interior: Vec<usize>,
    boundary: Vec<bool>,
    dof_of_node: Vec<Option<usize>>,
    cell_nodes: Vec<[usize; 4]>,
    cell_weights: Vec<T>,
    // Gradient stencil coefficients, shared by every cell of a uniform grid.
    stencil_x: [T; 4],
    stencil_y: [T; 4],
}

/// Builds the uniform 1D mesh of `n_cells` cells on `(0, length)`.
pub fn build_interval_mesh<T: Scalar>(n_cells: usize, length: T) -> Result<Arc<Mesh<T>>> {
    if n_cells < 2 {
        return Err(Error::InvalidMesh(format!(
            "interval needs at least 2 cells, got {n_cells}"
        )));
    }
    check_length(length)?;
    let h = length / T::of(n_cells as f64);
    let n_nodes = n_cells + 1;
    let coords = (0..n_nodes)
        .map(|i| [T::of(i as f64) * h, T::zero()])
        .collect();
    let boundary: Vec<bool> = (0..n_nodes).map(|i| i == 0 || i == n_cells).collect();
    let cell_nodes = (0..n_cells).map(|c| [c, c + 1, 0, 0]).collect();
    let inv = h.recip();
    Ok(Arc::new(Mesh::assemble(
        1,
        [n_cells, 0],
        [length, T::zero()],
        [h, T::zero()],
        coords,
        boundary,
        cell_nodes,
        vec![h; n_cells],
        [-inv, inv, T::zero(), T::zero()],
        [T::zero(); 4],
    )))
}

/// Builds the `nx` by `ny` tensor-product mesh on `(0, lx) x (0, ly)`.
pub fn build_rectangle_mesh<T: Scalar>(
    nx: usize,
    ny: usize,
    lx: T,
    ly: T,
) -> Result<Arc<Mesh<T>>> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidMesh(format!(
            "rectangle needs at least 2 cells per axis, got {nx} x {ny}"
        )));
    }
    check_length(lx)?;
    check_length(ly)?;
    let hx = lx / T::of(nx as f64);
    let hy = ly / T::of(ny as f64);
    let node = |i: usize, j: usize| i + (nx + 1) * j;
    let mut coords = Vec::with_capacity((nx + 1) * (ny + 1));
    let mut boundary = Vec::with_capacity(coords.capacity());
    for j in 0..=ny {
        for i in 0..=nx {
            coords.push([T::of(i as f64) * hx, T::of(j as f64) * hy]);
            boundary.push(i == 0 || j == 0 || i == nx || j == ny);
        }
    }
    let mut cell_nodes = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            cell_nodes.push([node(i, j), node(i + 1, j), node(i, j + 1), node(i + 1, j + 1)]);
        }
    }
    // Average of the two edge differences along each axis.
    let half = T::of(0.5);
    let ax = half / hx;
    let ay = half / hy;
    Ok(Arc::new(Mesh::assemble(
        2,
        [nx, ny],
        [lx, ly],
        [hx, hy],
        coords,
        boundary,
        cell_nodes,
        vec![hx * hy; nx * ny],
        [-ax, ax, -ax, ax],
        [-ay, -ay, ay, ay],
    )))
}

fn check_length<T: Scalar>(length: T) -> Result<()> {
    if !(length > T::zero()) || !length.is_finite() {
        return Err(Error::InvalidMesh(format!(
            "domain length must be positive and finite, got {length}"
        )));
    }
    Ok(())
}

impl<T: Scalar> Mesh<T> {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        dim: usize,
        cells: [usize; 2],
        lengths: [T; 2],
        spacing: [T; 2],
        coords: Vec<[T; 2]>,
        boundary: Vec<bool>,
        cell_nodes: Vec<[usize; 4]>,
        cell_weights: Vec<T>,
        stencil_x: [T; 4],
        stencil_y: [T; 4],
    ) -> Self {
        let mut interior = Vec::new();
        let mut dof_of_node = vec![None; boundary.len()];
        for (n, &b) in boundary.iter().enumerate() {
            if !b {
                dof_of_node[n] = Some(interior.len());
                interior.push(n);
            }
        }
        Self {
            dim,
            cells,
            lengths,
            spacing,
            coords,
            interior,
            boundary,
            dof_of_node,
            cell_nodes,
            cell_weights,
            stencil_x,
            stencil_y,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    /// Cell counts per axis (the second entry is 0 for intervals).
    pub fn cells(&self) -> [usize; 2] {
        self.cells
    }

    pub fn lengths(&self) -> [T; 2] {
        self.lengths
    }

    /// Grid spacing per axis (the second entry is 0 for intervals).
    pub fn spacing(&self) -> [T; 2] {
        self.spacing
    }

    pub fn n_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cell_nodes.len()
    }

    /// Number of interior nodes, i.e. degrees of freedom.
    pub fn n_interior(&self) -> usize {
        self.interior.len()
    }

    pub fn coords(&self) -> &[[T; 2]] {
        &self.coords
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    pub fn dof_of_node(&self, node: usize) -> Option<usize> {
        self.dof_of_node[node]
    }

    pub fn cell_weights(&self) -> &[T] {
        &self.cell_weights
    }

    /// Nodal quadrature weight `h^d` used for `∫|u|^q` and `∫f|u|^γ`.
    pub fn node_weight(&self) -> T {
        match self.dim {
            1 => self.spacing[0],
            _ => self.spacing[0] * self.spacing[1],
        }
    }

    /// Lebesgue measure of the domain.
    pub fn measure(&self) -> T {
        match self.dim {
            1 => self.lengths[0],
            _ => self.lengths[0] * self.lengths[1],
        }
    }

    pub(crate) fn nodes_per_cell(&self) -> usize {
        if self.dim == 1 {
            2
        } else {
            4
        }
    }

    pub(crate) fn cell(&self, c: usize) -> &[usize] {
        &self.cell_nodes[c][..self.nodes_per_cell()]
    }

    pub(crate) fn stencil(&self) -> (&[T], &[T]) {
        let k = self.nodes_per_cell();
        (&self.stencil_x[..k], &self.stencil_y[..k])
    }

    /// Spreads interior values onto a full nodal vector with zero boundary.
    pub fn scatter(&self, dofs: &[T]) -> Vec<T> {
        debug_assert_eq!(dofs.len(), self.n_interior());
        let mut full = vec![T::zero(); self.n_nodes()];
        for (&node, &v) in self.interior.iter().zip(dofs) {
            full[node] = v;
        }
        full
    }

    pub fn gather(&self, full: &[T]) -> Vec<T> {
        self.interior.iter().map(|&n| full[n]).collect()
    }

    /// Cell gradients of a full nodal vector; the y component is zero in 1D.
    pub fn cell_gradients(&self, full: &[T]) -> Vec<[T; 2]> {
        let (sx, sy) = self.stencil();
        (0..self.n_cells())
            .map(|c| {
                let mut g = [T::zero(); 2];
                for (k, &node) in self.cell(c).iter().enumerate() {
                    g[0] += sx[k] * full[node];
                    g[1] += sy[k] * full[node];
                }
                g
            })
            .collect()
    }

    /// `true` when both meshes describe the same grid.
    pub fn same_grid(&self, other: &Mesh<T>) -> bool {
        std::ptr::eq(self, other)
            || (self.dim == other.dim
                && self.cells == other.cells
                && self.lengths == other.lengths)
    }
}

/// Nodal values of a function vanishing on the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    mesh: Arc<Mesh<T>>,
    values: Vec<T>,
}

impl<T: Scalar> Field<T> {
    pub fn zeros(mesh: &Arc<Mesh<T>>) -> Self {
        Self {
            mesh: Arc::clone(mesh),
            values: vec![T::zero(); mesh.n_nodes()],
        }
    }

    /// Builds a field from its interior values.
    pub fn from_interior(mesh: &Arc<Mesh<T>>, dofs: &[T]) -> Result<Self> {
        if dofs.len() != mesh.n_interior() {
            return Err(Error::Dimension(format!(
                "expected {} interior values, got {}",
                mesh.n_interior(),
                dofs.len()
            )));
        }
        Ok(Self {
            mesh: Arc::clone(mesh),
            values: mesh.scatter(dofs),
        })
    }

    /// Builds a field from one value per node; boundary values must be zero.
    pub fn from_nodal(mesh: &Arc<Mesh<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != mesh.n_nodes() {
            return Err(Error::Dimension(format!(
                "expected {} nodal values, got {}",
                mesh.n_nodes(),
                values.len()
            )));
        }
        if let Some(n) = (0..values.len()).find(|&n| mesh.boundary[n] && values[n] != T::zero()) {
            return Err(Error::Dimension(format!(
                "boundary node {n} carries nonzero value {}",
                values[n]
            )));
        }
        Ok(Self {
            mesh: Arc::clone(mesh),
            values,
        })
    }

    /// Interpolates `g` at the interior nodes.
    pub fn from_fn(mesh: &Arc<Mesh<T>>, g: impl Fn([T; 2]) -> T) -> Self {
        let mut values = vec![T::zero(); mesh.n_nodes()];
        for &n in mesh.interior_nodes() {
            values[n] = g(mesh.coords[n]);
        }
        Self {
            mesh: Arc::clone(mesh),
            values,
        }
    }

    pub fn mesh(&self) -> &Arc<Mesh<T>> {
        &self.mesh
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn interior_values(&self) -> Vec<T> {
        self.mesh.gather(&self.values)
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            mesh: Arc::clone(&self.mesh),
            values: self.values.iter().map(|&v| s * v).collect(),
        }
    }

    pub fn abs(&self) -> Self {
        Self {
            mesh: Arc::clone(&self.mesh),
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    /// Minimum over interior nodes.
    pub fn min_interior(&self) -> T {
        self.mesh
            .interior_nodes()
            .iter()
            .map(|&n| self.values[n])
            .fold(T::infinity(), T::min)
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

/// Per-cell gradient vectors of `u`.
pub fn gradient_cells<T: Scalar>(u: &Field<T>) -> Vec<[T; 2]> {
    u.mesh.cell_gradients(&u.values)
}

/// Built-in weight formulas evaluated at node coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightFormula<T> {
    Constant(T),
    /// `amplitude * sin(2π k x) + offset` in 1D and
    /// `amplitude * sin(2π k x) sin(2π k y) + offset` in 2D.
    Sine {
        amplitude: T,
        frequency: T,
        offset: T,
    },
    /// `left` for `x < position`, `right` otherwise.
    Step { position: T, left: T, right: T },
}

impl<T: Scalar> WeightFormula<T> {
    pub fn eval(&self, x: [T; 2], dim: usize) -> T {
        match *self {
            WeightFormula::Constant(c) => c,
            WeightFormula::Sine {
                amplitude,
                frequency,
                offset,
            } => {
                let w = T::of(2.0 * std::f64::consts::PI) * frequency;
                let s = if dim == 1 {
                    (w * x[0]).sin()
                } else {
                    (w * x[0]).sin() * (w * x[1]).sin()
                };
                amplitude * s + offset
            }
            WeightFormula::Step {
                position,
                left,
                right,
            } => {
                if x[0] < position {
                    left
                } else {
                    right
                }
            }
        }
    }
}

/// Nodal table of the sign-changing weight `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight<T> {
    mesh: Arc<Mesh<T>>,
    values: Vec<T>,
    sup: T,
    has_positive_part: bool,
}

impl<T: Scalar> Weight<T> {
    pub fn from_nodal(mesh: &Arc<Mesh<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != mesh.n_nodes() {
            return Err(Error::Dimension(format!(
                "weight table has {} values for {} nodes",
                values.len(),
                mesh.n_nodes()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Dimension(format!("weight value {v} is not finite")));
        }
        let sup = values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        // Boundary values never meet a nonzero field, so only interior nodes
        // decide whether F(u) > 0 is attainable.
        let has_positive_part = mesh.interior.iter().any(|&n| values[n] > T::zero());
        Ok(Self {
            mesh: Arc::clone(mesh),
            values,
            sup,
            has_positive_part,
        })
    }

    pub fn from_formula(mesh: &Arc<Mesh<T>>, formula: WeightFormula<T>) -> Self {
        let values = mesh
            .coords
            .iter()
            .map(|&x| formula.eval(x, mesh.dim))
            .collect();
        Self::from_nodal(mesh, values).expect("formula values are finite")
    }

    pub fn constant(mesh: &Arc<Mesh<T>>, c: T) -> Self {
        Self::from_formula(mesh, WeightFormula::Constant(c))
    }

    pub fn mesh(&self) -> &Arc<Mesh<T>> {
        &self.mesh
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn interior_values(&self) -> Vec<T> {
        self.mesh.gather(&self.values)
    }

    pub fn sup_norm(&self) -> T {
        self.sup
    }

    pub fn has_positive_part(&self) -> bool {
        self.has_positive_part
    }

    /// Returns `c * f` on the same mesh.
    pub fn scaled(&self, c: T) -> Self {
        Self::from_nodal(&self.mesh, self.values.iter().map(|&v| c * v).collect())
            .expect("scaled weight stays finite")
    }
}
