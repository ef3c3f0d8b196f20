//! Nehari-manifold and fibering methods for the concave–convex problem
//!
//! ```text
//! −Δ_p u = λ|u|^{q−2}u + f|u|^{γ−2}u   in Ω,   u = 0 on ∂Ω,
//! ```
//!
//! with `1 < q < p < γ < p*` and a weight `f` that may change sign.
//!
//! The numerical core is generic over the scalar type ([`Scalar`], i.e.
//! `f32` or `f64`); the `*64` aliases below fix it to `f64`, which is what
//! the solvers' default tolerances are calibrated for.

pub mod asymptotics;
pub mod branches;
pub mod discretization;
pub mod error;
pub mod extremal;
pub mod fiber;
pub mod functionals;
pub mod linalg;
pub mod optimize;
pub mod oracles;
pub mod scalar;

pub use asymptotics::{solve_lane_emden, verify_scaling, LaneEmdenResult, ScalingTable};
pub use branches::{
    continue_past_star, minimize_branch, solve_branches, BranchDiagram, BranchOptions, BranchPoint,
    ContinuationOptions, FoldReason, FoldRecord,
};
pub use discretization::{
    build_interval_mesh, build_rectangle_mesh, gradient_cells, Field, Mesh, Weight, WeightFormula,
};
pub use error::{Branch, Error, Result};
pub use extremal::{minimize_lambda, ExtremalOptions, ExtremalResult, Witness};
pub use fiber::{FiberAnalysis, FiberCase};
pub use functionals::{
    compute_coefficients, energy, h_indicator, residual, Exponents, FiberData, Problem,
};
pub use scalar::Scalar;

pub type Mesh64 = Mesh<f64>;
pub type Field64 = Field<f64>;
pub type Weight64 = Weight<f64>;
pub type Exponents64 = Exponents<f64>;
pub type FiberData64 = FiberData<f64>;
pub type Problem64 = Problem<f64>;

pub type Mesh32 = Mesh<f32>;
pub type Field32 = Field<f32>;
pub type Weight32 = Weight<f32>;
pub type Exponents32 = Exponents<f32>;
