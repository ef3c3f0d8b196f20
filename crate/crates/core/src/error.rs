use std::fmt;

use thiserror::Error;

/// Which of the two Nehari sub-manifolds a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    /// `H < 0`: the larger fiber root, local maximum of the fiber map.
    Minus,
    /// `H > 0`: the smaller fiber root, local minimum of the fiber map.
    Plus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Minus, Branch::Plus];

    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Minus => "minus",
            Branch::Plus => "plus",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid exponents: {0}")]
    InvalidExponents(String),

    #[error("degenerate fiber data: {0}")]
    DegenerateData(String),

    #[error("lambda(u) is undefined: F(u) = {0:e} is not positive")]
    UndefinedLambda(f64),

    #[error("the {0} fiber root does not exist")]
    NoRoot(Branch),

    #[error("degenerate derivative: H vanishes at the double root")]
    DegenerateDerivative,

    #[error("no projection onto the {branch} Nehari set at lambda = {lambda:e}")]
    NoProjection { branch: Branch, lambda: f64 },

    #[error("the weight has no positive part (f+ vanishes identically), so F(u) > 0 is infeasible")]
    NoPositiveWeight,

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("{what} did not converge (residual {residual:e})")]
    NonConvergence {
        what: String,
        residual: f64,
        best: Vec<f64>,
    },

    #[error("unsupported exponents: {0}")]
    UnsupportedExponents(String),

    #[error("no sign change of u(1; s) in slope bracket [{lo:e}, {hi:e}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("incomplete data: {0}")]
    IncompleteData(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{branch} branch at lambda = {lambda:e}: {source}")]
    AtLambda {
        branch: Branch,
        lambda: f64,
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
