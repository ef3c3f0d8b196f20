//! Run configuration: one JSON object, unknown keys rejected.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use nehari_core::discretization::{build_interval_mesh, build_rectangle_mesh, Mesh, Weight, WeightFormula};
use nehari_core::{Exponents, Problem};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub exponents: ExponentsSpec,
    #[serde(default)]
    pub domain: DomainSpec,
    #[serde(default)]
    pub weight: WeightSpec,
    #[serde(default)]
    pub lambda_grid: Option<GridSpec>,
    /// Explicit fiber data for `fiber-analyze`.
    #[serde(default)]
    pub fiber: Vec<FiberSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub extremal: ExtremalSpec,
    #[serde(default)]
    pub branches: BranchSpec,
    #[serde(default)]
    pub continuation: ContinuationSpec,
    #[serde(default)]
    pub asymptotics: AsymptoticsSpec,
    #[serde(default)]
    pub validate: ValidateSpec,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentsSpec {
    pub p: f64,
    pub q: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub dimension: usize,
    pub cells: Vec<usize>,
    #[serde(default)]
    pub lengths: Option<Vec<f64>>,
}

impl Default for DomainSpec {
    fn default() -> Self {
        Self {
            dimension: 1,
            cells: vec![64],
            lengths: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum WeightSpec {
    Constant { value: f64 },
    Sine { amplitude: f64, frequency: f64, offset: f64 },
    Step { position: f64, left: f64, right: f64 },
    /// CSV with a header row; the last column holds one value per mesh node
    /// in node order. Relative paths are resolved against the config file.
    Table { path: PathBuf },
}

impl Default for WeightSpec {
    fn default() -> Self {
        WeightSpec::Constant { value: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum GridSpec {
    /// Absolute values of `λ`.
    Values(Vec<f64>),
    /// Multiples of the extremal value `λ*`.
    FractionsOfStar(Vec<f64>),
}

impl GridSpec {
    pub fn raw(&self) -> &[f64] {
        match self {
            GridSpec::Values(v) | GridSpec::FractionsOfStar(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberSpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtremalSpec {
    pub starts: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ExtremalSpec {
    fn default() -> Self {
        Self {
            starts: 16,
            tol: 1e-12,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BranchSpec {
    pub tol: f64,
    pub max_iter: usize,
    pub newton_max_iter: usize,
}

impl Default for BranchSpec {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 2_000,
            newton_max_iter: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinuationSpec {
    pub enabled: bool,
    /// Width of the continuation range past `λ*` as a fraction of `λ*`.
    pub eps_max_fraction: f64,
    pub steps: usize,
    pub d_min: f64,
    pub fold_tol: f64,
    pub refine: usize,
}

impl Default for ContinuationSpec {
    fn default() -> Self {
        Self {
            enabled: true,
            eps_max_fraction: 0.02,
            steps: 20,
            d_min: 1e-3,
            fold_tol: 1e-3,
            refine: 12,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AsymptoticsSpec {
    pub lambdas: Vec<f64>,
    pub directions: usize,
    pub starts: usize,
}

impl Default for AsymptoticsSpec {
    fn default() -> Self {
        Self {
            lambdas: vec![1e-1, 1e-2, 1e-3, 1e-4],
            directions: 16,
            starts: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateSpec {
    pub fiber_samples: usize,
    pub gradient_samples: usize,
    /// `λ` of the shooting comparison as a fraction of `λ*`.
    pub shooting_fraction: f64,
    pub shooting_tol: f64,
}

impl Default for ValidateSpec {
    fn default() -> Self {
        Self {
            fiber_samples: 10_000,
            gradient_samples: 100,
            shooting_fraction: 0.3,
            shooting_tol: 1e-3,
        }
    }
}

impl RunConfig {
    /// Reads and checks a config; every failure here is a parse error.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        if let WeightSpec::Table { path: table } = &mut cfg.weight {
            if table.is_relative() {
                if let Some(dir) = path.parent() {
                    *table = dir.join(&*table);
                }
            }
        }
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), CliError> {
        self.exponents()?;
        let d = &self.domain;
        if d.dimension != 1 && d.dimension != 2 {
            return Err(CliError::Parse(format!(
                "domain.dimension must be 1 or 2, got {}",
                d.dimension
            )));
        }
        if d.cells.len() != d.dimension {
            return Err(CliError::Parse(format!(
                "domain.cells needs {} entries, got {}",
                d.dimension,
                d.cells.len()
            )));
        }
        if let Some(l) = &d.lengths {
            if l.len() != d.dimension || l.iter().any(|v| !(*v > 0.0)) {
                return Err(CliError::Parse(format!(
                    "domain.lengths needs {} positive entries",
                    d.dimension
                )));
            }
        }
        if let Some(g) = &self.lambda_grid {
            check_increasing("lambda_grid", g.raw())?;
        }
        let mut lambdas = self.asymptotics.lambdas.clone();
        lambdas.reverse();
        check_increasing("asymptotics.lambdas (listed in decreasing order)", &lambdas)?;
        for (i, f) in self.fiber.iter().enumerate() {
            if !(f.a > 0.0 && f.b > 0.0 && f.c.is_finite() && f.lambda > 0.0) {
                return Err(CliError::Parse(format!(
                    "fiber[{i}]: need A > 0, B > 0, finite C and lambda > 0"
                )));
            }
        }
        let c = &self.continuation;
        if !(c.eps_max_fraction > 0.0) || c.steps == 0 || !(c.fold_tol > 0.0) || !(c.d_min >= 0.0) {
            return Err(CliError::Parse(
                "continuation needs eps_max_fraction > 0, steps > 0, fold_tol > 0 and d_min >= 0".into(),
            ));
        }
        if self.extremal.starts == 0 || self.asymptotics.starts == 0 {
            return Err(CliError::Parse("starts must be positive".into()));
        }
        Ok(())
    }

    pub fn exponents(&self) -> Result<Exponents<f64>, CliError> {
        let e = self.exponents;
        Exponents::for_dimension(e.p, e.q, e.gamma, self.domain.dimension)
            .map_err(|err| CliError::Parse(format!("exponents: {err}")))
    }

    pub fn mesh(&self) -> Result<Arc<Mesh<f64>>, CliError> {
        let d = &self.domain;
        let lengths = d.lengths.clone().unwrap_or_else(|| vec![1.0; d.dimension]);
        let mesh = if d.dimension == 1 {
            build_interval_mesh(d.cells[0], lengths[0])
        } else {
            build_rectangle_mesh(d.cells[0], d.cells[1], lengths[0], lengths[1])
        };
        mesh.map_err(|e| CliError::Parse(format!("domain: {e}")))
    }

    pub fn formula(&self) -> Option<WeightFormula<f64>> {
        match self.weight {
            WeightSpec::Constant { value } => Some(WeightFormula::Constant(value)),
            WeightSpec::Sine {
                amplitude,
                frequency,
                offset,
            } => Some(WeightFormula::Sine {
                amplitude,
                frequency,
                offset,
            }),
            WeightSpec::Step { position, left, right } => Some(WeightFormula::Step { position, left, right }),
            WeightSpec::Table { .. } => None,
        }
    }

    pub fn weight(&self, mesh: &Arc<Mesh<f64>>) -> Result<Weight<f64>, CliError> {
        match (&self.weight, self.formula()) {
            (_, Some(f)) => Ok(Weight::from_formula(mesh, f)),
            (WeightSpec::Table { path }, None) => {
                let values = read_table(path)?;
                Weight::from_nodal(mesh, values).map_err(|e| CliError::Parse(format!("weight table: {e}")))
            }
            _ => unreachable!("every non-table weight has a formula"),
        }
    }

    pub fn problem(&self) -> Result<Problem<f64>, CliError> {
        let mesh = self.mesh()?;
        let w = self.weight(&mesh)?;
        Problem::new(w, self.exponents()?).map_err(|e| CliError::Parse(e.to_string()))
    }
}

fn check_increasing(name: &str, v: &[f64]) -> Result<(), CliError> {
    if let Some(x) = v.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(CliError::Parse(format!("{name}: entries must be positive, got {x}")));
    }
    if let Some(w) = v.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(CliError::Parse(format!(
            "{name}: must be strictly increasing, but {} is followed by {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

fn read_table(path: &Path) -> Result<Vec<f64>, CliError> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| CliError::Parse(format!("weight table {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Parse(format!("weight table {}: {e}", path.display())))?;
        let cell = rec.iter().last().unwrap_or("");
        let v: f64 = cell.trim().parse().map_err(|_| {
            CliError::Parse(format!(
                "weight table {}: row {} has non-numeric value {cell:?}",
                path.display(),
                i + 2
            ))
        })?;
        out.push(v);
    }
    Ok(out)
}
