//! Run configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::model::{EquilibriumModel, Model};
use crate::models::{
    ConvexPointwiseModel, ConvexPointwiseParams, DelaminationModel, DelaminationParams,
    GradientModel, GradientParams, PlasticityParams, PlasticityPointModel, TwoPhaseModel,
    TwoPhaseParams,
};
use crate::solvers::{solve_incremental, solve_with_elimination, IncrementalSolution, SolverStrategy};
use crate::state::State;
use crate::verify::StabilityCheck;

/// Model name plus its parameter block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ModelConfig {
    ConvexPointwise(ConvexPointwiseParams),
    GradientNonconvex(GradientParams),
    TwoPhase(TwoPhaseParams),
    Delamination(DelaminationParams),
    PlasticityPoint(PlasticityParams),
}

pub const MODEL_NAMES: [(&str, &str); 5] = [
    (
        "convex_pointwise",
        "Σ w(α|z|^β − g(t)z) + γ with weighted L¹ dissipation; closed-form steps",
    ),
    (
        "gradient_nonconvex",
        "1-D gradient energy with double-well (z²−1)² − g(t)z on a mesh",
    ),
    (
        "two_phase",
        "1-D bar of two-phase cells θ ∈ [0,1], thresholds σ₊/σ₋; closed-form steps",
    ),
    (
        "delamination",
        "spring chain glued to a rigid substrate; glue can break but never heal",
    ),
    (
        "plasticity_point",
        "single-slip SL(2) plasticity under simple shear; closed-form steps",
    ),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub steps: Option<usize>,
    /// Explicit nodes; overrides `steps`.
    #[serde(default)]
    pub nodes: Option<Vec<f64>>,
}

impl GridConfig {
    pub fn build(&self) -> Result<TimeGrid> {
        match (&self.nodes, self.horizon, self.steps) {
            (Some(nodes), horizon, _) => {
                let grid = TimeGrid::new(nodes.clone())?;
                if let Some(h) = horizon {
                    if h != grid.horizon() {
                        return Err(Error::InvalidGrid(format!(
                            "horizon {h} disagrees with the last node {}",
                            grid.horizon()
                        )));
                    }
                }
                Ok(grid)
            }
            (None, Some(h), Some(steps)) => TimeGrid::uniform(h, steps),
            (None, _, None) => Err(Error::InvalidGrid("grid requires ≥ 2 nodes".into())),
            (None, None, Some(_)) => Err(Error::param("grid.horizon", "required with `steps`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    #[serde(default)]
    pub directory: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: None,
            formats: default_formats(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub grid: GridConfig,
    pub initial_state: Vec<f64>,
    pub strategy: SolverStrategy,
    #[serde(default)]
    pub verify: StabilityCheck,
    #[serde(default)]
    pub output: OutputConfig,
    /// Overrides both the solver and the sampling seeds.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Refinement levels for `refine`.
    #[serde(default)]
    pub levels: Option<usize>,
}

/// A model ready to solve; elimination-based models keep their equilibrium interface.
pub enum BuiltModel {
    Plain(Box<dyn Model>),
    Reduced(Box<dyn EquilibriumModel>),
}

impl BuiltModel {
    pub fn model(&self) -> &dyn Model {
        match self {
            BuiltModel::Plain(m) => m.as_ref(),
            BuiltModel::Reduced(m) => m.as_ref(),
        }
    }

    pub fn solve(&self, grid: &TimeGrid, z0: &State, strategy: &SolverStrategy) -> Result<IncrementalSolution> {
        match self {
            BuiltModel::Plain(m) => solve_incremental(m.as_ref(), grid, z0, strategy),
            BuiltModel::Reduced(m) => solve_with_elimination(m.as_ref(), grid, z0, strategy),
        }
    }
}

impl ModelConfig {
    pub fn build(&self, horizon: f64) -> Result<BuiltModel> {
        Ok(match self.clone() {
            ModelConfig::ConvexPointwise(p) => {
                BuiltModel::Plain(Box::new(ConvexPointwiseModel::new(p, horizon)?))
            }
            ModelConfig::GradientNonconvex(p) => {
                BuiltModel::Plain(Box::new(GradientModel::new(p, horizon)?))
            }
            ModelConfig::TwoPhase(p) => BuiltModel::Reduced(Box::new(TwoPhaseModel::new(p, horizon)?)),
            ModelConfig::Delamination(p) => {
                BuiltModel::Reduced(Box::new(DelaminationModel::new(p, horizon)?))
            }
            ModelConfig::PlasticityPoint(p) => {
                BuiltModel::Plain(Box::new(PlasticityPointModel::new(p, horizon)?))
            }
        })
    }
}

/// Everything a command needs, validated.
pub struct Setup {
    pub model: BuiltModel,
    pub grid: TimeGrid,
    pub z0: State,
    pub strategy: SolverStrategy,
    pub check: StabilityCheck,
}

impl RunConfig {
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> std::result::Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Applies command-line overrides.
    pub fn with_overrides(mut self, seed: Option<u64>, tolerance: Option<f64>) -> Self {
        if seed.is_some() {
            self.seed = seed;
        }
        if let Some(seed) = self.seed {
            self.strategy.rng_seed = seed;
            self.verify.seed = seed;
        }
        if let Some(tol) = tolerance {
            self.verify.tolerance = tol;
        }
        self
    }

    pub fn setup(&self) -> Result<Setup> {
        let grid = self.grid.build()?;
        let model = self.model.build(grid.horizon())?;
        self.strategy.validate()?;
        if !(self.verify.tolerance >= 0.0 && self.verify.tolerance.is_finite()) {
            return Err(Error::param("verify.tolerance", "must be finite and nonnegative"));
        }
        let z0 = model.model().make_state(self.initial_state.clone())?;
        Ok(Setup {
            model,
            grid,
            z0,
            strategy: self.strategy.clone(),
            check: self.verify.clone(),
        })
    }
}
