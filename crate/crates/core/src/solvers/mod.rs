//! Step-by-step global minimization of z ↦ I(t_k,z) + D(z_{k−1},z).

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::model::{EquilibriumModel, Model};
use crate::serde_ext;
use crate::state::State;
use crate::trajectory::{Continuity, Trajectory};

mod grid_search;
mod multistart;

fn default_rounds() -> usize {
    4
}

fn default_tolerance() -> f64 {
    1e-12
}

fn default_initial_step() -> f64 {
    0.25
}

fn default_max_iterations() -> usize {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum StrategyKind {
    /// Closed-form per-step minimizer supplied by the model.
    ExactPointwise,
    /// Lattice over the model's search box, zoomed around the best point.
    GridSearch {
        resolution: usize,
        #[serde(default = "default_rounds")]
        rounds: usize,
    },
    /// Best of seeded projected coordinate descents.
    Multistart {
        starts: usize,
        #[serde(default = "default_max_iterations")]
        max_iterations: usize,
        #[serde(default = "default_tolerance")]
        tolerance: f64,
        /// Initial trial step as a fraction of each box side.
        #[serde(default = "default_initial_step")]
        initial_step: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverStrategy {
    #[serde(flatten)]
    pub kind: StrategyKind,
    #[serde(default)]
    pub rng_seed: u64,
}

/// Largest lattice a single grid-search round may evaluate.
const MAX_LATTICE: usize = 4_000_000;

/// Absolute objective decrease that still counts as progress when deciding
/// whether the infimum is attained.
pub const ATTAINMENT_TOL: f64 = 1e-9;

impl SolverStrategy {
    pub fn exact() -> Self {
        SolverStrategy {
            kind: StrategyKind::ExactPointwise,
            rng_seed: 0,
        }
    }

    pub fn grid_search(resolution: usize, rounds: usize) -> Self {
        SolverStrategy {
            kind: StrategyKind::GridSearch { resolution, rounds },
            rng_seed: 0,
        }
    }

    pub fn multistart(starts: usize, rng_seed: u64) -> Self {
        SolverStrategy {
            kind: StrategyKind::Multistart {
                starts,
                max_iterations: default_max_iterations(),
                tolerance: default_tolerance(),
                initial_step: default_initial_step(),
            },
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            StrategyKind::ExactPointwise => Ok(()),
            StrategyKind::GridSearch { resolution, rounds } => {
                if resolution < 2 {
                    return Err(Error::param("strategy.resolution", "must be at least 2"));
                }
                if rounds < 1 {
                    return Err(Error::param("strategy.rounds", "must be at least 1"));
                }
                Ok(())
            }
            StrategyKind::Multistart {
                starts,
                max_iterations,
                tolerance,
                initial_step,
            } => {
                if starts < 1 {
                    return Err(Error::param("strategy.starts", "must be at least 1"));
                }
                if max_iterations < 1 {
                    return Err(Error::param("strategy.max_iterations", "must be at least 1"));
                }
                if !(tolerance >= 0.0 && tolerance.is_finite()) {
                    return Err(Error::param("strategy.tolerance", "must be finite and nonnegative"));
                }
                if !(initial_step > 0.0 && initial_step.is_finite()) {
                    return Err(Error::param("strategy.initial_step", "must be positive"));
                }
                Ok(())
            }
        }
    }

    pub fn guarantee(&self) -> Guarantee {
        match self.kind {
            StrategyKind::ExactPointwise => Guarantee::Exact,
            StrategyKind::GridSearch { .. } => Guarantee::Lattice,
            StrategyKind::Multistart { .. } => Guarantee::Multistart,
        }
    }
}

/// How strongly each step's minimizer is known to be global.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Guarantee {
    Exact,
    Lattice,
    Multistart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepLog {
    pub step: usize,
    /// Objective evaluations spent on this step.
    pub evaluations: usize,
    /// Distinct candidate minimizers compared at the end.
    pub candidates: usize,
    #[serde(with = "serde_ext::real")]
    pub best_objective: f64,
    /// Objective excess of the best candidate that differs from the winner.
    #[serde(with = "serde_ext::real_opt")]
    pub runner_up_gap: Option<f64>,
    /// The last refinement still lowered the objective without slowing down.
    pub non_attainment: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementalSolution {
    pub grid: TimeGrid,
    pub states: Vec<State>,
    /// I(t_k,z_k) for k = 0..=N.
    pub energies: Vec<f64>,
    /// D(z_{k−1},z_k), with a leading 0 for k = 0.
    pub dissipations: Vec<f64>,
    pub log: Vec<StepLog>,
    pub guarantee: Guarantee,
    /// Equilibrium fields φ*(t_k,z_k) when the energy came from elimination.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equilibria: Option<Vec<Vec<f64>>>,
}

impl IncrementalSolution {
    pub fn trajectory(&self, continuity: Continuity) -> Trajectory {
        Trajectory::new(self.grid.clone(), self.states.clone(), continuity)
            .expect("solver output is a consistent trajectory")
    }

    pub fn total_dissipation(&self) -> f64 {
        self.dissipations.iter().sum()
    }
}

/// A point of the search together with its objective and dissipation cost.
#[derive(Debug, Clone)]
pub(crate) struct Candidate {
    pub z: Vec<f64>,
    pub objective: f64,
    pub dissipation: f64,
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Total order used for every argmin: objective, then dissipation from the
/// previous state, then lexicographic position. NaN objectives sort last.
pub(crate) fn rank(a: &Candidate, b: &Candidate) -> Ordering {
    let key = |c: &Candidate| if c.objective.is_nan() { f64::INFINITY } else { c.objective };
    key(a)
        .total_cmp(&key(b))
        .then_with(|| a.dissipation.total_cmp(&b.dissipation))
        .then_with(|| lexicographic(&a.z, &b.z))
}

/// The incremental objective for one step.
pub(crate) struct Objective<'a> {
    pub model: &'a dyn Model,
    pub t: f64,
    pub prev: &'a [f64],
}

impl Objective<'_> {
    pub fn eval(&self, z: Vec<f64>) -> Candidate {
        if !self.model.is_admissible(&z) {
            return Candidate {
                z,
                objective: f64::INFINITY,
                dissipation: f64::INFINITY,
            };
        }
        let dissipation = self.model.dissipation(self.prev, &z);
        let objective = if dissipation == f64::INFINITY {
            f64::INFINITY
        } else {
            self.model.energy(self.t, &z) + dissipation
        };
        Candidate {
            z,
            objective,
            dissipation,
        }
    }
}

pub(crate) struct SearchOutcome {
    pub candidates: Vec<Candidate>,
    pub evaluations: usize,
    pub non_attainment: bool,
}

fn check_initial(model: &dyn Model, grid: &TimeGrid, z0: &State) -> Result<()> {
    if z0.weights() != model.weights() {
        return Err(Error::InvalidState(format!(
            "initial state layout {:?} does not match {} weights {:?}",
            z0.weights(),
            model.name(),
            model.weights()
        )));
    }
    if !model.is_admissible(z0.values()) {
        return Err(Error::InvalidState(format!(
            "initial state {:?} is not admissible",
            z0.values()
        )));
    }
    let e0 = model.try_energy(0.0, z0.values())?;
    if !e0.is_finite() {
        return Err(Error::InvalidState(format!("I(0, z0) = {e0} is not finite")));
    }
    if grid.horizon() > model.horizon() {
        return Err(Error::InvalidGrid(format!(
            "grid horizon {} exceeds the model horizon {}",
            grid.horizon(),
            model.horizon()
        )));
    }
    Ok(())
}

fn search_step(
    objective: &Objective<'_>,
    strategy: &SolverStrategy,
    step: usize,
) -> Result<SearchOutcome> {
    let model = objective.model;
    match &strategy.kind {
        StrategyKind::ExactPointwise => {
            let z = model.exact_step(objective.t, objective.prev).ok_or_else(|| {
                Error::Strategy(format!("{} has no closed-form step", model.name()))
            })?;
            Ok(SearchOutcome {
                candidates: vec![objective.eval(z)],
                evaluations: 1,
                non_attainment: false,
            })
        }
        StrategyKind::GridSearch { resolution, rounds } => {
            let bounds = model.search_box(objective.prev);
            grid_search::search(objective, &bounds, *resolution, *rounds)
        }
        StrategyKind::Multistart {
            starts,
            max_iterations,
            tolerance,
            initial_step,
        } => {
            let bounds = model.search_box(objective.prev);
            Ok(multistart::search(
                objective,
                &bounds,
                &multistart::Settings {
                    starts: *starts,
                    max_iterations: *max_iterations,
                    tolerance: *tolerance,
                    initial_step: *initial_step,
                    seed: strategy.rng_seed,
                    stream: step as u64,
                },
            ))
        }
    }
}

/// Solves the incremental problem on every step of `grid` starting from `z0`.
pub fn solve_incremental(
    model: &dyn Model,
    grid: &TimeGrid,
    z0: &State,
    strategy: &SolverStrategy,
) -> Result<IncrementalSolution> {
    strategy.validate()?;
    if matches!(strategy.kind, StrategyKind::ExactPointwise) && !model.has_exact_step() {
        return Err(Error::Strategy(format!(
            "exact_pointwise needs a closed-form step, which {} does not provide",
            model.name()
        )));
    }
    check_initial(model, grid, z0)?;

    let mut states = vec![z0.clone()];
    let mut energies = vec![model.energy(0.0, z0.values())];
    let mut dissipations = vec![0.0];
    let mut log = Vec::with_capacity(grid.steps());
    for k in 1..grid.len() {
        let t = grid.time(k);
        let prev = states[k - 1].values().to_vec();
        let objective = Objective {
            model,
            t,
            prev: &prev,
        };
        let outcome = search_step(&objective, strategy, k)?;
        let mut candidates = outcome.candidates;
        // staying put is always feasible
        candidates.push(objective.eval(prev.clone()));
        candidates.sort_by(rank);
        candidates.dedup_by(|a, b| a.z == b.z);
        let best = candidates[0].clone();
        if !best.objective.is_finite() {
            let reason = match model.try_energy(t, &best.z) {
                Err(e) => e.to_string(),
                Ok(_) => format!("best objective is {} at z = {:?}", best.objective, best.z),
            };
            return Err(Error::StepFailure { step: k, reason });
        }
        let runner_up_gap = candidates.get(1).map(|c| c.objective - best.objective);
        log.push(StepLog {
            step: k,
            evaluations: outcome.evaluations + 1,
            candidates: candidates.len(),
            best_objective: best.objective,
            runner_up_gap,
            non_attainment: outcome.non_attainment,
        });
        energies.push(model.energy(t, &best.z));
        dissipations.push(best.dissipation);
        states.push(z0.with_values(best.z)?);
    }
    Ok(IncrementalSolution {
        grid: grid.clone(),
        states,
        energies,
        dissipations,
        log,
        guarantee: strategy.guarantee(),
        equilibria: None,
    })
}

/// Like [`solve_incremental`] on the reduced energy, also recording the
/// equilibrium field at every node.
pub fn solve_with_elimination(
    model: &dyn EquilibriumModel,
    grid: &TimeGrid,
    z0: &State,
    strategy: &SolverStrategy,
) -> Result<IncrementalSolution> {
    let mut solution = solve_incremental(model, grid, z0, strategy)?;
    let fields = solution
        .states
        .iter()
        .enumerate()
        .map(|(k, z)| {
            model
                .equilibrium(grid.time(k), z.values())
                .map(|eq| eq.displacement)
                .map_err(|e| Error::StepFailure {
                    step: k,
                    reason: e.to_string(),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    solution.equilibria = Some(fields);
    Ok(solution)
}
