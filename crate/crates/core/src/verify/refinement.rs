//! Hierarchical refinement study: solve on dyadic refinements of a base grid
//! and compare the levels.

use serde::{Deserialize, Serialize};

use crate::grid::TimeGrid;
use crate::model::Model;
use crate::serde_ext;
use crate::solvers::{solve_incremental, IncrementalSolution, SolverStrategy};
use crate::state::State;
use crate::trajectory::Continuity;

use super::energy::check_energy_inequality;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub level: usize,
    pub steps: usize,
    pub fineness: f64,
    #[serde(with = "serde_ext::real")]
    pub dissipation: f64,
    /// c_D·Σ‖z_k − z_{k−1}‖, which the dissipation must dominate.
    #[serde(with = "serde_ext::real")]
    pub variation: f64,
    /// I(0,z₀) + C_I·T.
    #[serde(with = "serde_ext::real")]
    pub bound: f64,
    /// dissipation − variation.
    #[serde(with = "serde_ext::real")]
    pub variation_slack: f64,
    /// bound − dissipation.
    #[serde(with = "serde_ext::real")]
    pub bound_slack: f64,
    /// |lhs − rhs| of the energy balance on [0,T], stepping with z_{k−1}.
    #[serde(with = "serde_ext::real")]
    pub energy_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementStudy {
    pub levels: Vec<LevelSummary>,
    /// Per pair of consecutive levels: max over the base grid's nodes of ‖z^(l) − z^(l+1)‖.
    pub node_gaps: Vec<f64>,
    /// Per pair of consecutive levels: sup over [0,T] of the distance
    /// between the piecewise-constant interpolants.
    pub sup_gaps: Vec<f64>,
    #[serde(skip)]
    pub solutions: Vec<IncrementalSolution>,
    /// Why the study stopped early, if it did.
    pub aborted: Option<String>,
}

fn level_summary(model: &dyn Model, level: usize, sol: &IncrementalSolution) -> Result<LevelSummary> {
    let c_d = model.coercivity_const();
    let dissipation = sol.total_dissipation();
    let variation = c_d * sol.states.windows(2).map(|w| w[0].distance(&w[1])).sum::<f64>();
    let bound = sol.energies[0] + model.lipschitz_bound() * sol.grid.horizon();
    let traj = sol.trajectory(Continuity::Right);
    let gap = check_energy_inequality(model, &traj, 0.0, sol.grid.horizon())?.gap;
    Ok(LevelSummary {
        level,
        steps: sol.grid.steps(),
        fineness: sol.grid.fineness(),
        dissipation,
        variation,
        bound,
        variation_slack: dissipation - variation,
        bound_slack: if bound == f64::INFINITY { f64::INFINITY } else { bound - dissipation },
        energy_gap: gap,
    })
}

fn gap_at(a: &IncrementalSolution, b: &IncrementalSolution, t: f64) -> Result<f64> {
    let ta = a.trajectory(Continuity::Left);
    let tb = b.trajectory(Continuity::Left);
    Ok(ta.evaluate(t)?.distance(tb.evaluate(t)?))
}

/// Solves on `base_grid` and `levels − 1` successive dyadic refinements.
///
/// A solver failure ends the study early; the levels finished so far are
/// returned with `aborted` set.
pub fn refinement_study(
    model: &dyn Model,
    base_grid: &TimeGrid,
    z0: &State,
    strategy: &SolverStrategy,
    levels: usize,
) -> Result<RefinementStudy> {
    if levels < 2 {
        return Err(Error::param("levels", "a refinement study needs at least 2 levels"));
    }
    let mut study = RefinementStudy {
        levels: Vec::new(),
        node_gaps: Vec::new(),
        sup_gaps: Vec::new(),
        solutions: Vec::new(),
        aborted: None,
    };
    let mut grid = base_grid.clone();
    for level in 0..levels {
        match solve_incremental(model, &grid, z0, strategy) {
            Ok(sol) => {
                study.levels.push(level_summary(model, level, &sol)?);
                study.solutions.push(sol);
            }
            Err(e) => {
                study.aborted = Some(format!("level {level}: {e}"));
                break;
            }
        }
        grid = grid.refine_dyadic();
    }
    let finest = study.solutions.last().map(|s| s.grid.clone());
    for pair in study.solutions.windows(2) {
        let mut node_gap = 0.0_f64;
        for &t in base_grid.times() {
            node_gap = node_gap.max(gap_at(&pair[0], &pair[1], t)?);
        }
        // both interpolants are constant between consecutive nodes of the
        // finest grid, and the value there equals the value at the right node
        let mut sup_gap = 0.0_f64;
        for &t in finest.as_ref().expect("at least two levels").times() {
            sup_gap = sup_gap.max(gap_at(&pair[0], &pair[1], t)?);
        }
        study.node_gaps.push(node_gap);
        study.sup_gaps.push(sup_gap);
    }
    Ok(study)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::load::Load;
    use crate::models::convex::tests::scalar_demo;
    use crate::models::{ConvexPointwiseModel, ConvexPointwiseParams};

    #[test]
    fn scalar_study_respects_bounds() {
        let m = scalar_demo(1.0);
        let base = TimeGrid::uniform(2.0, 4).unwrap();
        let z0 = m.make_state(vec![0.0]).unwrap();
        let study = refinement_study(&m, &base, &z0, &SolverStrategy::exact(), 5).unwrap();
        assert!(study.aborted.is_none());
        assert_eq!(study.levels.len(), 5);
        for l in &study.levels {
            assert!(l.bound_slack >= 0.0 && l.variation_slack >= -1e-12, "{l:?}");
            // z(T) = 1.5 from 0 costs exactly 1.5
            assert_eq!(l.dissipation, 1.5);
        }
        for w in study.levels.windows(2) {
            assert!(w[1].energy_gap < w[0].energy_gap);
        }
        for w in study.sup_gaps.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn constant_load_levels_identical() {
        let m = ConvexPointwiseModel::new(
            ConvexPointwiseParams {
                weights: vec![1.0],
                alpha: vec![1.0],
                beta: 2.0,
                loads: vec![Load::constant(0.5)],
                dissipation: 1.0,
            },
            1.0,
        )
        .unwrap();
        let base = TimeGrid::uniform(1.0, 2).unwrap();
        let z0 = m.make_state(vec![0.0]).unwrap();
        let study = refinement_study(&m, &base, &z0, &SolverStrategy::exact(), 3).unwrap();
        assert!(study.node_gaps.iter().chain(&study.sup_gaps).all(|&g| g == 0.0));
        assert!(study.levels.iter().all(|l| l.dissipation == 0.0 && l.energy_gap == 0.0));
    }

    #[test]
    fn single_level_rejected() {
        let m = scalar_demo(1.0);
        let base = TimeGrid::uniform(2.0, 4).unwrap();
        let z0 = m.make_state(vec![0.0]).unwrap();
        assert!(refinement_study(&m, &base, &z0, &SolverStrategy::exact(), 1).is_err());
    }
}
