use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::model::Model;
use crate::state::State;

/// Which neighbouring node a piecewise-constant interpolant copies between
/// grid nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Continuity {
    /// Z^P: on (t_{k−1}, t_k] the value z_k.
    Left,
    /// Ẑ^P: on [t_{k−1}, t_k) the value z_{k−1}.
    Right,
}

/// Piecewise-constant curve t ↦ z(t) through one state per grid node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    grid: TimeGrid,
    states: Vec<State>,
    continuity: Continuity,
}

impl Trajectory {
    pub fn new(grid: TimeGrid, states: Vec<State>, continuity: Continuity) -> Result<Self> {
        if states.len() != grid.len() {
            return Err(Error::InvalidState(format!(
                "{} states for {} grid nodes",
                states.len(),
                grid.len()
            )));
        }
        let layout = states[0].weights();
        if states.iter().any(|s| s.weights() != layout) {
            return Err(Error::InvalidState(
                "all states of a trajectory must share weights".into(),
            ));
        }
        Ok(Trajectory {
            grid,
            states,
            continuity,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn state(&self, k: usize) -> &State {
        &self.states[k]
    }

    pub fn continuity(&self) -> Continuity {
        self.continuity
    }

    pub fn with_continuity(mut self, continuity: Continuity) -> Self {
        self.continuity = continuity;
        self
    }

    /// Index of the node whose state is the value at time t.
    pub fn index_at(&self, t: f64) -> Result<usize> {
        let horizon = self.grid.horizon();
        if !(0.0..=horizon).contains(&t) {
            return Err(Error::OutOfRange { t, horizon });
        }
        let times = self.grid.times();
        // first node with time >= t
        let k = times.partition_point(|&s| s < t);
        if times[k] == t {
            return Ok(k);
        }
        Ok(match self.continuity {
            Continuity::Left => k,
            Continuity::Right => k - 1,
        })
    }

    pub fn evaluate(&self, t: f64) -> Result<&State> {
        Ok(&self.states[self.index_at(t)?])
    }

    /// Jump sum Σ D(z_{k−1}, z_k) over nodes i..=j.
    pub fn dissipation_between(&self, model: &dyn Model, i: usize, j: usize) -> f64 {
        (i + 1..=j)
            .map(|k| model.dissipation(self.states[k - 1].values(), self.states[k].values()))
            .sum()
    }
}

/// Diss_D(z; [s,t]) for a piecewise-constant trajectory.
///
/// Between nodes the curve only takes node values, so any partition sum is a
/// sum over a subsequence of node states; the triangle inequality makes the
/// full node-to-node jump sum the supremum.
pub fn total_dissipation(model: &dyn Model, traj: &Trajectory, s: f64, t: f64) -> Result<f64> {
    let i = traj.grid().require_node(s)?;
    let j = traj.grid().require_node(t)?;
    if i >= j {
        return Err(Error::InvalidGrid(format!("need s < t, got s={s}, t={t}")));
    }
    Ok(traj.dissipation_between(model, i, j))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> State {
        State::new(vec![v], vec![1.0]).unwrap()
    }

    fn traj(continuity: Continuity) -> Trajectory {
        let grid = TimeGrid::new(vec![0.0, 1.0, 2.0]).unwrap();
        Trajectory::new(grid, vec![scalar(10.0), scalar(20.0), scalar(30.0)], continuity).unwrap()
    }

    #[test]
    fn left_and_right_conventions() {
        let l = traj(Continuity::Left);
        let r = traj(Continuity::Right);
        assert_eq!(l.evaluate(0.5).unwrap().values(), &[20.0]);
        assert_eq!(r.evaluate(0.5).unwrap().values(), &[10.0]);
        for t in [0.0, 1.0, 2.0] {
            assert_eq!(l.evaluate(t).unwrap(), r.evaluate(t).unwrap());
        }
        assert_eq!(l.evaluate(1.0).unwrap().values(), &[20.0]);
        assert!(l.evaluate(-0.1).is_err());
        assert!(l.evaluate(2.5).is_err());
    }

    #[test]
    fn length_mismatch_rejected() {
        let grid = TimeGrid::new(vec![0.0, 1.0]).unwrap();
        assert!(Trajectory::new(grid, vec![scalar(0.0)], Continuity::Left).is_err());
    }
}
