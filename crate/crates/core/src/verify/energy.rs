//! Energy balance checks along a piecewise-constant trajectory.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{rate_integral, Model};
use crate::serde_ext;
use crate::solvers::IncrementalSolution;
use crate::trajectory::{Continuity, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyResidual {
    /// lhs − rhs; ≤ 0 means the inequality holds.
    #[serde(with = "serde_ext::real")]
    pub residual: f64,
    /// |lhs − rhs|, the defect of the energy equality.
    #[serde(with = "serde_ext::real")]
    pub gap: f64,
}

/// ∫ over step k (from t_{k−1} to t_k) of ∂ₛI with the state frozen at node `frozen`.
pub(crate) fn step_work(model: &dyn Model, traj: &Trajectory, k: usize, frozen: usize) -> f64 {
    let times = traj.grid().times();
    rate_integral(model, times[k - 1], times[k], traj.state(frozen).values())
}

fn node_pair(traj: &Trajectory, t0: f64, t1: f64) -> Result<(usize, usize)> {
    let i = traj.grid().require_node(t0)?;
    let j = traj.grid().require_node(t1)?;
    if i >= j {
        return Err(Error::InvalidGrid(format!("need t0 < t1, got {t0} and {t1}")));
    }
    Ok((i, j))
}

/// I(t₁,z(t₁)) + Diss(z;[t₀,t₁]) − I(t₀,z(t₀)) − ∫ ∂ₜI(t,z(t)) dt, with the
/// interpolant chosen by the trajectory's continuity.
pub fn check_energy_inequality(
    model: &dyn Model,
    traj: &Trajectory,
    t0: f64,
    t1: f64,
) -> Result<EnergyResidual> {
    let (i, j) = node_pair(traj, t0, t1)?;
    let lhs = model.energy(t1, traj.state(j).values()) + traj.dissipation_between(model, i, j);
    let work: f64 = (i + 1..=j)
        .map(|k| {
            let frozen = match traj.continuity() {
                Continuity::Left => k,
                Continuity::Right => k - 1,
            };
            step_work(model, traj, k, frozen)
        })
        .sum();
    let rhs = model.energy(t0, traj.state(i).values()) + work;
    let residual = lhs - rhs;
    Ok(EnergyResidual {
        residual,
        gap: residual.abs(),
    })
}

/// Residuals of the two-sided energy estimate between nodes j < m:
/// lower = I_j + ∫∂ₛI(Z) − I_m − Diss and upper = I_m + Diss − I_j − ∫∂ₛI(Ẑ),
/// where Z copies z_k onto (t_{k−1},t_k] and Ẑ copies z_{k−1} onto [t_{k−1},t_k).
pub fn check_two_sided(
    model: &dyn Model,
    solution: &IncrementalSolution,
    j: usize,
    m: usize,
) -> Result<(f64, f64)> {
    if !(j < m && m < solution.grid.len()) {
        return Err(Error::InvalidGrid(format!(
            "need 0 ≤ j < m ≤ {}, got j={j}, m={m}",
            solution.grid.steps()
        )));
    }
    let traj = solution.trajectory(Continuity::Left);
    let times = solution.grid.times();
    let e_j = model.energy(times[j], traj.state(j).values());
    let e_m = model.energy(times[m], traj.state(m).values());
    let diss = traj.dissipation_between(model, j, m);
    let mut left = 0.0;
    let mut right = 0.0;
    for k in j + 1..=m {
        left += step_work(model, &traj, k, k);
        right += step_work(model, &traj, k, k - 1);
    }
    Ok((e_j + left - e_m - diss, e_m + diss - e_j - right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use crate::load::Load;
    use crate::models::convex::tests::scalar_demo;
    use crate::models::{ConvexPointwiseModel, ConvexPointwiseParams};
    use crate::solvers::{solve_incremental, SolverStrategy};

    #[test]
    fn constant_trajectory_balances_exactly() {
        let m = ConvexPointwiseModel::new(
            ConvexPointwiseParams {
                weights: vec![1.0],
                alpha: vec![1.0],
                beta: 2.0,
                loads: vec![Load::constant(1.0)],
                dissipation: 1.0,
            },
            1.0,
        )
        .unwrap();
        let grid = TimeGrid::uniform(1.0, 4).unwrap();
        let sol = solve_incremental(&m, &grid, &m.make_state(vec![0.5]).unwrap(), &SolverStrategy::exact())
            .unwrap();
        for c in [Continuity::Left, Continuity::Right] {
            let r = check_energy_inequality(&m, &sol.trajectory(c), 0.0, 1.0).unwrap();
            assert_eq!(r.residual, 0.0);
        }
        assert_eq!(check_two_sided(&m, &sol, 0, 4).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn scalar_run_sandwiches() {
        let m = scalar_demo(1.0);
        let grid = TimeGrid::uniform(2.0, 16).unwrap();
        let sol = solve_incremental(&m, &grid, &m.make_state(vec![0.0]).unwrap(), &SolverStrategy::exact())
            .unwrap();
        let right = sol.trajectory(Continuity::Right);
        for i in 0..grid.len() {
            for j in i + 1..grid.len() {
                let (lo, up) = check_two_sided(&m, &sol, i, j).unwrap();
                assert!(lo <= 1e-10 && up <= 1e-10, "({i},{j}): {lo} {up}");
                let e = check_energy_inequality(&m, &right, grid.time(i), grid.time(j)).unwrap();
                assert!((e.residual - up).abs() < 1e-12);
            }
        }
        assert!(check_two_sided(&m, &sol, 3, 3).is_err());
    }
}
