//! Full a-posteriori certificate of a discrete trajectory.

use serde::{Deserialize, Serialize};

use crate::grid::TimeGrid;
use crate::model::Model;
use crate::serde_ext;
use crate::solvers::Guarantee;
use crate::trajectory::Trajectory;

use super::energy::step_work;
use super::stability::{check_all_nodes, StabilityCheck, StabilityRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeStability {
    pub node: usize,
    pub t: f64,
    pub record: StabilityRecord,
}

/// Per-step sandwich ∫∂ₛI(z_k) ≤ ΔI + D ≤ ∫∂ₛI(z_{k−1}) as two residuals
/// that are ≤ 0 when satisfied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainStep {
    pub step: usize,
    #[serde(with = "serde_ext::real")]
    pub lower: f64,
    #[serde(with = "serde_ext::real")]
    pub upper: f64,
}

/// Largest residual over node pairs (from < to).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairWorst {
    #[serde(with = "serde_ext::real")]
    pub residual: f64,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub holds: bool,
    /// bound − worst value; negative means violated.
    #[serde(with = "serde_ext::real")]
    pub slack: f64,
    #[serde(with = "serde_ext::real")]
    pub bound: f64,
    #[serde(with = "serde_ext::real")]
    pub worst: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConstants {
    /// C_I
    #[serde(with = "serde_ext::real")]
    pub lipschitz: f64,
    /// c_D
    pub coercivity: f64,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub check: String,
    pub node: Option<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub model: String,
    pub grid: TimeGrid,
    pub tolerance: f64,
    pub guarantee: Option<Guarantee>,
    pub constants: ModelConstants,
    pub stability: Vec<NodeStability>,
    pub energy_chain: Vec<ChainStep>,
    /// Worst energy-inequality residual, interpolating by z_{k−1} on each step.
    pub energy_inequality: PairWorst,
    /// |lhs − rhs| of the energy balance on the whole interval.
    #[serde(with = "serde_ext::real")]
    pub energy_gap: f64,
    pub two_sided_lower: PairWorst,
    pub two_sided_upper: PairWorst,
    #[serde(with = "serde_ext::real")]
    pub dissipation_total: f64,
    /// I(t_k,z_k) + Diss ≤ I(0,z₀) + C_I·T.
    pub energy_bound: BoundCheck,
    /// ‖z_k‖ ≤ ‖z₀‖ + (I(0,z₀) + C_I·T)/c_D.
    pub norm_bound: BoundCheck,
    pub passed: bool,
    pub failures: Vec<Failure>,
}

impl CertificateReport {
    pub fn first_failure(&self) -> Option<&Failure> {
        self.failures.first()
    }
}

/// max over i < j of (a_j − a_i) together with the maximizing pair.
fn worst_increase(a: &[f64]) -> PairWorst {
    let mut worst = PairWorst {
        residual: f64::NEG_INFINITY,
        from: 0,
        to: 1,
    };
    let mut min_at = 0;
    for j in 1..a.len() {
        let r = a[j] - a[min_at];
        if r > worst.residual || r.is_nan() {
            worst = PairWorst {
                residual: r,
                from: min_at,
                to: j,
            };
        }
        if a[j] < a[min_at] {
            min_at = j;
        }
    }
    worst
}

fn bound_check(bound: f64, worst: f64, tol: f64) -> BoundCheck {
    let slack = if bound == f64::INFINITY { f64::INFINITY } else { bound - worst };
    BoundCheck {
        holds: slack >= -tol,
        slack,
        bound,
        worst,
    }
}

/// Checks stability at every node, the per-step energy chain, the energy
/// inequality and the two-sided estimate over all node pairs, and the a
/// priori energy and norm bounds.
pub fn certify(
    model: &dyn Model,
    traj: &Trajectory,
    guarantee: Option<Guarantee>,
    check: &StabilityCheck,
) -> CertificateReport {
    let tol = check.tolerance;
    let grid = traj.grid();
    let times = grid.times();
    let n = times.len();
    let energies: Vec<f64> = (0..n)
        .map(|k| model.energy(times[k], traj.state(k).values()))
        .collect();

    let stability: Vec<NodeStability> = check_all_nodes(model, traj, check)
        .into_iter()
        .enumerate()
        .map(|(node, record)| NodeStability {
            node,
            t: times[node],
            record,
        })
        .collect();

    let mut energy_chain = Vec::with_capacity(n - 1);
    // prefix sums: upper side a_k, lower side b_k
    let mut a = vec![energies[0]];
    let mut b = vec![-energies[0]];
    let (mut diss, mut work_left, mut work_right) = (0.0, 0.0, 0.0);
    for k in 1..n {
        let d = model.dissipation(traj.state(k - 1).values(), traj.state(k).values());
        let left = step_work(model, traj, k, k);
        let right = step_work(model, traj, k, k - 1);
        let change = energies[k] - energies[k - 1] + d;
        energy_chain.push(ChainStep {
            step: k,
            lower: left - change,
            upper: change - right,
        });
        diss += d;
        work_left += left;
        work_right += right;
        a.push(energies[k] + diss - work_right);
        b.push(-(energies[k] + diss - work_left));
    }
    let energy_inequality = worst_increase(&a);
    let two_sided_upper = energy_inequality;
    let two_sided_lower = worst_increase(&b);
    let energy_gap = (a[n - 1] - a[0]).abs();

    let c_i = model.lipschitz_bound();
    let c_d = model.coercivity_const();
    let budget = energies[0] + c_i * grid.horizon();
    let mut cumulative = 0.0;
    let mut worst_energy = energies[0];
    for k in 1..n {
        cumulative += model.dissipation(traj.state(k - 1).values(), traj.state(k).values());
        worst_energy = worst_energy.max(energies[k] + cumulative);
    }
    let energy_bound = bound_check(budget, worst_energy, tol);
    let worst_norm = traj.states().iter().map(|s| s.norm()).fold(0.0, f64::max);
    let norm_bound = bound_check(traj.state(0).norm() + budget / c_d, worst_norm, tol);

    let mut failures = Vec::new();
    for s in &stability {
        if let StabilityRecord::Failed { witness } = &s.record {
            failures.push(Failure {
                check: "stability".into(),
                node: Some(s.node),
                detail: format!(
                    "competitor {:?} lowers I + D by {:e} (component {})",
                    witness.competitor, witness.violation, witness.component
                ),
            });
        }
    }
    for c in &energy_chain {
        if !(c.lower <= tol && c.upper <= tol) {
            failures.push(Failure {
                check: "energy_chain".into(),
                node: Some(c.step),
                detail: format!("lower {:e}, upper {:e}", c.lower, c.upper),
            });
        }
    }
    let mut pair_failure = |name: &str, w: &PairWorst| {
        if !(w.residual <= tol) {
            failures.push(Failure {
                check: name.into(),
                node: Some(w.to),
                detail: format!("residual {:e} between nodes {} and {}", w.residual, w.from, w.to),
            });
        }
    };
    pair_failure("energy_inequality", &energy_inequality);
    pair_failure("two_sided_lower", &two_sided_lower);
    pair_failure("two_sided_upper", &two_sided_upper);
    for (name, bound) in [("energy_bound", &energy_bound), ("norm_bound", &norm_bound)] {
        if !bound.holds {
            failures.push(Failure {
                check: name.into(),
                node: None,
                detail: format!("worst {:e} exceeds bound {:e}", bound.worst, bound.bound),
            });
        }
    }

    CertificateReport {
        model: model.name().to_string(),
        grid: grid.clone(),
        tolerance: tol,
        guarantee,
        constants: ModelConstants {
            lipschitz: c_i,
            coercivity: c_d,
            offset: model.normalization_offset(),
        },
        stability,
        energy_chain,
        energy_inequality,
        energy_gap,
        two_sided_lower,
        two_sided_upper,
        dissipation_total: diss,
        energy_bound,
        norm_bound,
        passed: failures.is_empty(),
        failures,
    }
}
