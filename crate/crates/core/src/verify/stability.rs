//! Stability of a state: I(t,z) ≤ I(t,ẑ) + D(z,ẑ) for every competitor ẑ.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{Model, StabilityVerdict, Witness};
use crate::serde_ext;
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityMode {
    /// Closed-form verdict when the model has one, sampling otherwise.
    Oracle,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StabilityCheck {
    pub mode: StabilityMode,
    /// Lattice points per active component.
    pub lattice_resolution: usize,
    /// Above this many active components the lattice shrinks to its diagonal.
    pub max_lattice_dims: usize,
    pub random: usize,
    /// Random points are topped up until the competitor set reaches this size.
    pub min_competitors: usize,
    /// Coordinate perturbation sizes relative to each box side.
    pub perturbation_scales: Vec<f64>,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for StabilityCheck {
    fn default() -> Self {
        StabilityCheck {
            mode: StabilityMode::Oracle,
            lattice_resolution: 17,
            max_lattice_dims: 3,
            random: 512,
            min_competitors: 1000,
            perturbation_scales: vec![1e-1, 1e-2, 1e-3, 1e-4],
            seed: 0,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum StabilityRecord {
    Certified,
    Sampled {
        competitors: usize,
        #[serde(with = "serde_ext::real")]
        worst_violation: f64,
    },
    Failed {
        witness: Witness,
    },
}

impl StabilityRecord {
    pub fn passed(&self) -> bool {
        !matches!(self, StabilityRecord::Failed { .. })
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            StabilityRecord::Failed { witness } => Some(witness),
            _ => None,
        }
    }
}

fn failed(witness: Witness) -> StabilityRecord {
    StabilityRecord::Failed { witness }
}

/// Deterministic competitor set around `z` for the stream `stream`.
pub fn competitors(model: &dyn Model, z: &[f64], check: &StabilityCheck, stream: u64) -> Vec<Vec<f64>> {
    let bounds = model.search_box(z);
    let active: Vec<usize> = (0..bounds.len()).filter(|&i| bounds[i].1 > bounds[i].0).collect();
    let res = check.lattice_resolution.max(2);
    let at = |i: usize, j: usize| {
        let (lo, hi) = bounds[i];
        if j + 1 == res {
            hi
        } else {
            lo + (hi - lo) * j as f64 / (res - 1) as f64
        }
    };
    let mut out = Vec::new();
    if active.len() <= check.max_lattice_dims {
        let count = res.pow(active.len() as u32);
        for mut index in 0..count {
            let mut c = z.to_vec();
            for &i in &active {
                c[i] = at(i, index % res);
                index /= res;
            }
            out.push(c);
        }
    } else {
        for j in 0..res {
            let mut c = z.to_vec();
            for &i in &active {
                c[i] = at(i, j);
            }
            out.push(c);
        }
    }
    for &scale in &check.perturbation_scales {
        for &i in &active {
            let step = scale * (bounds[i].1 - bounds[i].0);
            for sign in [1.0, -1.0] {
                let mut c = z.to_vec();
                c[i] = (z[i] + sign * step).clamp(bounds[i].0, bounds[i].1);
                out.push(c);
            }
        }
    }
    let random = check
        .random
        .max(check.min_competitors.saturating_sub(out.len()));
    let mut rng = ChaCha8Rng::seed_from_u64(check.seed);
    rng.set_stream(stream);
    for _ in 0..random {
        out.push(
            bounds
                .iter()
                .map(|&(lo, hi)| if hi > lo { rng.gen_range(lo..=hi) } else { lo })
                .collect(),
        );
    }
    out
}

/// Worst sampled violation I(t,z) − I(t,ẑ) − D(z,ẑ) at a single state.
pub fn sampled_stability(
    model: &dyn Model,
    t: f64,
    z: &[f64],
    check: &StabilityCheck,
    stream: u64,
) -> StabilityRecord {
    let here = model.energy(t, z);
    let pool = competitors(model, z, check, stream);
    let scored: Vec<(f64, usize)> = pool
        .par_iter()
        .enumerate()
        .filter(|(_, c)| model.is_admissible(c))
        .map(|(idx, c)| (here - model.energy(t, c) - model.dissipation(z, c), idx))
        .collect();
    let (worst, idx) = scored
        .iter()
        .copied()
        .filter(|(v, _)| !v.is_nan())
        .fold((f64::NEG_INFINITY, usize::MAX), |acc, x| if x.0 > acc.0 { x } else { acc });
    if worst > check.tolerance {
        let competitor = pool[idx].clone();
        let component = (0..z.len())
            .max_by(|&a, &b| {
                let da = (competitor[a] - z[a]).abs();
                let db = (competitor[b] - z[b]).abs();
                da.total_cmp(&db).then(b.cmp(&a))
            })
            .unwrap_or(0);
        return failed(Witness {
            component,
            competitor,
            violation: worst,
        });
    }
    StabilityRecord::Sampled {
        competitors: scored.len(),
        worst_violation: worst,
    }
}

fn stability_at(model: &dyn Model, t: f64, z: &[f64], check: &StabilityCheck, stream: u64) -> StabilityRecord {
    if check.mode == StabilityMode::Oracle {
        match model.stability_oracle(t, z) {
            StabilityVerdict::Stable => return StabilityRecord::Certified,
            StabilityVerdict::Unstable(w) => return failed(w),
            StabilityVerdict::Unknown => {}
        }
    }
    sampled_stability(model, t, z, check, stream)
}

/// Stability record for the trajectory's state at grid node `t`.
pub fn check_stability(
    model: &dyn Model,
    traj: &Trajectory,
    t: f64,
    check: &StabilityCheck,
) -> Result<StabilityRecord> {
    let k = traj.grid().require_node(t)?;
    Ok(stability_at(model, t, traj.state(k).values(), check, k as u64))
}

/// Records for every node, in node order.
pub fn check_all_nodes(model: &dyn Model, traj: &Trajectory, check: &StabilityCheck) -> Vec<StabilityRecord> {
    let times = traj.grid().times();
    (0..times.len())
        .into_par_iter()
        .map(|k| stability_at(model, times[k], traj.state(k).values(), check, k as u64))
        .collect()
}
