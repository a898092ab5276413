//! Seeded multistart projected coordinate descent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{rank, Candidate, Objective, SearchOutcome};

pub(crate) struct Settings {
    pub starts: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub initial_step: f64,
    pub seed: u64,
    pub stream: u64,
}

/// Steps below this fraction of a box side count as converged.
const STEP_FLOOR: f64 = 1e-9;

fn descend(
    objective: &Objective<'_>,
    bounds: &[(f64, f64)],
    start: Vec<f64>,
    settings: &Settings,
) -> (Candidate, usize) {
    let active: Vec<usize> = (0..bounds.len()).filter(|&i| bounds[i].1 > bounds[i].0).collect();
    let mut steps: Vec<f64> = bounds
        .iter()
        .map(|(lo, hi)| settings.initial_step * (hi - lo))
        .collect();
    let mut current = objective.eval(start);
    let mut evaluations = 1;
    for _ in 0..settings.max_iterations {
        let before = current.objective;
        for &i in &active {
            let (lo, hi) = bounds[i];
            let x = current.z[i];
            let trials = [
                objective.prev[i].clamp(lo, hi),
                lo,
                hi,
                (x + steps[i]).min(hi),
                (x - steps[i]).max(lo),
            ];
            let mut best: Option<Candidate> = None;
            for v in trials {
                if v == x {
                    continue;
                }
                let mut z = current.z.clone();
                z[i] = v;
                let c = objective.eval(z);
                evaluations += 1;
                if best.as_ref().is_none_or(|b| rank(&c, b).is_lt()) {
                    best = Some(c);
                }
            }
            match best {
                Some(c) if c.objective < current.objective => {
                    current = c;
                    steps[i] = (2.0 * steps[i]).min(hi - lo);
                }
                _ => steps[i] *= 0.5,
            }
        }
        let settled = active
            .iter()
            .all(|&i| steps[i] < STEP_FLOOR * (bounds[i].1 - bounds[i].0));
        if !(before - current.objective >= settings.tolerance) && settled {
            break;
        }
    }
    (current, evaluations)
}

pub(crate) fn search(
    objective: &Objective<'_>,
    bounds: &[(f64, f64)],
    settings: &Settings,
) -> SearchOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    rng.set_stream(settings.stream);
    let mut starts = Vec::with_capacity(settings.starts);
    starts.push(
        objective
            .prev
            .iter()
            .zip(bounds)
            .map(|(&p, &(lo, hi))| p.clamp(lo, hi))
            .collect::<Vec<_>>(),
    );
    while starts.len() < settings.starts {
        starts.push(
            bounds
                .iter()
                .map(|&(lo, hi)| if hi > lo { rng.gen_range(lo..=hi) } else { lo })
                .collect(),
        );
    }
    let runs: Vec<(Candidate, usize)> = starts
        .into_par_iter()
        .map(|s| descend(objective, bounds, s, settings))
        .collect();
    let evaluations = runs.iter().map(|r| r.1).sum();
    SearchOutcome {
        candidates: runs.into_iter().map(|r| r.0).collect(),
        evaluations,
        non_attainment: false,
    }
}
