//! Nested lattice search over a box.

use rayon::prelude::*;

use crate::error::{Error, Result};

use super::{rank, Candidate, Objective, SearchOutcome, ATTAINMENT_TOL, MAX_LATTICE};

fn lattice_point(lo: f64, hi: f64, i: usize, resolution: usize) -> f64 {
    if i + 1 == resolution {
        hi
    } else {
        lo + (hi - lo) * i as f64 / (resolution - 1) as f64
    }
}

/// Best point of a full lattice on `bounds` (degenerate sides held fixed).
fn best_on_lattice(
    objective: &Objective<'_>,
    bounds: &[(f64, f64)],
    resolution: usize,
) -> Result<(Candidate, usize)> {
    let active: Vec<usize> = (0..bounds.len()).filter(|&i| bounds[i].1 > bounds[i].0).collect();
    let count = active
        .iter()
        .try_fold(1usize, |acc, _| acc.checked_mul(resolution))
        .filter(|&c| c <= MAX_LATTICE)
        .ok_or_else(|| {
            Error::Strategy(format!(
                "grid search lattice {resolution}^{} exceeds {MAX_LATTICE} points",
                active.len()
            ))
        })?;
    let base: Vec<f64> = bounds.iter().map(|b| b.0).collect();
    let best = (0..count)
        .into_par_iter()
        .map(|mut index| {
            let mut z = base.clone();
            for &i in &active {
                let (lo, hi) = bounds[i];
                z[i] = lattice_point(lo, hi, index % resolution, resolution);
                index /= resolution;
            }
            objective.eval(z)
        })
        .min_by(rank)
        .expect("lattice is never empty");
    Ok((best, count))
}

pub(crate) fn search(
    objective: &Objective<'_>,
    bounds: &[(f64, f64)],
    resolution: usize,
    rounds: usize,
) -> Result<SearchOutcome> {
    let mut current: Vec<(f64, f64)> = bounds.to_vec();
    let mut candidates = Vec::with_capacity(rounds);
    let mut evaluations = 0;
    let mut improvements = Vec::new();
    for _ in 0..rounds {
        let (best, count) = best_on_lattice(objective, &current, resolution)?;
        evaluations += count;
        if let Some(last) = candidates.last() {
            let last: &Candidate = last;
            improvements.push(last.objective - best.objective);
        }
        current = current
            .iter()
            .zip(bounds)
            .zip(&best.z)
            .map(|((&(lo, hi), &(outer_lo, outer_hi)), &x)| {
                let spacing = (hi - lo) / (resolution - 1) as f64;
                ((x - spacing).max(outer_lo), (x + spacing).min(outer_hi))
            })
            .collect();
        candidates.push(best);
    }
    // still descending at an undiminished rate after the final zoom
    let non_attainment = match improvements.as_slice() {
        [.., before, last] => *last > ATTAINMENT_TOL && *last >= 0.5 * before,
        [last] => *last > ATTAINMENT_TOL,
        [] => false,
    };
    Ok(SearchOutcome {
        candidates,
        evaluations,
        non_attainment,
    })
}
