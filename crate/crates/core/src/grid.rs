use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Partition 0 = t₀ < t₁ < … < t_N = T of the process interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidGrid("grid requires ≥ 2 nodes".into()));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidGrid(format!(
                "first node must be 0, got {}",
                times[0]
            )));
        }
        if let Some(w) = times.windows(2).position(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "nodes must be finite and strictly increasing (at index {})",
                w + 1
            )));
        }
        Ok(TimeGrid { times })
    }

    /// `steps` equal intervals on [0, horizon].
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidGrid("grid requires ≥ 2 nodes".into()));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidGrid(format!("horizon must be positive, got {horizon}")));
        }
        let times = (0..=steps)
            .map(|k| {
                if k == steps {
                    horizon
                } else {
                    horizon * k as f64 / steps as f64
                }
            })
            .collect();
        TimeGrid::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn horizon(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Number of nodes N + 1.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of intervals N.
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn time(&self, k: usize) -> f64 {
        self.times[k]
    }

    /// δ = max(t_j − t_{j−1}).
    pub fn fineness(&self) -> f64 {
        self.times
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Exact node lookup.
    pub fn node_index(&self, t: f64) -> Option<usize> {
        self.times
            .binary_search_by(|probe| probe.total_cmp(&t))
            .ok()
    }

    pub fn require_node(&self, t: f64) -> Result<usize> {
        self.node_index(t).ok_or(Error::NotANode(t))
    }

    /// Inserts the midpoint of every interval; the result contains `self`.
    pub fn refine_dyadic(&self) -> TimeGrid {
        let mut times = Vec::with_capacity(2 * self.times.len() - 1);
        for w in self.times.windows(2) {
            times.push(w[0]);
            times.push(0.5 * (w[0] + w[1]));
        }
        times.push(self.horizon());
        TimeGrid { times }
    }

    /// Maps every node through `alpha`, which must be strictly increasing
    /// with α(0) = 0.
    pub fn remap(&self, alpha: impl Fn(f64) -> f64) -> Result<TimeGrid> {
        TimeGrid::new(self.times.iter().map(|&t| alpha(t)).collect())
    }

    pub fn contains(&self, other: &TimeGrid) -> bool {
        other.times.iter().all(|&t| self.node_index(t).is_some())
    }
}

impl TryFrom<Vec<f64>> for TimeGrid {
    type Error = Error;
    fn try_from(times: Vec<f64>) -> Result<Self> {
        TimeGrid::new(times)
    }
}

impl From<TimeGrid> for Vec<f64> {
    fn from(grid: TimeGrid) -> Self {
        grid.times
    }
}
