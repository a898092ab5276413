use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite-dimensional internal state: one value per cell together with the
/// quadrature weight (cell measure) of that cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl State {
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidState("state needs at least one component".into()));
        }
        if values.len() != weights.len() {
            return Err(Error::InvalidState(format!(
                "{} values but {} weights",
                values.len(),
                weights.len()
            )));
        }
        if let Some(i) = weights.iter().position(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidState(format!(
                "weight {i} must be positive and finite, got {}",
                weights[i]
            )));
        }
        if let Some(i) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::InvalidState(format!("component {i} is NaN")));
        }
        Ok(State { values, weights })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Weighted L¹ norm Σ wᵢ|zᵢ|.
    pub fn norm(&self) -> f64 {
        weighted_l1(&self.weights, &self.values)
    }

    /// Weighted L¹ distance to `other` (which must share the layout).
    pub fn distance(&self, other: &State) -> f64 {
        weighted_l1_distance(&self.weights, &self.values, &other.values)
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<State> {
        State::new(values, self.weights.clone())
    }
}

pub fn weighted_l1(weights: &[f64], values: &[f64]) -> f64 {
    weights.iter().zip(values).map(|(w, v)| w * v.abs()).sum()
}

pub fn weighted_l1_distance(weights: &[f64], a: &[f64], b: &[f64]) -> f64 {
    weights
        .iter()
        .zip(a.iter().zip(b))
        .map(|(w, (x, y))| w * (y - x).abs())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_layouts() {
        assert!(State::new(vec![], vec![]).is_err());
        assert!(State::new(vec![1.0], vec![1.0, 2.0]).is_err());
        assert!(State::new(vec![1.0], vec![0.0]).is_err());
        assert!(State::new(vec![1.0], vec![-1.0]).is_err());
        assert!(State::new(vec![f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn weighted_norms() {
        let s = State::new(vec![1.0, -2.0], vec![0.5, 2.0]).unwrap();
        assert_eq!(s.norm(), 4.5);
        let t = s.with_values(vec![0.0, 0.0]).unwrap();
        assert_eq!(s.distance(&t), 4.5);
    }
}
