//! Nonconvex gradient model on a uniform 1-D mesh:
//! I(t,z) = Σ_edges (h/2)((zᵢ₊₁ − zᵢ)/h)² + Σᵢ h·f(t,xᵢ,zᵢ) + γ
//! with the double well f(t,x,z) = (z² − 1)² − g(t,x)z.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::load::{merged_breakpoints, Load};
use crate::model::Model;
use crate::state::weighted_l1_distance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Natural,
    Dirichlet {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientParams {
    /// Number of mesh nodes (≥ 2).
    pub nodes: usize,
    /// Length of the interval; h = length / (nodes − 1).
    pub length: f64,
    /// One load per node.
    pub loads: Vec<Load>,
    pub dissipation: f64,
    #[serde(default)]
    pub left: Boundary,
    #[serde(default)]
    pub right: Boundary,
}

#[derive(Debug, Clone)]
pub struct GradientModel {
    params: GradientParams,
    horizon: f64,
    h: f64,
    weights: Vec<f64>,
    radius: f64,
    offset: f64,
    lipschitz: f64,
}

impl GradientModel {
    pub fn new(params: GradientParams, horizon: f64) -> Result<Self> {
        let n = params.nodes;
        if n < 2 {
            return Err(Error::param("nodes", "need at least 2 mesh nodes"));
        }
        if !(params.length > 0.0 && params.length.is_finite()) {
            return Err(Error::param("length", "must be positive"));
        }
        if params.loads.len() != n {
            return Err(Error::param("loads", format!("expected {n} entries")));
        }
        if !(params.dissipation > 0.0 && params.dissipation.is_finite()) {
            return Err(Error::param("dissipation", "must be positive"));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::param("horizon", "must be positive"));
        }
        for (i, l) in params.loads.iter().enumerate() {
            l.validate().map_err(|e| Error::param(format!("loads[{i}]"), e))?;
        }
        for (name, b) in [("left", params.left), ("right", params.right)] {
            if let Boundary::Dirichlet { value } = b {
                if !value.is_finite() {
                    return Err(Error::param(name, "boundary value must be finite"));
                }
            }
        }
        let h = params.length / (n - 1) as f64;
        let g_max = params
            .loads
            .iter()
            .map(|l| l.max_abs(0.0, horizon))
            .fold(0.0, f64::max);
        // Beyond the largest root of 4r³ − 4r = G + c_D, clamping a value back
        // lowers I + D strictly, so stable states stay inside that radius.
        let mut radius = well_radius(g_max + params.dissipation);
        for b in [params.left, params.right] {
            if let Boundary::Dirichlet { value } = b {
                radius = radius.max(value.abs());
            }
        }
        let offset = params
            .loads
            .iter()
            .map(|l| h * l.max_abs(0.0, horizon) * radius)
            .sum();
        let lipschitz = params
            .loads
            .iter()
            .map(|l| h * l.max_abs_rate(0.0, horizon) * radius)
            .sum();
        Ok(GradientModel {
            weights: vec![h; n],
            params,
            horizon,
            h,
            radius,
            offset,
            lipschitz,
        })
    }

    pub fn params(&self) -> &GradientParams {
        &self.params
    }

    pub fn mesh_size(&self) -> f64 {
        self.h
    }

    pub fn stable_radius(&self) -> f64 {
        self.radius
    }

    fn fixed_value(&self, i: usize) -> Option<f64> {
        let last = self.params.nodes - 1;
        match (i, self.params.left, self.params.right) {
            (0, Boundary::Dirichlet { value }, _) => Some(value),
            (i, _, Boundary::Dirichlet { value }) if i == last => Some(value),
            _ => None,
        }
    }
}

/// Largest root of 4r³ − 4r = rhs (rhs ≥ 0), rounded up.
fn well_radius(rhs: f64) -> f64 {
    let phi = |r: f64| 4.0 * r * r * r - 4.0 * r - rhs;
    let (mut lo, mut hi) = (1.0_f64, 2.0 + rhs);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

impl Model for GradientModel {
    fn name(&self) -> &'static str {
        "gradient_nonconvex"
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn horizon(&self) -> f64 {
        self.horizon
    }

    fn energy(&self, t: f64, z: &[f64]) -> f64 {
        if !self.is_admissible(z) {
            return f64::INFINITY;
        }
        let h = self.h;
        let gradient: f64 = z
            .windows(2)
            .map(|w| {
                let d = (w[1] - w[0]) / h;
                0.5 * h * d * d
            })
            .sum();
        let potential: f64 = z
            .iter()
            .zip(&self.params.loads)
            .map(|(&zi, l)| {
                let s = zi * zi - 1.0;
                h * (s * s - l.value(t) * zi)
            })
            .sum();
        gradient + potential + self.offset
    }

    fn energy_rate(&self, t: f64, z: &[f64]) -> f64 {
        -z.iter()
            .zip(&self.params.loads)
            .map(|(&zi, l)| self.h * l.rate(t) * zi)
            .sum::<f64>()
    }

    fn dissipation(&self, from: &[f64], to: &[f64]) -> f64 {
        self.params.dissipation * weighted_l1_distance(&self.weights, from, to)
    }

    fn is_admissible(&self, z: &[f64]) -> bool {
        z.len() == self.params.nodes
            && z.iter().all(|v| v.is_finite())
            && z.iter()
                .enumerate()
                .all(|(i, &v)| self.fixed_value(i).is_none_or(|b| b == v))
    }

    fn lipschitz_bound(&self) -> f64 {
        self.lipschitz
    }

    fn coercivity_const(&self) -> f64 {
        self.params.dissipation
    }

    fn normalization_offset(&self) -> f64 {
        self.offset
    }

    fn search_box(&self, from: &[f64]) -> Vec<(f64, f64)> {
        from.iter()
            .enumerate()
            .map(|(i, &z)| match self.fixed_value(i) {
                Some(v) => (v, v),
                None => ((-self.radius).min(z), self.radius.max(z)),
            })
            .collect()
    }

    fn rate_breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        merged_breakpoints(&self.params.loads, a, b)
    }

    fn rate_piecewise_affine(&self) -> bool {
        self.params.loads.iter().all(|l| l.is_piecewise_affine())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> GradientModel {
        GradientModel::new(
            GradientParams {
                nodes: 5,
                length: 1.0,
                loads: vec![Load::affine(0.0, 1.5); 5],
                dissipation: 0.5,
                left: Boundary::Dirichlet { value: -1.0 },
                right: Boundary::Natural,
            },
            2.0,
        )
        .unwrap()
    }

    #[test]
    fn radius_solves_cubic() {
        let r = well_radius(3.5);
        assert!((4.0 * r * r * r - 4.0 * r - 3.5).abs() < 1e-9);
        let unit = well_radius(0.0);
        assert!((1.0..1.0 + 1e-15).contains(&unit));
    }

    #[test]
    fn dirichlet_nodes_are_pinned() {
        let m = model();
        assert!(m.is_admissible(&[-1.0, 0.0, 0.0, 0.0, 0.0]));
        assert!(!m.is_admissible(&[0.0, 0.0, 0.0, 0.0, 0.0]));
        assert_eq!(m.energy(0.0, &[0.0; 5]), f64::INFINITY);
        let b = m.search_box(&[-1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(b[0], (-1.0, -1.0));
        assert!(b[1].0 < -1.0 && b[1].1 > 1.0);
    }

    #[test]
    fn energy_is_nonnegative_on_samples() {
        let m = model();
        let r = m.stable_radius();
        for k in 0..=40 {
            let v = -r + 2.0 * r * k as f64 / 40.0;
            for t in [0.0, 1.0, 2.0] {
                let z = [-1.0, v, -v, v, 0.5 * v];
                assert!(m.energy(t, &z) >= 0.0);
            }
        }
    }

    #[test]
    fn uniform_well_value() {
        let m = model();
        // constant −1 profile at t = 0: no gradient, no well energy, no load
        assert_eq!(m.energy(0.0, &[-1.0; 5]), m.normalization_offset());
    }
}
