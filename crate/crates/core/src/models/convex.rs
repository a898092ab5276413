//! Convex pointwise model: I(t,z) = Σ wᵢ(αᵢ|zᵢ|^β − gᵢ(t)zᵢ) + γ with
//! D(z₀,z₁) = c_D Σ wᵢ|z₁ᵢ − z₀ᵢ|.
//!
//! Every piece is explicit: the incremental step is a per-cell threshold
//! update and the stable set is the per-cell inclusion
//! |z|^{β−2}z ∈ [(g − c_D)/(αβ), (g + c_D)/(αβ)].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::load::{merged_breakpoints, Load};
use crate::model::{Model, StabilityVerdict, Witness};
use crate::state::weighted_l1_distance;

use super::ORACLE_SLACK;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPointwiseParams {
    pub weights: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: f64,
    pub loads: Vec<Load>,
    pub dissipation: f64,
}

#[derive(Debug, Clone)]
pub struct ConvexPointwiseModel {
    params: ConvexPointwiseParams,
    horizon: f64,
    /// Per-cell radius containing every stable value.
    radius: Vec<f64>,
    offset: f64,
    lipschitz: f64,
}

impl ConvexPointwiseModel {
    pub fn new(params: ConvexPointwiseParams, horizon: f64) -> Result<Self> {
        let n = params.weights.len();
        if n == 0 {
            return Err(Error::param("weights", "need at least one cell"));
        }
        if params.alpha.len() != n {
            return Err(Error::param("alpha", format!("expected {n} entries")));
        }
        if params.loads.len() != n {
            return Err(Error::param("loads", format!("expected {n} entries")));
        }
        if params.weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::param("weights", "must be positive"));
        }
        if params.alpha.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::param("alpha", "must be positive"));
        }
        if !(params.beta > 1.0 && params.beta.is_finite()) {
            return Err(Error::param("beta", "must exceed 1"));
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

        let beta = params.beta;
        let c = params.dissipation;
        let mut radius = Vec::with_capacity(n);
        let mut offset = 0.0;
        let mut lipschitz = 0.0;
        for i in 0..n {
            let a = params.alpha[i];
            let g_max = params.loads[i].max_abs(0.0, horizon);
            // stable values obey |z|^{β−1} ≤ (|g| + c_D)/(αβ)
            let r = ((g_max + c) / (a * beta)).powf(1.0 / (beta - 1.0));
            radius.push(r);
            // min_z α|z|^β − g z = −(β−1)α|z*|^β with |z*|^{β−1} = |g|/(αβ)
            let z_star = (g_max / (a * beta)).powf(1.0 / (beta - 1.0));
            offset += params.weights[i] * (beta - 1.0) * a * z_star.powf(beta);
            lipschitz += params.weights[i] * params.loads[i].max_abs_rate(0.0, horizon) * r;
        }
        Ok(ConvexPointwiseModel {
            params,
            horizon,
            radius,
            offset,
            lipschitz,
        })
    }

    pub fn params(&self) -> &ConvexPointwiseParams {
        &self.params
    }

    /// Per-cell bound on stable values.
    pub fn stable_radius(&self) -> &[f64] {
        &self.radius
    }

    fn power(&self, z: f64) -> f64 {
        if self.params.beta == 2.0 {
            z * z
        } else {
            z.abs().powf(self.params.beta)
        }
    }

    /// |z|^{β−2} z, the quantity constrained by the stable set.
    fn signed_power(&self, z: f64) -> f64 {
        let beta = self.params.beta;
        if beta == 2.0 {
            z
        } else if z == 0.0 {
            0.0
        } else {
            z.signum() * z.abs().powf(beta - 1.0)
        }
    }

    /// Inverse of `signed_power`.
    fn signed_root(&self, y: f64) -> f64 {
        let beta = self.params.beta;
        if beta == 2.0 {
            y
        } else if y == 0.0 {
            0.0
        } else {
            y.signum() * y.abs().powf(1.0 / (beta - 1.0))
        }
    }

    /// Stable interval for |zᵢ|^{β−2}zᵢ at time t.
    pub fn stable_interval(&self, t: f64, i: usize) -> (f64, f64) {
        let g = self.params.loads[i].value(t);
        let ab = self.params.alpha[i] * self.params.beta;
        let c = self.params.dissipation;
        ((g - c) / ab, (g + c) / ab)
    }

    /// Per-cell closed-form minimizer of α|z|^β − g z + c_D|z − prev|.
    pub fn cell_step(&self, t: f64, i: usize, prev: f64) -> f64 {
        let (lo, hi) = self.stable_interval(t, i);
        let p = self.signed_power(prev);
        if p < lo {
            self.signed_root(lo)
        } else if p > hi {
            self.signed_root(hi)
        } else {
            prev
        }
    }
}

impl Model for ConvexPointwiseModel {
    fn name(&self) -> &'static str {
        "convex_pointwise"
    }

    fn weights(&self) -> &[f64] {
        &self.params.weights
    }

    fn horizon(&self) -> f64 {
        self.horizon
    }

    fn energy(&self, t: f64, z: &[f64]) -> f64 {
        let p = &self.params;
        let mut sum = 0.0;
        for i in 0..z.len() {
            sum += p.weights[i] * (p.alpha[i] * self.power(z[i]) - p.loads[i].value(t) * z[i]);
        }
        sum + self.offset
    }

    fn energy_rate(&self, t: f64, z: &[f64]) -> f64 {
        let p = &self.params;
        -(0..z.len())
            .map(|i| p.weights[i] * p.loads[i].rate(t) * z[i])
            .sum::<f64>()
    }

    fn dissipation(&self, from: &[f64], to: &[f64]) -> f64 {
        self.params.dissipation * weighted_l1_distance(&self.params.weights, from, to)
    }

    fn is_admissible(&self, z: &[f64]) -> bool {
        z.len() == self.dim() && z.iter().all(|v| v.is_finite())
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
        self.radius
            .iter()
            .zip(from)
            .map(|(&r, &z)| ((-r).min(z), r.max(z)))
            .collect()
    }

    fn rate_breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        merged_breakpoints(&self.params.loads, a, b)
    }

    fn rate_piecewise_affine(&self) -> bool {
        // ∂ₜI is linear in g'(t)
        self.params
            .loads
            .iter()
            .all(|l| l.is_piecewise_affine())
    }

    fn stability_oracle(&self, t: f64, z: &[f64]) -> StabilityVerdict {
        for (i, &zi) in z.iter().enumerate() {
            let (lo, hi) = self.stable_interval(t, i);
            let p = self.signed_power(zi);
            let slack = ORACLE_SLACK * (1.0 + lo.abs().max(hi.abs()));
            if p < lo - slack || p > hi + slack {
                let mut competitor = z.to_vec();
                competitor[i] = self.cell_step(t, i, zi);
                let violation = self.energy(t, z)
                    - self.energy(t, &competitor)
                    - self.dissipation(z, &competitor);
                return StabilityVerdict::Unstable(Witness {
                    component: i,
                    competitor,
                    violation,
                });
            }
        }
        StabilityVerdict::Stable
    }

    fn has_exact_step(&self) -> bool {
        true
    }

    fn exact_step(&self, t: f64, prev: &[f64]) -> Option<Vec<f64>> {
        Some(
            prev.iter()
                .enumerate()
                .map(|(i, &z)| self.cell_step(t, i, z))
                .collect(),
        )
    }
}
