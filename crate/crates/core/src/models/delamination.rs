//! Delamination of a 1-D spring chain glued to a rigid substrate.
//!
//! Nodes 0..=n are joined by bulk springs k_e. Glue sites tie selected nodes
//! to the substrate with stiffness κᵢ scaled by the surviving glue fraction
//! zᵢ, so E(t,φ,z) = ½Σ k_e(Δφ_e)² + Σ zᵢ·½κᵢφ²_{node(i)} − ⟨ℓ(t),φ⟩ is
//! affine in z. Breaking glue costs c_D·aᵢ per unit fraction and healing is
//! forbidden (infinite dissipation).

use serde::{Deserialize, Serialize};

use crate::error::{Error, ModelError, Result};
use crate::model::{Equilibrium, EquilibriumModel, Model, StabilityVerdict, Witness};

use super::{tridiag, EndLoading, ORACLE_SLACK};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlueSite {
    pub node: usize,
    pub stiffness: f64,
    #[serde(default = "unit_area")]
    pub area: f64,
}

fn unit_area() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelaminationParams {
    /// Bulk spring between node e and e + 1.
    pub springs: Vec<f64>,
    pub glue: Vec<GlueSite>,
    /// Fix node 0 (φ₀ = 0).
    #[serde(default)]
    pub clamped: bool,
    /// Applied at the last node.
    pub loading: EndLoading,
    pub dissipation: f64,
}

#[derive(Debug, Clone)]
pub struct DelaminationModel {
    params: DelaminationParams,
    horizon: f64,
    areas: Vec<f64>,
    offset: f64,
    lipschitz: f64,
}

/// Largest glue count the vertex-enumeration stability oracle accepts.
const ORACLE_MAX_SITES: usize = 16;

impl DelaminationModel {
    pub fn new(params: DelaminationParams, horizon: f64) -> Result<Self> {
        if params.springs.is_empty() {
            return Err(Error::param("springs", "need at least one spring"));
        }
        if params.springs.iter().any(|k| !(*k > 0.0 && k.is_finite())) {
            return Err(Error::param("springs", "stiffnesses must be positive"));
        }
        if params.glue.is_empty() {
            return Err(Error::param("glue", "need at least one glue site"));
        }
        let last = params.springs.len();
        for (i, g) in params.glue.iter().enumerate() {
            if g.node > last {
                return Err(Error::param(
                    format!("glue[{i}].node"),
                    format!("node {} outside 0..={last}", g.node),
                ));
            }
            if !(g.stiffness > 0.0 && g.stiffness.is_finite()) {
                return Err(Error::param(format!("glue[{i}].stiffness"), "must be positive"));
            }
            if !(g.area > 0.0 && g.area.is_finite()) {
                return Err(Error::param(format!("glue[{i}].area"), "must be positive"));
            }
        }
        if !(params.dissipation > 0.0 && params.dissipation.is_finite()) {
            return Err(Error::param("dissipation", "must be positive"));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::param("horizon", "must be positive"));
        }
        params
            .loading
            .load()
            .validate()
            .map_err(|e| Error::param("loading", e))?;

        let areas = params.glue.iter().map(|g| g.area).collect();
        let mut model = DelaminationModel {
            params,
            horizon,
            areas,
            offset: 0.0,
            lipschitz: 0.0,
        };
        let load = model.params.loading.load().clone();
        let peak = load.max_abs(0.0, horizon);
        let peak_rate = load.max_abs_rate(0.0, horizon);
        let m = model.params.glue.len();
        match model.params.loading {
            EndLoading::Displacement { .. } => {
                // I = ½k_eff(z)u², k_eff grows with z
                let k_eff = model.end_response(&vec![1.0; m], 1.0)?;
                model.lipschitz = k_eff * peak * peak_rate;
            }
            EndLoading::Force { .. } => {
                // I = −½f²c(z) + γ, compliance c shrinks with z
                match model.end_response(&vec![0.0; m], 1.0) {
                    Ok(c0) => {
                        model.offset = 0.5 * peak * peak * c0;
                        model.lipschitz = c0 * peak * peak_rate;
                    }
                    Err(_) => {
                        // unbounded below once every glue site breaks
                        model.lipschitz = f64::INFINITY;
                    }
                }
            }
        }
        Ok(model)
    }

    pub fn params(&self) -> &DelaminationParams {
        &self.params
    }

    fn nodes(&self) -> usize {
        self.params.springs.len() + 1
    }

    fn is_force_controlled(&self) -> bool {
        matches!(self.params.loading, EndLoading::Force { .. })
    }

    /// Equilibrium field for a frozen glue state and end-load value.
    pub fn solve_field(&self, z: &[f64], load_value: f64) -> Result<Vec<f64>, ModelError> {
        let k = &self.params.springs;
        let n = k.len();
        let force = self.is_force_controlled();
        if force && !self.params.clamped && z.iter().all(|&zi| zi == 0.0) {
            return Err(ModelError::Singular {
                mode: format!(
                    "rigid translation of nodes 0..={n}: no clamp and every glue site broken"
                ),
            });
        }
        let first = usize::from(self.params.clamped);
        let last = if force { n } else { n - 1 };
        let mut glue_diag = vec![0.0; n + 1];
        for (g, &zi) in self.params.glue.iter().zip(z) {
            glue_diag[g.node] += zi * g.stiffness;
        }
        let mut diag = Vec::new();
        let mut off = Vec::new();
        let mut rhs = Vec::new();
        if first <= last {
            for j in first..=last {
                let mut d = glue_diag[j];
                if j >= 1 {
                    d += k[j - 1];
                }
                if j < n {
                    d += k[j];
                    if j < last {
                        off.push(-k[j]);
                    }
                }
                let mut r = 0.0;
                if force && j == n {
                    r += load_value;
                }
                if !force && j + 1 == n {
                    r += k[n - 1] * load_value;
                }
                diag.push(d);
                rhs.push(r);
            }
        }
        let free = tridiag::solve_spd(&diag, &off, &rhs).ok_or_else(|| ModelError::Singular {
            mode: format!("chain stiffness over nodes {first}..={last} is not positive definite"),
        })?;
        let mut phi = vec![0.0; n + 1];
        if first <= last {
            phi[first..=last].copy_from_slice(&free);
        }
        if !force {
            phi[n] = load_value;
        }
        Ok(phi)
    }

    /// Compliance φₙ/f (force control) or reaction R/u (displacement control).
    fn end_response(&self, z: &[f64], load_value: f64) -> Result<f64> {
        let phi = self.solve_field(z, load_value)?;
        Ok(if self.is_force_controlled() {
            phi[self.nodes() - 1] / load_value
        } else {
            self.reaction(&phi, z) / load_value
        })
    }

    fn reaction(&self, phi: &[f64], z: &[f64]) -> f64 {
        let n = self.nodes() - 1;
        let mut r = self.params.springs[n - 1] * (phi[n] - phi[n - 1]);
        for (g, &zi) in self.params.glue.iter().zip(z) {
            if g.node == n {
                r += zi * g.stiffness * phi[n];
            }
        }
        r
    }

    fn raw_energy(&self, t: f64, phi: &[f64], z: &[f64]) -> f64 {
        let k = &self.params.springs;
        let mut e = 0.0;
        for (i, ke) in k.iter().enumerate() {
            let d = phi[i + 1] - phi[i];
            e += 0.5 * ke * d * d;
        }
        for (g, &zi) in self.params.glue.iter().zip(z) {
            let jump = phi[g.node];
            e += zi * 0.5 * g.stiffness * jump * jump;
        }
        if let EndLoading::Force { load } = &self.params.loading {
            e -= load.value(t) * phi[k.len()];
        }
        e
    }
}

impl Model for DelaminationModel {
    fn name(&self) -> &'static str {
        "delamination"
    }

    fn weights(&self) -> &[f64] {
        &self.areas
    }

    fn horizon(&self) -> f64 {
        self.horizon
    }

    fn energy(&self, t: f64, z: &[f64]) -> f64 {
        if !self.is_admissible(z) {
            return f64::INFINITY;
        }
        match self.try_energy(t, z) {
            Ok(e) => e,
            // floating chain: the dead load does unbounded work unless it vanishes
            Err(_) if self.params.loading.load().value(t) == 0.0 => self.offset,
            Err(_) => f64::NEG_INFINITY,
        }
    }

    fn try_energy(&self, t: f64, z: &[f64]) -> Result<f64, ModelError> {
        if !self.is_admissible(z) {
            return Ok(f64::INFINITY);
        }
        Ok(self.equilibrium(t, z)?.energy)
    }

    fn energy_rate(&self, t: f64, z: &[f64]) -> f64 {
        match self.equilibrium(t, z) {
            Ok(eq) => eq.energy_rate,
            Err(_) => f64::NAN,
        }
    }

    fn dissipation(&self, from: &[f64], to: &[f64]) -> f64 {
        if from.iter().zip(to).any(|(a, b)| b > a) {
            return f64::INFINITY;
        }
        self.params.dissipation
            * self
                .areas
                .iter()
                .zip(from.iter().zip(to))
                .map(|(a, (z0, z1))| a * (z0 - z1))
                .sum::<f64>()
    }

    fn is_admissible(&self, z: &[f64]) -> bool {
        z.len() == self.dim() && z.iter().all(|v| (0.0..=1.0).contains(v))
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

    /// Only glue loss is finite-cost, so minimizers lie in [0, from].
    fn search_box(&self, from: &[f64]) -> Vec<(f64, f64)> {
        from.iter().map(|&z| (0.0, z)).collect()
    }

    fn rate_breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        self.params.loading.load().breakpoints(a, b)
    }

    fn rate_piecewise_affine(&self) -> bool {
        // I is quadratic in the load value
        self.params.loading.load().is_piecewise_affine()
    }

    /// I(t,·) is concave (an infimum of affine maps) and D(z,·) is linear on
    /// [0, z], so the worst competitor sits at a vertex of that box.
    fn stability_oracle(&self, t: f64, z: &[f64]) -> StabilityVerdict {
        let active: Vec<usize> = (0..z.len()).filter(|&i| z[i] > 0.0).collect();
        if active.len() > ORACLE_MAX_SITES {
            return StabilityVerdict::Unknown;
        }
        let here = self.energy(t, z);
        let mut worst: Option<(f64, Vec<f64>, usize)> = None;
        for mask in 1u32..(1u32 << active.len()) {
            let mut competitor = z.to_vec();
            let mut first = usize::MAX;
            for (b, &i) in active.iter().enumerate() {
                if mask & (1 << b) != 0 {
                    competitor[i] = 0.0;
                    first = first.min(i);
                }
            }
            let v = here - self.energy(t, &competitor) - self.dissipation(z, &competitor);
            if worst.as_ref().is_none_or(|(w, _, _)| v > *w) {
                worst = Some((v, competitor, first));
            }
        }
        match worst {
            Some((v, competitor, component)) if v > ORACLE_SLACK * (1.0 + here.abs()) => {
                StabilityVerdict::Unstable(Witness {
                    component,
                    competitor,
                    violation: v,
                })
            }
            _ => StabilityVerdict::Stable,
        }
    }
}

impl EquilibriumModel for DelaminationModel {
    fn equilibrium(&self, t: f64, z: &[f64]) -> Result<Equilibrium, ModelError> {
        let load = self.params.loading.load();
        let phi = self.solve_field(z, load.value(t))?;
        let energy = self.raw_energy(t, &phi, z) + self.offset;
        let n = self.nodes() - 1;
        let energy_rate = match &self.params.loading {
            EndLoading::Force { load } => -load.rate(t) * phi[n],
            EndLoading::Displacement { load } => self.reaction(&phi, z) * load.rate(t),
        };
        Ok(Equilibrium {
            displacement: phi,
            energy,
            energy_rate,
        })
    }

    fn stored_energy(&self, t: f64, displacement: &[f64], z: &[f64]) -> f64 {
        self.raw_energy(t, displacement, z) + self.offset
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::load::Load;

    fn two_springs_one_glue(loading: EndLoading, clamped: bool) -> DelaminationModel {
        DelaminationModel::new(
            DelaminationParams {
                springs: vec![1.0, 1.0],
                glue: vec![GlueSite {
                    node: 0,
                    stiffness: 1.0,
                    area: 1.0,
                }],
                clamped,
                loading,
                dissipation: 1.0,
            },
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn series_compliance_three() {
        let f = 0.8;
        let m = two_springs_one_glue(
            EndLoading::Force {
                load: Load::constant(f),
            },
            false,
        );
        let eq = m.equilibrium(0.0, &[1.0]).unwrap();
        assert!((eq.energy - m.normalization_offset() + f * f * 3.0 / 2.0).abs() < 1e-14);
        assert!((eq.displacement[2] - 3.0 * f).abs() < 1e-14);

        // brute force over a φ lattice
        let mut best = f64::INFINITY;
        let n = 120;
        for a in 0..=n {
            for b in 0..=n {
                for c in 0..=n {
                    let phi = [
                        a as f64 * 0.02,
                        b as f64 * 0.02 + 0.4,
                        c as f64 * 0.02 + 1.2,
                    ];
                    best = best.min(m.stored_energy(0.0, &phi, &[1.0]));
                }
            }
        }
        assert!((best - eq.energy).abs() < 1e-3);
        assert!(best >= eq.energy - 1e-12);
    }

    #[test]
    fn unclamped_broken_chain_is_singular() {
        let m = two_springs_one_glue(
            EndLoading::Force {
                load: Load::constant(1.0),
            },
            false,
        );
        match m.equilibrium(0.0, &[0.0]) {
            Err(ModelError::Singular { mode }) => assert!(mode.contains("rigid translation")),
            other => panic!("expected singular, got {other:?}"),
        }
        assert_eq!(m.energy(0.0, &[0.0]), f64::NEG_INFINITY);
        assert_eq!(m.lipschitz_bound(), f64::INFINITY);
    }

    #[test]
    fn healing_costs_infinity() {
        let m = two_springs_one_glue(
            EndLoading::Displacement {
                load: Load::affine(0.0, 1.0),
            },
            true,
        );
        assert_eq!(m.dissipation(&[0.2], &[0.5]), f64::INFINITY);
        assert_eq!(m.dissipation(&[0.5], &[0.2]), 0.3);
        assert_eq!(m.dissipation(&[0.5], &[0.5]), 0.0);
    }

    #[test]
    fn zero_load_gives_zero_field() {
        let m = two_springs_one_glue(
            EndLoading::Displacement {
                load: Load::constant(0.0),
            },
            true,
        );
        let eq = m.equilibrium(0.5, &[1.0]).unwrap();
        assert!(eq.displacement.iter().all(|&p| p == 0.0));
        assert_eq!(eq.energy, 0.0);
    }

    #[test]
    fn envelope_rate_matches_difference_quotient() {
        let m = two_springs_one_glue(
            EndLoading::Displacement {
                load: Load::affine(0.1, 0.7),
            },
            true,
        );
        let z = [0.6];
        let h = 1e-6;
        let fd = (m.energy(0.5 + h, &z) - m.energy(0.5 - h, &z)) / (2.0 * h);
        assert!((fd - m.energy_rate(0.5, &z)).abs() < 1e-8);
    }
}
