//! Mesoscopic two-phase bar. Each cell carries a phase fraction θ ∈ [0,1];
//! both phases share the modulus E and differ by the transformation strain
//! ε_T and a chemical energy w per unit volume. Eliminating the displacement
//! leaves a reduced energy that is quadratic in θ and depends on θ only
//! through Θ = Σ wᵢθᵢ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, ModelError, Result};
use crate::load::Load;
use crate::model::{Equilibrium, EquilibriumModel, Model, StabilityVerdict, Witness};

use super::{tridiag, EndLoading, ORACLE_SLACK};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPhaseParams {
    /// Cell lengths.
    pub weights: Vec<f64>,
    pub modulus: f64,
    pub transformation_strain: f64,
    pub phase_energy: f64,
    #[serde(default = "one")]
    pub sigma_plus: f64,
    #[serde(default = "one")]
    pub sigma_minus: f64,
    pub loading: EndLoading,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone)]
pub struct TwoPhaseModel {
    params: TwoPhaseParams,
    horizon: f64,
    length: f64,
    offset: f64,
    lipschitz: f64,
}

impl TwoPhaseModel {
    pub fn new(params: TwoPhaseParams, horizon: f64) -> Result<Self> {
        if params.weights.is_empty() {
            return Err(Error::param("weights", "need at least one cell"));
        }
        if params.weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::param("weights", "must be positive"));
        }
        for (name, v) in [
            ("modulus", params.modulus),
            ("sigma_plus", params.sigma_plus),
            ("sigma_minus", params.sigma_minus),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, "must be positive"));
            }
        }
        for (name, v) in [
            ("transformation_strain", params.transformation_strain),
            ("phase_energy", params.phase_energy),
        ] {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::param("horizon", "must be positive"));
        }
        params
            .loading
            .load()
            .validate()
            .map_err(|e| Error::param("loading", e))?;

        let length: f64 = params.weights.iter().sum();
        let e = params.modulus;
        let eps = params.transformation_strain;
        let w = params.phase_energy;
        let load = params.loading.load();
        let (lo, hi) = load.range(0.0, horizon);
        let max_rate = load.max_abs_rate(0.0, horizon);
        let (offset, lipschitz) = match params.loading {
            EndLoading::Displacement { .. } => {
                // stored energy ≥ 0, chemical part ≥ min(0, wL)
                let offset = (-w * length).max(0.0);
                let mut reach: f64 = 0.0;
                for d in [lo, hi] {
                    for theta in [0.0, length] {
                        reach = reach.max((d - eps * theta).abs());
                    }
                }
                (offset, e / length * max_rate * reach)
            }
            EndLoading::Force { .. } => {
                // −Lℓ²/(2E) + L·min(0, w − ℓε) is concave in ℓ
                let floor = [lo, hi]
                    .iter()
                    .map(|&l| -length * l * l / (2.0 * e) + length * (w - l * eps).min(0.0))
                    .fold(f64::INFINITY, f64::min);
                let mut reach: f64 = 0.0;
                for l in [lo, hi] {
                    for theta in [0.0, length] {
                        reach = reach.max((length * l / e + eps * theta).abs());
                    }
                }
                ((-floor).max(0.0), max_rate * reach)
            }
        };
        Ok(TwoPhaseModel {
            params,
            horizon,
            length,
            offset,
            lipschitz,
        })
    }

    pub fn params(&self) -> &TwoPhaseParams {
        &self.params
    }

    /// ψ(v) = max(σ₊v, −σ₋v).
    pub fn psi(&self, v: f64) -> f64 {
        (self.params.sigma_plus * v).max(-self.params.sigma_minus * v)
    }

    /// Θ = Σ wᵢθᵢ.
    pub fn transformed_volume(&self, theta: &[f64]) -> f64 {
        self.params
            .weights
            .iter()
            .zip(theta)
            .map(|(w, th)| w * th)
            .sum()
    }

    /// Reduced energy from the closed form in Θ (offset included).
    pub fn direct_energy(&self, t: f64, theta: &[f64]) -> f64 {
        let p = &self.params;
        let big_theta = self.transformed_volume(theta);
        let raw = match &p.loading {
            EndLoading::Displacement { load } => {
                let r = load.value(t) - p.transformation_strain * big_theta;
                p.modulus / (2.0 * self.length) * r * r + p.phase_energy * big_theta
            }
            EndLoading::Force { load } => {
                let l = load.value(t);
                -self.length * l * l / (2.0 * p.modulus)
                    + (p.phase_energy - l * p.transformation_strain) * big_theta
            }
        };
        raw + self.offset
    }

    /// dI/dΘ at time t.
    fn slope(&self, t: f64, big_theta: f64) -> f64 {
        let p = &self.params;
        match &p.loading {
            EndLoading::Displacement { load } => {
                let a = p.modulus / (2.0 * self.length);
                -2.0 * a * p.transformation_strain
                    * (load.value(t) - p.transformation_strain * big_theta)
                    + p.phase_energy
            }
            EndLoading::Force { load } => p.phase_energy - load.value(t) * p.transformation_strain,
        }
    }

    /// Θ where the slope equals `target`, or `None` when I is affine in Θ.
    fn slope_root(&self, t: f64, target: f64) -> Option<f64> {
        let p = &self.params;
        match &p.loading {
            EndLoading::Displacement { load } if p.transformation_strain != 0.0 => {
                let a = p.modulus / (2.0 * self.length);
                let eps = p.transformation_strain;
                Some((load.value(t) - (p.phase_energy - target) / (2.0 * a * eps)) / eps)
            }
            _ => None,
        }
    }

    fn stiffness(&self) -> Vec<f64> {
        self.params
            .weights
            .iter()
            .map(|w| self.params.modulus / w)
            .collect()
    }

    /// Spreads a change of Θ over the cells: increases fill from the last
    /// cell backwards, decreases drain from the first cell forwards. Both give
    /// the lexicographically smallest θ among monotone redistributions.
    fn redistribute(&self, prev: &[f64], change: f64) -> Vec<f64> {
        let w = &self.params.weights;
        let mut theta = prev.to_vec();
        let mut remaining = change.abs();
        if change > 0.0 {
            for i in (0..theta.len()).rev() {
                let room = (1.0 - theta[i]) * w[i];
                if remaining >= room {
                    theta[i] = 1.0;
                    remaining -= room;
                } else {
                    theta[i] = (theta[i] + remaining / w[i]).min(1.0);
                    break;
                }
            }
        } else if change < 0.0 {
            for i in 0..theta.len() {
                let avail = theta[i] * w[i];
                if remaining >= avail {
                    theta[i] = 0.0;
                    remaining -= avail;
                } else {
                    theta[i] = (theta[i] - remaining / w[i]).max(0.0);
                    break;
                }
            }
        }
        theta
    }

    fn slope_slack(&self, t: f64) -> f64 {
        let p = &self.params;
        let load = p.loading.load().value(t).abs();
        ORACLE_SLACK
            * (1.0
                + p.sigma_plus.max(p.sigma_minus)
                + p.phase_energy.abs()
                + p.modulus / self.length * load * p.transformation_strain.abs())
    }
}

impl Model for TwoPhaseModel {
    fn name(&self) -> &'static str {
        "two_phase"
    }

    fn weights(&self) -> &[f64] {
        &self.params.weights
    }

    fn horizon(&self) -> f64 {
        self.horizon
    }

    fn energy(&self, t: f64, z: &[f64]) -> f64 {
        if !self.is_admissible(z) {
            return f64::INFINITY;
        }
        self.direct_energy(t, z)
    }

    fn energy_rate(&self, t: f64, z: &[f64]) -> f64 {
        let p = &self.params;
        let big_theta = self.transformed_volume(z);
        match &p.loading {
            EndLoading::Displacement { load } => {
                p.modulus / self.length
                    * (load.value(t) - p.transformation_strain * big_theta)
                    * load.rate(t)
            }
            EndLoading::Force { load } => {
                let (l, dl) = (load.value(t), load.rate(t));
                -self.length * l * dl / p.modulus - p.transformation_strain * dl * big_theta
            }
        }
    }

    fn dissipation(&self, from: &[f64], to: &[f64]) -> f64 {
        self.params
            .weights
            .iter()
            .zip(from.iter().zip(to))
            .map(|(w, (a, b))| w * self.psi(b - a))
            .sum()
    }

    fn is_admissible(&self, z: &[f64]) -> bool {
        z.len() == self.dim() && z.iter().all(|v| (0.0..=1.0).contains(v))
    }

    fn lipschitz_bound(&self) -> f64 {
        self.lipschitz
    }

    fn coercivity_const(&self) -> f64 {
        self.params.sigma_plus.min(self.params.sigma_minus)
    }

    fn normalization_offset(&self) -> f64 {
        self.offset
    }

    fn search_box(&self, from: &[f64]) -> Vec<(f64, f64)> {
        vec![(0.0, 1.0); from.len()]
    }

    fn rate_breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        self.params.loading.load().breakpoints(a, b)
    }

    fn rate_piecewise_affine(&self) -> bool {
        // ∂ₜI is affine in (ℓ, ℓ̇)·ℓ̇
        self.params.loading.load().is_piecewise_affine()
    }

    fn stability_oracle(&self, t: f64, z: &[f64]) -> StabilityVerdict {
        let big_theta = self.transformed_volume(z);
        let slope = self.slope(t, big_theta);
        let slack = self.slope_slack(t);
        let up = z.iter().rposition(|&th| th < 1.0);
        let down = z.iter().position(|&th| th > 0.0);
        let component = match (up, down) {
            (Some(i), _) if slope < -self.params.sigma_plus - slack => i,
            (_, Some(i)) if slope > self.params.sigma_minus + slack => i,
            _ => return StabilityVerdict::Stable,
        };
        let competitor = self.exact_step(t, z).unwrap_or_else(|| z.to_vec());
        let violation =
            self.energy(t, z) - self.energy(t, &competitor) - self.dissipation(z, &competitor);
        StabilityVerdict::Unstable(Witness {
            component,
            competitor,
            violation,
        })
    }

    fn has_exact_step(&self) -> bool {
        true
    }

    fn exact_step(&self, t: f64, prev: &[f64]) -> Option<Vec<f64>> {
        let current = self.transformed_volume(prev);
        let slope = self.slope(t, current);
        let can_up = prev.iter().any(|&th| th < 1.0);
        let can_down = prev.iter().any(|&th| th > 0.0);
        let target = if can_up && slope < -self.params.sigma_plus {
            self.slope_root(t, -self.params.sigma_plus)
                .map_or(self.length, |r| r.clamp(current, self.length))
        } else if can_down && slope > self.params.sigma_minus {
            self.slope_root(t, self.params.sigma_minus)
                .map_or(0.0, |r| r.clamp(0.0, current))
        } else {
            return Some(prev.to_vec());
        };
        Some(self.redistribute(prev, target - current))
    }
}

impl EquilibriumModel for TwoPhaseModel {
    fn equilibrium(&self, t: f64, z: &[f64]) -> Result<Equilibrium, ModelError> {
        let p = &self.params;
        let n = z.len();
        let k = self.stiffness();
        let rest: Vec<f64> = (0..n)
            .map(|i| p.weights[i] * z[i] * p.transformation_strain)
            .collect();
        let (prescribed, load_value) = match &p.loading {
            EndLoading::Displacement { load } => (true, load.value(t)),
            EndLoading::Force { load } => (false, load.value(t)),
        };
        // unknowns: nodes 1..=n (force) or 1..n (displacement)
        let last = if prescribed { n - 1 } else { n };
        let mut diag = Vec::with_capacity(last);
        let mut off = Vec::with_capacity(last.saturating_sub(1));
        let mut rhs = Vec::with_capacity(last);
        for j in 1..=last {
            let mut d = k[j - 1];
            let mut r = k[j - 1] * rest[j - 1];
            if j < n {
                d += k[j];
                r -= k[j] * rest[j];
                if j < last {
                    off.push(-k[j]);
                }
            }
            if j == n {
                r += load_value;
            }
            if prescribed && j == n - 1 {
                r += k[n - 1] * load_value;
            }
            diag.push(d);
            rhs.push(r);
        }
        let free = tridiag::solve_spd(&diag, &off, &rhs).ok_or_else(|| ModelError::Singular {
            mode: "bar stiffness not positive definite".into(),
        })?;
        let mut u = Vec::with_capacity(n + 1);
        u.push(0.0);
        u.extend(free);
        if prescribed {
            u.push(load_value);
        }
        let energy = self.stored_energy(t, &u, z);
        let rate = match &p.loading {
            EndLoading::Displacement { load } => {
                let reaction = k[n - 1] * (u[n] - u[n - 1] - rest[n - 1]);
                reaction * load.rate(t)
            }
            EndLoading::Force { load } => -load.rate(t) * u[n],
        };
        Ok(Equilibrium {
            displacement: u,
            energy,
            energy_rate: rate,
        })
    }

    fn stored_energy(&self, t: f64, u: &[f64], z: &[f64]) -> f64 {
        let p = &self.params;
        let n = z.len();
        let mut e = 0.0;
        for i in 0..n {
            let strain = (u[i + 1] - u[i]) / p.weights[i];
            let r = strain - z[i] * p.transformation_strain;
            e += p.weights[i] * (0.5 * p.modulus * r * r + p.phase_energy * z[i]);
        }
        if let EndLoading::Force { load } = &p.loading {
            e -= load.value(t) * u[n];
        }
        e + self.offset
    }
}

impl EndLoading {
    pub fn load(&self) -> &Load {
        match self {
            EndLoading::Displacement { load } | EndLoading::Force { load } => load,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bar(weights: Vec<f64>, loading: EndLoading) -> TwoPhaseModel {
        TwoPhaseModel::new(
            TwoPhaseParams {
                weights,
                modulus: 3.0,
                transformation_strain: 0.2,
                phase_energy: 0.05,
                sigma_plus: 2.0,
                sigma_minus: 1.0,
                loading,
            },
            1.0,
        )
        .unwrap()
    }

    fn disp(slope: f64) -> EndLoading {
        EndLoading::Displacement {
            load: Load::affine(0.0, slope),
        }
    }

    #[test]
    fn psi_examples() {
        let m = bar(vec![1.0], disp(1.0));
        assert_eq!(m.psi(0.5), 1.0);
        assert_eq!(m.psi(-0.3), 0.3);
        assert_eq!(m.dissipation(&[0.0], &[0.5]) + m.dissipation(&[0.5], &[0.2]), 1.3);
    }

    #[test]
    fn single_cell_closed_form() {
        let m = bar(vec![1.0], disp(0.4));
        let (d, th) = (0.4, 0.3);
        let expect = 0.5 * 3.0 * (d - th * 0.2_f64).powi(2) + th * 0.05 + m.normalization_offset();
        assert!((m.energy(1.0, &[th]) - expect).abs() < 1e-14);
    }

    #[test]
    fn elimination_matches_closed_form() {
        for loading in [
            disp(0.7),
            EndLoading::Force {
                load: Load::affine(0.1, -0.5),
            },
        ] {
            let m = bar(vec![0.3, 0.5, 0.2, 0.4], loading);
            for theta in [[0.0, 0.2, 1.0, 0.5], [1.0, 1.0, 1.0, 1.0], [0.0; 4]] {
                for t in [0.0, 0.3, 1.0] {
                    let eq = m.equilibrium(t, &theta).unwrap();
                    assert!((eq.energy - m.direct_energy(t, &theta)).abs() < 1e-10);
                    assert!((eq.energy_rate - m.energy_rate(t, &theta)).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn exact_step_is_optimal_on_lattice() {
        let m = bar(vec![0.5, 0.5], disp(2.0));
        let prev = [0.0, 0.0];
        let next = m.exact_step(1.0, &prev).unwrap();
        let obj = |th: &[f64]| m.energy(1.0, th) + m.dissipation(&prev, th);
        let best = obj(&next);
        let n = 200;
        for i in 0..=n {
            for j in 0..=n {
                let th = [i as f64 / n as f64, j as f64 / n as f64];
                assert!(obj(&th) >= best - 1e-12);
            }
        }
        assert_eq!(m.stability_oracle(1.0, &next), StabilityVerdict::Stable);
        // lexicographic tie-break fills the last cell first
        assert!(next[1] >= next[0]);
    }

    #[test]
    fn oracle_flags_driven_state() {
        let m = bar(vec![1.0], disp(5.0));
        match m.stability_oracle(1.0, &[0.0]) {
            StabilityVerdict::Unstable(w) => assert!(w.violation > 0.0),
            v => panic!("expected unstable, got {v:?}"),
        }
    }
}
