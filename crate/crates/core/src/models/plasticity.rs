//! Single-slip finite-strain plasticity at a material point.
//!
//! The plastic part is P(γ) = I + γ·e₁⊗e₂ ∈ SL(2) and the imposed
//! deformation follows the shear path F(t) = I + s(t)·e₁⊗e₂, so the elastic
//! energy reduces to ½μ(s − γ)² and slip costs κ|Δγ|.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ModelError, Result};
use crate::load::Load;
use crate::model::{Model, StabilityVerdict, Witness};

use super::ORACLE_SLACK;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlasticityParams {
    pub mu: f64,
    pub kappa: f64,
    #[serde(default = "unit_weight")]
    pub weight: f64,
    /// Shear amount s(t).
    pub shear: Load,
}

fn unit_weight() -> f64 {
    1.0
}

/// Tolerance for recognizing matrices on the slip subgroup or on the shear path.
const GROUP_TOL: f64 = 1e-9;
const DET_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct PlasticityPointModel {
    params: PlasticityParams,
    horizon: f64,
    weights: [f64; 1],
    shear_range: (f64, f64),
}

/// P(γ) = I + γ·e₁⊗e₂.
pub fn slip(gamma: f64) -> Matrix2<f64> {
    Matrix2::new(1.0, gamma, 0.0, 1.0)
}

/// F = I + s·e₁⊗e₂.
pub fn shear(s: f64) -> Matrix2<f64> {
    slip(s)
}

fn inverse_2x2(m: &Matrix2<f64>) -> Result<Matrix2<f64>, ModelError> {
    let det = m.determinant();
    if (det - 1.0).abs() > DET_TOL {
        return Err(ModelError::NotUnimodular { det });
    }
    Ok(Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / det)
}

fn subgroup_coordinate(m: &Matrix2<f64>) -> Result<f64, ModelError> {
    let off = (m[(0, 0)] - 1.0)
        .abs()
        .max((m[(1, 1)] - 1.0).abs())
        .max(m[(1, 0)].abs());
    if off > GROUP_TOL * (1.0 + m[(0, 1)].abs()) {
        return Err(ModelError::OffSubgroup {
            found: format!("{m:?}"),
        });
    }
    Ok(m[(0, 1)])
}

impl PlasticityPointModel {
    pub fn new(params: PlasticityParams, horizon: f64) -> Result<Self> {
        for (field, v) in [
            ("mu", params.mu),
            ("kappa", params.kappa),
            ("weight", params.weight),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(field, "must be positive"));
            }
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::param("horizon", "must be positive"));
        }
        params.shear.validate().map_err(|e| Error::param("shear", e))?;
        let shear_range = params.shear.range(0.0, horizon);
        Ok(PlasticityPointModel {
            weights: [params.weight],
            params,
            horizon,
            shear_range,
        })
    }

    pub fn params(&self) -> &PlasticityParams {
        &self.params
    }

    fn threshold(&self) -> f64 {
        self.params.kappa / self.params.mu
    }

    fn return_map(&self, gamma_old: f64, s: f64) -> f64 {
        let r = s - gamma_old;
        gamma_old + r.signum() * (r.abs() - self.threshold()).max(0.0)
    }

    /// Condensed energy min_γ {½μ(s−γ)² + κ|γ − γ_old|} and its minimizer.
    pub fn reduced_constitutive(&self, gamma_old: f64, f: &Matrix2<f64>) -> Result<(f64, f64)> {
        let on_path = (f[(0, 0)] - 1.0).abs() <= GROUP_TOL
            && (f[(1, 1)] - 1.0).abs() <= GROUP_TOL
            && f[(1, 0)].abs() <= GROUP_TOL;
        if !on_path {
            return Err(ModelError::OffShearPath {
                found: format!("{f:?}"),
            }
            .into());
        }
        let s = f[(0, 1)];
        let gamma_new = if s == gamma_old {
            gamma_old
        } else {
            self.return_map(gamma_old, s)
        };
        let e = s - gamma_new;
        let psi = 0.5 * self.params.mu * e * e + self.params.kappa * (gamma_new - gamma_old).abs();
        Ok((psi, gamma_new))
    }

    /// κ times the subgroup coordinate of P₀⁻¹P₁.
    pub fn group_dissipation(
        &self,
        p0: &Matrix2<f64>,
        p1: &Matrix2<f64>,
    ) -> Result<f64, ModelError> {
        let m = inverse_2x2(p0)? * p1;
        Ok(self.params.kappa * subgroup_coordinate(&m)?.abs())
    }

    /// |D(QP₀, QP₁) − D(P₀, P₁)| evaluated at group level.
    pub fn left_invariance_check(&self, q: &Matrix2<f64>, gamma0: f64, gamma1: f64) -> Result<f64> {
        let det = q.determinant();
        if (det - 1.0).abs() > DET_TOL {
            return Err(ModelError::NotUnimodular { det }.into());
        }
        let (p0, p1) = (slip(gamma0), slip(gamma1));
        let moved = self.group_dissipation(&(q * p0), &(q * p1))?;
        let base = self.group_dissipation(&p0, &p1)?;
        Ok((moved - base).abs())
    }
}

impl Model for PlasticityPointModel {
    fn name(&self) -> &'static str {
        "plasticity_point"
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn horizon(&self) -> f64 {
        self.horizon
    }

    fn energy(&self, t: f64, z: &[f64]) -> f64 {
        let e = self.params.shear.value(t) - z[0];
        self.params.weight * 0.5 * self.params.mu * e * e
    }

    fn energy_rate(&self, t: f64, z: &[f64]) -> f64 {
        let e = self.params.shear.value(t) - z[0];
        self.params.weight * self.params.mu * e * self.params.shear.rate(t)
    }

    fn dissipation(&self, from: &[f64], to: &[f64]) -> f64 {
        self.params.weight * self.params.kappa * (to[0] - from[0]).abs()
    }

    fn is_admissible(&self, z: &[f64]) -> bool {
        z.len() == 1 && z[0].is_finite()
    }

    fn lipschitz_bound(&self) -> f64 {
        let (lo, hi) = self.shear_range;
        self.params.weight
            * self.params.mu
            * self.params.shear.max_abs_rate(0.0, self.horizon)
            * (hi - lo + self.threshold())
    }

    fn coercivity_const(&self) -> f64 {
        self.params.kappa
    }

    fn search_box(&self, from: &[f64]) -> Vec<(f64, f64)> {
        let (lo, hi) = self.shear_range;
        let c = self.threshold();
        vec![((lo - c).min(from[0]), (hi + c).max(from[0]))]
    }

    fn rate_breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        self.params.shear.breakpoints(a, b)
    }

    fn rate_piecewise_affine(&self) -> bool {
        self.params.shear.is_piecewise_affine()
    }

    fn stability_oracle(&self, t: f64, z: &[f64]) -> StabilityVerdict {
        let s = self.params.shear.value(t);
        let stress = self.params.mu * (s - z[0]);
        if stress.abs() <= self.params.kappa * (1.0 + ORACLE_SLACK) {
            return StabilityVerdict::Stable;
        }
        let competitor = vec![self.return_map(z[0], s)];
        let violation =
            self.energy(t, z) - self.energy(t, &competitor) - self.dissipation(z, &competitor);
        StabilityVerdict::Unstable(Witness {
            component: 0,
            competitor,
            violation,
        })
    }

    fn has_exact_step(&self) -> bool {
        true
    }

    fn exact_step(&self, t: f64, prev: &[f64]) -> Option<Vec<f64>> {
        Some(vec![self.return_map(prev[0], self.params.shear.value(t))])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(mu: f64, kappa: f64) -> PlasticityPointModel {
        PlasticityPointModel::new(
            PlasticityParams {
                mu,
                kappa,
                weight: 1.0,
                shear: Load::affine(0.0, 1.0),
            },
            2.0,
        )
        .unwrap()
    }

    #[test]
    fn shrinkage_example() {
        let m = model(1.0, 0.5);
        let (psi, g) = m.reduced_constitutive(0.0, &shear(2.0)).unwrap();
        assert_eq!(g, 1.5);
        assert_eq!(psi, 0.875);
        let (psi, g) = m.reduced_constitutive(0.3, &shear(0.3)).unwrap();
        assert_eq!((psi, g), (0.0, 0.3));
    }

    #[test]
    fn shrinkage_matches_brute_force() {
        let m = model(1.0, 0.5);
        for &(g0, s) in &[(0.0, 2.0), (0.2, 0.5), (0.0, -1.3), (1.0, 0.7)] {
            let (psi, g) = m.reduced_constitutive(g0, &shear(s)).unwrap();
            let mut best = (f64::INFINITY, 0.0);
            for i in 0..=4_000_000 {
                let c = -3.0 + i as f64 * 1.5e-6;
                let v = 0.5 * (s - c) * (s - c) + 0.5 * (c - g0).abs();
                if v < best.0 {
                    best = (v, c);
                }
            }
            assert!(best.0 >= psi - 1e-12);
            assert!(best.0 - psi < 1e-6);
            assert!((best.1 - g).abs() < 2e-6);
        }
    }

    #[test]
    fn off_path_rejected() {
        let m = model(1.0, 0.5);
        let f = Matrix2::new(1.1, 0.2, 0.0, 1.0);
        assert!(m.reduced_constitutive(0.0, &f).is_err());
    }

    #[test]
    fn left_invariance_examples() {
        let m = model(1.0, 0.5);
        assert_eq!(m.left_invariance_check(&Matrix2::identity(), 0.0, 1.0).unwrap(), 0.0);
        let stretch = Matrix2::new(2.0, 0.0, 0.0, 0.5);
        assert!(m.left_invariance_check(&stretch, 0.0, 1.0).unwrap() <= 1e-12);
        assert_eq!(m.left_invariance_check(&slip(5.0), 0.25, -1.25).unwrap(), 0.0);
        let bad = Matrix2::new(2.0, 0.0, 0.0, 1.0);
        assert!(m.left_invariance_check(&bad, 0.0, 1.0).is_err());
    }

    #[test]
    fn group_and_scalar_dissipation_agree() {
        let m = model(2.0, 0.75);
        let d = m.group_dissipation(&slip(0.25), &slip(-1.5)).unwrap();
        assert_eq!(d, m.dissipation(&[0.25], &[-1.5]));
        let off = Matrix2::new(1.0, 0.0, 0.3, 1.0);
        assert!(m.group_dissipation(&slip(0.0), &off).is_err());
    }

    #[test]
    fn slip_is_unimodular() {
        for g in [-3.0, 0.0, 0.1, 7.5] {
            assert_eq!(slip(g).determinant(), 1.0);
        }
    }

    #[test]
    fn oracle_yield_surface() {
        let m = model(1.0, 0.5);
        assert!(matches!(m.stability_oracle(1.0, &[0.5]), StabilityVerdict::Stable));
        match m.stability_oracle(1.0, &[0.0]) {
            StabilityVerdict::Unstable(w) => {
                assert_eq!(w.competitor, vec![0.5]);
                assert!(w.violation > 0.0);
            }
            v => panic!("{v:?}"),
        }
    }
}
