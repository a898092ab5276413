//! The (D, I) contract every model plugin implements.

use serde::{Deserialize, Serialize};

use crate::error::{Error, ModelError, Result};
use crate::state::State;

/// Evidence that a state is not stable: a competitor ẑ with
/// I(t,z) − I(t,ẑ) − D(z,ẑ) = `violation` > 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// Component whose change drives the violation.
    pub component: usize,
    pub competitor: Vec<f64>,
    #[serde(with = "crate::serde_ext::real")]
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StabilityVerdict {
    Stable,
    Unstable(Witness),
    Unknown,
}

/// Energy-storage functional I(t,z) and dissipation distance D(z₀,z₁) on a
/// finite-dimensional state space.
///
/// Energies and dissipations are extended reals: `f64::INFINITY` marks an
/// inadmissible state or a forbidden transition and is propagated as is.
/// Implementations must be pure so they can be evaluated from several
/// threads at once.
pub trait Model: Send + Sync {
    fn name(&self) -> &'static str;

    /// Quadrature weights of the state components.
    fn weights(&self) -> &[f64];

    fn dim(&self) -> usize {
        self.weights().len()
    }

    /// Process horizon T the model's a priori constants refer to.
    fn horizon(&self) -> f64;

    fn energy(&self, t: f64, z: &[f64]) -> f64;

    /// Like [`Model::energy`] but surfaces evaluation failures (e.g. a
    /// singular equilibrium system) instead of mapping them to a value.
    fn try_energy(&self, t: f64, z: &[f64]) -> Result<f64, ModelError> {
        Ok(self.energy(t, z))
    }

    /// ∂ₜI(t,z).
    fn energy_rate(&self, t: f64, z: &[f64]) -> f64;

    fn dissipation(&self, from: &[f64], to: &[f64]) -> f64;

    fn is_admissible(&self, z: &[f64]) -> bool;

    /// C_I with |∂ₜI(t,z)| ≤ C_I on the model's a priori region.
    fn lipschitz_bound(&self) -> f64;

    /// c_D with D(z₀,z₁) ≥ c_D‖z₁ − z₀‖ (weighted L¹).
    fn coercivity_const(&self) -> f64;

    /// Constant added to I so that it is nonnegative on the a priori region.
    fn normalization_offset(&self) -> f64 {
        0.0
    }

    /// Box that contains every minimizer of I(t,·) + D(from,·) and `from`
    /// itself.
    fn search_box(&self, from: &[f64]) -> Vec<(f64, f64)>;

    /// Times in (a, b) where ∂ₜI(·,z) may jump.
    fn rate_breakpoints(&self, _a: f64, _b: f64) -> Vec<f64> {
        Vec::new()
    }

    /// True when t ↦ ∂ₜI(t,z) is affine between breakpoints.
    fn rate_piecewise_affine(&self) -> bool {
        false
    }

    fn stability_oracle(&self, _t: f64, _z: &[f64]) -> StabilityVerdict {
        StabilityVerdict::Unknown
    }

    fn has_exact_step(&self) -> bool {
        false
    }

    /// Closed-form global minimizer of z ↦ I(t,z) + D(prev,z).
    fn exact_step(&self, _t: f64, _prev: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// Builds a state with this model's weights, rejecting inadmissible values.
    fn make_state(&self, values: Vec<f64>) -> Result<State> {
        if values.len() != self.dim() {
            return Err(Error::InvalidState(format!(
                "{} expects {} components, got {}",
                self.name(),
                self.dim(),
                values.len()
            )));
        }
        if !self.is_admissible(&values) {
            return Err(Error::InvalidState(format!(
                "{values:?} is not admissible for {}",
                self.name()
            )));
        }
        State::new(values, self.weights().to_vec())
    }
}

/// Elastic equilibrium for a frozen internal state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    /// Nodal displacements φ*(t,z), prescribed entries included.
    pub displacement: Vec<f64>,
    /// E(t,φ*,z) including the normalization offset.
    pub energy: f64,
    /// ∂ₜI(t,z) by the envelope rule.
    pub energy_rate: f64,
}

/// A model whose reduced energy comes from eliminating an elastic field:
/// I(t,z) = inf_φ E(t,φ,z).
pub trait EquilibriumModel: Model {
    fn equilibrium(&self, t: f64, z: &[f64]) -> Result<Equilibrium, ModelError>;

    /// E(t,φ,z) for an arbitrary nodal field (offset included).
    fn stored_energy(&self, t: f64, displacement: &[f64], z: &[f64]) -> f64;
}

/// I(t,z) = E(t,φ*(t,z),z) by an equilibrium solve; records φ*.
pub fn reduced_energy(model: &dyn EquilibriumModel, t: f64, z: &[f64]) -> Result<Equilibrium> {
    Ok(model.equilibrium(t, z)?)
}

const GAUSS_5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
    (0.906_179_845_938_664, 0.236_926_885_056_189_08),
];

/// ∫ₐᵇ ∂ₛI(s,z) ds with z frozen.
///
/// The interval is split at the model's rate breakpoints; each piece uses the
/// midpoint rule when the rate is affine there (exact) and 5-point
/// Gauss–Legendre otherwise.
pub fn rate_integral(model: &dyn Model, a: f64, b: f64, z: &[f64]) -> f64 {
    if b <= a {
        return 0.0;
    }
    let affine = model.rate_piecewise_affine();
    let mut cuts = Vec::with_capacity(2);
    cuts.push(a);
    cuts.extend(model.rate_breakpoints(a, b));
    cuts.push(b);
    cuts.windows(2)
        .map(|w| {
            let (lo, hi) = (w[0], w[1]);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (lo + hi);
            if affine {
                (hi - lo) * model.energy_rate(mid, z)
            } else {
                half * GAUSS_5
                    .iter()
                    .map(|(x, w)| w * model.energy_rate(mid + half * x, z))
                    .sum::<f64>()
            }
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_weights_integrate_polynomials() {
        let sum: f64 = GAUSS_5.iter().map(|(_, w)| w).sum();
        assert!((sum - 2.0).abs() < 1e-15);
        // degree 8 moment of [-1, 1] is 2/9
        let m8: f64 = GAUSS_5.iter().map(|(x, w)| w * x.powi(8)).sum();
        assert!((m8 - 2.0 / 9.0).abs() < 1e-14);
    }
}
