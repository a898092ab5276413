//! Shipped model plugins.

use serde::{Deserialize, Serialize};

use crate::load::Load;

pub mod convex;
pub mod delamination;
pub mod gradient;
pub mod plasticity;
pub(crate) mod tridiag;
pub mod two_phase;

pub use convex::{ConvexPointwiseModel, ConvexPointwiseParams};
pub use delamination::{DelaminationModel, DelaminationParams, GlueSite};
pub use gradient::{Boundary, GradientModel, GradientParams};
pub use plasticity::{PlasticityParams, PlasticityPointModel};
pub use two_phase::{TwoPhaseModel, TwoPhaseParams};

/// Relative slack granted by closed-form stability oracles to absorb rounding.
pub const ORACLE_SLACK: f64 = 1e-12;

/// Loading applied at the free end of a 1-D chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "control", rename_all = "snake_case")]
pub enum EndLoading {
    /// Prescribed end displacement.
    Displacement { load: Load },
    /// Dead end force.
    Force { load: Load },
}
