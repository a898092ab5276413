//! A-posteriori checks of discrete trajectories.

mod certificate;
mod energy;
mod refinement;
mod stability;

pub use certificate::{
    certify, BoundCheck, CertificateReport, ChainStep, Failure, ModelConstants, NodeStability,
    PairWorst,
};
pub use energy::{check_energy_inequality, check_two_sided, EnergyResidual};
pub use refinement::{refinement_study, LevelSummary, RefinementStudy};
pub use stability::{
    check_all_nodes, check_stability, competitors, sampled_stability, StabilityCheck,
    StabilityMode, StabilityRecord,
};
