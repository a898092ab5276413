//! Incremental global minimization and a-posteriori certification for
//! rate-independent systems given by an energy functional and a dissipation
//! distance.

pub mod cli;
pub mod error;
pub mod grid;
pub mod load;
pub mod model;
pub mod models;
pub mod serde_ext;
pub mod solvers;
pub mod state;
pub mod trajectory;
pub mod verify;

pub use error::{Error, ModelError, Result};
pub use grid::TimeGrid;
pub use load::{Load, TimeMap};
pub use model::{EquilibriumModel, Model, StabilityVerdict, Witness};
pub use state::State;
pub use trajectory::{Continuity, Trajectory};
