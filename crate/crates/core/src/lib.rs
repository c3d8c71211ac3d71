//! Thermometry of interacting quantum systems: Gibbs states, quantum and
//! classical Fisher information for temperature, greedy local measurement
//! schemes, and the correlation measures that account for the precision lost
//! by measuring locally.

pub mod correlations;
pub mod derivative;
pub mod error;
pub mod high_temp;
pub mod linalg;
pub mod measurement;
pub mod models;
pub mod optimize;
pub mod sweep;
pub mod thermometry;

pub use derivative::DerivativePolicy;
pub use error::{Error, Result};
pub use linalg::{DensityMatrix, HermitianOperator, SubsystemLayout};
pub use models::PartitionedHamiltonian;
pub use thermometry::{GibbsEnsemble, GreedyPath, MeasurementMode, ThermalModel};
