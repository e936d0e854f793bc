//! Dense dual basis tomography: pair partitions, measurement bases,
//! simulation, reconstruction and circuit synthesis.

pub mod error;
pub mod experiment;
pub mod linalg;
pub mod partitions;
pub mod reconstruct;
pub mod bases;
pub mod circuits;
pub mod simulator;
pub mod state;

pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
pub use state::DensityMatrix;
