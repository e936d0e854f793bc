//! Dense complex linear algebra used throughout the crate.

mod eigen;
mod matrix;
mod project;
pub mod random;

pub use eigen::{eigh, HermEig};
pub use matrix::ComplexMatrix;
pub use project::{frobenius_distance, project_density, project_simplex, psd_sqrt, uhlmann_fidelity};
pub use random::{haar_state, random_rank_r_dm, random_unitary, rng_for};
