//! Excitation-mediated state preparation at desk scale.
//!
//! An electronic system (eigenvalues `E_k`, coupling `μ` in the eigenbasis) is
//! attached to an ancilla qubit through `Ĥ = 1⊗H_e + (w/2)ẑ⊗1 + λx̂⊗μ̂`.
//! The crate evolves this exactly, expands it perturbatively with an exact
//! exponential-polynomial recurrence, checks the reflection coupling and its
//! block-encoding at the matrix level, and evaluates the fault-tolerant cost
//! of preparing an excited state this way versus direct preparation.

pub mod block_encoding;
pub mod cost;
pub mod coupling;
pub mod error;
pub mod evolution;
pub mod exec;
pub mod exppoly;
pub mod linalg;
pub mod perturbation;
pub mod protocol;
pub mod random;
pub mod spectral;

pub use error::{Error, Result};
pub use exec::Exec;
pub use spectral::{CoupledIndex, ElectronicSystem, ProtocolParams};
