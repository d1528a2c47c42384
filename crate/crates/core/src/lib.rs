//! Lagrangian flow-outs of Hamiltonian systems, glancing points, generating
//! families, invariant densities and the cusp normal form near a glancing
//! trajectory, together with the semiclassical time integral they feed.

pub mod error;
pub mod genfam;
pub mod glancing;
pub mod manifolds;
pub mod normal_form;
pub mod numeric;
pub mod poly;
pub mod semiclassical;
pub mod symplectic;
pub mod verify;

pub use error::{Error, Result};
pub use poly::Polynomial;
pub use symplectic::{Hamiltonian, PhasePoint, ScalarField, SharedHamiltonian};
