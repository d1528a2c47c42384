//! Phase-space primitives: points, Hamiltonians, flows and Poisson brackets.

pub mod bracket;
pub mod field;
pub mod flow;
pub mod hamiltonian;
pub mod phase;

pub use bracket::{nested, nested_bracket, poisson_bracket, BracketField};
pub use field::{FnField, HamiltonianField, PolyField, ScalarField, SharedField};
pub use flow::{energy_drift, flow, flow_state, flow_to_event, hamilton_vector_field, FlowState};
pub use hamiltonian::{
    energy, euler_residual, from_registry, Conformal, FnHamiltonian, Hamiltonian, MomentumComponent, SharedHamiltonian,
    REGISTRY,
};
pub use phase::{symplectic_matrix, symplectic_product, PhasePoint};
