//! Generating families, critical sets and invariant densities.

pub mod bessel;
pub mod family;

pub use bessel::{prop_coordinates, BesselFlow, FlowPhi, Phi0, PhiPlus, ReducedBesselPhase, TrajectoryJet};
pub use family::{
    critical_point_at, critical_set_solve, immersion_residual, invariant_density, newton_critical, theta_hessian,
    theta_x_block, CriticalPoint, GeneratingFamily, CRITICAL_ACCEPT, CRITICAL_TOL,
};
