//! Parametrised Lagrangian manifolds and their flow-outs.

pub mod bessel;
pub mod chart;
pub mod flowout;
pub mod slices;
pub mod sphere;

pub use bessel::{bessel_point, tangent_frame_bessel, BesselCylinder, PlaneWave, VerticalFiber};
pub use chart::{dump_csv, eikonal_residual, lagrangian_residual, sample_params, ManifoldChart, SharedChart};
pub use flowout::{
    flow_out, flow_out_energy, symmetry_relation_residual, FlowOutChart, Trajectories, DEFAULT_FLOW_TOL,
};
pub use slices::{EnergySlice, FixedSlice, SliceRoot};
pub use sphere::{wrap_angle, SphereFrame};
