//! Semiclassical objects at desk scale: Bessel sources, the exact Helmholtz
//! solution, oscillatory quadrature of the time integral and WKB charts.

pub mod integrals;
pub mod quadrature;
pub mod sources;
pub mod special;
pub mod wkb;

pub use integrals::{
    model_pair_integral, pair_solution, time_integral, time_integral_with, StationaryPoint, TimeIntegral,
};
pub use quadrature::{cutoff, integrate, oscillatory, smooth_step, QuadOptions, QuadResult};
pub use sources::{
    bessel_source, exact_u1, helmholtz_residual, helmholtz_richardson, radial_samples, shifted_bessel_source,
    source_constant, RichardsonReport,
};
pub use special::{bessel_j0, bessel_j1};
pub use wkb::{
    projection_jacobian, transport_amplitude, wkb_from_flow_out, wkb_residual, Amplitude, FieldFn, InitialAmplitude,
    WkbChart, WkbResidual,
};
