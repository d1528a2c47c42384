//! Numerical building blocks shared by the geometric modules.

pub mod diff;
pub mod ode;
pub mod roots;
