//! Glancing points on the Bessel cylinder and the classification of glancing
//! Lagrangian/energy-surface pairs.

pub mod cylinder;
pub mod pairs;

pub use cylinder::{
    conformal_glancing_test, glancing_report, glancing_residual, glancing_search, restricted_energy,
    restricted_gradient, restricted_hessian, tangency_residual, GlancingKind, GlancingReport,
};
pub use pairs::{
    case_from_pattern, classify_jets, model_glancing_surface, pair_classification, pair_jets,
    quadratic_phase_lagrangian, representation_iv, representation_iv_search, sign_pattern, transversal_to_x1,
    PairClassification, QuadraticCase, QuadraticLagrangian, SignPattern, DEFAULT_CLASSIFY_TOL,
};
