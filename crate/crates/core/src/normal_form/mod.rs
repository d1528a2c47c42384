//! The cusp normal form near a non-degenerate glancing point, the canonical
//! map of the worked example and the transition of `loc Lambda_+^E`.

pub mod model;
pub mod transition;

pub use model::{
    example_canonical_map, example_manifold_point, example_map_jacobian, example_phase, example_symplectic_defect,
    normal_form_manifold, normal_form_phase, normal_form_section, pi_e, pi_t, space_time_form, NormalCoordinates,
};
pub use transition::{
    figure_data, self_intersections, turning_points, Cusp, Extremum, Regime, SectionPoint, TransitionConfig,
    TransitionProblem, TransitionSample,
};
