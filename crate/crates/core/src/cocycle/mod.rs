//! q-differentials, bundle-valued 1-forms, the affine connection they define,
//! neutral sections along geodesics, and the sign survey over closed geodesics.

mod affine;
mod form;
mod qdiff;
mod survey;

pub use affine::{
    affine_holonomy, affine_transport, affine_transport_matrix, even_section, integrate_over_axis,
    margulis_via_integral, neutral_coefficients, neutral_section, odd_section, parallel_section,
    product_coefficients, section_drift, BundleModel, GeodesicSection, CLOSEDNESS_STEP,
    CLOSEDNESS_TOL, NODES_PER_UNIT,
};
pub use form::{
    bump_section, closedness_residual, phi_map, BundleForm, Duality, ExactForm, FormSum, PhiForm,
    Scaled, ZeroForm,
};
pub use qdiff::{poincare_qdiff, QDifferential, TAYLOR_DEGREE};
pub use survey::{
    beta_rotation, dirichlet_contains, f_observable, geodesic_integral_f, geodesic_sign_survey,
    loop_report, monte_carlo_mean, relative_spread, sample_unit_tangent, GeodesicLoopReport,
    MonteCarloSummary, SurveyOptions, SurveySummary,
};
