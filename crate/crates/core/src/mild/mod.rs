//! Duhamel representation and Picard iteration for the localized equation
//!
//! ```text
//! w_t + w_xxxx = -(w v)_xxx + f_v,    w = φ u_x,  v = u_x,
//! ```
//!
//! together with mollification and empirical checks of the convolution
//! estimates for `∂ₓᵏΦ`.

mod cutoff;
mod duhamel;
mod estimate;
mod mollify;
mod picard;

pub use cutoff::{CutoffFunction, SpaceProfile, TimeProfile};
pub use duhamel::{duhamel, duhamel_at, MAX_DUHAMEL_ORDER};
pub use estimate::{
    calibrate_smallness, standard_quadruples, verify_convolution_estimate, verify_convolution_estimates, Calibration,
    EstimateConfig, EstimateRegime, EstimateTable, Quadruple, ScaleRow, SourceFamily, MIN_TRIALS, STABILITY_GROWTH,
};
pub use mollify::{mollify, mollify_checked, Mollified, NORM_SLACK};
pub use picard::{
    assemble_fv, fixed_point_residual, picard_map, picard_solve, picard_solve_from, representation_residual,
    PicardReport,
};
