//! Lax fields, constraint and zero-curvature residuals, Riccati densities.

pub mod laurent;
pub mod lax;
pub mod riccati;

pub use laurent::LaurentField;
pub use lax::{
    build_lax, build_lax_with, constraint_residuals, constraint_residuals_with, diag_elems, loglog_slope, state_elems,
    zcr_graded_residuals, zcr_residual_discrete, zcr_residual_field, zcr_residual_semidiscrete, zcr_residual_with,
    ConstraintResiduals, LaxPairField,
};
pub use riccati::{riccati_densities, RiccatiDensities};
