//! Matrix G-Strand equations on SO(3), SO(4) and SE(3).
//!
//! The crate is organized bottom-up: [`algebra`] has the Lie brackets and
//! matrix images, [`discretization`] the periodic grid and derivative
//! operators, [`dynamics`] the closures and time stepping, [`integrability`]
//! the Lax fields and residual checks, and [`conservation`] the conserved
//! functionals and their monitors.

pub mod algebra;
pub mod conservation;
pub mod discretization;
pub mod dynamics;
pub mod error;
pub mod integrability;

pub use algebra::{AlgPair, AlgTag, LieElem, Mat4, Vec3};
pub use discretization::{DerivOp, FieldVec3, FourierModeSpec, GridSpec, Scheme};
pub use dynamics::{Closure, DiagnosticState, Group, Integrator, StrandState};
pub use error::{GStrandError, Result};
pub use integrability::{ConstraintResiduals, LaxPairField, LaurentField};
pub use conservation::{ConservedReport, Monitor};
