//! Closures, right-hand sides and time stepping.

pub mod closure;
pub mod filament;
pub mod rhs;
pub mod state;
pub mod stepper;

pub use closure::{
    closure_se3, closure_smk, closure_so3, closure_so4_ex1, closure_so4_ex2, Closure, LaxConstants, PolySpec,
    Se3Params, SmkParams, So3Params, So4Ex1Params, So4Ex2Params,
};
pub use filament::{reconstruct_filament, reconstruct_from_strains, Filament};
pub use rhs::{full_rhs, ode_mode_rhs, rhs, rhs_se3, rhs_so3, rhs_so4, uniformity_defect};
pub use state::{DiagnosticState, Group, StrandState};
pub use stepper::{check_se2_split, preserves_se2, step_rk4, steps_for, Integrator};
