//! G-Strand right-hand sides.

use crate::algebra::Vec3;
use crate::discretization::{DerivOp, FieldVec3};
use crate::dynamics::closure::Closure;
use crate::dynamics::state::{check_pair, DiagnosticState, StrandState};
use crate::error::{GStrandError, Result};

fn check_op(state: &StrandState, d: &DerivOp) -> Result<()> {
    if d.grid() != state.grid() {
        return Err(GStrandError::GridMismatch);
    }
    Ok(())
}

// D(f) + Σ aᵢ × bᵢ, pointwise
fn assemble(df: Option<FieldVec3>, terms: &[(&FieldVec3, &FieldVec3)], grid_of: &FieldVec3) -> FieldVec3 {
    let mut out = df.unwrap_or_else(|| FieldVec3::zeros(grid_of.grid));
    for (a, b) in terms {
        for ((o, &x), &y) in out.values.iter_mut().zip(&a.values).zip(&b.values) {
            *o += x.cross(y);
        }
    }
    out
}

fn rhs_with(
    state: &StrandState,
    diag: &DiagnosticState,
    d: &dyn Fn(&FieldVec3) -> Option<FieldVec3>,
) -> Result<StrandState> {
    check_pair(state, diag)?;
    Ok(match (state, diag) {
        (StrandState::So3 { pi, gamma }, DiagnosticState::So3 { omega, xi }) => {
            let neg_omega = omega.map(|v| -v);
            StrandState::So3 {
                // −Ω×Π + DΞ + Γ×Ξ
                pi: assemble(d(xi), &[(&neg_omega, pi), (gamma, xi)], pi),
                // DΩ + Γ×Ω
                gamma: assemble(d(omega), &[(gamma, omega)], pi),
            }
        }
        (
            StrandState::So4 { pi, xi, omega, gamma },
            DiagnosticState::So4 { cap_pi, cap_xi, omega: w, gamma: g },
        ) => StrandState::So4 {
            pi: assemble(d(cap_pi), &[(omega, cap_pi), (gamma, cap_xi), (pi, w), (xi, g)], pi),
            xi: assemble(d(cap_xi), &[(omega, cap_xi), (gamma, cap_pi), (pi, g), (xi, w)], pi),
            omega: assemble(d(w), &[(omega, w), (gamma, g)], pi),
            gamma: assemble(d(g), &[(omega, g), (gamma, w)], pi),
        },
        (StrandState::Se3 { pi, mom, omega, gamma }, DiagnosticState::Se3 { w, v, m, n }) => {
            StrandState::Se3 {
                pi: assemble(d(m), &[(pi, w), (mom, v), (gamma, n), (omega, m)], pi),
                mom: assemble(d(n), &[(mom, w), (omega, n)], pi),
                omega: assemble(d(w), &[(omega, w)], pi),
                gamma: assemble(d(v), &[(gamma, w), (omega, v)], pi),
            }
        }
        _ => unreachable!("checked by check_pair"),
    })
}

/// `∂_t Π = −Ω×Π + D_sΞ + Γ×Ξ`, `∂_t Γ = D_sΩ + Γ×Ω`.
pub fn rhs_so3(state: &StrandState, diag: &DiagnosticState, d: &DerivOp) -> Result<StrandState> {
    expect_group(state, crate::dynamics::Group::So3)?;
    rhs(state, diag, d)
}

pub fn rhs_so4(state: &StrandState, diag: &DiagnosticState, d: &DerivOp) -> Result<StrandState> {
    expect_group(state, crate::dynamics::Group::So4)?;
    rhs(state, diag, d)
}

pub fn rhs_se3(state: &StrandState, diag: &DiagnosticState, d: &DerivOp) -> Result<StrandState> {
    expect_group(state, crate::dynamics::Group::Se3)?;
    rhs(state, diag, d)
}

fn expect_group(state: &StrandState, g: crate::dynamics::Group) -> Result<()> {
    if state.group() != g {
        return Err(GStrandError::GroupMismatch(format!("expected {g}, got {}", state.group())));
    }
    Ok(())
}

/// Time derivative of the prognostic fields given their diagnostics.
pub fn rhs(state: &StrandState, diag: &DiagnosticState, d: &DerivOp) -> Result<StrandState> {
    check_op(state, d)?;
    rhs_with(state, diag, &|f| Some(d.apply(f)))
}

/// Closure followed by [`rhs`].
pub fn full_rhs(state: &StrandState, closure: &Closure, d: &DerivOp) -> Result<StrandState> {
    let diag = closure.diagnostics(state)?;
    rhs(state, &diag, d)
}

/// The same flow with `D_s ≡ 0`: the Euler–Poincaré ODE at each point.
pub fn ode_mode_rhs(state: &StrandState, closure: &Closure) -> Result<StrandState> {
    let diag = closure.diagnostics(state)?;
    rhs_with(state, &diag, &|_| None)
}

/// Max deviation of any field from its value at `s = 0`.
pub fn uniformity_defect(state: &StrandState) -> f64 {
    state.fields().iter().fold(0.0, |m, f| {
        let v0: Vec3 = f.values[0];
        f.values.iter().fold(m, |m, &v| m.max((v - v0).max_abs()))
    })
}
