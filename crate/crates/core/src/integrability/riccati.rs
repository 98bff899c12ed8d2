//! Conserved densities of the SO(3) strand from the Riccati recursion.
//!
//! With `L = λ²A + λΠ + Γ`, `L₁₂ = L₁ − iL₂` and `χ` the logarithmic
//! derivative of the first eigenfunction component (shifted by
//! `−L₁₂,s / 2L₁₂`), the scattering problem `ψ_s + Lψ = 0` becomes
//!
//! ```text
//! L₁₂²(χ_s + χ²) = L₁₂²(L₁² + L₂² + L₃²) − L₁₂²L₃,s + L₃L₁₂L₁₂,s
//!                  − ½L₁₂L₁₂,ss + ¾L₁₂,s²
//! ```
//!
//! Expanding `χ = |A|λ² + ρ₋₁λ + ρ₀ + ρ₁/λ + …` and matching the λ⁷, λ⁶,
//! λ⁵ coefficients gives one linear equation for each density in turn.

use num_complex::Complex64;

use crate::algebra::Vec3;
use crate::discretization::{DerivOp, FieldVec3};
use crate::dynamics::closure::So3Params;
use crate::dynamics::state::StrandState;
use crate::error::{GStrandError, Result};
use crate::integrability::laurent::LaurentField;

/// Below this ratio `|A₁ − iA₂| / |A|` the fields are rotated first.
const ROTATE_BELOW: f64 = 0.1;
const FLOOR: i32 = -4;

#[derive(Clone, Debug, PartialEq)]
pub struct RiccatiDensities {
    pub rho_m1: Vec<Complex64>,
    pub rho_0: Vec<Complex64>,
    pub rho_1: Vec<Complex64>,
    /// Max-norm of the λ⁷, λ⁶, λ⁵ coefficients left after substitution.
    pub remainder: [f64; 3],
    /// Whether the frame was rotated to move `A` off the `ẑ` axis.
    pub rotated: bool,
}

// Orthonormal frame whose first axis is along `a`.
fn frame_along(a: Vec3) -> [Vec3; 3] {
    let u1 = (1.0 / a.norm()) * a;
    let trial = if u1.x.abs() < 0.9 { Vec3::E1 } else { Vec3::E2 };
    let u2 = trial - u1.dot(trial) * u1;
    let u2 = (1.0 / u2.norm()) * u2;
    [u1, u2, u1.cross(u2)]
}

fn rotate(v: Vec3, f: &[Vec3; 3]) -> Vec3 {
    Vec3::new(f[0].dot(v), f[1].dot(v), f[2].dot(v))
}

fn lax_component(a: f64, pi: &FieldVec3, gamma: &FieldVec3, c: usize) -> LaurentField {
    let n = pi.len();
    let p: Vec<f64> = pi.values.iter().map(|v| v[c]).collect();
    let g: Vec<f64> = gamma.values.iter().map(|v| v[c]).collect();
    LaurentField::from_real(2, &vec![a; n], FLOOR)
        .add(&LaurentField::from_real(1, &p, FLOOR))
        .add(&LaurentField::from_real(0, &g, FLOOR))
}

fn cst(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Solve for `ρ₋₁`, `ρ₀`, `ρ₁` on an SO(3) state.
pub fn riccati_densities(state: &StrandState, p: &So3Params, d: &DerivOp) -> Result<RiccatiDensities> {
    let StrandState::So3 { pi, gamma } = state else {
        return Err(GStrandError::GroupMismatch(format!("Riccati series needs an so3 state, got {}", state.group())));
    };
    if d.grid() != state.grid() {
        return Err(GStrandError::GridMismatch);
    }
    let a_norm = p.a.norm();
    if !(a_norm > 0.0) {
        return Err(GStrandError::InvalidParams("Riccati series needs A ≠ 0".into()));
    }
    let rotated = Complex64::new(p.a.x, -p.a.y).norm() < ROTATE_BELOW * a_norm;
    let (a, pi, gamma) = if rotated {
        let f = frame_along(p.a);
        (rotate(p.a, &f), pi.map(|v| rotate(v, &f)), gamma.map(|v| rotate(v, &f)))
    } else {
        (p.a, pi.clone(), gamma.clone())
    };
    let n = pi.len();

    let l1 = lax_component(a.x, &pi, &gamma, 0);
    let l2 = lax_component(a.y, &pi, &gamma, 1);
    let l3 = lax_component(a.z, &pi, &gamma, 2);
    let l12 = l1.sub(&l2.scale(Complex64::new(0.0, 1.0)));
    let l12_s = l12.deriv_s(d);
    let l12_ss = l12_s.deriv_s(d);
    let l12_sq = l12.mul(&l12);

    let lsq = l1.mul(&l1).add(&l2.mul(&l2)).add(&l3.mul(&l3));
    let rhs = l12_sq
        .mul(&lsq)
        .sub(&l12_sq.mul(&l3.deriv_s(d)))
        .add(&l3.mul(&l12).mul(&l12_s))
        .sub(&l12.mul(&l12_ss).scale(cst(0.5)))
        .add(&l12_s.mul(&l12_s).scale(cst(0.75)));

    let remainder_of = |chi: &LaurentField| -> LaurentField {
        let lhs = l12_sq.mul(&chi.deriv_s(d).add(&chi.mul(chi)));
        rhs.sub(&lhs)
    };

    let a12 = Complex64::new(a.x, -a.y);
    let pivot = 2.0 * a_norm * a12 * a12;
    let mut chi = LaurentField::monomial(2, vec![cst(a_norm); n], FLOOR);
    for power in [1, 0, -1] {
        let r = remainder_of(&chi);
        let c: Vec<Complex64> = r.coeff(power + 6).into_iter().map(|z| z / pivot).collect();
        chi.set(power, c);
    }
    let r = remainder_of(&chi);
    Ok(RiccatiDensities {
        rho_m1: chi.coeff(1),
        rho_0: chi.coeff(0),
        rho_1: chi.coeff(-1),
        remainder: [r.coeff_max_abs(7), r.coeff_max_abs(6), r.coeff_max_abs(5)],
        rotated,
    })
}
