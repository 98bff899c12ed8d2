//! Hamiltonians, conserved functionals and drift monitoring.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::Vec3;
use crate::discretization::integrate_scalar;
use crate::dynamics::closure::{Closure, So3Params};
use crate::dynamics::state::{DiagnosticState, Group, StrandState};
use crate::error::{GStrandError, Result};

/// Floor under `|value(0)|` when forming relative drift.
pub const DRIFT_FLOOR: f64 = 1e-14;

fn so3_fields(state: &StrandState) -> Result<(&crate::FieldVec3, &crate::FieldVec3)> {
    match state {
        StrandState::So3 { pi, gamma } => Ok((pi, gamma)),
        other => Err(GStrandError::GroupMismatch(format!("expected an so3 state, got {}", other.group()))),
    }
}

/// Pointwise integrands of `H₋₁`, `H₀`, `H₁`.
pub fn so3_densities(pi: Vec3, gamma: Vec3, a: Vec3) -> (f64, f64, f64) {
    let a2 = a.norm_sq();
    let ap = a.dot(pi);
    let h0 = a.cross(pi).norm_sq() / (2.0 * a2) + a.dot(gamma);
    (ap, h0, pi.dot(gamma) - ap / a2 * h0)
}

/// `(H₋₁, H₀, H₁)` by periodic quadrature.
pub fn eval_h_so3(state: &StrandState, a: Vec3) -> Result<(f64, f64, f64)> {
    let (pi, gamma) = so3_fields(state)?;
    if !(a.norm() > 0.0) {
        return Err(GStrandError::InvalidParams("A must be nonzero".into()));
    }
    let dens: Vec<(f64, f64, f64)> = pi.values.iter().zip(&gamma.values).map(|(&p, &g)| so3_densities(p, g, a)).collect();
    let grid = state.grid();
    let col = |f: fn(&(f64, f64, f64)) -> f64| integrate_scalar(grid, &dens.iter().map(f).collect::<Vec<_>>());
    Ok((col(|d| d.0), col(|d| d.1), col(|d| d.2)))
}

fn point_values(state: &StrandState, j: usize) -> Vec<Vec3> {
    state.fields().iter().map(|f| f.values[j]).collect()
}

/// The closure's Hamiltonian `h`.
pub fn eval_h(state: &StrandState, closure: &Closure) -> Result<f64> {
    if state.group() != closure.group() {
        return Err(GStrandError::GroupMismatch(format!("{} closure on {} state", closure.name(), state.group())));
    }
    let dens: Vec<f64> = (0..state.grid().n).map(|j| closure.hamiltonian_density(&point_values(state, j))).collect();
    Ok(integrate_scalar(state.grid(), &dens))
}

/// Index of the diagnostic field equal to `δh/δ(field k)`.
fn derivative_slot(group: Group, k: usize) -> usize {
    match group {
        // δh/δΠ = Ω, δh/δΓ = Ξ
        Group::So3 => [0, 1][k],
        // δh/δπ = ω, δh/δξ = γ, δh/δΩ = Π, δh/δΓ = Ξ
        Group::So4 => [2, 3, 0, 1][k],
        // δh/δΠ = W, δh/δM = V, δh/δΩ = M_d, δh/δΓ = N
        Group::Se3 => [0, 1, 2, 3][k],
    }
}

/// Compare the closure's diagnostics with central finite-difference
/// functional derivatives of `h`. Each grid value is bumped by
/// `±ε`, `ε = 1e-6·max(1, |u|)`, and the change in `h` is divided by
/// `2ε·ds`. Only the bumped point's density changes, so it alone is
/// re-evaluated. Returns `max |FD − analytic| / max(1, max |analytic|)`.
pub fn var_deriv_fd_check(state: &StrandState, closure: &Closure) -> Result<f64> {
    let diag: DiagnosticState = closure.diagnostics(state)?;
    let group = state.group();
    let ds = state.grid().ds();
    let dfields = diag.fields();
    let scale = dfields.iter().fold(1.0f64, |m, f| m.max(f.max_abs()));
    let mut worst: f64 = 0.0;
    for j in 0..state.grid().n {
        let u = point_values(state, j);
        for k in 0..u.len() {
            let analytic = dfields[derivative_slot(group, k)].values[j];
            for c in 0..3 {
                let eps = 1e-6 * u[k][c].abs().max(1.0);
                let mut up = u.clone();
                up[k][c] += eps;
                let mut dn = u.clone();
                dn[k][c] -= eps;
                // h = ds·Σ density, so δh/δu = (Δ density·ds) / (2ε·ds)
                let dh = ds * (closure.hamiltonian_density(&up) - closure.hamiltonian_density(&dn));
                let fd = dh / (2.0 * eps * ds);
                worst = worst.max((fd - analytic[c]).abs());
            }
        }
    }
    Ok(worst / scale)
}

fn perp(v: Vec3, a: Vec3) -> Vec3 {
    v - (a.dot(v) / a.norm_sq()) * a
}

/// `ℓ = ∫ Π·Ω ds − h`.
pub fn lagrangian_so3(state: &StrandState, p: &So3Params) -> Result<f64> {
    let closure = Closure::So3(p.clone());
    let (pi, _) = so3_fields(state)?;
    let DiagnosticState::So3 { omega, .. } = closure.diagnostics(state)? else { unreachable!() };
    let pw: Vec<f64> = pi.values.iter().zip(&omega.values).map(|(a, b)| a.dot(*b)).collect();
    Ok(integrate_scalar(state.grid(), &pw) - eval_h(state, &closure)?)
}

/// Max-norm of `P⊥A(Ω − Γ) − β P⊥A(Π)`.
pub fn legendre_identity_check(state: &StrandState, p: &So3Params) -> Result<f64> {
    let (pi, gamma) = so3_fields(state)?;
    let DiagnosticState::So3 { omega, .. } = Closure::So3(p.clone()).diagnostics(state)? else { unreachable!() };
    let a = p.a;
    let mut worst: f64 = 0.0;
    for j in 0..pi.len() {
        let beta = p.mu * a.dot(pi.values[j]) + p.nu;
        let lhs = perp(omega.values[j] - gamma.values[j], a);
        let rhs = beta * perp(pi.values[j], a);
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// `C1 = |π|² + |ξ|²`, `C2 = π·ξ` for the so(4) momentum pair.
pub fn casimir_densities_so4(state: &StrandState) -> Result<(Vec<f64>, Vec<f64>)> {
    match state {
        StrandState::So4 { pi, xi, .. } => Ok(casimirs(&pi.values, &xi.values)),
        other => Err(GStrandError::GroupMismatch(format!("expected an so4 state, got {}", other.group()))),
    }
}

/// The same invariants for the strain pair `(Ω, Γ)`.
pub fn strain_casimir_densities_so4(state: &StrandState) -> Result<(Vec<f64>, Vec<f64>)> {
    match state {
        StrandState::So4 { omega, gamma, .. } => Ok(casimirs(&omega.values, &gamma.values)),
        other => Err(GStrandError::GroupMismatch(format!("expected an so4 state, got {}", other.group()))),
    }
}

fn casimirs(a: &[Vec3], b: &[Vec3]) -> (Vec<f64>, Vec<f64>) {
    a.iter().zip(b).map(|(x, y)| (x.norm_sq() + y.norm_sq(), x.dot(*y))).unzip()
}

/// Conserved values at one time with their drift from the first report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservedReport {
    pub t: f64,
    pub values: BTreeMap<String, f64>,
    pub relative_drift: BTreeMap<String, f64>,
}

pub fn relative_drift(v: f64, v0: f64) -> f64 {
    (v - v0).abs() / v0.abs().max(DRIFT_FLOOR)
}

/// Evaluates every functional that applies to the closure.
#[derive(Clone, Debug)]
pub struct Monitor {
    closure: Closure,
    initial: Option<BTreeMap<String, f64>>,
}

impl Monitor {
    pub fn new(closure: Closure) -> Self {
        Monitor { closure, initial: None }
    }

    pub fn values(&self, state: &StrandState) -> Result<BTreeMap<String, f64>> {
        let mut out = BTreeMap::new();
        out.insert("h".to_string(), eval_h(state, &self.closure)?);
        if let Closure::So3(p) = &self.closure {
            let (m1, h0, h1) = eval_h_so3(state, p.a)?;
            out.insert("H_m1".to_string(), m1);
            out.insert("H_0".to_string(), h0);
            out.insert("H_1".to_string(), h1);
        }
        if state.group() == Group::So4 && state.grid().is_uniform_mode() {
            let (c1, c2) = casimir_densities_so4(state)?;
            out.insert("C1".to_string(), integrate_scalar(state.grid(), &c1));
            out.insert("C2".to_string(), integrate_scalar(state.grid(), &c2));
        }
        Ok(out)
    }

    /// Evaluate at time `t`. The first call fixes the reference values.
    pub fn observe(&mut self, t: f64, state: &StrandState) -> Result<ConservedReport> {
        let values = self.values(state)?;
        let initial = self.initial.get_or_insert_with(|| values.clone());
        let relative_drift = values
            .iter()
            .map(|(k, &v)| (k.clone(), relative_drift(v, initial.get(k).copied().unwrap_or(v))))
            .collect();
        Ok(ConservedReport { t, values, relative_drift })
    }
}
