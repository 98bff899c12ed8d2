//! Explicit RK4 time stepping and reduction checks.

use log::warn;

use crate::discretization::{DerivOp, GridSpec, Scheme};
use crate::dynamics::closure::Closure;
use crate::dynamics::rhs::full_rhs;
use crate::dynamics::state::StrandState;
use crate::error::{GStrandError, Result};

/// Couples a closure, a derivative operator and a time step.
#[derive(Clone, Debug)]
pub struct Integrator {
    closure: Closure,
    deriv: DerivOp,
    dt: f64,
}

impl Integrator {
    /// Validates `dt` against the grid: `dt ≤ ds` is fine, `dt ≤ 2ds` logs a
    /// warning, anything larger is rejected. Unit characteristic speed makes
    /// `ds` the natural bound. The one-point grid has no spatial bound.
    pub fn new(closure: Closure, grid: GridSpec, scheme: Scheme, dt: f64) -> Result<Self> {
        closure.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(GStrandError::InvalidParams(format!("dt must be positive, got {dt}")));
        }
        if !grid.is_uniform_mode() {
            let ds = grid.ds();
            if dt > 2.0 * ds {
                return Err(GStrandError::CflViolation { dt, ds });
            }
            if dt > ds {
                warn!("dt = {dt} exceeds grid spacing {ds}; proceeding");
            }
        }
        Ok(Integrator {
            deriv: DerivOp::new(grid, scheme)?,
            closure,
            dt,
        })
    }

    pub fn closure(&self) -> &Closure {
        &self.closure
    }

    pub fn deriv(&self) -> &DerivOp {
        &self.deriv
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> GridSpec {
        self.deriv.grid()
    }

    pub fn tangent(&self, state: &StrandState) -> Result<StrandState> {
        full_rhs(state, &self.closure, &self.deriv)
    }

    /// One classical RK4 step. `step` only labels a blow-up error.
    pub fn step(&self, state: &StrandState, step: usize) -> Result<StrandState> {
        let dt = self.dt;
        let k1 = self.tangent(state)?;
        let mut y = state.clone();
        y.axpy(0.5 * dt, &k1);
        let k2 = self.tangent(&y)?;
        let mut y = state.clone();
        y.axpy(0.5 * dt, &k2);
        let k3 = self.tangent(&y)?;
        let mut y = state.clone();
        y.axpy(dt, &k3);
        let k4 = self.tangent(&y)?;

        let mut out = state.clone();
        out.axpy(dt / 6.0, &k1);
        out.axpy(dt / 3.0, &k2);
        out.axpy(dt / 3.0, &k3);
        out.axpy(dt / 6.0, &k4);
        if !out.is_finite() {
            return Err(GStrandError::NonFinite { step });
        }
        Ok(out)
    }

    /// Advance `steps` steps, calling `observe(step_index, &state)` after each.
    pub fn run(
        &self,
        mut state: StrandState,
        steps: usize,
        mut observe: impl FnMut(usize, &StrandState),
    ) -> Result<StrandState> {
        for k in 1..=steps {
            state = self.step(&state, k)?;
            observe(k, &state);
        }
        Ok(state)
    }
}

/// One RK4 step with a freshly built integrator.
pub fn step_rk4(state: &StrandState, closure: &Closure, scheme: Scheme, dt: f64) -> Result<StrandState> {
    Integrator::new(closure.clone(), state.grid(), scheme, dt)?.step(state, 1)
}

/// Number of steps that reach `t_end`; errors if `dt` does not divide it
/// to within a relative 1e-9.
pub fn steps_for(t_end: f64, dt: f64) -> Result<usize> {
    let k = (t_end / dt).round();
    if (k * dt - t_end).abs() > 1e-9 * t_end.abs().max(dt) {
        return Err(GStrandError::InvalidParams(format!("dt = {dt} does not divide t_end = {t_end}")));
    }
    Ok(k as usize)
}

/// Deviation from SE(2) structure: in-plane parts of `Π`, `Ω` plus normal
/// parts of `M`, `Γ`, maximized over the grid. The plane normal is `ẑ`.
pub fn check_se2_split(state: &StrandState) -> Result<f64> {
    let StrandState::Se3 { pi, mom, omega, gamma } = state else {
        return Err(GStrandError::GroupMismatch(format!("SE(2) split needs an se3 state, got {}", state.group())));
    };
    let mut worst: f64 = 0.0;
    for j in 0..pi.len() {
        let (p, m, o, g) = (pi.values[j], mom.values[j], omega.values[j], gamma.values[j]);
        let d = p.x.hypot(p.y) + o.x.hypot(o.y) + m.z.abs() + g.z.abs();
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Whether a closure maps SE(2) data to SE(2) diagnostics. Requires `μ = ν = 0`,
/// `a2 ∥ ẑ`, `a1 ⊥ ẑ` for the se3 family and a block structure for SMK.
pub fn preserves_se2(closure: &Closure) -> bool {
    match closure {
        Closure::Se3(p) => {
            p.mu == 0.0 && p.nu == 0.0 && p.a2.x == 0.0 && p.a2.y == 0.0 && p.a1.z == 0.0
        }
        Closure::Smk(p) => {
            // W = 2JΠ stays normal
            let j_ok = p.j[0][2] == 0.0 && p.j[1][2] == 0.0;
            // z = (Γx, Γy, Γz, Ωx, Ωy, Ωz): slots 2, 3, 4 vanish on SE(2) data
            // and so must the matching gradient entries
            let even = [2usize, 3, 4];
            let odd = [0usize, 1, 5];
            let q_ok = even.iter().all(|&a| odd.iter().all(|&b| p.psi_q[a][b] == 0.0));
            let l_ok = even.iter().all(|&a| p.psi_l[a] == 0.0);
            j_ok && q_ok && l_ok
        }
        _ => false,
    }
}
