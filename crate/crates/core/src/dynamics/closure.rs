//! Hamiltonian closures: pointwise maps from prognostic to diagnostic fields.
//!
//! Every integrable closure here is the variational derivative of a
//! Hamiltonian density of the form
//! `⟨momentum, strain⟩ + (μ r + ν)·q + f(r)`, where `r` pairs the momentum
//! with the constant Lax element and `q` is a quadratic invariant. The scalars
//! `β = μ r + ν` and `γ = μ q + f′(r)` are what make the λ³ and λ² rows of the
//! zero-curvature hierarchy vanish identically.
//!
//! The SMK closure is a valid Hamiltonian flow that does not have this
//! structure and serves as the non-integrable control.

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgPair, LieElem, Vec3};
use crate::discretization::FieldVec3;
use crate::dynamics::state::{DiagnosticState, Group, StrandState};
use crate::error::{GStrandError, Result};

/// Maximum supported degree of the closure polynomial `f`.
pub const MAX_POLY_DEGREE: usize = 8;

/// Real polynomial `f(r) = Σ c_k r^k`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PolySpec {
    pub coefficients: Vec<f64>,
}

impl PolySpec {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        let p = PolySpec { coefficients };
        p.validate()?;
        Ok(p)
    }

    pub fn zero() -> Self {
        PolySpec::default()
    }

    pub fn validate(&self) -> Result<()> {
        if self.coefficients.len() > MAX_POLY_DEGREE + 1 {
            return Err(GStrandError::InvalidParams(format!(
                "polynomial degree {} exceeds {MAX_POLY_DEGREE}",
                self.coefficients.len() - 1
            )));
        }
        if self.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(GStrandError::InvalidParams("non-finite polynomial coefficient".into()));
        }
        Ok(())
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * r + c)
    }

    /// `f′(r)`, from the coefficients.
    pub fn eval_deriv(&self, r: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * r + k as f64 * c)
    }
}

/// SO(3) closure with constant Lax vector `a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct So3Params {
    pub a: Vec3,
    pub mu: f64,
    pub nu: f64,
    #[serde(default)]
    pub f: PolySpec,
}

/// SO(4) closure with `A = B = (a1, a2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct So4Ex1Params {
    pub a1: Vec3,
    pub a2: Vec3,
    pub mu: f64,
    pub nu: f64,
    #[serde(default)]
    pub f: PolySpec,
}

/// SO(4) closure with `A = (a, b)`, `B = (b, a)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct So4Ex2Params {
    pub a: Vec3,
    pub b: Vec3,
    pub nu: f64,
    pub mu: f64,
    pub sigma: f64,
}

/// SE(3) closure. `(a1, a2)` is written in momentum coordinates: `a1` sits
/// in the `Π` slot and `a2` in the `M` slot. Under the cross pairing its
/// se(3) image is `(a2, a1)` (rotation `a2`, translation `a1`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Se3Params {
    pub a1: Vec3,
    pub a2: Vec3,
    pub mu: f64,
    pub nu: f64,
    #[serde(default)]
    pub f: PolySpec,
}

/// Rod Hamiltonian `∫ M² + Π·JΠ + ψ(Γ, Ω) ds` with quadratic
/// `ψ(z) = ½ zᵀQz + l·z`, `z = (Γ, Ω)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmkParams {
    pub j: [[f64; 3]; 3],
    pub psi_q: [[f64; 6]; 6],
    #[serde(default)]
    pub psi_l: [f64; 6],
    /// Constant element used to evaluate the constraint hierarchy, in the
    /// same momentum coordinates as [`Se3Params`].
    #[serde(default = "default_probe_a1")]
    pub probe_a1: Vec3,
    #[serde(default = "default_probe_a2")]
    pub probe_a2: Vec3,
}

fn default_probe_a1() -> Vec3 {
    Vec3::E1
}

fn default_probe_a2() -> Vec3 {
    Vec3::E3
}

impl SmkParams {
    /// `J = I`, `ψ = 0`.
    pub fn identity() -> Self {
        let mut j = [[0.0; 3]; 3];
        for (i, row) in j.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        SmkParams {
            j,
            psi_q: [[0.0; 6]; 6],
            psi_l: [0.0; 6],
            probe_a1: default_probe_a1(),
            probe_a2: default_probe_a2(),
        }
    }

    pub fn psi(&self, gamma: Vec3, omega: Vec3) -> f64 {
        let z = [gamma.x, gamma.y, gamma.z, omega.x, omega.y, omega.z];
        let mut acc = 0.0;
        for i in 0..6 {
            let qz: f64 = (0..6).map(|k| self.psi_q[i][k] * z[k]).sum();
            acc += 0.5 * z[i] * qz + self.psi_l[i] * z[i];
        }
        acc
    }

    /// `(∂ψ/∂Γ, ∂ψ/∂Ω)`.
    pub fn psi_grad(&self, gamma: Vec3, omega: Vec3) -> (Vec3, Vec3) {
        let z = [gamma.x, gamma.y, gamma.z, omega.x, omega.y, omega.z];
        let g: Vec<f64> = (0..6)
            .map(|i| (0..6).map(|k| self.psi_q[i][k] * z[k]).sum::<f64>() + self.psi_l[i])
            .collect();
        (Vec3::new(g[0], g[1], g[2]), Vec3::new(g[3], g[4], g[5]))
    }

    pub fn apply_j(&self, v: Vec3) -> Vec3 {
        let j = &self.j;
        Vec3::new(
            j[0][0] * v.x + j[0][1] * v.y + j[0][2] * v.z,
            j[1][0] * v.x + j[1][1] * v.y + j[1][2] * v.z,
            j[2][0] * v.x + j[2][1] * v.y + j[2][2] * v.z,
        )
    }

    fn validate(&self) -> Result<()> {
        let j = &self.j;
        let symmetric = (0..3).all(|a| (0..3).all(|b| j[a][b] == j[b][a]));
        if !symmetric {
            return Err(GStrandError::InvalidParams("SMK inertia J must be symmetric".into()));
        }
        // Sylvester's criterion
        let m1 = j[0][0];
        let m2 = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let m3 = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1])
            - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
            + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
        if !(m1 > 0.0 && m2 > 0.0 && m3 > 0.0) {
            return Err(GStrandError::InvalidParams("SMK inertia J must be positive definite".into()));
        }
        let q = &self.psi_q;
        if !(0..6).all(|a| (0..6).all(|b| q[a][b] == q[b][a])) {
            return Err(GStrandError::InvalidParams("psi quadratic form must be symmetric".into()));
        }
        Ok(())
    }
}

/// A closure together with its family.
#[derive(Clone, Debug, PartialEq)]
pub enum Closure {
    So3(So3Params),
    So4Ex1(So4Ex1Params),
    So4Ex2(So4Ex2Params),
    Se3(Se3Params),
    Smk(SmkParams),
}

/// Constant elements `A` (in `L`) and `B` (in `M`) of a quadratic Lax pair,
/// in algebra coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaxConstants {
    pub a: LieElem,
    pub b: LieElem,
}

impl Closure {
    pub fn group(&self) -> Group {
        match self {
            Closure::So3(_) => Group::So3,
            Closure::So4Ex1(_) | Closure::So4Ex2(_) => Group::So4,
            Closure::Se3(_) | Closure::Smk(_) => Group::Se3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Closure::So3(_) => "so3",
            Closure::So4Ex1(_) => "so4_ex1",
            Closure::So4Ex2(_) => "so4_ex2",
            Closure::Se3(_) => "se3",
            Closure::Smk(_) => "smk",
        }
    }

    /// Whether the closure satisfies the λ⁴, λ³, λ² rows by construction.
    pub fn is_integrable(&self) -> bool {
        !matches!(self, Closure::Smk(_))
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            Closure::So3(p) => {
                p.f.validate()?;
                if !finite(&[p.mu, p.nu]) || !p.a.is_finite() {
                    return Err(GStrandError::InvalidParams("non-finite so3 parameter".into()));
                }
                if p.a.norm() == 0.0 {
                    return Err(GStrandError::InvalidParams("so3 Lax vector a must be nonzero".into()));
                }
            }
            Closure::So4Ex1(p) => {
                p.f.validate()?;
                if p.a1.norm() == 0.0 && p.a2.norm() == 0.0 {
                    return Err(GStrandError::InvalidParams("(a1, a2) must be nonzero".into()));
                }
            }
            Closure::So4Ex2(p) => {
                if p.a.cross(p.b).norm() == 0.0 {
                    return Err(GStrandError::InvalidParams("so4_ex2 requires a × b ≠ 0".into()));
                }
            }
            Closure::Se3(p) => {
                p.f.validate()?;
                if p.a1.norm() == 0.0 && p.a2.norm() == 0.0 {
                    return Err(GStrandError::InvalidParams("(a1, a2) must be nonzero".into()));
                }
            }
            Closure::Smk(p) => p.validate()?,
        }
        Ok(())
    }

    /// Constant Lax elements in algebra coordinates.
    pub fn lax_constants(&self) -> LaxConstants {
        match self {
            Closure::So3(p) => LaxConstants {
                a: LieElem::So3(p.a),
                b: LieElem::So3(p.a),
            },
            Closure::So4Ex1(p) => {
                let a = LieElem::Pair(AlgPair::so4(p.a1, p.a2));
                LaxConstants { a, b: a }
            }
            Closure::So4Ex2(p) => LaxConstants {
                a: LieElem::Pair(AlgPair::so4(p.a, p.b)),
                b: LieElem::Pair(AlgPair::so4(p.b, p.a)),
            },
            Closure::Se3(p) => {
                let a = LieElem::Pair(AlgPair::se3(p.a2, p.a1));
                LaxConstants { a, b: a }
            }
            Closure::Smk(p) => {
                let a = LieElem::Pair(AlgPair::se3(p.probe_a2, p.probe_a1));
                LaxConstants { a, b: a }
            }
        }
    }

    /// Diagnostic fields for `state`.
    pub fn diagnostics(&self, state: &StrandState) -> Result<DiagnosticState> {
        if state.group() != self.group() {
            return Err(GStrandError::GroupMismatch(format!(
                "{} closure applied to a {} state",
                self.name(),
                state.group()
            )));
        }
        Ok(match (self, state) {
            (Closure::So3(p), StrandState::So3 { pi, gamma }) => closure_so3(pi, gamma, p),
            (Closure::So4Ex1(p), StrandState::So4 { pi, xi, omega, gamma }) => {
                closure_so4_ex1(pi, xi, omega, gamma, p)
            }
            (Closure::So4Ex2(p), StrandState::So4 { pi, xi, omega, gamma }) => {
                closure_so4_ex2(pi, xi, omega, gamma, p)
            }
            (Closure::Se3(p), StrandState::Se3 { pi, mom, omega, gamma }) => {
                closure_se3(pi, mom, omega, gamma, p)
            }
            (Closure::Smk(p), StrandState::Se3 { pi, mom, omega, gamma }) => {
                closure_smk(pi, mom, omega, gamma, p)
            }
            _ => unreachable!("group checked above"),
        })
    }

    /// Hamiltonian density at one grid point. Fields are passed in
    /// [`Group::field_names`] order.
    pub fn hamiltonian_density(&self, u: &[Vec3]) -> f64 {
        match self {
            Closure::So3(p) => {
                let (pi, gamma) = (u[0], u[1]);
                let r = p.a.dot(pi);
                pi.dot(gamma) + (p.mu * r + p.nu) * (0.5 * pi.norm_sq() + p.a.dot(gamma)) + p.f.eval(r)
            }
            Closure::So4Ex1(p) => {
                let (pi, xi, om, ga) = (u[0], u[1], u[2], u[3]);
                let r = p.a1.dot(pi) + p.a2.dot(xi);
                let q = 0.5 * (pi.norm_sq() + xi.norm_sq()) + p.a1.dot(om) + p.a2.dot(ga);
                pi.dot(om) + xi.dot(ga) + (p.mu * r + p.nu) * q + p.f.eval(r)
            }
            Closure::So4Ex2(p) => {
                let (pi, xi, om, ga) = (u[0], u[1], u[2], u[3]);
                let alpha = p.mu * p.a + p.sigma * p.b;
                let beta = p.sigma * p.a + p.mu * p.b;
                0.5 * p.nu * (pi.norm_sq() + xi.norm_sq())
                    + pi.dot(ga)
                    + xi.dot(om)
                    + alpha.dot(pi)
                    + beta.dot(xi)
                    + p.nu * (p.a.dot(om) + p.b.dot(ga))
            }
            Closure::Se3(p) => {
                let (pi, mom, om, ga) = (u[0], u[1], u[2], u[3]);
                let r = p.a2.dot(pi) + p.a1.dot(mom);
                let q = pi.dot(mom) + p.a1.dot(om) + p.a2.dot(ga);
                pi.dot(om) + mom.dot(ga) + (p.mu * r + p.nu) * q + p.f.eval(r)
            }
            Closure::Smk(p) => {
                let (pi, mom, om, ga) = (u[0], u[1], u[2], u[3]);
                mom.norm_sq() + pi.dot(p.apply_j(pi)) + p.psi(ga, om)
            }
        }
    }
}

fn pointwise2(
    a: &FieldVec3,
    b: &FieldVec3,
    f: impl Fn(Vec3, Vec3) -> (Vec3, Vec3),
) -> (FieldVec3, FieldVec3) {
    let (x, y): (Vec<Vec3>, Vec<Vec3>) = a.values.iter().zip(&b.values).map(|(&p, &q)| f(p, q)).unzip();
    (
        FieldVec3 { grid: a.grid, values: x },
        FieldVec3 { grid: a.grid, values: y },
    )
}

fn pointwise4(
    fields: [&FieldVec3; 4],
    f: impl Fn(Vec3, Vec3, Vec3, Vec3) -> [Vec3; 4],
) -> [FieldVec3; 4] {
    let grid = fields[0].grid;
    let n = grid.n;
    let mut out: [Vec<Vec3>; 4] = std::array::from_fn(|_| Vec::with_capacity(n));
    for j in 0..n {
        let r = f(
            fields[0].values[j],
            fields[1].values[j],
            fields[2].values[j],
            fields[3].values[j],
        );
        for (o, v) in out.iter_mut().zip(r) {
            o.push(v);
        }
    }
    out.map(|values| FieldVec3 { grid, values })
}

/// SO(3): `Ξ = Π + βA`, `Ω = Γ + βΠ + γA` with `r = A·Π`, `β = μr + ν`,
/// `γ = μ(½|Π|² + A·Γ) + f′(r)`.
pub fn closure_so3(pi: &FieldVec3, gamma: &FieldVec3, p: &So3Params) -> DiagnosticState {
    let a = p.a;
    let (omega, xi) = pointwise2(pi, gamma, |pv, gv| {
        let r = a.dot(pv);
        let beta = p.mu * r + p.nu;
        let gam = p.mu * (0.5 * pv.norm_sq() + a.dot(gv)) + p.f.eval_deriv(r);
        (gv + beta * pv + gam * a, pv + beta * a)
    });
    DiagnosticState::So3 { omega, xi }
}

pub fn closure_so4_ex1(
    pi: &FieldVec3,
    xi: &FieldVec3,
    omega: &FieldVec3,
    gamma: &FieldVec3,
    p: &So4Ex1Params,
) -> DiagnosticState {
    let (a1, a2) = (p.a1, p.a2);
    let [cap_pi, cap_xi, w, g] = pointwise4([pi, xi, omega, gamma], |pv, xv, ov, gv| {
        let r = a1.dot(pv) + a2.dot(xv);
        let beta = p.mu * r + p.nu;
        let sigma = p.mu * (0.5 * (pv.norm_sq() + xv.norm_sq()) + a1.dot(ov) + a2.dot(gv))
            + p.f.eval_deriv(r);
        [
            pv + beta * a1,
            xv + beta * a2,
            ov + beta * pv + sigma * a1,
            gv + beta * xv + sigma * a2,
        ]
    });
    DiagnosticState::So4 { cap_pi, cap_xi, omega: w, gamma: g }
}

pub fn closure_so4_ex2(
    pi: &FieldVec3,
    xi: &FieldVec3,
    omega: &FieldVec3,
    gamma: &FieldVec3,
    p: &So4Ex2Params,
) -> DiagnosticState {
    let (a, b, nu, mu, sigma) = (p.a, p.b, p.nu, p.mu, p.sigma);
    let [cap_pi, cap_xi, w, g] = pointwise4([pi, xi, omega, gamma], |pv, xv, ov, gv| {
        [
            xv + nu * a,
            pv + nu * b,
            gv + nu * pv + mu * a + sigma * b,
            ov + nu * xv + sigma * a + mu * b,
        ]
    });
    DiagnosticState::So4 { cap_pi, cap_xi, omega: w, gamma: g }
}

/// SE(3): with `r = a2·Π + a1·M`, `β = μr + ν`,
/// `γ = μ(Π·M + a1·Ω + a2·Γ) + f′(r)`:
/// `W = Ω + βM + γa2`, `V = Γ + βΠ + γa1`, `M_d = Π + βa1`, `N = M + βa2`.
pub fn closure_se3(
    pi: &FieldVec3,
    mom: &FieldVec3,
    omega: &FieldVec3,
    gamma: &FieldVec3,
    p: &Se3Params,
) -> DiagnosticState {
    let (a1, a2) = (p.a1, p.a2);
    let [w, v, m, n] = pointwise4([pi, mom, omega, gamma], |pv, mv, ov, gv| {
        let r = a2.dot(pv) + a1.dot(mv);
        let beta = p.mu * r + p.nu;
        let gam = p.mu * (pv.dot(mv) + a1.dot(ov) + a2.dot(gv)) + p.f.eval_deriv(r);
        [
            ov + beta * mv + gam * a2,
            gv + beta * pv + gam * a1,
            pv + beta * a1,
            mv + beta * a2,
        ]
    });
    DiagnosticState::Se3 { w, v, m, n }
}

/// SMK rod: `W = 2JΠ`, `V = 2M`, `N = ∂ψ/∂Γ`, `M_d = ∂ψ/∂Ω`.
pub fn closure_smk(
    pi: &FieldVec3,
    mom: &FieldVec3,
    omega: &FieldVec3,
    gamma: &FieldVec3,
    p: &SmkParams,
) -> DiagnosticState {
    let [w, v, m, n] = pointwise4([pi, mom, omega, gamma], |pv, mv, ov, gv| {
        let (dg, dom) = p.psi_grad(gv, ov);
        [2.0 * p.apply_j(pv), 2.0 * mv, dom, dg]
    });
    DiagnosticState::Se3 { w, v, m, n }
}
