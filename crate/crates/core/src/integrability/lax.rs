//! Quadratic Lax fields, the constraint hierarchy and zero-curvature residuals.
//!
//! With `L = λ²A + λP + S` and `M = λ²B + λD + G` (momentum `P`, strain `S`,
//! dual `D`, diagnostic `G`, all in algebra coordinates) and the flow
//! `∂_tP = D_sD + [P,G] + [S,D]`, `∂_tS = D_sG + [S,G]`, the zero-curvature
//! residual `∂_tL − ∂_sM − [L,M]` reduces to
//! `−λ⁴[A,B] − λ³([A,D] − [B,P]) − λ²([A,G] − [B,S] + [P,D])`.

use nalgebra::{Matrix5, Vector5};
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgPair, LieElem, Vec3};
use crate::discretization::{DerivOp, FieldVec3};
use crate::dynamics::closure::{Closure, LaxConstants};
use crate::dynamics::rhs::rhs;
use crate::dynamics::state::{check_pair, DiagnosticState, Group, StrandState};
use crate::error::{GStrandError, Result};

/// `L` and `M` sampled on the grid at one value of λ.
#[derive(Clone, Debug, PartialEq)]
pub struct LaxPairField {
    pub group: Group,
    pub lambda: f64,
    pub l: Vec<LieElem>,
    pub m: Vec<LieElem>,
}

/// Max-norm of the λ⁴, λ³, λ² rows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstraintResiduals {
    pub r4: f64,
    pub r3: f64,
    pub r2: f64,
}

impl ConstraintResiduals {
    pub fn max(&self) -> f64 {
        self.r4.max(self.r3).max(self.r2)
    }
}

fn zip_elems(group: Group, a: &FieldVec3, b: Option<&FieldVec3>) -> Vec<LieElem> {
    match (group, b) {
        (Group::So3, _) => a.values.iter().map(|&v| LieElem::So3(v)).collect(),
        (Group::So4, Some(b)) => a.values.iter().zip(&b.values).map(|(&x, &y)| LieElem::Pair(AlgPair::so4(x, y))).collect(),
        (Group::Se3, Some(b)) => a.values.iter().zip(&b.values).map(|(&x, &y)| LieElem::Pair(AlgPair::se3(x, y))).collect(),
        _ => unreachable!("pair groups always pass two fields"),
    }
}

/// Momentum and strain of a state, in algebra coordinates. For SE(3) the
/// momentum pair `(Π, M)` maps to `(M, Π)` under the cross pairing.
pub fn state_elems(state: &StrandState) -> (Vec<LieElem>, Vec<LieElem>) {
    let g = state.group();
    match state {
        StrandState::So3 { pi, gamma } => (zip_elems(g, pi, None), zip_elems(g, gamma, None)),
        StrandState::So4 { pi, xi, omega, gamma } => (zip_elems(g, pi, Some(xi)), zip_elems(g, omega, Some(gamma))),
        StrandState::Se3 { pi, mom, omega, gamma } => (zip_elems(g, mom, Some(pi)), zip_elems(g, omega, Some(gamma))),
    }
}

/// Dual and diagnostic fields, in algebra coordinates.
pub fn diag_elems(diag: &DiagnosticState) -> (Vec<LieElem>, Vec<LieElem>) {
    let g = diag.group();
    match diag {
        DiagnosticState::So3 { omega, xi } => (zip_elems(g, xi, None), zip_elems(g, omega, None)),
        DiagnosticState::So4 { cap_pi, cap_xi, omega, gamma } => {
            (zip_elems(g, cap_pi, Some(cap_xi)), zip_elems(g, omega, Some(gamma)))
        }
        DiagnosticState::Se3 { w, v, m, n } => (zip_elems(g, n, Some(m)), zip_elems(g, w, Some(v))),
    }
}

fn check_consts(group: Group, c: &LaxConstants) -> Result<()> {
    let ok = matches!(
        (group, c.a, c.b),
        (Group::So3, LieElem::So3(_), LieElem::So3(_))
            | (Group::So4, LieElem::Pair(AlgPair { tag: crate::algebra::AlgTag::So4, .. }), LieElem::Pair(AlgPair { tag: crate::algebra::AlgTag::So4, .. }))
            | (Group::Se3, LieElem::Pair(AlgPair { tag: crate::algebra::AlgTag::Se3, .. }), LieElem::Pair(AlgPair { tag: crate::algebra::AlgTag::Se3, .. }))
    );
    if ok {
        Ok(())
    } else {
        Err(GStrandError::GroupMismatch(format!("Lax constants do not belong to {group}")))
    }
}

fn quad(c: &LieElem, p: &LieElem, s: &LieElem, lambda: f64) -> LieElem {
    c.scale(lambda * lambda).add(&p.scale(lambda)).add(s)
}

/// `L = λ²A + λP + S`, `M = λ²B + λD + G` pointwise.
pub fn build_lax(state: &StrandState, diag: &DiagnosticState, closure: &Closure, lambda: f64) -> Result<LaxPairField> {
    build_lax_with(state, diag, &closure.lax_constants(), lambda)
}

pub fn build_lax_with(state: &StrandState, diag: &DiagnosticState, c: &LaxConstants, lambda: f64) -> Result<LaxPairField> {
    check_pair(state, diag)?;
    check_consts(state.group(), c)?;
    let (p, s) = state_elems(state);
    let (d, g) = diag_elems(diag);
    Ok(LaxPairField {
        group: state.group(),
        lambda,
        l: p.iter().zip(&s).map(|(p, s)| quad(&c.a, p, s, lambda)).collect(),
        m: d.iter().zip(&g).map(|(d, g)| quad(&c.b, d, g, lambda)).collect(),
    })
}

/// Evaluate the λ⁴, λ³, λ² rows for the closure's diagnostics.
pub fn constraint_residuals(state: &StrandState, diag: &DiagnosticState, closure: &Closure) -> Result<ConstraintResiduals> {
    constraint_residuals_with(state, diag, &closure.lax_constants())
}

pub fn constraint_residuals_with(state: &StrandState, diag: &DiagnosticState, c: &LaxConstants) -> Result<ConstraintResiduals> {
    check_pair(state, diag)?;
    check_consts(state.group(), c)?;
    let (p, s) = state_elems(state);
    let (d, g) = diag_elems(diag);
    let (a, b) = (&c.a, &c.b);
    let mut out = ConstraintResiduals { r4: a.bracket(b).norm(), r3: 0.0, r2: 0.0 };
    for j in 0..p.len() {
        let r3 = a.bracket(&d[j]).sub(&b.bracket(&p[j]));
        let r2 = a.bracket(&g[j]).sub(&b.bracket(&s[j])).add(&p[j].bracket(&d[j]));
        out.r3 = out.r3.max(r3.norm());
        out.r2 = out.r2.max(r2.norm());
    }
    Ok(out)
}

/// Differentiate a field of algebra elements component by component.
fn deriv_elems(v: &[LieElem], d: &DerivOp) -> Vec<LieElem> {
    let grid = d.grid();
    let col = |part: usize| FieldVec3::from_fn_index(grid, |j| {
        let c = v[j].components();
        Vec3::new(c[3 * part], c[3 * part + 1], c[3 * part + 2])
    });
    match v.first() {
        None => vec![],
        Some(LieElem::So3(_)) => d.apply(&col(0)).values.into_iter().map(LieElem::So3).collect(),
        Some(LieElem::Pair(p)) => {
            let tag = p.tag;
            let (f, s) = (d.apply(&col(0)), d.apply(&col(1)));
            f.values
                .into_iter()
                .zip(s.values)
                .map(|(x, y)| LieElem::Pair(AlgPair::new(x, y, tag)))
                .collect()
        }
    }
}

/// Residual field `∂_tL − ∂_sM − [L,M]` with `∂_tL` taken from the right-hand
/// side driven by `diag`.
pub fn zcr_residual_field(
    state: &StrandState,
    diag: &DiagnosticState,
    c: &LaxConstants,
    d: &DerivOp,
    lambda: f64,
) -> Result<Vec<LieElem>> {
    let lax = build_lax_with(state, diag, c, lambda)?;
    let tangent = rhs(state, diag, d)?;
    let (tp, ts) = state_elems(&tangent);
    let dm = deriv_elems(&lax.m, d);
    Ok((0..lax.l.len())
        .map(|j| {
            let dl = tp[j].scale(lambda).add(&ts[j]);
            dl.sub(&dm[j]).sub(&lax.l[j].bracket(&lax.m[j]))
        })
        .collect())
}

fn max_norm(v: &[LieElem]) -> f64 {
    v.iter().fold(0.0, |m, e| m.max(e.norm()))
}

/// Max-norm zero-curvature residual along the semi-discrete flow of `closure`.
pub fn zcr_residual_semidiscrete(state: &StrandState, closure: &Closure, d: &DerivOp, lambda: f64) -> Result<f64> {
    let diag = closure.diagnostics(state)?;
    zcr_residual_with(state, &diag, &closure.lax_constants(), d, lambda)
}

/// As [`zcr_residual_semidiscrete`] with explicit diagnostics and constants.
pub fn zcr_residual_with(
    state: &StrandState,
    diag: &DiagnosticState,
    c: &LaxConstants,
    d: &DerivOp,
    lambda: f64,
) -> Result<f64> {
    Ok(max_norm(&zcr_residual_field(state, diag, c, d, lambda)?))
}

/// Recover the λ⁰..λ⁴ coefficients of the residual polynomial from samples
/// at five distinct λ and return their max-norms, lowest power first.
pub fn zcr_graded_residuals(
    state: &StrandState,
    diag: &DiagnosticState,
    c: &LaxConstants,
    d: &DerivOp,
    lambdas: [f64; 5],
) -> Result<[f64; 5]> {
    let v = Matrix5::from_fn(|i, k| lambdas[i].powi(k as i32));
    let lu = v.lu();
    let samples: Vec<Vec<LieElem>> = lambdas
        .iter()
        .map(|&l| zcr_residual_field(state, diag, c, d, l))
        .collect::<Result<_>>()?;
    let n = samples[0].len();
    let ncomp = samples[0].first().map_or(0, |e| e.components().len());
    let mut graded = [0.0f64; 5];
    for j in 0..n {
        let comps: Vec<Vec<f64>> = samples.iter().map(|s| s[j].components()).collect();
        let mut norms = [0.0f64; 5];
        for q in 0..ncomp {
            let rhs = Vector5::from_fn(|i, _| comps[i][q]);
            let coef = lu.solve(&rhs).ok_or_else(|| GStrandError::InvalidParams("λ samples must be distinct".into()))?;
            for k in 0..5 {
                norms[k] += coef[k] * coef[k];
            }
        }
        for k in 0..5 {
            graded[k] = graded[k].max(norms[k].sqrt());
        }
    }
    Ok(graded)
}

/// Fully discrete residual: `∂_tL` from a fourth-order central difference over
/// five consecutive snapshots spaced `dt`, everything else at the middle one.
pub fn zcr_residual_discrete(snapshots: &[StrandState], closure: &Closure, d: &DerivOp, dt: f64, lambda: f64) -> Result<f64> {
    if snapshots.len() != 5 {
        return Err(GStrandError::WrongSnapshotCount { expected: 5, got: snapshots.len() });
    }
    let mid = &snapshots[2];
    let diag = closure.diagnostics(mid)?;
    let c = closure.lax_constants();
    let lax = build_lax_with(mid, &diag, &c, lambda)?;
    let l_at = |s: &StrandState| -> Result<Vec<LieElem>> {
        if s.group() != mid.group() || s.grid() != mid.grid() {
            return Err(GStrandError::GridMismatch);
        }
        let (p, st) = state_elems(s);
        Ok(p.iter().zip(&st).map(|(p, s)| p.scale(lambda).add(s)).collect())
    };
    let ls: Vec<Vec<LieElem>> = snapshots.iter().map(l_at).collect::<Result<_>>()?;
    let dm = deriv_elems(&lax.m, d);
    let mut worst: f64 = 0.0;
    for j in 0..dm.len() {
        let dl = ls[0][j]
            .sub(&ls[1][j].scale(8.0))
            .add(&ls[3][j].scale(8.0))
            .sub(&ls[4][j])
            .scale(1.0 / (12.0 * dt));
        let r = dl.sub(&dm[j]).sub(&lax.l[j].bracket(&lax.m[j]));
        worst = worst.max(r.norm());
    }
    Ok(worst)
}

/// Least-squares slope of `log r` against `log λ`, used to read off which
/// power of λ dominates a residual.
pub fn loglog_slope(lambdas: &[f64], residuals: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = lambdas.iter().zip(residuals).map(|(l, r)| (l.ln(), r.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
