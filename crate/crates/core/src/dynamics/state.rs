use std::fmt;

use serde::{Deserialize, Serialize};

use crate::discretization::{FieldVec3, GridSpec};
use crate::error::{GStrandError, Result};

/// Which Lie group a strand lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    So3,
    So4,
    Se3,
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Group::So3 => "so3",
            Group::So4 => "so4",
            Group::Se3 => "se3",
        })
    }
}

impl Group {
    /// Names of the prognostic fields, in storage order.
    pub fn field_names(self) -> &'static [&'static str] {
        match self {
            Group::So3 => &["Pi", "Gamma"],
            Group::So4 => &["pi", "xi", "Omega", "Gamma"],
            Group::Se3 => &["Pi", "Mom", "Omega", "Gamma"],
        }
    }

    /// Names of the diagnostic fields, in storage order.
    pub fn diagnostic_names(self) -> &'static [&'static str] {
        match self {
            Group::So3 => &["Omega", "Xi"],
            Group::So4 => &["Pi", "Xi", "omega", "gamma"],
            Group::Se3 => &["W", "V", "M", "N"],
        }
    }
}

/// Prognostic fields of a strand.
///
/// SO(3): momentum `Π` and strain `Γ`. SO(4): momenta `(π, ξ)` and strains
/// `(Ω, Γ)`. SE(3): momentum pair `(Π, M)` (here `mom` for `M`) and strain
/// pair `(Ω, Γ)`.
#[derive(Clone, Debug, PartialEq)]
pub enum StrandState {
    So3 {
        pi: FieldVec3,
        gamma: FieldVec3,
    },
    So4 {
        pi: FieldVec3,
        xi: FieldVec3,
        omega: FieldVec3,
        gamma: FieldVec3,
    },
    Se3 {
        pi: FieldVec3,
        mom: FieldVec3,
        omega: FieldVec3,
        gamma: FieldVec3,
    },
}

impl StrandState {
    pub fn group(&self) -> Group {
        match self {
            StrandState::So3 { .. } => Group::So3,
            StrandState::So4 { .. } => Group::So4,
            StrandState::Se3 { .. } => Group::Se3,
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.fields()[0].grid
    }

    pub fn fields(&self) -> Vec<&FieldVec3> {
        match self {
            StrandState::So3 { pi, gamma } => vec![pi, gamma],
            StrandState::So4 { pi, xi, omega, gamma } => vec![pi, xi, omega, gamma],
            StrandState::Se3 { pi, mom, omega, gamma } => vec![pi, mom, omega, gamma],
        }
    }

    pub fn fields_mut(&mut self) -> Vec<&mut FieldVec3> {
        match self {
            StrandState::So3 { pi, gamma } => vec![pi, gamma],
            StrandState::So4 { pi, xi, omega, gamma } => vec![pi, xi, omega, gamma],
            StrandState::Se3 { pi, mom, omega, gamma } => vec![pi, mom, omega, gamma],
        }
    }

    /// Assemble from fields in [`Group::field_names`] order.
    pub fn from_fields(group: Group, fields: Vec<FieldVec3>) -> Result<Self> {
        let expected = group.field_names().len();
        if fields.len() != expected {
            return Err(GStrandError::InvalidParams(format!(
                "{group} state needs {expected} fields, got {}",
                fields.len()
            )));
        }
        let grid = fields[0].grid;
        if fields.iter().any(|f| f.grid != grid || f.len() != grid.n) {
            return Err(GStrandError::GridMismatch);
        }
        let mut it = fields.into_iter();
        let mut next = || it.next().unwrap();
        Ok(match group {
            Group::So3 => StrandState::So3 { pi: next(), gamma: next() },
            Group::So4 => StrandState::So4 { pi: next(), xi: next(), omega: next(), gamma: next() },
            Group::Se3 => StrandState::Se3 { pi: next(), mom: next(), omega: next(), gamma: next() },
        })
    }

    pub fn zeros(group: Group, grid: GridSpec) -> Self {
        let n = group.field_names().len();
        StrandState::from_fields(group, vec![FieldVec3::zeros(grid); n]).unwrap()
    }

    pub fn zeros_like(&self) -> Self {
        StrandState::zeros(self.group(), self.grid())
    }

    /// `self += a·x`.
    pub fn axpy(&mut self, a: f64, x: &StrandState) {
        debug_assert_eq!(self.group(), x.group());
        for (y, xf) in self.fields_mut().into_iter().zip(x.fields()) {
            y.axpy(a, xf);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.fields().iter().all(|f| f.is_finite())
    }

    /// Max-norm distance over all fields.
    pub fn max_diff(&self, o: &StrandState) -> f64 {
        self.fields()
            .iter()
            .zip(o.fields())
            .fold(0.0, |m, (a, b)| m.max(a.max_diff(b)))
    }

    pub fn max_abs(&self) -> f64 {
        self.fields().iter().fold(0.0, |m, f| m.max(f.max_abs()))
    }
}

/// Diagnostic fields produced by a closure.
///
/// SO(3): `(Ω, Ξ)`. SO(4): `(Π, Ξ)` and `(ω, γ)`. SE(3): velocity pair
/// `(W, V)` and stress pair `(M, N)`.
#[derive(Clone, Debug, PartialEq)]
pub enum DiagnosticState {
    So3 {
        omega: FieldVec3,
        xi: FieldVec3,
    },
    So4 {
        cap_pi: FieldVec3,
        cap_xi: FieldVec3,
        omega: FieldVec3,
        gamma: FieldVec3,
    },
    Se3 {
        w: FieldVec3,
        v: FieldVec3,
        m: FieldVec3,
        n: FieldVec3,
    },
}

impl DiagnosticState {
    pub fn group(&self) -> Group {
        match self {
            DiagnosticState::So3 { .. } => Group::So3,
            DiagnosticState::So4 { .. } => Group::So4,
            DiagnosticState::Se3 { .. } => Group::Se3,
        }
    }

    pub fn fields(&self) -> Vec<&FieldVec3> {
        match self {
            DiagnosticState::So3 { omega, xi } => vec![omega, xi],
            DiagnosticState::So4 { cap_pi, cap_xi, omega, gamma } => vec![cap_pi, cap_xi, omega, gamma],
            DiagnosticState::Se3 { w, v, m, n } => vec![w, v, m, n],
        }
    }

    pub fn fields_mut(&mut self) -> Vec<&mut FieldVec3> {
        match self {
            DiagnosticState::So3 { omega, xi } => vec![omega, xi],
            DiagnosticState::So4 { cap_pi, cap_xi, omega, gamma } => vec![cap_pi, cap_xi, omega, gamma],
            DiagnosticState::Se3 { w, v, m, n } => vec![w, v, m, n],
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.fields()[0].grid
    }

    pub fn max_diff(&self, o: &DiagnosticState) -> f64 {
        self.fields()
            .iter()
            .zip(o.fields())
            .fold(0.0, |m, (a, b)| m.max(a.max_diff(b)))
    }
}

pub(crate) fn check_pair(state: &StrandState, diag: &DiagnosticState) -> Result<()> {
    if state.group() != diag.group() {
        return Err(GStrandError::GroupMismatch(format!(
            "state is {}, diagnostics are {}",
            state.group(),
            diag.group()
        )));
    }
    if state.grid() != diag.grid() {
        return Err(GStrandError::GridMismatch);
    }
    Ok(())
}
