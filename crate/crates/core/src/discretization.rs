//! Periodic 1-D grids, derivative stencils, quadrature and Fourier-mode
//! initial data for `Vec3`-valued fields.
//!
//! Grid points sit at `s_j = j·ds`, `j = 0..n`, with no duplicated endpoint.
//! A one-point grid (`n = 1`) is the spatially uniform (ODE) limit: every
//! derivative on it is identically zero.
//!
//! All three derivative schemes are antisymmetric on the periodic grid, so
//! the rectangle-rule integral of any discrete derivative vanishes up to
//! roundoff. The conserved-density comparisons rely on this.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::algebra::Vec3;
use crate::error::{GStrandError, Result};

/// Periodic grid description.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub length: f64,
}

impl GridSpec {
    /// A periodic grid of `n >= 8` points, or the one-point uniform grid.
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(GStrandError::InvalidGrid(format!(
                "length must be positive and finite, got {length}"
            )));
        }
        if n != 1 && n < 8 {
            return Err(GStrandError::InvalidGrid(format!(
                "need n >= 8 points (or n = 1 for uniform mode), got {n}"
            )));
        }
        Ok(GridSpec { n, length })
    }

    /// One-point grid for spatially uniform dynamics.
    pub fn point(length: f64) -> Self {
        GridSpec { n: 1, length }
    }

    #[inline]
    pub fn ds(&self) -> f64 {
        self.length / self.n as f64
    }

    #[inline]
    pub fn s(&self, j: usize) -> f64 {
        j as f64 * self.ds()
    }

    pub fn is_uniform_mode(&self) -> bool {
        self.n == 1
    }

    /// Largest resolvable wavenumber magnitude, `n/2 - 1`.
    pub fn max_wavenumber(&self) -> i64 {
        self.n as i64 / 2 - 1
    }
}

/// Spatial derivative scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Central2,
    #[default]
    Central4,
    Spectral,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Central2 => "central2",
            Scheme::Central4 => "central4",
            Scheme::Spectral => "spectral",
        })
    }
}

/// `Vec3` samples on a periodic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldVec3 {
    pub grid: GridSpec,
    pub values: Vec<Vec3>,
}

impl FieldVec3 {
    pub fn new(grid: GridSpec, values: Vec<Vec3>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(GStrandError::InvalidGrid(format!(
                "field has {} values for a grid of {} points",
                values.len(),
                grid.n
            )));
        }
        Ok(FieldVec3 { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        FieldVec3::constant(grid, Vec3::ZERO)
    }

    pub fn constant(grid: GridSpec, v: Vec3) -> Self {
        FieldVec3 {
            grid,
            values: vec![v; grid.n],
        }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> Vec3) -> Self {
        FieldVec3 {
            grid,
            values: (0..grid.n).map(|j| f(grid.s(j))).collect(),
        }
    }

    /// Like [`FieldVec3::from_fn`] but indexed by grid point.
    pub fn from_fn_index(grid: GridSpec, f: impl Fn(usize) -> Vec3) -> Self {
        FieldVec3 {
            grid,
            values: (0..grid.n).map(f).collect(),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn component(&self, c: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[c]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.max_abs()))
    }

    pub fn map(&self, f: impl Fn(Vec3) -> Vec3) -> FieldVec3 {
        FieldVec3 {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, o: &FieldVec3, f: impl Fn(Vec3, Vec3) -> Vec3) -> FieldVec3 {
        debug_assert_eq!(self.len(), o.len());
        FieldVec3 {
            grid: self.grid,
            values: self.values.iter().zip(&o.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// `self + a·x`, in place.
    pub fn axpy(&mut self, a: f64, x: &FieldVec3) {
        for (y, &xv) in self.values.iter_mut().zip(&x.values) {
            *y += a * xv;
        }
    }

    /// Max-norm of the pointwise difference.
    pub fn max_diff(&self, o: &FieldVec3) -> f64 {
        self.values
            .iter()
            .zip(&o.values)
            .fold(0.0, |m, (&a, &b)| m.max((a - b).max_abs()))
    }
}

/// One Fourier mode of an initial field component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierModeSpec {
    pub component: usize,
    pub wavenumber: i64,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

/// Precomputed derivative operator for one grid and scheme.
#[derive(Clone)]
pub struct DerivOp {
    grid: GridSpec,
    scheme: Scheme,
    spectral: Option<SpectralPlan>,
}

#[derive(Clone)]
struct SpectralPlan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    // i·k for each FFT bin, Nyquist bin zeroed
    multipliers: Vec<Complex64>,
}

impl fmt::Debug for DerivOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DerivOp")
            .field("grid", &self.grid)
            .field("scheme", &self.scheme)
            .finish()
    }
}

impl DerivOp {
    pub fn new(grid: GridSpec, scheme: Scheme) -> Result<Self> {
        let spectral = if scheme == Scheme::Spectral && !grid.is_uniform_mode() {
            if grid.n % 2 != 0 {
                return Err(GStrandError::SpectralOddGrid { n: grid.n });
            }
            let mut planner = FftPlanner::new();
            let n = grid.n;
            let scale = 2.0 * PI / grid.length;
            let multipliers = (0..n)
                .map(|m| {
                    let k = if m < n / 2 {
                        m as f64
                    } else if m == n / 2 {
                        0.0
                    } else {
                        m as f64 - n as f64
                    };
                    Complex64::new(0.0, scale * k / n as f64)
                })
                .collect();
            Some(SpectralPlan {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
                multipliers,
            })
        } else {
            None
        };
        Ok(DerivOp {
            grid,
            scheme,
            spectral,
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Derivative of a real scalar grid function.
    pub fn apply_scalar(&self, f: &[f64]) -> Vec<f64> {
        let n = f.len();
        debug_assert_eq!(n, self.grid.n);
        if n == 1 {
            return vec![0.0];
        }
        let ds = self.grid.ds();
        let at = |j: isize| f[j.rem_euclid(n as isize) as usize];
        match self.scheme {
            Scheme::Central2 => (0..n as isize)
                .map(|j| (at(j + 1) - at(j - 1)) / (2.0 * ds))
                .collect(),
            Scheme::Central4 => (0..n as isize)
                .map(|j| {
                    (-at(j + 2) + 8.0 * at(j + 1) - 8.0 * at(j - 1) + at(j - 2)) / (12.0 * ds)
                })
                .collect(),
            Scheme::Spectral => {
                let mut buf: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                self.spectral_in_place(&mut buf);
                buf.into_iter().map(|c| c.re).collect()
            }
        }
    }

    /// Derivative of a complex scalar grid function.
    pub fn apply_complex(&self, f: &[Complex64]) -> Vec<Complex64> {
        let n = f.len();
        if n == 1 {
            return vec![Complex64::new(0.0, 0.0)];
        }
        if self.scheme == Scheme::Spectral {
            let mut buf = f.to_vec();
            self.spectral_in_place(&mut buf);
            return buf;
        }
        let re: Vec<f64> = f.iter().map(|c| c.re).collect();
        let im: Vec<f64> = f.iter().map(|c| c.im).collect();
        let dre = self.apply_scalar(&re);
        let dim = self.apply_scalar(&im);
        dre.into_iter()
            .zip(dim)
            .map(|(a, b)| Complex64::new(a, b))
            .collect()
    }

    fn spectral_in_place(&self, buf: &mut [Complex64]) {
        let plan = self.spectral.as_ref().expect("spectral plan");
        plan.forward.process(buf);
        for (c, m) in buf.iter_mut().zip(&plan.multipliers) {
            *c *= m;
        }
        plan.inverse.process(buf);
    }

    /// Componentwise derivative of a `Vec3` field.
    pub fn apply(&self, f: &FieldVec3) -> FieldVec3 {
        let n = f.len();
        if n == 1 {
            return FieldVec3::zeros(f.grid);
        }
        let mut out = vec![Vec3::ZERO; n];
        if self.scheme == Scheme::Spectral {
            // two real components share one complex transform
            let mut buf: Vec<Complex64> = f.values.iter().map(|v| Complex64::new(v.x, v.y)).collect();
            self.spectral_in_place(&mut buf);
            let dz = self.apply_scalar(&f.component(2));
            for ((o, c), z) in out.iter_mut().zip(buf).zip(dz) {
                *o = Vec3::new(c.re, c.im, z);
            }
        } else {
            for c in 0..3 {
                for (o, d) in out.iter_mut().zip(self.apply_scalar(&f.component(c))) {
                    o[c] = d;
                }
            }
        }
        FieldVec3 {
            grid: f.grid,
            values: out,
        }
    }
}

/// Periodic derivative of `f` under `scheme`.
pub fn deriv_s(f: &FieldVec3, scheme: Scheme) -> Result<FieldVec3> {
    Ok(DerivOp::new(f.grid, scheme)?.apply(f))
}

/// Rectangle-rule integral of a `Vec3` field.
pub fn integrate_s(f: &FieldVec3) -> Vec3 {
    let ds = f.grid.ds();
    let sum = f.values.iter().fold(Vec3::ZERO, |acc, &v| acc + v);
    ds * sum
}

/// Rectangle-rule integral of a scalar grid function.
pub fn integrate_scalar(grid: GridSpec, f: &[f64]) -> f64 {
    grid.ds() * f.iter().sum::<f64>()
}

/// Synthesizes `offset + Σ amplitude·cos(2πks/L + phase)` per component.
///
/// On the one-point grid the modes are evaluated at `s = 0`.
pub fn synth_field(grid: GridSpec, modes: &[FourierModeSpec], offset: Vec3) -> Result<FieldVec3> {
    for m in modes {
        if m.component > 2 {
            return Err(GStrandError::InvalidParams(format!(
                "mode component must be 0, 1 or 2, got {}",
                m.component
            )));
        }
        if !grid.is_uniform_mode() && m.wavenumber.abs() > grid.max_wavenumber() {
            return Err(GStrandError::UnresolvableWavenumber {
                k: m.wavenumber,
                n: grid.n,
                max: grid.max_wavenumber(),
            });
        }
    }
    let mut field = FieldVec3::constant(grid, offset);
    for m in modes {
        let k = 2.0 * PI * m.wavenumber as f64 / grid.length;
        for (j, v) in field.values.iter_mut().enumerate() {
            v[m.component] += m.amplitude * (k * grid.s(j) + m.phase).cos();
        }
    }
    Ok(field)
}
