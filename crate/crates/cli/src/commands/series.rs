//! Riccati densities of an SO(3) snapshot against their closed forms.

use std::collections::BTreeMap;
use std::path::Path;

use gstrand_core::conservation::eval_h_so3;
use gstrand_core::discretization::integrate_scalar;
use gstrand_core::integrability::riccati_densities;
use gstrand_core::{DerivOp, Group, StrandState};
use num_complex::Complex64;
use serde::Serialize;

use crate::commands::simulate::write_resolved;
use crate::config::{ConfigError, GroupKind, RunConfig};
use crate::error::CliError;
use crate::output::{read_snapshot_csv, to_json_pretty, write_text};

pub const REPORT_FILE: &str = "series_report.json";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegralCheck {
    pub integral_re: f64,
    pub integral_im: f64,
    /// The matching conserved functional divided by `|A|`.
    pub expected: f64,
    pub abs_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesReport {
    pub snapshot: String,
    pub a_norm: f64,
    pub rotated: bool,
    /// Largest `|ρ₋₁|` on the grid; zero when the momentum is normal to `A`.
    pub rho_m1_max_abs: f64,
    pub rho_m1_pointwise_err: f64,
    pub rho_0_pointwise_err: f64,
    pub integrals: BTreeMap<String, IntegralCheck>,
    /// Max-norm of the λ⁷, λ⁶, λ⁵ coefficients left after the solve.
    pub remainder: [f64; 3],
    pub pointwise_threshold: f64,
    pub integral_threshold: f64,
    pub failures: Vec<String>,
    pub pass: bool,
}

fn integral(grid: gstrand_core::GridSpec, rho: &[Complex64]) -> (f64, f64) {
    let re: Vec<f64> = rho.iter().map(|z| z.re).collect();
    let im: Vec<f64> = rho.iter().map(|z| z.im).collect();
    (integrate_scalar(grid, &re), integrate_scalar(grid, &im))
}

pub fn run_series(cfg: &RunConfig, snapshot: &Path) -> Result<SeriesReport, CliError> {
    let gstrand_core::Closure::So3(p) = cfg.closure() else {
        return Err(ConfigError::Invalid {
            path: "group".into(),
            reason: format!("series needs group so3, got {}", cfg.group),
        }
        .into());
    };
    debug_assert_eq!(cfg.group, GroupKind::So3);
    write_resolved(cfg)?;
    let grid = cfg.grid_spec();
    let state = read_snapshot_csv(snapshot, grid, Group::So3)?;
    let d = DerivOp::new(grid, cfg.scheme)?;
    let r = riccati_densities(&state, &p, &d)?;

    let StrandState::So3 { pi, gamma } = &state else { unreachable!("read as so3") };
    let a = p.a;
    let an = a.norm();
    let mut err_m1: f64 = 0.0;
    let mut err_0: f64 = 0.0;
    for j in 0..grid.n {
        let (pj, gj) = (pi.values[j], gamma.values[j]);
        let want_m1 = a.dot(pj) / an;
        let want_0 = (a.cross(pj).norm_sq() / (2.0 * an * an) + a.dot(gj)) / an;
        err_m1 = err_m1.max((r.rho_m1[j] - want_m1).norm());
        err_0 = err_0.max((r.rho_0[j] - want_0).norm());
    }

    let (h_m1, h_0, h_1) = eval_h_so3(&state, a)?;
    let mut integrals = BTreeMap::new();
    for (name, rho, h) in [("rho_m1", &r.rho_m1, h_m1), ("rho_0", &r.rho_0, h_0), ("rho_1", &r.rho_1, h_1)] {
        let (re, im) = integral(grid, rho);
        let expected = h / an;
        let abs_err = Complex64::new(re - expected, im).norm();
        integrals.insert(name.to_string(), IntegralCheck { integral_re: re, integral_im: im, expected, abs_err });
    }

    let th = &cfg.thresholds;
    let mut failures = vec![];
    for (name, v) in [("rho_m1 pointwise", err_m1), ("rho_0 pointwise", err_0)] {
        if !(v <= th.series_pointwise) {
            failures.push(format!("{name} error {v:e} exceeds {:e}", th.series_pointwise));
        }
    }
    for (name, c) in &integrals {
        if !(c.abs_err <= th.series_integral) {
            failures.push(format!("integral of {name} misses its functional by {:e} (threshold {:e})", c.abs_err, th.series_integral));
        }
    }

    let report = SeriesReport {
        snapshot: snapshot.display().to_string(),
        a_norm: an,
        rotated: r.rotated,
        rho_m1_max_abs: r.rho_m1.iter().fold(0.0, |m, z| m.max(z.norm())),
        rho_m1_pointwise_err: err_m1,
        rho_0_pointwise_err: err_0,
        integrals,
        remainder: r.remainder,
        pointwise_threshold: th.series_pointwise,
        integral_threshold: th.series_integral,
        pass: failures.is_empty(),
        failures,
    };
    write_text(&cfg.output_dir.join(REPORT_FILE), &to_json_pretty(&report))?;
    Ok(report)
}
