//! Integrability verdict: constraint rows and zero-curvature residuals on
//! snapshots of a short run.

use std::collections::BTreeMap;

use gstrand_core::integrability::{constraint_residuals, zcr_residual_with};
use gstrand_core::{Closure, ConstraintResiduals, DerivOp, GStrandError, Integrator, StrandState};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::commands::simulate::{lambda_key, write_resolved, SNAPSHOT_DIR};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{create_dir, to_json_pretty, write_snapshot, write_text, SnapshotMeta};

pub const REPORT_FILE: &str = "verify_report.json";
pub const THREADS_VAR: &str = "GSTRAND_THREADS";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub step: usize,
    pub t: f64,
    pub constraints: ConstraintResiduals,
    pub zcr: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    /// `r4`, `r3` or `r2` for a constraint row, `zcr` otherwise.
    pub check: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub step: usize,
    pub t: f64,
    pub value: f64,
    pub threshold: f64,
}

impl Failure {
    pub fn describe(&self) -> String {
        let what = match (self.check.as_str(), self.lambda) {
            ("r4", _) => "lambda^4 constraint row (r4)".to_string(),
            ("r3", _) => "lambda^3 constraint row (r3)".to_string(),
            ("r2", _) => "lambda^2 constraint row (r2)".to_string(),
            (_, Some(l)) => format!("zero-curvature residual at lambda = {l}"),
            (c, None) => c.to_string(),
        };
        format!("{what} = {:e} exceeds {:e} at step {} (t = {})", self.value, self.threshold, self.step, self.t)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub group: String,
    pub closure: String,
    pub integrable_family: bool,
    pub lambdas: Vec<f64>,
    pub constraint_threshold: f64,
    pub zcr_threshold: f64,
    pub samples: Vec<Sample>,
    pub max_constraints: ConstraintResiduals,
    pub max_zcr: BTreeMap<String, f64>,
    pub failures: Vec<Failure>,
    pub pass: bool,
}

/// Thread count from `GSTRAND_THREADS`: `Some(0)` means sequential, `None`
/// leaves the choice to rayon.
pub fn thread_setting() -> Option<usize> {
    let raw = std::env::var(THREADS_VAR).ok()?;
    match raw.trim().parse() {
        Ok(n) => Some(n),
        Err(_) => {
            warn!("ignoring {THREADS_VAR}={raw:?}: not a non-negative integer");
            None
        }
    }
}

fn zcr_all(state: &StrandState, closure: &Closure, d: &DerivOp, lambdas: &[f64], parallel: bool) -> Result<Vec<f64>, GStrandError> {
    let diag = closure.diagnostics(state)?;
    let lax = closure.lax_constants();
    let one = |&l: &f64| zcr_residual_with(state, &diag, &lax, d, l);
    if parallel {
        lambdas.par_iter().map(one).collect()
    } else {
        lambdas.iter().map(one).collect()
    }
}

pub fn run_verify(cfg: &RunConfig) -> Result<VerifyReport, CliError> {
    write_resolved(cfg)?;
    let closure = cfg.closure();
    let integ = Integrator::new(closure.clone(), cfg.grid_spec(), cfg.scheme, cfg.dt)?;
    let threads = thread_setting();
    let pool = match threads {
        Some(n) if n > 0 => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Verification(format!("cannot start {n} threads: {e}")))?,
        ),
        _ => None,
    };
    let parallel = threads != Some(0);

    let evaluate = |step: usize, state: &StrandState| -> Result<Sample, CliError> {
        let diag = closure.diagnostics(state)?;
        let constraints = constraint_residuals(state, &diag, &closure)?;
        let run = || zcr_all(state, &closure, integ.deriv(), &cfg.lambdas, parallel);
        let values = match &pool {
            Some(p) => p.install(run)?,
            None => run()?,
        };
        let zcr = cfg.lambdas.iter().zip(values).map(|(&l, v)| (lambda_key(l), v)).collect();
        Ok(Sample { step, t: step as f64 * cfg.dt, constraints, zcr })
    };

    let mut state = cfg.initial_state()?;
    let mut samples = vec![evaluate(0, &state)?];
    for k in 1..=cfg.verify_steps {
        state = match integ.step(&state, k) {
            Ok(next) => next,
            Err(GStrandError::NonFinite { step }) => {
                let dir = cfg.output_dir.join(SNAPSHOT_DIR);
                create_dir(&dir)?;
                let meta = SnapshotMeta {
                    csv: String::new(),
                    step: step - 1,
                    t: (step - 1) as f64 * cfg.dt,
                    group: cfg.group.to_string(),
                    closure: closure.name().to_string(),
                    grid: cfg.grid_spec(),
                    scheme: cfg.scheme,
                    fields: state.group().field_names().iter().map(|s| s.to_string()).collect(),
                };
                let saved = write_snapshot(&dir, "last_good", &state, meta)?;
                return Err(CliError::BlowUp { step, t: step as f64 * cfg.dt, saved });
            }
            Err(e) => return Err(e.into()),
        };
        if k % cfg.output_cadence == 0 {
            samples.push(evaluate(k, &state)?);
        }
    }

    let th = &cfg.thresholds;
    let mut failures = vec![];
    let mut max_constraints = ConstraintResiduals::default();
    let mut max_zcr: BTreeMap<String, f64> = BTreeMap::new();
    for s in &samples {
        let c = s.constraints;
        max_constraints.r4 = max_constraints.r4.max(c.r4);
        max_constraints.r3 = max_constraints.r3.max(c.r3);
        max_constraints.r2 = max_constraints.r2.max(c.r2);
        for (row, v) in [("r4", c.r4), ("r3", c.r3), ("r2", c.r2)] {
            if !(v <= th.constraints) {
                failures.push(Failure { check: row.into(), lambda: None, step: s.step, t: s.t, value: v, threshold: th.constraints });
            }
        }
        for &l in &cfg.lambdas {
            let v = s.zcr[&lambda_key(l)];
            let m = max_zcr.entry(lambda_key(l)).or_insert(0.0);
            *m = m.max(v);
            if !(v <= th.zcr) {
                failures.push(Failure { check: "zcr".into(), lambda: Some(l), step: s.step, t: s.t, value: v, threshold: th.zcr });
            }
        }
    }

    let report = VerifyReport {
        group: cfg.group.to_string(),
        closure: closure.name().to_string(),
        integrable_family: closure.is_integrable(),
        lambdas: cfg.lambdas.clone(),
        constraint_threshold: th.constraints,
        zcr_threshold: th.zcr,
        samples,
        max_constraints,
        max_zcr,
        pass: failures.is_empty(),
        failures,
    };
    write_text(&cfg.output_dir.join(REPORT_FILE), &to_json_pretty(&report))?;
    info!("verify: {} samples, {} failures", report.samples.len(), report.failures.len());
    Ok(report)
}
