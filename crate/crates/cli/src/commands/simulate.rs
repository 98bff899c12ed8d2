//! Time stepping with a diagnostics stream, field snapshots and filament export.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use gstrand_core::dynamics::{check_se2_split, reconstruct_filament};
use gstrand_core::integrability::{constraint_residuals, zcr_residual_with};
use gstrand_core::{ConstraintResiduals, GStrandError, Integrator, Mat4, Monitor, StrandState};
use log::{debug, info, warn};
use serde::Serialize;

use crate::config::{GroupKind, RunConfig};
use crate::error::CliError;
use crate::output::{create_dir, io_err, to_json_line, to_json_pretty, write_filament_csv, write_snapshot, write_text, SnapshotMeta};

pub const DIAGNOSTICS_FILE: &str = "diagnostics.ndjson";
pub const SUMMARY_FILE: &str = "summary.json";
pub const SNAPSHOT_DIR: &str = "snapshots";

/// Map key for a value of λ.
pub fn lambda_key(lambda: f64) -> String {
    format!("{lambda}")
}

#[derive(Serialize)]
struct DiagRecord<'a> {
    step: usize,
    t: f64,
    #[serde(flatten)]
    values: &'a BTreeMap<String, f64>,
    zcr: BTreeMap<String, f64>,
    constraints: ConstraintResiduals,
    drift: &'a BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    se2_split: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SimulateSummary {
    pub group: String,
    pub closure: String,
    pub steps: usize,
    pub t_end: f64,
    pub records: usize,
    pub snapshots: usize,
    pub final_values: BTreeMap<String, f64>,
    /// Largest relative drift of each functional over the recorded times.
    pub max_drift: BTreeMap<String, f64>,
    pub max_constraints: ConstraintResiduals,
    pub max_zcr: BTreeMap<String, f64>,
    /// Max-norm difference between the final and the initial state.
    pub final_minus_initial: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_se2_split: Option<f64>,
}

fn bump_max(map: &mut BTreeMap<String, f64>, key: &str, v: f64) {
    let e = map.entry(key.to_string()).or_insert(0.0);
    *e = e.max(v);
}

struct Recorder<'a> {
    cfg: &'a RunConfig,
    integ: &'a Integrator,
    monitor: Monitor,
    out: BufWriter<File>,
    out_path: PathBuf,
    snap_dir: PathBuf,
    summary: SimulateSummary,
}

impl Recorder<'_> {
    fn record(&mut self, step: usize, state: &StrandState) -> Result<(), CliError> {
        let t = step as f64 * self.cfg.dt;
        let closure = self.integ.closure();
        let report = self.monitor.observe(t, state)?;
        let diag = closure.diagnostics(state)?;
        let constraints = constraint_residuals(state, &diag, closure)?;
        let lax = closure.lax_constants();
        let mut zcr = BTreeMap::new();
        for &l in &self.cfg.lambdas {
            zcr.insert(lambda_key(l), zcr_residual_with(state, &diag, &lax, self.integ.deriv(), l)?);
        }
        let se2_split = match self.cfg.group {
            GroupKind::Se2 => Some(check_se2_split(state)?),
            _ => None,
        };
        let rec = DiagRecord {
            step,
            t,
            values: &report.values,
            zcr,
            constraints,
            drift: &report.relative_drift,
            se2_split,
        };
        writeln!(self.out, "{}", to_json_line(&rec)).map_err(io_err(&self.out_path))?;

        let s = &mut self.summary;
        s.records += 1;
        s.final_values = report.values.clone();
        for (k, &v) in &report.relative_drift {
            bump_max(&mut s.max_drift, k, v);
        }
        for (k, &v) in &rec.zcr {
            bump_max(&mut s.max_zcr, k, v);
        }
        let m = &mut s.max_constraints;
        m.r4 = m.r4.max(constraints.r4);
        m.r3 = m.r3.max(constraints.r3);
        m.r2 = m.r2.max(constraints.r2);
        if let Some(split) = se2_split {
            s.max_se2_split = Some(s.max_se2_split.unwrap_or(0.0).max(split));
            if split > self.cfg.thresholds.se2_split {
                self.flush()?;
                return Err(CliError::Verification(format!(
                    "se2 split defect {split:e} exceeds {:e} at step {step}",
                    self.cfg.thresholds.se2_split
                )));
            }
        }
        debug!("step {step}: {:?}", report.values);
        Ok(())
    }

    fn snapshot(&mut self, stem: &str, step: usize, state: &StrandState) -> Result<PathBuf, CliError> {
        let cfg = self.cfg;
        let meta = SnapshotMeta {
            csv: String::new(),
            step,
            t: step as f64 * cfg.dt,
            group: cfg.group.to_string(),
            closure: cfg.closure.key().to_string(),
            grid: cfg.grid_spec(),
            scheme: cfg.scheme,
            fields: state.group().field_names().iter().map(|s| s.to_string()).collect(),
        };
        let path = write_snapshot(&self.snap_dir, stem, state, meta)?;
        if cfg.group.has_filament() && !state.grid().is_uniform_mode() {
            match reconstruct_filament(state, Mat4::identity()) {
                Ok(filament) => write_filament_csv(&self.snap_dir.join(format!("filament_{stem}.csv")), &filament)?,
                Err(e) => warn!("no filament for snapshot {stem}: {e}"),
            }
        }
        self.summary.snapshots += 1;
        Ok(path)
    }

    fn flush(&mut self) -> Result<(), CliError> {
        self.out.flush().map_err(io_err(&self.out_path))
    }
}

/// Write `config.resolved` into the output directory.
pub fn write_resolved(cfg: &RunConfig) -> Result<(), CliError> {
    create_dir(&cfg.output_dir)?;
    write_text(&cfg.output_dir.join("config.resolved"), &to_json_pretty(cfg))
}

pub fn run_simulate(cfg: &RunConfig) -> Result<SimulateSummary, CliError> {
    write_resolved(cfg)?;
    let dir: &Path = &cfg.output_dir;
    let snap_dir = dir.join(SNAPSHOT_DIR);
    create_dir(&snap_dir)?;

    let closure = cfg.closure();
    let integ = Integrator::new(closure.clone(), cfg.grid_spec(), cfg.scheme, cfg.dt)?;
    let initial = cfg.initial_state()?;
    let steps = cfg.steps();

    let out_path = dir.join(DIAGNOSTICS_FILE);
    let file = File::create(&out_path).map_err(io_err(&out_path))?;
    let mut rec = Recorder {
        cfg,
        integ: &integ,
        monitor: Monitor::new(closure.clone()),
        out: BufWriter::new(file),
        out_path,
        snap_dir,
        summary: SimulateSummary {
            group: cfg.group.to_string(),
            closure: closure.name().to_string(),
            steps,
            t_end: cfg.t_end,
            ..Default::default()
        },
    };

    info!("{} run: {steps} steps of dt = {} on n = {}", cfg.group, cfg.dt, cfg.grid.n);
    rec.record(0, &initial)?;
    rec.snapshot(&format!("step_{:08}", 0), 0, &initial)?;

    let mut state = initial.clone();
    for k in 1..=steps {
        state = match integ.step(&state, k) {
            Ok(next) => next,
            Err(GStrandError::NonFinite { step }) => {
                rec.flush()?;
                let saved = rec.snapshot("last_good", step - 1, &state)?;
                return Err(CliError::BlowUp { step, t: step as f64 * cfg.dt, saved });
            }
            Err(e) => return Err(e.into()),
        };
        if k % cfg.output_cadence == 0 || k == steps {
            rec.record(k, &state)?;
        }
        if cfg.snapshot_cadence > 0 && k % cfg.snapshot_cadence == 0 && k != steps {
            rec.snapshot(&format!("step_{k:08}"), k, &state)?;
        }
    }
    // with t_end = 0 the initial snapshot is already the final state
    if steps > 0 {
        rec.snapshot("final", steps, &state)?;
    }
    rec.flush()?;

    rec.summary.final_minus_initial = state.max_diff(&initial);
    let summary = rec.summary;
    write_text(&dir.join(SUMMARY_FILE), &to_json_pretty(&summary))?;
    Ok(summary)
}
