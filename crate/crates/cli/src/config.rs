//! Run configuration: parsing, defaults, validation and initial data.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use gstrand_core::discretization::synth_field;
use gstrand_core::dynamics::{
    preserves_se2, steps_for, Se3Params, SmkParams, So3Params, So4Ex1Params, So4Ex2Params,
};
use gstrand_core::{Closure, FieldVec3, FourierModeSpec, GridSpec, Group, Scheme, StrandState, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("{path}: {reason}")]
    Invalid { path: String, reason: String },
}

fn invalid(path: impl Into<String>, reason: impl fmt::Display) -> ConfigError {
    ConfigError::Invalid { path: path.into(), reason: reason.to_string() }
}

/// The group a run lives on. `se2` is an se3 run restricted to planar data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKind {
    So3,
    So4Ex1,
    So4Ex2,
    Se3,
    Se2,
    Smk,
}

impl GroupKind {
    pub fn group(self) -> Group {
        match self {
            GroupKind::So3 => Group::So3,
            GroupKind::So4Ex1 | GroupKind::So4Ex2 => Group::So4,
            GroupKind::Se3 | GroupKind::Se2 | GroupKind::Smk => Group::Se3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GroupKind::So3 => "so3",
            GroupKind::So4Ex1 => "so4_ex1",
            GroupKind::So4Ex2 => "so4_ex2",
            GroupKind::Se3 => "se3",
            GroupKind::Se2 => "se2",
            GroupKind::Smk => "smk",
        }
    }

    /// Closure blocks accepted for this group.
    pub fn closure_keys(self) -> &'static [&'static str] {
        match self {
            GroupKind::So3 => &["so3"],
            GroupKind::So4Ex1 => &["so4_ex1"],
            GroupKind::So4Ex2 => &["so4_ex2"],
            GroupKind::Se3 => &["se3"],
            GroupKind::Se2 => &["se3", "smk"],
            GroupKind::Smk => &["smk"],
        }
    }

    pub fn has_filament(self) -> bool {
        matches!(self, GroupKind::Se3 | GroupKind::Se2 | GroupKind::Smk)
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Closure parameters keyed by family, e.g. `{"so3": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosureBlock {
    So3(So3Params),
    So4Ex1(So4Ex1Params),
    So4Ex2(So4Ex2Params),
    Se3(Se3Params),
    Smk(SmkParams),
}

impl ClosureBlock {
    pub fn key(&self) -> &'static str {
        self.to_closure().name()
    }

    pub fn to_closure(&self) -> Closure {
        match self {
            ClosureBlock::So3(p) => Closure::So3(p.clone()),
            ClosureBlock::So4Ex1(p) => Closure::So4Ex1(p.clone()),
            ClosureBlock::So4Ex2(p) => Closure::So4Ex2(p.clone()),
            ClosureBlock::Se3(p) => Closure::Se3(p.clone()),
            ClosureBlock::Smk(p) => Closure::Smk(p.clone()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub n: usize,
    #[serde(default = "default_length")]
    pub length: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldInit {
    #[serde(default)]
    pub offset: Vec3,
    #[serde(default)]
    pub modes: Vec<FourierModeSpec>,
}

/// Seeded random modes `1..=max_wavenumber` added to every field, with
/// amplitudes uniform in `±amplitude/k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomInit {
    pub amplitude: f64,
    pub max_wavenumber: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialBlock {
    #[serde(default)]
    pub fields: BTreeMap<String, FieldInit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomInit>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    #[serde(default = "default_threshold")]
    pub constraints: f64,
    #[serde(default = "default_threshold")]
    pub zcr: f64,
    #[serde(default = "default_series_pointwise")]
    pub series_pointwise: f64,
    #[serde(default = "default_series_integral")]
    pub series_integral: f64,
    /// Allowed SE(2) split defect for `se2` runs.
    #[serde(default = "default_se2_split")]
    pub se2_split: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            constraints: default_threshold(),
            zcr: default_threshold(),
            series_pointwise: default_series_pointwise(),
            series_integral: default_series_integral(),
            se2_split: default_se2_split(),
        }
    }
}

fn default_length() -> f64 {
    1.0
}
fn default_threshold() -> f64 {
    1e-10
}
fn default_series_pointwise() -> f64 {
    1e-10
}
fn default_series_integral() -> f64 {
    1e-9
}
fn default_se2_split() -> f64 {
    1e-12
}
fn default_cadence() -> usize {
    10
}
fn default_snapshot_cadence() -> usize {
    100
}
fn default_verify_steps() -> usize {
    100
}
fn default_lambdas() -> Vec<f64> {
    vec![0.5, 1.0, 2.0, 5.0]
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("gstrand-out")
}

/// A fully resolved run. Serializing it gives `config.resolved`, which
/// parses back to the same value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub group: GroupKind,
    pub grid: GridBlock,
    #[serde(default)]
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    /// Steps between diagnostics records.
    #[serde(default = "default_cadence")]
    pub output_cadence: usize,
    /// Steps between field snapshots; 0 keeps only the initial and final ones.
    #[serde(default = "default_snapshot_cadence")]
    pub snapshot_cadence: usize,
    pub closure: ClosureBlock,
    #[serde(default)]
    pub initial: InitialBlock,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub thresholds: Thresholds,
    /// Length in steps of the short run sampled by `verify`.
    #[serde(default = "default_verify_steps")]
    pub verify_steps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
    parse_config_str(&text)
}

/// Parse and validate a config document.
pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = match serde_path_to_error::deserialize(&mut de) {
        Ok(c) => c,
        Err(e) => {
            let path = e.path().to_string();
            let inner = e.into_inner();
            return Err(match inner.classify() {
                serde_json::error::Category::Data if path != "." => invalid(
                    path,
                    format!("{} (line {}, column {})", strip_position(&inner.to_string()), inner.line(), inner.column()),
                ),
                _ => ConfigError::Parse {
                    line: inner.line(),
                    column: inner.column(),
                    message: strip_position(&inner.to_string()),
                },
            });
        }
    };
    de.end().map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

// serde_json appends " at line L column C"; we report position separately.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

// Components an se2 field may populate: rotational parts along ẑ,
// translational parts in the plane.
fn se2_components(field: &str) -> &'static [usize] {
    match field {
        "Pi" | "Omega" => &[2],
        _ => &[0, 1],
    }
}

impl RunConfig {
    pub fn grid_spec(&self) -> GridSpec {
        GridSpec { n: self.grid.n, length: self.grid.length }
    }

    pub fn closure(&self) -> Closure {
        self.closure.to_closure()
    }

    pub fn steps(&self) -> usize {
        steps_for(self.t_end, self.dt).unwrap_or(0)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema != SCHEMA_VERSION {
            return Err(invalid("schema", format!("unsupported schema {}, expected {SCHEMA_VERSION}", self.schema)));
        }
        let grid = GridSpec::new(self.grid.n, self.grid.length).map_err(|e| {
            let path = if self.grid.length.is_finite() && self.grid.length > 0.0 { "grid.n" } else { "grid.length" };
            invalid(path, e)
        })?;
        if self.scheme == Scheme::Spectral && grid.n > 1 && grid.n % 2 != 0 {
            return Err(invalid("scheme", format!("spectral scheme needs an even grid.n, got {}", grid.n)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid("dt", format!("must be positive and finite, got {}", self.dt)));
        }
        if !grid.is_uniform_mode() && self.dt > 2.0 * grid.ds() {
            return Err(invalid("dt", format!("{} exceeds twice the grid spacing {}", self.dt, grid.ds())));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(invalid("t_end", format!("must be non-negative and finite, got {}", self.t_end)));
        }
        steps_for(self.t_end, self.dt).map_err(|e| invalid("t_end", e))?;
        if self.output_cadence == 0 {
            return Err(invalid("output_cadence", "must be at least 1"));
        }
        self.validate_closure()?;
        self.validate_initial(grid)?;
        if self.lambdas.is_empty() {
            return Err(invalid("lambdas", "need at least one value"));
        }
        if let Some(i) = self.lambdas.iter().position(|l| !l.is_finite()) {
            return Err(invalid(format!("lambdas[{i}]"), "must be finite"));
        }
        let t = &self.thresholds;
        for (name, v) in [
            ("constraints", t.constraints),
            ("zcr", t.zcr),
            ("series_pointwise", t.series_pointwise),
            ("series_integral", t.series_integral),
            ("se2_split", t.se2_split),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("thresholds.{name}"), format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }

    fn validate_closure(&self) -> Result<(), ConfigError> {
        let key = self.closure.key();
        let path = format!("closure.{key}");
        let allowed = self.group.closure_keys();
        if !allowed.contains(&key) {
            return Err(invalid(
                path,
                format!("block does not match group {}; expected closure.{}", self.group, allowed.join(" or closure.")),
            ));
        }
        let closure = self.closure();
        closure.validate().map_err(|e| invalid(path.clone(), e))?;
        if self.group == GroupKind::Se2 && !preserves_se2(&closure) {
            let reason = match closure {
                Closure::Se3(_) => "se2 runs need mu = nu = 0, a2 along z and a1 in the xy-plane",
                _ => "se2 runs need J and psi to decouple planar and normal components",
            };
            return Err(invalid(path, reason));
        }
        Ok(())
    }

    fn validate_initial(&self, grid: GridSpec) -> Result<(), ConfigError> {
        let names = self.group.group().field_names();
        let se2 = self.group == GroupKind::Se2;
        for (name, init) in &self.initial.fields {
            let base = format!("initial.fields.{name}");
            if !names.contains(&name.as_str()) {
                return Err(invalid(base, format!("unknown field for group {}; expected one of {}", self.group, names.join(", "))));
            }
            if !init.offset.is_finite() {
                return Err(invalid(format!("{base}.offset"), "must be finite"));
            }
            if se2 {
                let ok = se2_components(name);
                if (0..3).any(|c| !ok.contains(&c) && init.offset[c] != 0.0) {
                    return Err(invalid(format!("{base}.offset"), format!("se2 data may only set components {ok:?} of {name}")));
                }
            }
            for (i, m) in init.modes.iter().enumerate() {
                let mpath = format!("{base}.modes[{i}]");
                if m.component > 2 {
                    return Err(invalid(format!("{mpath}.component"), format!("must be 0, 1 or 2, got {}", m.component)));
                }
                if se2 && !se2_components(name).contains(&m.component) {
                    return Err(invalid(
                        format!("{mpath}.component"),
                        format!("se2 data may only set components {:?} of {name}", se2_components(name)),
                    ));
                }
                if !grid.is_uniform_mode() && m.wavenumber.abs() > grid.max_wavenumber() {
                    return Err(invalid(
                        format!("{mpath}.wavenumber"),
                        format!("|k| = {} is not resolvable on {} points (max {})", m.wavenumber.abs(), grid.n, grid.max_wavenumber()),
                    ));
                }
                if !(m.amplitude.is_finite() && m.phase.is_finite()) {
                    return Err(invalid(mpath, "amplitude and phase must be finite"));
                }
            }
        }
        if let Some(r) = self.initial.random {
            if !(r.amplitude.is_finite() && r.amplitude >= 0.0) {
                return Err(invalid("initial.random.amplitude", "must be non-negative and finite"));
            }
            let max = if grid.is_uniform_mode() { i64::MAX } else { grid.max_wavenumber() };
            if r.max_wavenumber < 0 || r.max_wavenumber > max {
                return Err(invalid("initial.random.max_wavenumber", format!("must lie in 0..={max}")));
            }
        }
        Ok(())
    }

    /// Modes per field, explicit ones first, then the seeded random ones.
    fn field_modes(&self) -> Vec<(Vec3, Vec<FourierModeSpec>)> {
        let names = self.group.group().field_names();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        names
            .iter()
            .map(|&name| {
                let init = self.initial.fields.get(name).cloned().unwrap_or_default();
                let mut modes = init.modes;
                if let Some(r) = self.initial.random {
                    for component in 0..3 {
                        for k in 1..=r.max_wavenumber {
                            let amplitude = r.amplitude * rng.gen_range(-1.0..1.0) / k as f64;
                            let phase = rng.gen_range(0.0..2.0 * PI);
                            let allowed = self.group != GroupKind::Se2 || se2_components(name).contains(&component);
                            if allowed {
                                modes.push(FourierModeSpec { component, wavenumber: k, amplitude, phase });
                            }
                        }
                    }
                }
                (init.offset, modes)
            })
            .collect()
    }

    pub fn initial_state(&self) -> Result<StrandState, ConfigError> {
        let grid = self.grid_spec();
        let names = self.group.group().field_names();
        let fields = self
            .field_modes()
            .into_iter()
            .zip(names)
            .map(|((offset, modes), name)| {
                synth_field(grid, &modes, offset).map_err(|e| invalid(format!("initial.fields.{name}"), e))
            })
            .collect::<Result<Vec<FieldVec3>, _>>()?;
        StrandState::from_fields(self.group.group(), fields).map_err(|e| invalid("initial", e))
    }
}
