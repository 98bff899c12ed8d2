//! Output files: JSON with 17 significant digits, snapshot and filament CSVs.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use gstrand_core::dynamics::Filament;
use gstrand_core::{FieldVec3, GridSpec, Group, Scheme, StrandState, Vec3};
use serde::ser::Serialize;
use serde::{Deserialize, Serialize as SerializeDerive};
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};

use crate::error::CliError;

/// Every float in scientific notation with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Wraps a serde_json formatter so floats are written with [`fmt_f64`].
/// Non-finite values become `null`.
struct Sci<F>(F);

impl<F: Formatter> Formatter for Sci<F> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            w.write_all(fmt_f64(value).as_bytes())
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

fn to_json_with<T: Serialize, F: Formatter>(value: &T, f: F) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sci(f));
    value.serialize(&mut ser).expect("serializing plain data cannot fail");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

/// Single-line JSON, for NDJSON streams.
pub fn to_json_line<T: Serialize>(value: &T) -> String {
    to_json_with(value, CompactFormatter)
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = to_json_with(value, PrettyFormatter::new());
    s.push('\n');
    s
}

pub fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(io_err(path))
}

pub fn create_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(io_err(path))
}

/// Sidecar describing a snapshot CSV.
#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
pub struct SnapshotMeta {
    pub csv: String,
    pub step: usize,
    pub t: f64,
    pub group: String,
    pub closure: String,
    pub grid: GridSpec,
    pub scheme: Scheme,
    pub fields: Vec<String>,
}

fn snapshot_rows(w: &mut impl Write, state: &StrandState) -> io::Result<()> {
    let grid = state.grid();
    writeln!(w, "s,field,component,value")?;
    for (name, field) in state.group().field_names().iter().zip(state.fields()) {
        for (j, v) in field.values.iter().enumerate() {
            let s = fmt_f64(grid.s(j));
            for c in 0..3 {
                writeln!(w, "{s},{name},{c},{}", fmt_f64(v[c]))?;
            }
        }
    }
    w.flush()
}

pub fn write_snapshot_csv(path: &Path, state: &StrandState) -> Result<(), CliError> {
    let file = File::create(path).map_err(io_err(path))?;
    snapshot_rows(&mut BufWriter::new(file), state).map_err(io_err(path))
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`.
pub fn write_snapshot(dir: &Path, stem: &str, state: &StrandState, meta: SnapshotMeta) -> Result<PathBuf, CliError> {
    let csv = dir.join(format!("{stem}.csv"));
    write_snapshot_csv(&csv, state)?;
    let meta = SnapshotMeta { csv: format!("{stem}.csv"), ..meta };
    write_text(&dir.join(format!("{stem}.json")), &to_json_pretty(&meta))?;
    Ok(csv)
}

fn filament_rows(w: &mut impl Write, filament: &Filament) -> io::Result<()> {
    writeln!(w, "s,x,y,z")?;
    for (s, p) in filament.s.iter().zip(&filament.points) {
        writeln!(w, "{},{},{},{}", fmt_f64(*s), fmt_f64(p.x), fmt_f64(p.y), fmt_f64(p.z))?;
    }
    w.flush()
}

pub fn write_filament_csv(path: &Path, filament: &Filament) -> Result<(), CliError> {
    let file = File::create(path).map_err(io_err(path))?;
    filament_rows(&mut BufWriter::new(file), filament).map_err(io_err(path))
}

/// Read a snapshot CSV back onto `grid`. Every field of `group` must be
/// present with all `n` points and three components.
pub fn read_snapshot_csv(path: &Path, grid: GridSpec, group: Group) -> Result<StrandState, CliError> {
    let bad = |reason: String| CliError::Snapshot { path: path.to_path_buf(), reason };
    let file = File::open(path).map_err(io_err(path))?;
    let mut lines = BufReader::new(file).lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == "s,field,component,value" => {}
        Some(Err(e)) => return Err(io_err(path)(e)),
        _ => return Err(bad("missing header `s,field,component,value`".into())),
    }

    let mut rows: BTreeMap<String, Vec<(f64, usize, f64)>> = BTreeMap::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 2;
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 4 {
            return Err(bad(format!("line {lineno}: expected 4 columns, got {}", parts.len())));
        }
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| bad(format!("line {lineno}: {e}")));
        let s = num(parts[0])?;
        let c: usize = parts[2].trim().parse().map_err(|e| bad(format!("line {lineno}: component: {e}")))?;
        if c > 2 {
            return Err(bad(format!("line {lineno}: component {c} out of range")));
        }
        rows.entry(parts[1].trim().to_string()).or_default().push((s, c, num(parts[3])?));
    }

    let names = group.field_names();
    if let Some(extra) = rows.keys().find(|k| !names.contains(&k.as_str())) {
        return Err(bad(format!("field {extra} does not belong to a {group} state (fields {})", names.join(", "))));
    }
    let tol = 1e-9 * grid.length;
    let mut fields = Vec::with_capacity(names.len());
    for name in names {
        let entries = rows.get(*name).ok_or_else(|| bad(format!("missing field {name}")))?;
        if entries.len() != 3 * grid.n {
            return Err(bad(format!("field {name} has {} values, expected {}", entries.len(), 3 * grid.n)));
        }
        let mut values = vec![Vec3::ZERO; grid.n];
        let mut seen = vec![[false; 3]; grid.n];
        for &(s, c, v) in entries {
            let j = (s / grid.ds()).round();
            if j < 0.0 || j as usize >= grid.n || (grid.s(j as usize) - s).abs() > tol {
                return Err(bad(format!("field {name}: s = {s} is not a grid point")));
            }
            let j = j as usize;
            if seen[j][c] {
                return Err(bad(format!("field {name}: duplicate entry at s = {s}, component {c}")));
            }
            seen[j][c] = true;
            values[j][c] = v;
        }
        fields.push(FieldVec3::new(grid, values)?);
    }
    Ok(StrandState::from_fields(group, fields)?)
}
