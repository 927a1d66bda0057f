//! Panel ingestion and result serialization.
//!
//! A panel is described by one JSON manifest listing the units, their
//! treatment, and one outcome source per period. A source is either a
//! path to a data file (relative to the manifest) or an inline value:
//!
//! ```json
//! {
//!   "space": "frobenius",
//!   "periods": 2,
//!   "format": "matrix-csv",
//!   "units": [
//!     { "id": "a", "outcomes": [1.0, 3.0] },
//!     { "id": "b", "group": 1, "outcomes": ["b0.csv", [[20.0]]] }
//!   ]
//! }
//! ```
//!
//! Data file formats:
//!
//! | format            | space       | content                                        |
//! |-------------------|-------------|------------------------------------------------|
//! | `samples-csv`     | wasserstein | raw draws, any layout; converted to quantiles  |
//! | `quantile-csv`    | wasserstein | the quantile curve on the midpoint grid        |
//! | `composition-csv` | sphere      | one row of nonnegative shares summing to 1     |
//! | `matrix-csv`      | frobenius   | one row per matrix row                         |
//! | `matrix-json`     | frobenius   | a JSON array of rows                           |
//!
//! Floating-point values are written in shortest round-trip form, so every
//! saved value reads back bit-identically.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::did::GattEstimate;
use crate::error::Error;
use crate::geometry::{Geodesic, SpaceId, SpacePoint, TransportWarning};
use crate::matrix::{MatrixKind, SymmetricMatrixPoint};
use crate::panel::PanelDataset;
use crate::sphere::{embed_composition, unembed, UnitCompositionPoint};
use crate::staggered::{GroupTimeCell, GroupTimeGatt};
use crate::wasserstein::{quantile_from_samples, QuantileCurve, DEFAULT_GRID_SIZE};

/// Version of the result JSON layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum LoadError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("{file}:{line}:{column}: {message}")]
    Parse {
        file: String,
        line: u64,
        column: u64,
        message: String,
    },

    #[error("{path}: {message}")]
    Manifest { path: String, message: String },

    #[error("unit {unit}{}: {rule}", period.map(|t| format!(", period {t}")).unwrap_or_default())]
    InvariantViolation {
        unit: String,
        period: Option<usize>,
        rule: String,
    },

    #[error("unit {unit} has no outcome for period {period}")]
    MissingOutcome { unit: String, period: usize },
}

impl LoadError {
    pub fn to_json(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("load errors serialize");
        v["message"] = Value::String(self.to_string());
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataFormat {
    SamplesCsv,
    QuantileCsv,
    CompositionCsv,
    MatrixCsv,
    MatrixJson,
}

impl DataFormat {
    pub fn space(self) -> SpaceId {
        match self {
            DataFormat::SamplesCsv | DataFormat::QuantileCsv => SpaceId::Wasserstein,
            DataFormat::CompositionCsv => SpaceId::Sphere,
            DataFormat::MatrixCsv | DataFormat::MatrixJson => SpaceId::Frobenius,
        }
    }
}

/// Where one outcome cell comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CellSource {
    Path(String),
    Scalar(f64),
    Row(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Flag {
    Bool(bool),
    Int(u8),
}

impl Flag {
    fn value(self) -> Option<bool> {
        match self {
            Flag::Bool(b) => Some(b),
            Flag::Int(0) => Some(false),
            Flag::Int(1) => Some(true),
            Flag::Int(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitRecord {
    pub id: String,
    /// First treated period; absent or `null` for never-treated units.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<usize>,
    /// Per-period treatment indicators, as an alternative to `group`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub treatment: Option<Vec<Flag>>,
    pub outcomes: Vec<CellSource>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PanelManifest {
    pub space: SpaceId,
    /// Number of periods, `T + 1`.
    pub periods: usize,
    pub format: DataFormat,
    /// Quantile grid size used when converting raw samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_kind: Option<MatrixKind>,
    pub units: Vec<UnitRecord>,
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn io_error(path: &Path, err: std::io::Error) -> LoadError {
    LoadError::Io {
        path: display(path),
        message: err.to_string(),
    }
}

/// Reads and parses a manifest without loading any data file.
pub fn read_manifest(path: &Path) -> Result<PanelManifest, LoadError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| LoadError::Parse {
        file: display(path),
        line: e.line() as u64,
        column: e.column() as u64,
        message: e.to_string(),
    })
}

/// Numbers from a CSV file, one vector per record. `#` starts a comment.
fn read_csv_rows(path: &Path) -> Result<Vec<Vec<f64>>, LoadError> {
    let file = fs::File::open(path).map_err(|e| io_error(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file);
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            LoadError::Parse {
                file: display(path),
                line,
                column: 0,
                message: e.to_string(),
            }
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let mut row = Vec::with_capacity(record.len());
        for (j, field) in record.iter().enumerate() {
            if field.is_empty() && record.len() == 1 {
                continue;
            }
            let x: f64 = field.parse().map_err(|_| LoadError::Parse {
                file: display(path),
                line,
                column: j as u64 + 1,
                message: format!("`{field}` is not a number"),
            })?;
            row.push(x);
        }
        if !row.is_empty() {
            rows.push(row);
        }
    }
    Ok(rows)
}

fn read_json_matrix(path: &Path) -> Result<Vec<Vec<f64>>, LoadError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| LoadError::Parse {
        file: display(path),
        line: e.line() as u64,
        column: e.column() as u64,
        message: e.to_string(),
    })
}

struct CellContext<'a> {
    manifest: &'a PanelManifest,
    base: &'a Path,
    unit: &'a str,
    period: usize,
}

impl CellContext<'_> {
    fn violation(&self, rule: impl Into<String>) -> LoadError {
        LoadError::InvariantViolation {
            unit: self.unit.to_string(),
            period: Some(self.period),
            rule: rule.into(),
        }
    }

    fn single_row(&self, rows: Vec<Vec<f64>>, what: &str) -> Result<Vec<f64>, LoadError> {
        let mut rows = rows;
        match rows.len() {
            1 => Ok(rows.pop().unwrap()),
            k => Err(self.violation(format!("expected one row of {what}, found {k}"))),
        }
    }

    /// The cell's numbers as rows, whatever the source.
    fn rows(&self, source: &CellSource) -> Result<Vec<Vec<f64>>, LoadError> {
        match source {
            CellSource::Path(p) => {
                let path = self.base.join(p);
                match self.manifest.format {
                    DataFormat::MatrixJson => read_json_matrix(&path),
                    _ => read_csv_rows(&path),
                }
            }
            CellSource::Scalar(x) => Ok(vec![vec![*x]]),
            CellSource::Row(r) => Ok(vec![r.clone()]),
            CellSource::Matrix(m) => Ok(m.clone()),
        }
    }

    fn point(&self, source: &CellSource) -> Result<SpacePoint, LoadError> {
        let rows = self.rows(source)?;
        let invalid = |e: Error| self.violation(e.to_string());
        match self.manifest.format {
            DataFormat::SamplesCsv => {
                let samples: Vec<f64> = rows.into_iter().flatten().collect();
                let m = self.manifest.grid_size.unwrap_or(DEFAULT_GRID_SIZE);
                Ok(quantile_from_samples(&samples, m).map_err(invalid)?.into())
            }
            DataFormat::QuantileCsv => {
                let values: Vec<f64> = rows.into_iter().flatten().collect();
                if let Some(m) = self.manifest.grid_size {
                    if values.len() != m {
                        return Err(self.violation(format!("expected {m} quantiles, found {}", values.len())));
                    }
                }
                Ok(QuantileCurve::new(values).map_err(invalid)?.into())
            }
            DataFormat::CompositionCsv => {
                let shares = self.single_row(rows, "shares")?;
                Ok(embed_composition(&shares).map_err(invalid)?.into())
            }
            DataFormat::MatrixCsv | DataFormat::MatrixJson => {
                let kind = self.manifest.matrix_kind.unwrap_or(MatrixKind::Free);
                Ok(SymmetricMatrixPoint::from_rows(&rows, kind).map_err(invalid)?.into())
            }
        }
    }
}

fn treatment_row(manifest: &PanelManifest, unit: &UnitRecord) -> Result<Vec<bool>, LoadError> {
    let periods = manifest.periods;
    let violation = |period: Option<usize>, rule: String| LoadError::InvariantViolation {
        unit: unit.id.clone(),
        period,
        rule,
    };
    let from_group = unit.group.map(|g| (0..periods).map(|t| t >= g).collect::<Vec<_>>());
    if let Some(g) = unit.group {
        if g == 0 || g >= periods {
            return Err(violation(None, format!("first treated period {g} must lie in 1..{periods}")));
        }
    }
    let row = match &unit.treatment {
        None => from_group.unwrap_or_else(|| vec![false; periods]),
        Some(flags) => {
            if flags.len() != periods {
                return Err(violation(None, format!("treatment has {} entries for {periods} periods", flags.len())));
            }
            let row = flags
                .iter()
                .enumerate()
                .map(|(t, f)| f.value().ok_or_else(|| violation(Some(t), "treatment must be 0 or 1".into())))
                .collect::<Result<Vec<bool>, _>>()?;
            if let Some(expected) = &from_group {
                if &row != expected {
                    return Err(violation(None, "treatment column disagrees with group".into()));
                }
            }
            row
        }
    };
    if row.first() == Some(&true) {
        return Err(violation(Some(0), "no unit may be treated at period 0".into()));
    }
    if let Some(t) = (1..periods).find(|&t| row[t - 1] && !row[t]) {
        return Err(violation(Some(t), "treatment is irreversible".into()));
    }
    Ok(row)
}

/// Loads a panel from a parsed manifest; relative paths resolve against `base`.
pub fn load_manifest(manifest: &PanelManifest, base: &Path) -> Result<PanelDataset, LoadError> {
    let manifest_error = |message: String| LoadError::Manifest {
        path: display(base),
        message,
    };
    if manifest.format.space() != manifest.space {
        return Err(manifest_error(format!(
            "format {:?} does not hold {} outcomes",
            manifest.format, manifest.space
        )));
    }
    if manifest.units.is_empty() {
        return Err(manifest_error("manifest lists no units".into()));
    }
    if manifest.periods == 0 {
        return Err(manifest_error("a panel needs at least one period".into()));
    }
    for (i, unit) in manifest.units.iter().enumerate() {
        if manifest.units[..i].iter().any(|u| u.id == unit.id) {
            return Err(manifest_error(format!("duplicate unit id {}", unit.id)));
        }
        if unit.outcomes.len() < manifest.periods {
            return Err(LoadError::MissingOutcome {
                unit: unit.id.clone(),
                period: unit.outcomes.len(),
            });
        }
        if unit.outcomes.len() > manifest.periods {
            return Err(LoadError::InvariantViolation {
                unit: unit.id.clone(),
                period: None,
                rule: format!("{} outcomes listed for {} periods", unit.outcomes.len(), manifest.periods),
            });
        }
    }
    let treatment = manifest
        .units
        .iter()
        .map(|u| treatment_row(manifest, u))
        .collect::<Result<Vec<_>, _>>()?;

    let cells: Vec<(usize, usize)> = (0..manifest.units.len())
        .flat_map(|i| (0..manifest.periods).map(move |t| (i, t)))
        .collect();
    let points: Vec<Result<SpacePoint, LoadError>> = cells
        .par_iter()
        .map(|&(i, t)| {
            let unit = &manifest.units[i];
            CellContext {
                manifest,
                base,
                unit: &unit.id,
                period: t,
            }
            .point(&unit.outcomes[t])
        })
        .collect();
    let mut outcomes: Vec<Vec<SpacePoint>> = vec![Vec::with_capacity(manifest.periods); manifest.units.len()];
    for ((i, _), point) in cells.iter().zip(points) {
        outcomes[*i].push(point?);
    }

    // all cells must share a dimension
    let first = &outcomes[0][0];
    for (i, row) in outcomes.iter().enumerate() {
        for (t, y) in row.iter().enumerate() {
            if y.dimension() != first.dimension() {
                return Err(LoadError::InvariantViolation {
                    unit: manifest.units[i].id.clone(),
                    period: Some(t),
                    rule: format!("dimension {} differs from the panel's {}", y.dimension(), first.dimension()),
                });
            }
        }
    }

    let ids = manifest.units.iter().map(|u| u.id.clone()).collect();
    PanelDataset::new(ids, outcomes, treatment).map_err(|e| manifest_error(e.to_string()))
}

/// Loads the panel described by the manifest at `path`.
pub fn load_panel(path: &Path) -> Result<PanelDataset, LoadError> {
    let manifest = read_manifest(path)?;
    let base = path.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf);
    load_manifest(&manifest, &base)
}

fn csv_line(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

/// Writes `panel` as `dir/manifest.json` plus one data file per cell under
/// `dir/data/`. Distributions are saved as quantile curves, compositions
/// as shares, matrices as CSV. Returns the manifest path.
pub fn save_panel(panel: &PanelDataset, dir: &Path) -> Result<PathBuf, LoadError> {
    let data_dir = dir.join("data");
    fs::create_dir_all(&data_dir).map_err(|e| io_error(&data_dir, e))?;
    let format = match panel.space() {
        SpaceId::Wasserstein => DataFormat::QuantileCsv,
        SpaceId::Sphere => DataFormat::CompositionCsv,
        SpaceId::Frobenius => DataFormat::MatrixCsv,
    };
    let mut kind = None;
    let mut units = Vec::with_capacity(panel.n_units());
    for i in 0..panel.n_units() {
        let mut outcomes = Vec::with_capacity(panel.n_periods());
        for t in 0..panel.n_periods() {
            let body = match panel.outcome(i, t) {
                SpacePoint::Wasserstein(q) => csv_line(q.values()) + "\n",
                SpacePoint::Sphere(z) => csv_line(&unembed(z)) + "\n",
                SpacePoint::Frobenius(m) => {
                    kind.get_or_insert(m.kind());
                    m.rows().iter().map(|r| csv_line(r) + "\n").collect()
                }
            };
            let name = format!("data/u{i}_t{t}.csv");
            let path = dir.join(&name);
            fs::write(&path, body).map_err(|e| io_error(&path, e))?;
            outcomes.push(CellSource::Path(name));
        }
        units.push(UnitRecord {
            id: panel.unit_ids()[i].clone(),
            group: panel.first_treated(i),
            treatment: None,
            outcomes,
        });
    }
    let manifest = PanelManifest {
        space: panel.space(),
        periods: panel.n_periods(),
        format,
        grid_size: panel.outcome(0, 0).as_quantile_curve().map(QuantileCurve::grid_size),
        matrix_kind: kind,
        units,
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text).map_err(|e| io_error(&path, e))?;
    Ok(path)
}

/// JSON payload of one point. Distributions carry their quantile grid,
/// sphere points both their coordinates and the shares they encode,
/// matrices their rows and kind.
pub fn point_to_json(point: &SpacePoint) -> Value {
    match point {
        SpacePoint::Wasserstein(q) => json!({ "quantiles": q.values() }),
        SpacePoint::Sphere(z) => json!({ "coords": z.coords(), "shares": unembed(z) }),
        SpacePoint::Frobenius(m) => json!({ "matrix": m.rows(), "kind": m.kind() }),
    }
}

/// Inverse of [`point_to_json`].
pub fn point_from_json(space: SpaceId, value: &Value) -> Result<SpacePoint, Error> {
    let bad = |what: &str| Error::InvalidPoint {
        rule: format!("JSON payload lacks a valid `{what}` field"),
    };
    match space {
        SpaceId::Wasserstein => {
            let q: Vec<f64> = serde_json::from_value(value["quantiles"].clone()).map_err(|_| bad("quantiles"))?;
            Ok(QuantileCurve::new(q)?.into())
        }
        SpaceId::Sphere => {
            let c: Vec<f64> = serde_json::from_value(value["coords"].clone()).map_err(|_| bad("coords"))?;
            Ok(UnitCompositionPoint::on_sphere(c)?.into())
        }
        SpaceId::Frobenius => {
            let rows: Vec<Vec<f64>> = serde_json::from_value(value["matrix"].clone()).map_err(|_| bad("matrix"))?;
            let kind: MatrixKind = serde_json::from_value(value["kind"].clone()).map_err(|_| bad("kind"))?;
            Ok(SymmetricMatrixPoint::from_rows(&rows, kind)?.into())
        }
    }
}

fn geodesic_json(g: &Geodesic) -> Value {
    json!({ "start": point_to_json(g.start()), "end": point_to_json(g.end()) })
}

fn warnings_json(warnings: &[TransportWarning]) -> Value {
    serde_json::to_value(warnings).expect("warnings serialize")
}

/// Result document for a two-period or placebo estimate.
pub fn gatt_json(command: &str, space: SpaceId, estimate: &GattEstimate) -> Value {
    let m = &estimate.means;
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "space": space,
        "estimate": {
            "start": point_to_json(estimate.effect.start()),
            "end": point_to_json(estimate.effect.end()),
            "magnitude": estimate.magnitude,
            "means": {
                "control_pre": point_to_json(&m.control_pre),
                "control_post": point_to_json(&m.control_post),
                "treated_pre": point_to_json(&m.treated_pre),
                "treated_post": point_to_json(&m.treated_post),
            },
            "n_treated": estimate.n_treated,
            "n_control": estimate.n_control,
            "warnings": warnings_json(&estimate.warnings),
        }
    })
}

/// Result document for a set of group-time cells; failed cells carry
/// their error message instead of an estimate.
pub fn staggered_json(
    space: SpaceId,
    delta: usize,
    results: &[(GroupTimeCell, crate::error::Result<GroupTimeGatt>)],
) -> Value {
    let cells: Vec<Value> = results
        .iter()
        .map(|(cell, result)| {
            let mut v = json!({
                "g": cell.g,
                "t": cell.t,
                "delta": cell.delta,
                "comparison": cell.comparison,
                "estimator_form": cell.estimator_form,
            });
            match result {
                Ok(est) => {
                    v["effect"] = geodesic_json(&est.effect);
                    v["magnitude"] = json!(est.magnitude);
                    v["beta_path"] = Value::Array(est.beta_path.iter().map(point_to_json).collect());
                    v["warnings"] = warnings_json(&est.warnings);
                }
                Err(e) => v["error"] = Value::String(e.to_string()),
            }
            v
        })
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": "staggered",
        "space": space,
        "delta": delta,
        "cells": cells,
    })
}
