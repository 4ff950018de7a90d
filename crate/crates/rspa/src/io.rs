//! Matrix file formats, index files, l1 preprocessing and the sweep
//! configuration format.
//!
//! Two matrix formats are supported. `csv` is one matrix row per line with
//! comma-separated decimal literals, meant for small and human-edited data.
//! `rawbin` is a payload of little-endian 64-bit floats in column-major
//! order, with a sidecar JSON header at `<path>.json` describing the shape;
//! flattened hyperspectral cubes record their pixel grid in the header.
//! Values are written with shortest round-trip formatting, so both formats
//! reload bit-exactly.

use crate::error::{Error, Result};
use crate::extraction::Strategy;
use crate::linalg::DenseMatrix;
use crate::selection::RspaParams;
use crate::synth::SweepConfig;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

/// Relative l1 threshold below which a column counts as zero.
const ZERO_L1_REL_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Formats and headers
// ---------------------------------------------------------------------------

/// On-disk matrix representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    RawBin,
}

impl FromStr for MatrixFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(MatrixFormat::Csv),
            "rawbin" => Ok(MatrixFormat::RawBin),
            other => Err(Error::contract(format!(
                "unknown matrix format '{other}' (expected csv or rawbin)"
            ))),
        }
    }
}

impl fmt::Display for MatrixFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatrixFormat::Csv => "csv",
            MatrixFormat::RawBin => "rawbin",
        })
    }
}

/// Sidecar header of a `rawbin` payload.
///
/// Hyperspectral cubes are stored flattened with `rows` = bands and `cols` =
/// pixels in row-major pixel-scan order of the recorded grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFileHeader {
    pub rows: usize,
    pub cols: usize,
    /// Element type tag; always 64-bit IEEE floats, little endian.
    pub dtype: String,
    /// Storage order tag; always column-major.
    pub layout: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_height: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_width: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_names: Option<Vec<String>>,
}

pub const DTYPE_TAG: &str = "f64le";
pub const LAYOUT_TAG: &str = "column-major";

impl MatrixFileHeader {
    pub fn for_matrix(m: &DenseMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            dtype: DTYPE_TAG.to_string(),
            layout: LAYOUT_TAG.to_string(),
            grid_height: None,
            grid_width: None,
            band_names: None,
        }
    }
}

// ---------------------------------------------------------------------------
// Matrix load/save
// ---------------------------------------------------------------------------

/// Load a matrix from `path` in the given format.
pub fn load_matrix(path: &Path, format: MatrixFormat) -> Result<DenseMatrix> {
    match format {
        MatrixFormat::Csv => load_csv(path),
        MatrixFormat::RawBin => load_rawbin(path),
    }
}

/// Save a matrix to `path` in the given format. `rawbin` additionally writes
/// the sidecar header at `<path>.json`.
pub fn save_matrix(path: &Path, format: MatrixFormat, m: &DenseMatrix) -> Result<()> {
    match format {
        MatrixFormat::Csv => save_csv(path, m),
        MatrixFormat::RawBin => save_rawbin(path, m, &MatrixFileHeader::for_matrix(m)),
    }
}

fn load_csv(path: &Path) -> Result<DenseMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for (field_idx, field) in line.split(',').enumerate() {
            let value: f64 = field.trim().parse().map_err(|_| Error::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                message: format!("field {} is not a number: '{}'", field_idx + 1, field.trim()),
            })?;
            if !value.is_finite() {
                return Err(Error::InvalidData {
                    path: path.display().to_string(),
                    message: format!(
                        "non-finite entry {value} at line {}, field {}",
                        lineno + 1,
                        field_idx + 1
                    ),
                });
            }
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 0,
            message: "file contains no rows".to_string(),
        });
    }
    let width = rows[0].len();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != width {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: i + 1,
                message: format!("expected {width} fields, found {}", r.len()),
            });
        }
    }
    DenseMatrix::from_rows(&rows)
}

fn save_csv(path: &Path, m: &DenseMatrix) -> Result<()> {
    let mut out = String::new();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if j > 0 {
                out.push(',');
            }
            // Shortest round-trip decimal.
            out.push_str(&m.get(i, j).to_string());
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".json");
    std::path::PathBuf::from(s)
}

fn load_rawbin(path: &Path) -> Result<DenseMatrix> {
    let header_path = sidecar_path(path);
    let header_text = fs::read_to_string(&header_path)
        .map_err(|e| Error::io(header_path.display().to_string(), e))?;
    let header: MatrixFileHeader =
        serde_json::from_str(&header_text).map_err(|e| Error::Parse {
            path: header_path.display().to_string(),
            line: e.line(),
            message: e.to_string(),
        })?;
    if header.dtype != DTYPE_TAG {
        return Err(Error::InvalidData {
            path: header_path.display().to_string(),
            message: format!("unsupported dtype '{}', expected {DTYPE_TAG}", header.dtype),
        });
    }
    if header.layout != LAYOUT_TAG {
        return Err(Error::InvalidData {
            path: header_path.display().to_string(),
            message: format!(
                "unsupported layout '{}', expected {LAYOUT_TAG}",
                header.layout
            ),
        });
    }
    let payload = fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let expected = header
        .rows
        .checked_mul(header.cols)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| Error::InvalidData {
            path: header_path.display().to_string(),
            message: "header dimensions overflow".to_string(),
        })?;
    if payload.len() != expected {
        return Err(Error::InvalidData {
            path: path.display().to_string(),
            message: format!(
                "payload is {} bytes but header {}x{} requires {expected}",
                payload.len(),
                header.rows,
                header.cols
            ),
        });
    }
    let mut data = Vec::with_capacity(header.rows * header.cols);
    for (i, chunk) in payload.chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(Error::InvalidData {
                path: path.display().to_string(),
                message: format!(
                    "non-finite entry {v} at row {}, column {}",
                    i % header.rows,
                    i / header.rows
                ),
            });
        }
        data.push(v);
    }
    DenseMatrix::from_column_major(header.rows, header.cols, data)
}

fn save_rawbin(path: &Path, m: &DenseMatrix, header: &MatrixFileHeader) -> Result<()> {
    let mut payload = Vec::with_capacity(m.data().len() * 8);
    for v in m.data() {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, payload).map_err(|e| Error::io(path.display().to_string(), e))?;
    let header_path = sidecar_path(path);
    let text = serde_json::to_string_pretty(header).expect("header serialization cannot fail");
    fs::write(&header_path, text).map_err(|e| Error::io(header_path.display().to_string(), e))
}

/// Save a matrix as `rawbin` with an explicit header (for cubes carrying
/// grid dimensions or band names). The header's shape must match.
pub fn save_rawbin_with_header(
    path: &Path,
    m: &DenseMatrix,
    header: &MatrixFileHeader,
) -> Result<()> {
    if header.rows != m.rows() || header.cols != m.cols() {
        return Err(Error::contract(format!(
            "header shape {}x{} does not match matrix {}x{}",
            header.rows,
            header.cols,
            m.rows(),
            m.cols()
        )));
    }
    save_rawbin(path, m, header)
}

// ---------------------------------------------------------------------------
// l1 preprocessing
// ---------------------------------------------------------------------------

/// Divide each column by its l1 norm. Columns whose l1 norm falls below
/// 1e-12 of the largest are left untouched and their indices reported.
pub fn l1_normalize_columns(x: &DenseMatrix) -> (DenseMatrix, Vec<usize>) {
    let l1_norms: Vec<f64> = (0..x.cols())
        .map(|j| x.column(j).iter().map(|v| v.abs()).sum())
        .collect();
    let max_l1 = l1_norms.iter().cloned().fold(0.0, f64::max);
    let tol = ZERO_L1_REL_TOL * max_l1;

    let mut out = x.clone();
    let mut zero_columns = Vec::new();
    for (j, &norm) in l1_norms.iter().enumerate() {
        if norm > tol {
            for v in out.column_mut(j) {
                *v /= norm;
            }
        } else {
            zero_columns.push(j);
        }
    }
    (out, zero_columns)
}

// ---------------------------------------------------------------------------
// Index files
// ---------------------------------------------------------------------------

/// Read 0-based indices, one per line; blank lines and `#` comments allowed.
pub fn load_indices(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut indices = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let idx: usize = line.parse().map_err(|_| Error::Parse {
            path: path.display().to_string(),
            line: lineno + 1,
            message: format!("not a non-negative integer: '{line}'"),
        })?;
        indices.push(idx);
    }
    Ok(indices)
}

/// Write indices one per line.
pub fn save_indices(path: &Path, indices: &[usize]) -> Result<()> {
    let mut out = String::new();
    for idx in indices {
        out.push_str(&idx.to_string());
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

// ---------------------------------------------------------------------------
// Sweep configuration
// ---------------------------------------------------------------------------

/// Parse an algorithm spec: `spa`, or `name:d:p:beta` for the diversified
/// variant (the name labels the output rows).
pub fn parse_algorithm_spec(spec: &str) -> Result<(String, Strategy)> {
    let spec = spec.trim();
    if spec == "spa" {
        return Ok(("spa".to_string(), Strategy::Spa));
    }
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 4 {
        return Err(Error::contract(format!(
            "algorithm spec '{spec}' must be 'spa' or 'name:d:p:beta'"
        )));
    }
    let d: usize = parts[1]
        .trim()
        .parse()
        .map_err(|_| Error::contract(format!("bad candidate count in '{spec}'")))?;
    let p: f64 = parts[2]
        .trim()
        .parse()
        .map_err(|_| Error::contract(format!("bad norm exponent in '{spec}'")))?;
    let beta: f64 = parts[3]
        .trim()
        .parse()
        .map_err(|_| Error::contract(format!("bad diversification factor in '{spec}'")))?;
    Ok((
        parts[0].trim().to_string(),
        Strategy::Rspa(RspaParams::new(d, p, beta)?),
    ))
}

/// Parse a flat `key = value` sweep configuration.
///
/// Keys: `m_values` (comma list), `r`, `n`, `n_out`, `trials`, `base_seed`,
/// `algorithms` (comma list of algorithm specs). `#` starts a comment.
pub fn parse_sweep_config(text: &str, path: &str) -> Result<SweepConfig> {
    let mut m_values: Option<Vec<usize>> = None;
    let mut r: Option<usize> = None;
    let mut n: Option<usize> = None;
    let mut n_out: Option<usize> = None;
    let mut trials: Option<usize> = None;
    let mut base_seed: Option<u64> = None;
    let mut algorithms: Option<Vec<(String, Strategy)>> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_string(),
            line: lineno + 1,
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(format!("expected 'key = value', got '{line}'")))?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "m_values" => {
                let parsed: std::result::Result<Vec<usize>, _> =
                    value.split(',').map(|v| v.trim().parse()).collect();
                m_values =
                    Some(parsed.map_err(|_| parse_err(format!("bad m_values '{value}'")))?);
            }
            "r" => r = Some(value.parse().map_err(|_| parse_err(format!("bad r '{value}'")))?),
            "n" => n = Some(value.parse().map_err(|_| parse_err(format!("bad n '{value}'")))?),
            "n_out" => {
                n_out =
                    Some(value.parse().map_err(|_| parse_err(format!("bad n_out '{value}'")))?)
            }
            "trials" => {
                trials =
                    Some(value.parse().map_err(|_| parse_err(format!("bad trials '{value}'")))?)
            }
            "base_seed" => {
                base_seed = Some(
                    value
                        .parse()
                        .map_err(|_| parse_err(format!("bad base_seed '{value}'")))?,
                )
            }
            "algorithms" => {
                let parsed: Result<Vec<(String, Strategy)>> =
                    value.split(',').map(parse_algorithm_spec).collect();
                algorithms = Some(parsed.map_err(|e| parse_err(e.to_string()))?);
            }
            other => return Err(parse_err(format!("unknown key '{other}'"))),
        }
    }

    let require = |name: &str| Error::Parse {
        path: path.to_string(),
        line: 0,
        message: format!("missing required key '{name}'"),
    };
    let config = SweepConfig {
        m_values: m_values.ok_or_else(|| require("m_values"))?,
        r: r.ok_or_else(|| require("r"))?,
        n: n.ok_or_else(|| require("n"))?,
        n_out: n_out.ok_or_else(|| require("n_out"))?,
        trials: trials.ok_or_else(|| require("trials"))?,
        base_seed: base_seed.ok_or_else(|| require("base_seed"))?,
        algorithms: algorithms.ok_or_else(|| require("algorithms"))?,
    };
    config.validate()?;
    Ok(config)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
