//! Artifact serialization: CSV tables with full-precision floats, JSON
//! reports with a stable field order, and atomic file writes so a crashed
//! run never leaves a truncated artifact behind.

use std::fs;
use std::path::Path;

use lockkey_core::{
    Complementarity, Error, Field, InteractionReport, OperatorMatrix, Result, ScalingRow,
    ScalingStudy,
};
use serde::Serialize;

/// Full-precision decimal rendering (17 significant digits round-trips
/// every binary double exactly).
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn resource(path: &Path, err: std::io::Error) -> Error {
    Error::Resource(format!("writing {}: {err}", path.display()))
}

/// Write via a temporary file in the same directory plus rename, creating
/// parent directories as needed.
pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<()> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = parent {
        fs::create_dir_all(dir).map_err(|e| resource(path, e))?;
    }
    let name = path
        .file_name()
        .ok_or_else(|| Error::Resource(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, contents).map_err(|e| resource(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| resource(path, e))
}

/// Serialize as pretty JSON with a trailing newline and write atomically.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Resource(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

/// `index,lambda` over the full computed spectrum, 1-based.
pub fn spectrum_csv(eigenvalues: &[f64]) -> String {
    let mut out = String::from("index,lambda\n");
    for (idx, lambda) in eigenvalues.iter().enumerate() {
        out.push_str(&format!("{},{}\n", idx + 1, fmt_float(*lambda)));
    }
    out
}

/// Size-scan table, successful rows only, in input order.
pub fn scaling_csv(rows: &[ScalingRow]) -> String {
    let mut out = String::from("r,mes_q,lambda_1,lambda_2,lambda_3,f_max,r1_max,c_ratio\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt_float(row.scale),
            fmt_float(row.mes_q),
            fmt_float(row.lambda_1),
            fmt_float(row.lambda_2),
            fmt_float(row.lambda_3),
            fmt_float(row.f_max),
            fmt_float(row.r1_max),
            fmt_float(row.c_ratio),
        ));
    }
    out
}

/// One mixing-weight sample of the sign pattern.
pub struct AlphaSample {
    pub alpha: f64,
    pub worst_margin: f64,
    pub in_window: bool,
}

/// `alpha,worst_margin,in_window` with `in_window` as 0/1.
pub fn alpha_scan_csv(samples: &[AlphaSample]) -> String {
    let mut out = String::from("alpha,worst_margin,in_window\n");
    for s in samples {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_float(s.alpha),
            fmt_float(s.worst_margin),
            u8::from(s.in_window),
        ));
    }
    out
}

/// `node_index,x1[,x2[,x3]],value` — coordinate columns match the grid's
/// dimension; node indices are 1-based.
pub fn field_csv(field: &Field) -> String {
    let grid = field.grid();
    let dim = grid.dimension();
    let mut out = String::from("node_index");
    for axis in 0..dim {
        out.push_str(&format!(",x{}", axis + 1));
    }
    out.push_str(",value\n");
    for (idx, (node, value)) in grid.nodes().iter().zip(field.values()).enumerate() {
        out.push_str(&(idx + 1).to_string());
        for coord in node.iter().take(dim) {
            out.push(',');
            out.push_str(&fmt_float(*coord));
        }
        out.push(',');
        out.push_str(&fmt_float(*value));
        out.push('\n');
    }
    out
}

/// `row,col,value` over the lower triangle (row ≥ col), 1-based — the
/// matrix is symmetric, so the triangle is the whole story.
pub fn operator_csv(m: &OperatorMatrix) -> String {
    let entries = m.entries();
    let n = entries.nrows();
    let mut out = String::from("row,col,value\n");
    for row in 0..n {
        for col in 0..=row {
            out.push_str(&format!(
                "{},{},{}\n",
                row + 1,
                col + 1,
                fmt_float(entries[(row, col)]),
            ));
        }
    }
    out
}

/// The ten pairings in report order; field order is the serialization
/// order, matching `PAIR_NAMES`.
#[derive(Debug, Serialize)]
pub struct PairValues {
    pub phi_phi_cap: f64,
    pub psi_psi_cap: f64,
    pub phi_psi: f64,
    pub phi_psi_cap: f64,
    pub phi_cap_psi: f64,
    pub phi_cap_psi_cap: f64,
    pub phi_phi: f64,
    pub phi_cap_phi_cap: f64,
    pub psi_psi: f64,
    pub psi_cap_psi_cap: f64,
}

impl PairValues {
    pub fn from_report(report: &InteractionReport, value: impl Fn(usize) -> f64) -> Self {
        let pairs = report.pairs();
        debug_assert_eq!(pairs[0].name, "phi_phi_cap");
        PairValues {
            phi_phi_cap: value(0),
            psi_psi_cap: value(1),
            phi_psi: value(2),
            phi_psi_cap: value(3),
            phi_cap_psi: value(4),
            phi_cap_psi_cap: value(5),
            phi_phi: value(6),
            phi_cap_phi_cap: value(7),
            psi_psi: value(8),
            psi_cap_psi_cap: value(9),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct LambdaTriple {
    pub i: f64,
    pub j: f64,
    pub k: f64,
}

#[derive(Debug, Serialize)]
pub struct WindowJson {
    pub low: f64,
    pub high: f64,
}

/// The construct/verify report. Mode indices are 1-based; `window` is
/// `null` when the feasibility window is empty; the effective configuration
/// echo comes last.
#[derive(Debug, Serialize)]
pub struct QuartetReport {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub alpha: f64,
    pub scale: f64,
    pub mes_q: f64,
    pub lambda: LambdaTriple,
    pub f_max: f64,
    pub window: Option<WindowJson>,
    pub interactions: PairValues,
    pub margins: PairValues,
    pub verdict: bool,
    pub worst_margin: f64,
    pub margin_floor: f64,
    pub config: serde_json::Value,
}

pub struct QuartetReportInputs<'a> {
    pub modes_one_based: (usize, usize, usize),
    pub alpha: f64,
    pub scale: f64,
    pub mes_q: f64,
    pub lambda: (f64, f64, f64),
    pub window: Option<(f64, f64)>,
    pub f_max: f64,
    pub interactions: &'a InteractionReport,
    pub complementarity: &'a Complementarity,
    pub margin_floor: f64,
    pub config: serde_json::Value,
}

pub fn quartet_report(inputs: QuartetReportInputs<'_>) -> QuartetReport {
    let pairs = inputs.interactions.pairs();
    QuartetReport {
        i: inputs.modes_one_based.0,
        j: inputs.modes_one_based.1,
        k: inputs.modes_one_based.2,
        alpha: inputs.alpha,
        scale: inputs.scale,
        mes_q: inputs.mes_q,
        lambda: LambdaTriple {
            i: inputs.lambda.0,
            j: inputs.lambda.1,
            k: inputs.lambda.2,
        },
        f_max: inputs.f_max,
        window: inputs
            .window
            .map(|(low, high)| WindowJson { low, high }),
        interactions: PairValues::from_report(inputs.interactions, |p| pairs[p].direct),
        margins: PairValues::from_report(inputs.interactions, |p| pairs[p].margin),
        verdict: inputs.complementarity.verdict,
        worst_margin: inputs.complementarity.worst_margin,
        margin_floor: inputs.margin_floor,
        config: inputs.config,
    }
}

#[derive(Debug, Serialize)]
pub struct FailureJson {
    pub scale: f64,
    pub message: String,
}

/// Size-scan summary: fit results (`null` when fewer than two usable rows),
/// the base scale, and which scales failed.
#[derive(Debug, Serialize)]
pub struct ScalingReport {
    pub slope: Option<f64>,
    pub c_constant: Option<f64>,
    pub r0: f64,
    pub partial: bool,
    pub failures: Vec<FailureJson>,
    pub config: serde_json::Value,
}

pub fn scaling_report(study: &ScalingStudy, config: serde_json::Value) -> ScalingReport {
    ScalingReport {
        slope: study.slope,
        c_constant: study.c_constant,
        r0: study.r0,
        partial: study.partial,
        failures: study
            .failures
            .iter()
            .map(|f| FailureJson {
                scale: f.scale,
                message: f.message.clone(),
            })
            .collect(),
        config,
    }
}

/// Mixing-weight scan summary.
#[derive(Debug, Serialize)]
pub struct AlphaScanReport {
    pub window: Option<WindowJson>,
    pub f_max: f64,
    pub floor: f64,
    pub config: serde_json::Value,
}

#[derive(Debug, Serialize)]
pub struct OraclePair {
    pub pair: usize,
    pub direct: f64,
    pub spectral: f64,
    pub relative_discrepancy: f64,
}

/// Two-route interaction cross-check over seeded random fields.
#[derive(Debug, Serialize)]
pub struct OracleReport {
    pub seed: u64,
    pub pairs: Vec<OraclePair>,
    pub max_relative_discrepancy: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub config: serde_json::Value,
}
