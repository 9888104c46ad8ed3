//! Line-oriented run configuration: `section.key = value` entries, `#`
//! comments, and documented defaults for everything, so an empty file is a
//! valid configuration describing the reference setup.
//!
//! Unknown and duplicate keys are hard errors naming the line and key —
//! verification artifacts must never be produced from a silently ignored
//! setting.

use std::collections::BTreeMap;
use std::path::PathBuf;

use lockkey_core::{Error, KernelFamily, Result};
use serde_json::json;

/// Which artifact formats a run may write.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
}

/// Fully validated, defaults-filled run configuration. Mode indices are
/// 1-based in the file (and in every artifact) but stored 0-based here for
/// direct use against the library.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub kernel_family: KernelFamily,
    pub amplitude: f64,
    pub width: f64,
    pub dimension: usize,
    pub box_side: f64,
    pub cells_per_axis: usize,
    pub scale: f64,
    /// 0-based.
    pub mode_i: usize,
    pub mode_j: usize,
    pub mode_k: usize,
    pub alpha: f64,
    pub alpha_grid: Vec<f64>,
    pub scan_scales: Vec<f64>,
    pub out_dir: PathBuf,
    pub formats: Formats,
    pub eigen_residual_tol: f64,
    pub neutrality_tol: f64,
    /// Absolute floor; `None` means "compute 10⁻⁸·|λ₁| at run time".
    pub margin_floor: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            kernel_family: KernelFamily::GaussianAttractive,
            amplitude: 1.0,
            width: 0.5,
            dimension: 3,
            box_side: 1.0,
            cells_per_axis: 6,
            scale: 1.0,
            mode_i: 0,
            mode_j: 1,
            mode_k: 2,
            alpha: 0.05,
            alpha_grid: (1..=19).map(|t| t as f64 * 0.05).collect(),
            scan_scales: vec![1.0, 0.5, 0.25, 0.125],
            out_dir: PathBuf::from("."),
            formats: Formats {
                csv: true,
                json: true,
            },
            eigen_residual_tol: 1e-8,
            neutrality_tol: 1e-10,
            margin_floor: None,
        }
    }
}

impl RunConfig {
    /// The effective margin floor given the computed ground eigenvalue.
    pub fn effective_margin_floor(&self, lambda_1: f64) -> f64 {
        self.margin_floor.unwrap_or(1e-8 * lambda_1.abs())
    }

    /// 1-based mode triple for artifacts.
    pub fn modes_one_based(&self) -> (usize, usize, usize) {
        (self.mode_i + 1, self.mode_j + 1, self.mode_k + 1)
    }

    /// Complete effective configuration (defaults filled) as JSON, echoed
    /// into every report so a run can be reproduced exactly.
    pub fn echo(&self, seed: u64) -> serde_json::Value {
        let formats: Vec<&str> = [
            self.formats.csv.then_some("csv"),
            self.formats.json.then_some("json"),
        ]
        .into_iter()
        .flatten()
        .collect();
        json!({
            "kernel": {
                "family": self.kernel_family.name(),
                "amplitude": self.amplitude,
                "width": self.width,
            },
            "grid": {
                "dimension": self.dimension,
                "box_side": self.box_side,
                "cells_per_axis": self.cells_per_axis,
                "scale": self.scale,
            },
            "modes": { "i": self.mode_i + 1, "j": self.mode_j + 1, "k": self.mode_k + 1 },
            "alpha": { "value": self.alpha, "grid": self.alpha_grid },
            "scan": { "scales": self.scan_scales },
            "output": {
                "directory": self.out_dir.display().to_string(),
                "formats": formats,
            },
            "tolerances": {
                "eigen_residual": self.eigen_residual_tol,
                "neutrality": self.neutrality_tol,
                "margin_floor": self.margin_floor,
            },
            "seed": seed,
        })
    }
}

const KNOWN_KEYS: [&str; 18] = [
    "kernel.family",
    "kernel.amplitude",
    "kernel.width",
    "grid.dimension",
    "grid.box_side",
    "grid.cells_per_axis",
    "grid.scale",
    "modes.i",
    "modes.j",
    "modes.k",
    "alpha.value",
    "alpha.grid",
    "scan.scales",
    "output.directory",
    "output.formats",
    "tolerances.eigen_residual",
    "tolerances.neutrality",
    "tolerances.margin_floor",
];

struct Entry {
    line: usize,
    value: String,
}

fn input(msg: String) -> Error {
    Error::Input(msg)
}

/// Parse and validate configuration text. Every error names the offending
/// line and key.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut entries: BTreeMap<&str, Entry> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key_part, value_part)) = line.split_once('=') else {
            return Err(input(format!(
                "config line {line_no}: expected `section.key = value`, got `{line}`"
            )));
        };
        let key = key_part.trim();
        let value = value_part.trim();
        let Some(known) = KNOWN_KEYS.iter().find(|k| **k == key) else {
            return Err(input(format!(
                "config line {line_no}: unknown key `{key}`"
            )));
        };
        if value.is_empty() {
            return Err(input(format!(
                "config line {line_no}: key `{key}`: empty value"
            )));
        }
        if let Some(prev) = entries.get(known) {
            return Err(input(format!(
                "config line {line_no}: duplicate key `{key}` (first set on line {})",
                prev.line
            )));
        }
        entries.insert(
            known,
            Entry {
                line: line_no,
                value: value.to_string(),
            },
        );
    }

    let mut cfg = RunConfig::default();

    let fail = |e: &Entry, key: &str, msg: &str| -> Error {
        input(format!("config line {}: key `{key}`: {msg}", e.line))
    };
    let parse_f64 = |e: &Entry, key: &str| -> Result<f64> {
        let v: f64 = e
            .value
            .parse()
            .map_err(|_| fail(e, key, &format!("malformed number `{}`", e.value)))?;
        if !v.is_finite() {
            return Err(fail(e, key, "value must be finite"));
        }
        Ok(v)
    };
    let parse_usize = |e: &Entry, key: &str| -> Result<usize> {
        e.value
            .parse()
            .map_err(|_| fail(e, key, &format!("malformed integer `{}`", e.value)))
    };
    let parse_f64_list = |e: &Entry, key: &str| -> Result<Vec<f64>> {
        let mut out = Vec::new();
        for piece in e.value.split(',') {
            let piece = piece.trim();
            if piece.is_empty() {
                return Err(fail(e, key, "empty list entry"));
            }
            let v: f64 = piece
                .parse()
                .map_err(|_| fail(e, key, &format!("malformed number `{piece}`")))?;
            if !v.is_finite() {
                return Err(fail(e, key, "list entries must be finite"));
            }
            out.push(v);
        }
        Ok(out)
    };

    if let Some(e) = entries.get("kernel.family") {
        cfg.kernel_family = match e.value.as_str() {
            "gaussian" => KernelFamily::GaussianAttractive,
            "inverse_multiquadric" => KernelFamily::InverseMultiquadricAttractive,
            other => {
                return Err(fail(
                    e,
                    "kernel.family",
                    &format!("unknown family `{other}` (expected `gaussian` or `inverse_multiquadric`)"),
                ))
            }
        };
    }
    if let Some(e) = entries.get("kernel.amplitude") {
        cfg.amplitude = parse_f64(e, "kernel.amplitude")?;
        if cfg.amplitude <= 0.0 {
            return Err(fail(e, "kernel.amplitude", "must be > 0"));
        }
    }
    if let Some(e) = entries.get("kernel.width") {
        cfg.width = parse_f64(e, "kernel.width")?;
        if cfg.width <= 0.0 {
            return Err(fail(e, "kernel.width", "must be > 0"));
        }
    }
    if let Some(e) = entries.get("grid.dimension") {
        cfg.dimension = parse_usize(e, "grid.dimension")?;
        if !(1..=3).contains(&cfg.dimension) {
            return Err(fail(e, "grid.dimension", "must be 1, 2, or 3"));
        }
    }
    if let Some(e) = entries.get("grid.box_side") {
        cfg.box_side = parse_f64(e, "grid.box_side")?;
        if cfg.box_side <= 0.0 {
            return Err(fail(e, "grid.box_side", "must be > 0"));
        }
    }
    if let Some(e) = entries.get("grid.cells_per_axis") {
        cfg.cells_per_axis = parse_usize(e, "grid.cells_per_axis")?;
        if cfg.cells_per_axis == 0 {
            return Err(fail(e, "grid.cells_per_axis", "must be ≥ 1"));
        }
    }
    if let Some(e) = entries.get("grid.scale") {
        cfg.scale = parse_f64(e, "grid.scale")?;
        if cfg.scale <= 0.0 {
            return Err(fail(e, "grid.scale", "must be > 0"));
        }
    }
    for (key, slot) in [
        ("modes.i", &mut cfg.mode_i),
        ("modes.j", &mut cfg.mode_j),
        ("modes.k", &mut cfg.mode_k),
    ] {
        if let Some(e) = entries.get(key) {
            let one_based = parse_usize(e, key)?;
            if one_based == 0 {
                return Err(fail(e, key, "mode indices are 1-based; must be ≥ 1"));
            }
            *slot = one_based - 1;
        }
    }
    if cfg.mode_i == cfg.mode_j || cfg.mode_i == cfg.mode_k || cfg.mode_j == cfg.mode_k {
        let (i, j, k) = cfg.modes_one_based();
        return Err(input(format!(
            "config: modes must be pairwise distinct, got i={i}, j={j}, k={k}"
        )));
    }
    if let Some(e) = entries.get("alpha.value") {
        cfg.alpha = parse_f64(e, "alpha.value")?;
        if !(0.0..1.0).contains(&cfg.alpha) {
            return Err(fail(
                e,
                "alpha.value",
                "must lie in [0, 1) (0 runs diagnostics only)",
            ));
        }
    }
    if let Some(e) = entries.get("alpha.grid") {
        cfg.alpha_grid = parse_f64_list(e, "alpha.grid")?;
        for v in &cfg.alpha_grid {
            if *v <= 0.0 || *v >= 1.0 {
                return Err(fail(e, "alpha.grid", "entries must lie strictly inside (0, 1)"));
            }
        }
    }
    if let Some(e) = entries.get("scan.scales") {
        cfg.scan_scales = parse_f64_list(e, "scan.scales")?;
        for v in &cfg.scan_scales {
            if *v <= 0.0 {
                return Err(fail(e, "scan.scales", "entries must be > 0"));
            }
        }
    }
    if let Some(e) = entries.get("output.directory") {
        cfg.out_dir = PathBuf::from(&e.value);
    }
    if let Some(e) = entries.get("output.formats") {
        let mut formats = Formats {
            csv: false,
            json: false,
        };
        for piece in e.value.split(',') {
            match piece.trim() {
                "csv" => formats.csv = true,
                "json" => formats.json = true,
                other => {
                    return Err(fail(
                        e,
                        "output.formats",
                        &format!("unknown format `{other}` (expected `csv` and/or `json`)"),
                    ))
                }
            }
        }
        cfg.formats = formats;
    }
    if let Some(e) = entries.get("tolerances.eigen_residual") {
        cfg.eigen_residual_tol = parse_f64(e, "tolerances.eigen_residual")?;
        if cfg.eigen_residual_tol <= 0.0 {
            return Err(fail(e, "tolerances.eigen_residual", "must be > 0"));
        }
    }
    if let Some(e) = entries.get("tolerances.neutrality") {
        cfg.neutrality_tol = parse_f64(e, "tolerances.neutrality")?;
        if cfg.neutrality_tol <= 0.0 {
            return Err(fail(e, "tolerances.neutrality", "must be > 0"));
        }
    }
    if let Some(e) = entries.get("tolerances.margin_floor") {
        let floor = parse_f64(e, "tolerances.margin_floor")?;
        if floor < 0.0 {
            return Err(fail(e, "tolerances.margin_floor", "must be ≥ 0"));
        }
        cfg.margin_floor = Some(floor);
    }
    Ok(cfg)
}
