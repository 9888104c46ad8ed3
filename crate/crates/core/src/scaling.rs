//! Nested-domain study: how the spectrum, the projection perturbation F,
//! and its bound constants behave as the domain shrinks with the kernel
//! held fixed.
//!
//! The operative law under test is |F| ≤ C·(measure of the domain): as the
//! domain family Q(r) shrinks, max|F| must vanish at least proportionally
//! to the measure. The study reports, per scale, the measure, the leading
//! eigenvalues, max|F| over a configured mode set, max|R1| (the constant
//! C₀ controlling the provable bound), and the ratio f_max/mes_q whose
//! supremum is the empirical constant C.

use crate::error::{Error, Result};
use crate::grid::build_grid;
use crate::kernel::Kernel;
use crate::operator::{assemble_operator, r_one_max};
use crate::spectral::{eigendecompose, f_matrix};

/// One scale's measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub scale: f64,
    pub mes_q: f64,
    pub lambda_1: f64,
    pub lambda_2: f64,
    pub lambda_3: f64,
    pub f_max: f64,
    pub r1_max: f64,
    /// f_max / mes_q — the per-row estimate of the law's constant.
    pub c_ratio: f64,
}

/// A scale whose pipeline failed numerically; the study continues without
/// it and flags itself partial.
#[derive(Debug, Clone)]
pub struct RowFailure {
    pub scale: f64,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct ScalingStudy {
    /// Successful rows, in the order the scales were requested.
    pub rows: Vec<ScalingRow>,
    pub failures: Vec<RowFailure>,
    /// Least-squares slope of log f_max against log mes_q; absent with
    /// fewer than two usable rows (or no spread in the measures).
    pub slope: Option<f64>,
    /// max c_ratio over the successful rows: the empirical constant C in
    /// f_max ≤ C·mes_q.
    pub c_constant: Option<f64>,
    /// The outermost requested scale (the base of the nested family).
    pub r0: f64,
    /// True iff any scale failed.
    pub partial: bool,
}

fn compute_row(
    kernel: Kernel,
    dimension: usize,
    box_side: f64,
    cells_per_axis: usize,
    scale: f64,
    modes: &[usize],
) -> Result<ScalingRow> {
    let grid = build_grid(dimension, box_side, cells_per_axis, scale)?;
    let m = assemble_operator(&grid, kernel)?;
    let max_mode = *modes.iter().max().expect("validated nonempty");
    let n_modes = (max_mode + 1).max(3);
    let dec = eigendecompose(&m, n_modes)?;
    let f = f_matrix(&m, &dec, modes)?;
    let mes_q = grid.measure();
    let f_max = f.max_abs();
    Ok(ScalingRow {
        scale,
        mes_q,
        lambda_1: dec.eigenvalue(0)?,
        lambda_2: dec.eigenvalue(1)?,
        lambda_3: dec.eigenvalue(2)?,
        f_max,
        r1_max: r_one_max(&m),
        c_ratio: f_max / mes_q,
    })
}

/// Pure aggregation of per-scale outcomes into the study summary; split
/// out so the partial-data bookkeeping is testable without inducing a
/// numeric failure in a real pipeline.
pub(crate) fn aggregate(r0: f64, outcomes: Vec<std::result::Result<ScalingRow, RowFailure>>) -> ScalingStudy {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(row) => rows.push(row),
            Err(f) => failures.push(f),
        }
    }

    let usable: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.f_max > 0.0 && r.mes_q > 0.0)
        .map(|r| (r.mes_q.ln(), r.f_max.ln()))
        .collect();
    let slope = if usable.len() >= 2 {
        let n = usable.len() as f64;
        let mean_x = usable.iter().map(|(x, _)| x).sum::<f64>() / n;
        let mean_y = usable.iter().map(|(_, y)| y).sum::<f64>() / n;
        let sxx: f64 = usable.iter().map(|(x, _)| (x - mean_x) * (x - mean_x)).sum();
        let sxy: f64 = usable
            .iter()
            .map(|(x, y)| (x - mean_x) * (y - mean_y))
            .sum();
        (sxx > 0.0).then(|| sxy / sxx)
    } else {
        None
    };
    let c_constant = rows
        .iter()
        .map(|r| r.c_ratio)
        .fold(None, |acc: Option<f64>, c| Some(acc.map_or(c, |a| a.max(c))));
    ScalingStudy {
        partial: !failures.is_empty(),
        rows,
        failures,
        slope,
        c_constant,
        r0,
    }
}

/// Run the study: one independent pipeline per scale (fresh grid,
/// operator, decomposition, F-matrix). A numeric failure at one scale
/// marks that row failed and the study continues; configuration errors
/// abort the whole study since they would fail at every scale alike.
pub fn scaling_study(
    kernel: Kernel,
    dimension: usize,
    box_side: f64,
    cells_per_axis: usize,
    scales: &[f64],
    modes: &[usize],
) -> Result<ScalingStudy> {
    if scales.is_empty() {
        return Err(Error::Input("scales list must not be empty".into()));
    }
    for s in scales {
        if !s.is_finite() || *s <= 0.0 {
            return Err(Error::Input(format!(
                "scales must be positive and finite, got {s}"
            )));
        }
    }
    if modes.is_empty() {
        return Err(Error::Input("mode set must not be empty".into()));
    }
    let mut seen = modes.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != modes.len() {
        return Err(Error::Input("mode set must be distinct".into()));
    }

    let r0 = scales.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut outcomes = Vec::with_capacity(scales.len());
    for &scale in scales {
        match compute_row(kernel, dimension, box_side, cells_per_axis, scale, modes) {
            Ok(row) => outcomes.push(Ok(row)),
            Err(Error::Numeric(message)) => outcomes.push(Err(RowFailure { scale, message })),
            Err(other) => return Err(other),
        }
    }
    Ok(aggregate(r0, outcomes))
}
