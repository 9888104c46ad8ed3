//! Subcommand pipelines: configuration in, artifacts and an exit code out.
//!
//! Exit contract: 0 = the requested check passed (or the artifact was
//! produced), 1 = a verification came back negative, 2 = usage/config/IO
//! problems, 3 = numeric failure. Negative verdicts are results, not
//! errors, so they return `Ok(1)` rather than `Err`.

use std::fs;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use lockkey_core::{
    assemble_operator, build_grid, build_quartet, eigendecompose_with_tolerance, f_matrix,
    feasible_alpha, interaction_force, is_neutral, quartet_interactions, scaling_study,
    verify_complementarity, DomainGrid, Error, Field, Kernel, OperatorMatrix, Result, SpecLcg,
    SpectralDecomposition,
};

use crate::config::{parse_config, RunConfig};
use crate::report::{
    alpha_scan_csv, atomic_write, field_csv, fmt_float, operator_csv, quartet_report,
    scaling_csv, scaling_report, spectrum_csv, write_json, AlphaSample, AlphaScanReport,
    OraclePair, OracleReport, QuartetReportInputs, WindowJson,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Construct,
    Verify,
    ScanSize,
    ScanAlpha,
    OracleCheck,
}

/// One parsed command line.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Command,
    pub config_path: PathBuf,
    /// `--out DIR`: overrides the configured output directory.
    pub out_dir: Option<PathBuf>,
    /// `--dump-operator PATH`: also write the assembled matrix as CSV.
    pub dump_operator: Option<PathBuf>,
    /// `--dump-fields DIR`: also write the four quartet fields as CSV
    /// (construct and verify only).
    pub dump_fields: Option<PathBuf>,
    /// Seed for the random fields of `oracle-check`.
    pub seed: u64,
}

/// Relative discrepancy tolerated between the two interaction routes.
pub const ORACLE_TOLERANCE: f64 = 1e-8;

/// Run one invocation to completion and return the process exit code.
pub fn execute(inv: &Invocation) -> Result<i32> {
    let text = fs::read_to_string(&inv.config_path).map_err(|e| {
        Error::Resource(format!("reading {}: {e}", inv.config_path.display()))
    })?;
    let mut cfg = parse_config(&text)?;
    if let Some(dir) = &inv.out_dir {
        cfg.out_dir = dir.clone();
    }
    if let Some(path) = &inv.dump_operator {
        let m = build_operator(&cfg)?;
        let csv = operator_csv(&m);
        atomic_write(path, csv.as_bytes())?;
        announce(path.display(), csv.lines().count() - 1);
    }
    if inv.dump_fields.is_some()
        && !matches!(inv.command, Command::Construct | Command::Verify)
    {
        eprintln!("note: --dump-fields applies to construct and verify only; ignoring");
    }
    match inv.command {
        Command::Spectrum => run_spectrum(&cfg),
        Command::Construct => run_quartet(&cfg, inv, false),
        Command::Verify => run_quartet(&cfg, inv, true),
        Command::ScanSize => run_scan_size(&cfg, inv),
        Command::ScanAlpha => run_scan_alpha(&cfg, inv),
        Command::OracleCheck => run_oracle_check(&cfg, inv),
    }
}

fn announce(path: impl std::fmt::Display, rows: usize) {
    println!("wrote {path} ({rows} rows)");
}

fn timed<T>(label: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let value = f()?;
    println!("stage {label}: {:.3} s", start.elapsed().as_secs_f64());
    Ok(value)
}

fn build_operator(cfg: &RunConfig) -> Result<OperatorMatrix> {
    let kernel = Kernel::new(cfg.kernel_family, cfg.amplitude, cfg.width)?;
    let grid = build_grid(cfg.dimension, cfg.box_side, cfg.cells_per_axis, cfg.scale)?;
    assemble_operator(&grid, kernel)
}

fn run_spectrum(cfg: &RunConfig) -> Result<i32> {
    let m = timed("assemble", || build_operator(cfg))?;
    let n = m.grid().node_count();
    let dec = timed("eigendecompose", || {
        eigendecompose_with_tolerance(&m, n, cfg.eigen_residual_tol)
    })?;
    if cfg.formats.csv {
        let path = cfg.out_dir.join("spectrum.csv");
        atomic_write(&path, spectrum_csv(dec.eigenvalues()).as_bytes())?;
        announce(path.display(), n);
    }
    println!(
        "spectrum: {n} eigenvalues, lambda_1 = {}",
        fmt_float(dec.eigenvalues()[0])
    );
    Ok(0)
}

/// Shared construct/verify pipeline. `gate_exit` makes the exit code follow
/// the verdict (verify); construct always exits 0 once artifacts are out.
fn run_quartet(cfg: &RunConfig, inv: &Invocation, gate_exit: bool) -> Result<i32> {
    let m = timed("assemble", || build_operator(cfg))?;
    let n_modes = cfg.mode_i.max(cfg.mode_j).max(cfg.mode_k) + 1;
    let dec = timed("eigendecompose", || {
        eigendecompose_with_tolerance(&m, n_modes, cfg.eigen_residual_tol)
    })?;
    let quartet = build_quartet(&dec, cfg.mode_i, cfg.mode_j, cfg.mode_k, cfg.alpha)?;
    for (name, field) in FIELD_NAMES.iter().zip(quartet.fields()) {
        if !is_neutral(field, cfg.neutrality_tol) {
            return Err(Error::Numeric(format!(
                "field {name} is not neutral within {}: total charge {}",
                cfg.neutrality_tol,
                field.total_charge()
            )));
        }
    }
    let fm = f_matrix(&m, &dec, &[cfg.mode_i, cfg.mode_j, cfg.mode_k])?;
    let f_max = fm.max_abs();
    let lambda_i = dec.eigenvalue(cfg.mode_i)?;
    let lambda_j = dec.eigenvalue(cfg.mode_j)?;
    let lambda_k = dec.eigenvalue(cfg.mode_k)?;
    let window = feasible_alpha(lambda_i, lambda_j, lambda_k, f_max)?;
    let interactions = quartet_interactions(&m, &dec, &quartet)?;
    let floor = cfg.effective_margin_floor(dec.eigenvalue(0)?);
    let verdict = verify_complementarity(&interactions, floor);

    let report = quartet_report(QuartetReportInputs {
        modes_one_based: cfg.modes_one_based(),
        alpha: cfg.alpha,
        scale: cfg.scale,
        mes_q: m.grid().measure(),
        lambda: (lambda_i, lambda_j, lambda_k),
        window: window.bounds(),
        f_max,
        interactions: &interactions,
        complementarity: &verdict,
        margin_floor: floor,
        config: cfg.echo(inv.seed),
    });
    if cfg.formats.json {
        let name = if gate_exit { "verify.json" } else { "construct.json" };
        let path = cfg.out_dir.join(name);
        write_json(&path, &report)?;
        announce(path.display(), 1);
    }
    if let Some(dir) = &inv.dump_fields {
        for (name, field) in FIELD_NAMES.iter().zip(quartet.fields()) {
            let path = dir.join(format!("{name}.csv"));
            atomic_write(&path, field_csv(field).as_bytes())?;
            announce(path.display(), field.values().len());
        }
    }
    match window.bounds() {
        Some((low, high)) => println!("window: ({}, {})", fmt_float(low), fmt_float(high)),
        None => println!("window: empty"),
    }
    println!(
        "verdict: {} (worst margin {} on {}, floor {})",
        verdict.verdict,
        fmt_float(verdict.worst_margin),
        verdict.worst_pair,
        fmt_float(floor),
    );
    if gate_exit && !verdict.verdict {
        return Ok(1);
    }
    Ok(0)
}

const FIELD_NAMES: [&str; 4] = ["phi", "phi_cap", "psi", "psi_cap"];

fn run_scan_size(cfg: &RunConfig, inv: &Invocation) -> Result<i32> {
    let kernel = Kernel::new(cfg.kernel_family, cfg.amplitude, cfg.width)?;
    let modes = [cfg.mode_i, cfg.mode_j, cfg.mode_k];
    let study = timed("scan-size", || {
        scaling_study(
            kernel,
            cfg.dimension,
            cfg.box_side,
            cfg.cells_per_axis,
            &cfg.scan_scales,
            &modes,
        )
    })?;
    if study.rows.is_empty() {
        let detail = study
            .failures
            .first()
            .map(|f| format!("scale {}: {}", f.scale, f.message))
            .unwrap_or_default();
        return Err(Error::Numeric(format!(
            "every scale in the scan failed; first failure: {detail}"
        )));
    }
    for failure in &study.failures {
        eprintln!("warning: scale {} failed: {}", failure.scale, failure.message);
    }
    if cfg.formats.csv {
        let path = cfg.out_dir.join("scaling.csv");
        atomic_write(&path, scaling_csv(&study.rows).as_bytes())?;
        announce(path.display(), study.rows.len());
    }
    if cfg.formats.json {
        let path = cfg.out_dir.join("scaling.json");
        write_json(&path, &scaling_report(&study, cfg.echo(inv.seed)))?;
        announce(path.display(), 1);
    }
    match (study.slope, study.c_constant) {
        (Some(slope), Some(c)) => println!(
            "slope: {} c_constant: {}",
            fmt_float(slope),
            fmt_float(c)
        ),
        _ => println!("slope: undetermined (fewer than two usable scales)"),
    }
    Ok(0)
}

fn run_scan_alpha(cfg: &RunConfig, inv: &Invocation) -> Result<i32> {
    let m = timed("assemble", || build_operator(cfg))?;
    let n_modes = cfg.mode_i.max(cfg.mode_j).max(cfg.mode_k) + 1;
    let dec = timed("eigendecompose", || {
        eigendecompose_with_tolerance(&m, n_modes, cfg.eigen_residual_tol)
    })?;
    let fm = f_matrix(&m, &dec, &[cfg.mode_i, cfg.mode_j, cfg.mode_k])?;
    let f_max = fm.max_abs();
    let window = feasible_alpha(
        dec.eigenvalue(cfg.mode_i)?,
        dec.eigenvalue(cfg.mode_j)?,
        dec.eigenvalue(cfg.mode_k)?,
        f_max,
    )?;
    let floor = cfg.effective_margin_floor(dec.eigenvalue(0)?);
    let mut samples = Vec::with_capacity(cfg.alpha_grid.len());
    for &alpha in &cfg.alpha_grid {
        let quartet = build_quartet(&dec, cfg.mode_i, cfg.mode_j, cfg.mode_k, alpha)?;
        let interactions = quartet_interactions(&m, &dec, &quartet)?;
        let verdict = verify_complementarity(&interactions, floor);
        samples.push(AlphaSample {
            alpha,
            worst_margin: verdict.worst_margin,
            in_window: window.contains(alpha),
        });
    }
    if cfg.formats.csv {
        let path = cfg.out_dir.join("alpha_scan.csv");
        atomic_write(&path, alpha_scan_csv(&samples).as_bytes())?;
        announce(path.display(), samples.len());
    }
    if cfg.formats.json {
        let path = cfg.out_dir.join("alpha_scan.json");
        let report = AlphaScanReport {
            window: window
                .bounds()
                .map(|(low, high)| WindowJson { low, high }),
            f_max,
            floor,
            config: cfg.echo(inv.seed),
        };
        write_json(&path, &report)?;
        announce(path.display(), 1);
    }
    match window.bounds() {
        Some((low, high)) => println!("window: ({}, {})", fmt_float(low), fmt_float(high)),
        None => println!("window: empty"),
    }
    Ok(0)
}

fn random_field(rng: &mut SpecLcg, grid: &Arc<DomainGrid>) -> Result<Field> {
    let values = (0..grid.node_count())
        .map(|_| rng.next_symmetric())
        .collect();
    Field::new(grid.clone(), values)
}

fn spectral_sum(dec: &SpectralDecomposition, f: &Field, g: &Field) -> Result<f64> {
    let mut sum = 0.0;
    for (lambda, mode) in dec.eigenvalues().iter().zip(dec.eigenfields()) {
        sum += lambda * f.inner_product(mode)? * g.inner_product(mode)?;
    }
    Ok(sum)
}

fn run_oracle_check(cfg: &RunConfig, inv: &Invocation) -> Result<i32> {
    let m = timed("assemble", || build_operator(cfg))?;
    let n = m.grid().node_count();
    let dec = timed("eigendecompose", || {
        eigendecompose_with_tolerance(&m, n, cfg.eigen_residual_tol)
    })?;
    let mut rng = SpecLcg::new(inv.seed);
    let mut pairs = Vec::with_capacity(10);
    let mut max_rel: f64 = 0.0;
    for index in 1..=10 {
        let f = random_field(&mut rng, m.grid())?;
        let g = random_field(&mut rng, m.grid())?;
        let direct = interaction_force(&m, &f, &g)?;
        let spectral = spectral_sum(&dec, &f, &g)?;
        let denom = direct.abs().max(spectral.abs());
        let relative = if denom <= f64::MIN_POSITIVE {
            0.0
        } else {
            (direct - spectral).abs() / denom
        };
        max_rel = max_rel.max(relative);
        pairs.push(OraclePair {
            pair: index,
            direct,
            spectral,
            relative_discrepancy: relative,
        });
    }
    let pass = max_rel <= ORACLE_TOLERANCE;
    if cfg.formats.json {
        let path = cfg.out_dir.join("oracle_check.json");
        let report = OracleReport {
            seed: inv.seed,
            pairs,
            max_relative_discrepancy: max_rel,
            tolerance: ORACLE_TOLERANCE,
            pass,
            config: cfg.echo(inv.seed),
        };
        write_json(&path, &report)?;
        announce(path.display(), 1);
    }
    println!(
        "oracle: max relative discrepancy {} (tolerance {}) -> {}",
        fmt_float(max_rel),
        fmt_float(ORACLE_TOLERANCE),
        if pass { "pass" } else { "FAIL" },
    );
    Ok(if pass { 0 } else { 1 })
}
