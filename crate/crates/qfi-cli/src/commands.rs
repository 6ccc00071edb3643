//! One function per subcommand. Grid cells are evaluated on a rayon pool of
//! `jobs` threads and assembled in grid order, so the output does not depend
//! on the job count.

use crate::config::{Command, RunConfig};
use crate::error::CliError;
use crate::table::{Table, Value};
use qfi_core::bloch::{svd3, BlochChannel, ChannelFamily, Unitality, VALIDATION_TOL};
use qfi_core::fisher::qfi_exact;
use qfi_core::fit::{fit_polynomial, log_spaced};
use qfi_core::linalg::Vec3;
use qfi_core::mstate::OrderedState;
use qfi_core::protocols::{
    build_state, canonical_directions, escher_default_grid, escher_phase_flip_demo, grid_max_corr_h2,
    local_measurement_sim, measurement_cfi_general, protocol_qfi, ProtocolSpec,
};
use qfi_core::series::{corr_bounds, corr_h2, corr_h3_h4, qfi_series, sqsc_unital_h2, sqsc_unital_opt, PERP_TOL};
use qfi_core::Error;
use rayon::prelude::*;
use serde_json::{json, Value as Json};

/// Direction grid size per axis for the bounds search.
pub const BOUNDS_GRID: usize = 20;
/// Default purity samples for `fit-orders`.
pub const FIT_SAMPLES: (f64, f64, usize) = (0.01, 0.2, 15);
/// `n r²` above which series comparisons get a warning.
pub const VALIDITY_WARN: f64 = 0.1;

#[derive(Clone, Debug)]
pub struct Report {
    pub table: Table,
    /// Replaces the table in JSON output (used by `state`).
    pub json: Option<Json>,
    /// Set when a check inside the run failed; the table is still written.
    pub failure: Option<String>,
    pub warnings: Vec<String>,
}

impl Report {
    fn new(table: Table) -> Self {
        Report { table, json: None, failure: None, warnings: Vec::new() }
    }
}

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    match cfg.command {
        Command::Qfi => cmd_qfi(cfg),
        Command::Bounds => cmd_bounds(cfg),
        Command::Measure => cmd_measure(cfg),
        Command::Escher => cmd_escher(cfg),
        Command::FitOrders => cmd_fit_orders(cfg),
        Command::ValidateChannel => cmd_validate_channel(cfg),
        Command::State => cmd_state(cfg),
    }
}

fn run_cells<C, R, F>(jobs: usize, cells: &[C], f: F) -> Result<Vec<R>, CliError>
where
    C: Sync,
    R: Send,
    F: Fn(&C) -> Result<R, CliError> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {jobs} workers: {e}")))?;
    let results: Vec<Result<R, CliError>> = pool.install(|| cells.par_iter().map(&f).collect());
    results.into_iter().collect()
}

/// λ-major, then r, then n.
fn grid3(lambdas: &[f64], rs: &[f64], ns: &[usize]) -> Vec<(f64, f64, usize)> {
    let mut cells = Vec::with_capacity(lambdas.len() * rs.len() * ns.len());
    for &l in lambdas {
        for &r in rs {
            for &n in ns {
                cells.push((l, r, n));
            }
        }
    }
    cells
}

fn cell_name(lambda: f64, r: Option<f64>, n: usize) -> String {
    match r {
        Some(r) => format!("cell (lambda={lambda}, r={r}, n={n})"),
        None => format!("cell (lambda={lambda}, n={n})"),
    }
}

fn eval(fam: &ChannelFamily, lambda: f64, cell: &str) -> Result<BlochChannel, CliError> {
    fam.eval(lambda).map_err(|e| CliError::at(cell, e))
}

fn require_unital(cfg: &RunConfig, fam: &ChannelFamily) -> Result<(), CliError> {
    if fam.unitality() != Unitality::Unital {
        return Err(CliError::Config(format!(
            "{} needs a unital channel (d = 0) but '{}' is {}; use `qfi` or `measure` for non-unital channels",
            cfg.command.as_str(),
            fam.name(),
            fam.unitality().as_str()
        )));
    }
    Ok(())
}

/// Explicit `--c` / `--r0` win; otherwise the canonical pair for unital
/// channels with information, and `ẑ`, `x̂` as a fallback.
fn correlated_directions(cfg: &RunConfig, fam: &ChannelFamily, ch: &BlochChannel) -> (Vec3, Vec3) {
    let (cc, rc) = if fam.unitality() == Unitality::Unital && ch.dm.max_abs() > 0.0 {
        canonical_directions(ch)
    } else {
        (Vec3::Z, Vec3::X)
    };
    (cfg.c.unwrap_or(cc), cfg.r0.unwrap_or(rc))
}

fn sqsc_direction(cfg: &RunConfig, fam: &ChannelFamily, ch: &BlochChannel) -> Vec3 {
    if let Some(r0) = cfg.r0 {
        return r0;
    }
    if fam.unitality() == Unitality::Unital {
        if let Ok(opt) = sqsc_unital_opt(ch) {
            return opt.r0_opt;
        }
    }
    Vec3::X
}

fn spec_for(cfg: &RunConfig, fam: &ChannelFamily, ch: &BlochChannel, lambda: f64, r: f64, n: usize) -> ProtocolSpec {
    if n == 1 {
        ProtocolSpec::sqsc(fam.clone(), lambda, r, sqsc_direction(cfg, fam, ch))
    } else {
        let (c, r0) = correlated_directions(cfg, fam, ch);
        ProtocolSpec::correlated(fam.clone(), lambda, n, r, c, r0)
    }
}

fn validity_warnings(ns: &[usize], rs: &[f64]) -> Vec<String> {
    let worst = ns
        .iter()
        .flat_map(|&n| rs.iter().map(move |&r| (n, r, n as f64 * r * r)))
        .max_by(|a, b| a.2.total_cmp(&b.2));
    match worst {
        Some((n, r, v)) if v > VALIDITY_WARN => {
            vec![format!("n r^2 = {v:.3} at n={n}, r={r} exceeds {VALIDITY_WARN}: series values are outside their validity regime")]
        }
        _ => Vec::new(),
    }
}

/// Rows `(lambda, r, n, exact, series, h0..hK)`, λ-major then r then n.
pub fn cmd_qfi(cfg: &RunConfig) -> Result<Report, CliError> {
    let fam = cfg.family()?;
    let lambdas = cfg.lambdas()?;
    let rs = cfg.purities.clone().unwrap_or_else(|| vec![1e-3]);
    let ns = cfg.ns.clone().unwrap_or_else(|| vec![1]);
    let k = cfg.max_order;
    let cells = grid3(lambdas, &rs, &ns);
    let rows = run_cells(cfg.jobs, &cells, |&(l, r, n)| {
        let cell = cell_name(l, Some(r), n);
        let ch = eval(fam, l, &cell)?;
        let spec = spec_for(cfg, fam, &ch, l, r, n);
        let q = protocol_qfi(&spec, k, cfg.eps).map_err(|e| CliError::at(&cell, e))?;
        let mut row: Vec<Value> = vec![l.into(), r.into(), n.into(), q.exact.into(), q.series_estimate.into()];
        for j in 0..=k {
            row.push(q.series.as_ref().map(|s| s.orders[j]).into());
        }
        Ok(row)
    })?;
    let mut columns: Vec<String> = ["lambda", "r", "n", "exact", "series"].iter().map(|s| s.to_string()).collect();
    columns.extend((0..=k).map(|j| format!("h{j}")));
    let mut report = Report::new(Table { command: "qfi".into(), columns, rows });
    report.warnings = validity_warnings(&cfg.ns.clone().unwrap_or_else(|| vec![1]), &rs);
    Ok(report)
}

/// Rows `(n, lambda, lower, canonical, grid_max, upper, pass)`.
pub fn cmd_bounds(cfg: &RunConfig) -> Result<Report, CliError> {
    let fam = cfg.family()?;
    require_unital(cfg, fam)?;
    let lambdas = cfg.lambdas()?;
    let ns = cfg.ns.clone().unwrap_or_else(|| vec![2]);
    let cells: Vec<(f64, usize)> = lambdas.iter().flat_map(|&l| ns.iter().map(move |&n| (l, n))).collect();
    let rows = run_cells(cfg.jobs, &cells, |&(l, n)| {
        let cell = cell_name(l, None, n);
        let ch = eval(fam, l, &cell)?;
        let at = |e| CliError::at(&cell, e);
        let b = corr_bounds(&ch, n).map_err(at)?;
        let (c, r0) = canonical_directions(&ch);
        let canonical = corr_h2(&ch, n, &c, &r0).map_err(at)?;
        let grid = grid_max_corr_h2(&ch, n, BOUNDS_GRID).map_err(at)?;
        let pass = b.lower - 1e-9 <= canonical && canonical <= grid.value && grid.value <= b.upper + 1e-9;
        Ok(vec![n.into(), l.into(), b.lower.into(), canonical.into(), grid.value.into(), b.upper.into(), pass.into()])
    })?;
    let mut table = Table::new("bounds", &["n", "lambda", "lower", "canonical", "grid_max", "upper", "pass"]);
    table.rows = rows;
    let failed = table.rows.iter().filter(|r| r[6] == Value::Bool(false)).count();
    let mut report = Report::new(table);
    if failed > 0 {
        report.failure = Some(format!("{failed} bounds row(s) failed"));
    }
    Ok(report)
}

/// Rows `(n, lambda, r, cfi, qfi, ratio, cfi_over_r2, lowest_order)`.
pub fn cmd_measure(cfg: &RunConfig) -> Result<Report, CliError> {
    let fam = cfg.family()?;
    let lambdas = cfg.lambdas()?;
    let rs = cfg.purities.clone().unwrap_or_else(|| vec![1e-3]);
    let ns = cfg.ns.clone().unwrap_or_else(|| vec![2]);
    if let Some(&n) = ns.iter().find(|&&n| n < 2) {
        return Err(CliError::Config(format!("measure needs a correlated protocol (n >= 2), got n={n}")));
    }
    let cells = grid3(lambdas, &rs, &ns);
    let rows = run_cells(cfg.jobs, &cells, |&(l, r, n)| {
        let cell = cell_name(l, Some(r), n);
        let at = |e| CliError::at(&cell, e);
        let ch = eval(fam, l, &cell)?;
        let spec = spec_for(cfg, fam, &ch, l, r, n);
        let rec = local_measurement_sim(&spec, cfg.fd_step).map_err(at)?;
        let q = protocol_qfi(&spec, 0, cfg.eps).map_err(at)?.exact;
        let ratio = if q > 0.0 { Some(rec.cfi / q) } else { None };
        let per_r2 = if r > 0.0 { Some(rec.cfi / (r * r)) } else { None };
        let lowest = if fam.unitality() == Unitality::Unital {
            let (c, r0) = correlated_directions(cfg, fam, &ch);
            Some(measurement_cfi_general(&ch, n, &c, &r0).map_err(at)?)
        } else {
            None
        };
        Ok(vec![n.into(), l.into(), r.into(), rec.cfi.into(), q.into(), ratio.into(), per_r2.into(), lowest.into()])
    })?;
    let mut table = Table::new("measure", &["n", "lambda", "r", "cfi", "qfi", "ratio", "cfi_over_r2", "lowest_order"]);
    table.rows = rows;
    let mut report = Report::new(table);
    report.warnings = validity_warnings(&ns, &rs);
    Ok(report)
}

/// Rows `(lambda, r, bound, exact, slack)` on the phase-flip grid.
pub fn cmd_escher(cfg: &RunConfig) -> Result<Report, CliError> {
    let (dl, dr) = escher_default_grid();
    let lambdas = cfg.lambdas.clone().unwrap_or(dl);
    let rs = cfg.purities.clone().unwrap_or(dr);
    let mut report_warnings = Vec::new();
    if let Some(fam) = &cfg.channel {
        if fam.name() != "phase_flip" {
            report_warnings.push(format!("escher always uses the phase-flip channel; ignoring '{}'", fam.name()));
        }
    }
    let cells: Vec<f64> = lambdas.clone();
    let chunks = run_cells(cfg.jobs, &cells, |&l| {
        escher_phase_flip_demo(&[l], &rs).map_err(|e| CliError::at(format!("cell (lambda={l})"), e))
    })?;
    let mut table = Table::new("escher", &["lambda", "r", "bound", "exact", "slack"]);
    for row in chunks.into_iter().flatten() {
        table.push(vec![row.lambda.into(), row.r.into(), row.bound.into(), row.exact.into(), row.slack.into()]);
    }
    let bad = table.floats("slack").iter().filter(|s| !matches!(s, Some(x) if *x > 0.0)).count();
    let mut report = Report::new(table);
    report.warnings = report_warnings;
    if bad > 0 {
        report.failure = Some(format!("{bad} row(s) with non-positive slack"));
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitRow {
    pub n: usize,
    pub lambda: f64,
    pub order: usize,
    pub fitted: f64,
    pub series: f64,
    pub closed_form: Option<f64>,
}

/// Fits `H/r²` over the purity samples with a polynomial of degree `K + 2`
/// and reports orders `2..=K` next to the generic series and the closed
/// forms (`H^(2)` always; `H^(3)`, `H^(4)` for perpendicular correlated
/// inputs).
pub fn fit_orders_cell(cfg: &RunConfig, fam: &ChannelFamily, lambda: f64, n: usize, rs: &[f64]) -> Result<Vec<FitRow>, CliError> {
    let cell = cell_name(lambda, None, n);
    let at = |e| CliError::at(&cell, e);
    let k = cfg.max_order.max(2);
    let ch = eval(fam, lambda, &cell)?;
    let base = spec_for(cfg, fam, &ch, lambda, 0.0, n);
    let mut ys = Vec::with_capacity(rs.len());
    for &r in rs {
        if r <= 0.0 {
            return Err(CliError::Config(format!("{cell}: fit samples need r > 0, got {r}")));
        }
        let built = build_state(&ProtocolSpec { r, ..base.clone() }, 0).map_err(at)?;
        ys.push(qfi_exact(&built.rho, &built.drho, cfg.eps).map_err(at)? / (r * r));
    }
    let fit = fit_polynomial(rs, &ys, k + 2).map_err(at)?;
    let (input, closed): (OrderedState, Vec<Option<f64>>) = if n == 1 {
        let h2 = sqsc_unital_h2(&ch, &base.r0).map_err(at)?;
        (OrderedState::initial(1, &base.r0, k).map_err(at)?, vec![Some(h2)])
    } else {
        let (c, r0) = correlated_directions(cfg, fam, &ch);
        let h2 = corr_h2(&ch, n, &c, &r0).map_err(at)?;
        let higher = match corr_h3_h4(&ch, n, &c, &r0) {
            Ok(h) => vec![Some(h.h3), Some(h.h4)],
            Err(Error::NonPerpendicular(x)) if x.abs() > PERP_TOL => vec![None, None],
            Err(e) => return Err(at(e)),
        };
        let mut v = vec![Some(h2)];
        v.extend(higher);
        (OrderedState::correlated(n, &c, &r0, k).map_err(at)?, v)
    };
    let series = qfi_series(&input, &ch, k).map_err(at)?;
    Ok((2..=k)
        .map(|j| FitRow {
            n,
            lambda,
            order: j,
            fitted: fit.coeffs[j - 2],
            series: series.orders[j],
            closed_form: closed.get(j - 2).cloned().flatten(),
        })
        .collect())
}

/// Relative error, or the absolute one when the reference is below 1e-9.
fn rel_err(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if b.abs() < 1e-9 { d } else { d / b.abs() }
}

/// Rows `(n, lambda, order, fitted, series, closed_form, err_closed, err_series)`;
/// errors are relative unless the reference is below 1e-9.
pub fn cmd_fit_orders(cfg: &RunConfig) -> Result<Report, CliError> {
    let fam = cfg.family()?;
    require_unital(cfg, fam)?;
    let lambdas = cfg.lambdas()?;
    let ns = cfg.ns.clone().unwrap_or_else(|| vec![1]);
    let rs = match &cfg.purities {
        Some(rs) => rs.clone(),
        None => log_spaced(FIT_SAMPLES.0, FIT_SAMPLES.1, FIT_SAMPLES.2).map_err(|e| CliError::at("fit samples", e))?,
    };
    let cells: Vec<(f64, usize)> = lambdas.iter().flat_map(|&l| ns.iter().map(move |&n| (l, n))).collect();
    let groups = run_cells(cfg.jobs, &cells, |&(l, n)| fit_orders_cell(cfg, fam, l, n, &rs))?;
    let mut table = Table::new(
        "fit-orders",
        &["n", "lambda", "order", "fitted", "series", "closed_form", "err_closed", "err_series"],
    );
    for row in groups.into_iter().flatten() {
        table.push(vec![
            row.n.into(),
            row.lambda.into(),
            row.order.into(),
            row.fitted.into(),
            row.series.into(),
            row.closed_form.into(),
            row.closed_form.map(|c| rel_err(row.fitted, c)).into(),
            rel_err(row.fitted, row.series).into(),
        ]);
    }
    Ok(Report::new(table))
}

/// Rows `(lambda, unitality, passed, violations, s1, s2, s3, d_norm)`.
pub fn cmd_validate_channel(cfg: &RunConfig) -> Result<Report, CliError> {
    let fam = cfg.family()?;
    let lambdas = match &cfg.lambdas {
        Some(l) => l.clone(),
        None => {
            let (lo, hi) = fam.domain();
            (0..=10).map(|k| lo + (hi - lo) * k as f64 / 10.0).collect()
        }
    };
    let rows = run_cells(cfg.jobs, &lambdas, |&l| {
        let cell = format!("cell (lambda={l})");
        let ch = eval(fam, l, &cell)?;
        let report = ch.validate(VALIDATION_TOL);
        let violations: Vec<String> = report.violations.iter().map(|v| format!("{:?}={:.3e}", v.constraint, v.magnitude)).collect();
        let s = svd3(&ch.dm).s;
        Ok(vec![
            l.into(),
            fam.unitality().as_str().into(),
            report.passed().into(),
            violations.join(";").into(),
            s[0].into(),
            s[1].into(),
            s[2].into(),
            ch.d.norm().into(),
        ])
    })?;
    let mut table = Table::new("validate-channel", &["lambda", "unitality", "passed", "violations", "s1", "s2", "s3", "d_norm"]);
    table.rows = rows;
    let bad = table.rows.iter().filter(|r| r[2] == Value::Bool(false)).count();
    let mut report = Report::new(table);
    if bad > 0 {
        report.failure = Some(format!("channel '{}' violates the Bloch constraints at {bad} lambda value(s)", fam.name()));
    }
    Ok(report)
}

/// The channel output at one `(λ, r, n)` as nonzero Pauli coefficients.
pub fn cmd_state(cfg: &RunConfig) -> Result<Report, CliError> {
    let fam = cfg.family()?;
    let one = |v: Option<&Vec<f64>>, what: &str, default: Option<f64>| -> Result<f64, CliError> {
        match (v.map(|v| v.as_slice()), default) {
            (Some([x]), _) => Ok(*x),
            (None, Some(d)) => Ok(d),
            _ => Err(CliError::Config(format!("state needs a single --{what} value"))),
        }
    };
    let l = one(cfg.lambdas.as_ref(), "lambda", None)?;
    let r = one(cfg.purities.as_ref(), "purity", Some(1e-3))?;
    let n = match cfg.ns.as_deref() {
        None => 1,
        Some([n]) => *n,
        Some(_) => return Err(CliError::Config("state needs a single --n value".into())),
    };
    let cell = cell_name(l, Some(r), n);
    let ch = eval(fam, l, &cell)?;
    let spec = spec_for(cfg, fam, &ch, l, r, n);
    let built = build_state(&spec, 0).map_err(|e| CliError::at(&cell, e))?;
    let entries = built.state.nonzero_entries();
    let mut table = Table::new("state", &["pauli", "value"]);
    for (label, v) in &entries {
        table.push(vec![label.as_str().into(), (*v).into()]);
    }
    let json = json!({
        "n": n,
        "lambda": l,
        "r": r,
        "convention": "coeff = Tr[rho P]/2^n",
        "entries": entries.iter().map(|(p, v)| json!({ "pauli": p, "value": v })).collect::<Vec<_>>(),
    });
    let mut report = Report::new(table);
    report.json = Some(json);
    Ok(report)
}
