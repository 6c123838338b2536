use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use casimir_polder::adiabatic::{self, NestedQuadrature, Trajectory};
use casimir_polder::output::{format_number, Cell, Table};
use casimir_polder::steady;
use casimir_polder::transient;
use casimir_polder::verify::{self, VerifyOptions};
use casimir_polder::{ReleaseDistance, Result as CoreResult};

use crate::config::RunConfig;
use crate::error::CliError;

/// Terms summed in trajectory mode; the tail bound shrinks as `2^{-n}`.
const SERIES_TERMS: usize = 12;

fn header(command: &str, cfg: &RunConfig) -> Table {
    let mut t = Table::default();
    t.meta("program", "cpforce");
    t.meta("version", env!("CARGO_PKG_VERSION"));
    t.meta("command", command);
    // Output paths are omitted so identical runs give identical bytes.
    for (k, v) in cfg.echo.iter().filter(|(k, _)| !k.ends_with("out")) {
        t.meta(k, v);
    }
    t.meta("c", format_number(cfg.params.c));
    t
}

fn with_columns(mut t: Table, columns: &[&str]) -> Table {
    t.columns = columns.iter().map(|c| c.to_string()).collect();
    t
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    match out {
        Some(path) => fs::write(path, text).map_err(io_err(path)),
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            w.write_all(text.as_bytes())
                .and_then(|_| w.flush())
                .map_err(io_err(Path::new("<stdout>")))
        }
    }
}

fn write_table(t: &Table, out: Option<&Path>) -> Result<(), CliError> {
    emit(&t.to_string_lossy(), out)
}

pub fn stationary(cfg: &RunConfig) -> Result<(), CliError> {
    let p = &cfg.params;
    let mut t = with_columns(
        header("stationary", cfg),
        &["r", "u_stationary", "f_electrostatic", "f_retardation", "f_total", "abs_error", "regime"],
    );
    for r in cfg.distances()? {
        let u = steady::stationary_potential(r, p)?;
        let el = steady::electrostatic_force(r, p)?;
        let ret = steady::stationary_retardation_force(r, p)?;
        let total = steady::stationary_total_force(r, p)?;
        let err = u.abs_error_estimate + total.abs_error_estimate;
        t.push(vec![
            r.into(),
            u.u.into(),
            el.f_z.into(),
            ret.f_z.into(),
            total.f_z.into(),
            err.into(),
            total.regime.label().into(),
        ]);
    }
    write_table(&t, cfg.out.as_deref())
}

pub fn transient(cfg: &RunConfig) -> Result<(), CliError> {
    let p = &cfg.params;
    let curve = cfg.tau_grid.is_some();
    let snapshot = cfg.r_grid.is_some() && cfg.tau.is_some();
    if !curve && !snapshot {
        return Err(CliError::Usage(
            "transient needs --r with --tau-grid, or --tau with --r-grid".into(),
        ));
    }
    if curve {
        let r = cfg
            .r
            .ok_or_else(|| CliError::Usage("--tau-grid needs --r".into()))?;
        let taus = cfg.tau_grid.as_ref().expect("checked").points()?;
        let samples = transient::transient_sweep(r, &taus, p, &cfg.quadrature)?.samples;
        let mut t = with_columns(header("transient", cfg), &["tau", "f_z", "abs_error"]);
        t.meta("f_steady", format_number(steady::stationary_retardation_force(r, p)?.f_z));
        t.meta("f_switch_on", format_number(transient::switch_on_force(r, p)));
        for s in samples {
            t.push(vec![s.tau.into(), s.f_z.into(), s.abs_error.into()]);
        }
        write_table(&t, cfg.out.as_deref())?;
    }
    if snapshot {
        let out = match (curve, &cfg.snapshot_out) {
            (_, Some(path)) => Some(path.as_path()),
            (false, None) => cfg.out.as_deref(),
            (true, None) => {
                return Err(CliError::Usage(
                    "a curve and a snapshot together need --snapshot-out".into(),
                ))
            }
        };
        let tau = cfg.tau.expect("checked");
        let rs = cfg.r_grid.as_ref().expect("checked").points()?;
        let rows = transient::snapshot_sweep(tau, &rs, p, &cfg.quadrature)?;
        let mut t = with_columns(
            header("transient", cfg),
            &["r", "coeff_total", "coeff_retardation", "coeff_stationary_total", "abs_error"],
        );
        for row in rows {
            let stationary = row.r.powi(4) * steady::stationary_total_force(row.r, p)?.f_z;
            t.push(vec![
                row.r.into(),
                row.coeff_total.into(),
                row.coeff_retardation.into(),
                stationary.into(),
                row.abs_error.into(),
            ]);
        }
        write_table(&t, out)?;
    }
    Ok(())
}

fn read_trajectory(path: &Path) -> Result<Trajectory, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(Trajectory::parse(&text)?)
}

fn series_report(cfg: &RunConfig, path: &Path) -> Result<(), CliError> {
    let p = &cfg.params;
    let traj = read_trajectory(path)?;
    let sum = adiabatic::series_sum(&traj, SERIES_TERMS, p, NestedQuadrature::default())?;
    let f_end = steady::stationary_retardation_force(traj.r_end(), p)?.f_z;
    let f_start = steady::stationary_retardation_force(traj.r_start(), p)?.f_z;

    let mut t = with_columns(
        header("adiabatic", cfg),
        &["n", "term", "partial_sum", "remainder_bound"],
    );
    t.meta("r_start", format_number(traj.r_start()));
    t.meta("r_end", format_number(traj.r_end()));
    t.meta("monotone", traj.is_monotone());
    t.meta("closed_form", format_number(2.0 * f_end - f_start));
    t.meta("series_sum", format_number(sum.value));
    t.meta("remainder_bound", format_number(sum.remainder_bound));
    let closed = 2.0 * f_end - f_start;
    t.meta("bracket_contains_closed_form", (sum.value - closed).abs() <= sum.remainder_bound);
    let delta = f_end - f_start;
    let mut partial = f_end;
    for (i, term) in sum.terms.iter().enumerate() {
        partial += term;
        let bound = delta.abs() / 2f64.powi(i as i32 + 1);
        t.push(vec![Cell::Text((i + 1).to_string()), (*term).into(), partial.into(), bound.into()]);
    }
    write_table(&t, cfg.out.as_deref())
}

pub fn adiabatic(cfg: &RunConfig) -> Result<(), CliError> {
    if let Some(path) = &cfg.trajectory {
        return series_report(cfg, path);
    }
    let p = &cfg.params;
    let r0 = cfg
        .r0
        .ok_or_else(|| CliError::Usage("adiabatic needs --r0 (a distance or inf)".into()))?;
    let mut t = with_columns(
        header("adiabatic", cfg),
        &["r", "f_adiabatic_retardation", "f_total", "u_adiabatic", "ratio_to_stationary"],
    );
    for r in cfg.distances()? {
        let row: CoreResult<_> = (|| {
            Ok((
                adiabatic::adiabatic_retardation_force(r, r0, p)?.f_z,
                adiabatic::adiabatic_total_force(r, r0, p)?.f_z,
                adiabatic::adiabatic_potential(r, r0, p)?.u,
                adiabatic::ratio_to_stationary(r, r0, p)?,
            ))
        })();
        let (fa, ft, u, ratio) = row?;
        t.push(vec![r.into(), fa.into(), ft.into(), u.into(), ratio.into()]);
    }
    if let ReleaseDistance::Finite(r0) = r0 {
        t.meta("f_retardation_at_r0", format_number(steady::stationary_retardation_force(r0, p)?.f_z));
    }
    write_table(&t, cfg.out.as_deref())
}

pub fn verify(cfg: &RunConfig) -> Result<(), CliError> {
    let report = verify::run_all(VerifyOptions {
        tolerance_scale: cfg.tolerance_scale,
    });
    let orders: Vec<String> = report
        .recursion_orders
        .iter()
        .map(|o| format!("{o:.3}"))
        .collect();
    let text = format!("{report}\nrecursion orders: [{}]\n", orders.join(", "));
    emit(&text, cfg.out.as_deref())?;
    match report.failures() {
        0 => Ok(()),
        n => Err(CliError::Verification(n)),
    }
}
