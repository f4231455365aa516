//! The four subcommands. Each writes into the output directory and returns
//! whether all of its checks passed.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use polywg::analysis::{
    discretize, robustness_diagnostics, run_case, run_level, run_property_suite, write_csv,
    write_reports_csv, write_vtk, Check, ErrorReport, ManufacturedCase, PropsConfig, RateTable,
    RunOptions,
};

use crate::config::{Command, Resolved};

pub const INCOMPLETE_MARKER: &str = "INCOMPLETE";

/// Run the configured command. Partial output is kept on error and flagged
/// by an `INCOMPLETE` file holding the error message.
pub fn execute(cfg: &Resolved) -> Result<bool> {
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let marker = cfg.out.join(INCOMPLETE_MARKER);
    if marker.exists() {
        fs::remove_file(&marker)?;
    }
    let result = match cfg.command {
        Command::Solve => solve(cfg),
        Command::Convergence => convergence(cfg),
        Command::Robustness => robustness(cfg),
        Command::Props => props(cfg),
    };
    if let Err(e) = &result {
        fs::write(&marker, format!("{e:#}\n"))?;
    }
    result
}

fn options(cfg: &Resolved) -> RunOptions {
    RunOptions {
        serial: cfg.serial,
        load_quadrature: cfg.quadrature,
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    Ok(BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?))
}

fn print_report(r: &ErrorReport) {
    println!(
        "{:<8} nu={:<8e} level={:<3} dofs={:<7} energy={:.4e} u_l2={:.4e} p_l2={:.4e} residual={:.1e}",
        r.scheme.name(),
        r.nu,
        r.level,
        r.dofs,
        r.errors.energy,
        r.errors.velocity_l2,
        r.errors.pressure_l2,
        r.residual
    );
}

fn print_checks(checks: &[Check]) -> bool {
    for c in checks {
        println!("{c}");
    }
    checks.iter().all(|c| c.pass)
}

fn solve(cfg: &Resolved) -> Result<bool> {
    let (disc, setup_ms) = discretize(cfg.mesh, cfg.level, cfg.k, options(cfg))?;
    let h = cfg.mesh.nominal_h(cfg.level);
    let mut reports = Vec::new();
    let mut result = Ok(());
    'outer: for &nu in &cfg.nus {
        let case = ManufacturedCase::new(cfg.case, nu);
        if case.domain != cfg.mesh.domain() {
            result = Err(anyhow::anyhow!("case {} lives on a different domain than mesh {}", cfg.case.name(), cfg.mesh));
            break;
        }
        for scheme in cfg.scheme.schemes() {
            let run = match run_case(&disc, &case, scheme, cfg.level, h) {
                Ok(run) => run,
                Err(e) => {
                    result = Err(e.into());
                    break 'outer;
                }
            };
            let stem = format!("{}_{}_nu{:e}", cfg.case.name(), scheme.name(), nu);
            if cfg.dump_fields {
                let title = format!("{} {} k={} nu={:e}", disc.mesh_id, scheme.name(), cfg.k, nu);
                write_vtk(create(&cfg.out, &format!("{stem}.vtk"))?, &disc, &run.solution.velocity, &run.solution.pressure, &title)?;
            }
            if cfg.dump_matrix {
                run.system.write_matrix_market(create(&cfg.out, &format!("{stem}.mtx"))?)?;
            }
            let mut r = run.report;
            r.wall_ms += setup_ms;
            print_report(&r);
            reports.push(r);
        }
    }
    write_reports_csv(create(&cfg.out, "results.csv")?, &reports, !cfg.serial)?;
    result.map(|()| true)
}

fn convergence(cfg: &Resolved) -> Result<bool> {
    let schemes = cfg.scheme.schemes();
    let mut reports = Vec::new();
    let mut result = Ok(());
    for &level in &cfg.levels {
        match run_level(cfg.case, cfg.mesh, level, cfg.k, &cfg.nus, &schemes, options(cfg)) {
            Ok(rs) => {
                rs.iter().for_each(print_report);
                reports.extend(rs);
            }
            Err(e) => {
                result = Err(e.into());
                break;
            }
        }
    }
    let mut tables = Vec::new();
    for &nu in &cfg.nus {
        for &scheme in &schemes {
            let rs: Vec<ErrorReport> = reports.iter().filter(|r| r.nu == nu && r.scheme == scheme).cloned().collect();
            if !rs.is_empty() {
                tables.push(RateTable::new(rs));
            }
        }
    }
    write_csv(create(&cfg.out, "results.csv")?, &tables, !cfg.serial)?;
    for t in &tables {
        if let (Some(last), Some(rates)) = (t.last(), t.terminal()) {
            println!(
                "rates {:<8} nu={:<8e}: energy {:.3}  u_l2 {:.3}  p_l2 {:.3}",
                last.scheme.name(),
                last.nu,
                rates[0],
                rates[1],
                rates[2]
            );
        }
    }
    result.map(|()| true)
}

fn robustness(cfg: &Resolved) -> Result<bool> {
    let report = robustness_diagnostics(cfg.case, cfg.mesh, cfg.level, cfg.k, &cfg.nus, options(cfg))?;
    report.reports.iter().for_each(print_report);
    write_reports_csv(create(&cfg.out, "results.csv")?, &report.reports, !cfg.serial)?;
    let mut w = create(&cfg.out, "robustness.txt")?;
    writeln!(w, "# robustness: case={} mesh={} level={} k={}", cfg.case.name(), cfg.mesh, cfg.level, cfg.k)?;
    for c in &report.checks {
        writeln!(w, "{c}")?;
    }
    w.flush()?;
    Ok(print_checks(&report.checks))
}

fn props(cfg: &Resolved) -> Result<bool> {
    let pc = PropsConfig {
        samples: cfg.samples,
        serial: cfg.serial,
        ..PropsConfig::new(cfg.mesh, cfg.level, cfg.k, cfg.seed)
    };
    let report = run_property_suite(pc)?;
    let mut w = create(&cfg.out, "props.txt")?;
    report.write_summary(&mut w)?;
    w.flush()?;
    report.write_summary(std::io::stdout().lock())?;
    if report.checks.is_empty() {
        bail!("the property suite ran no checks");
    }
    Ok(report.passed())
}
