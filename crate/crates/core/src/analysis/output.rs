//! CSV tables and legacy VTK field dumps.

use std::io::Write;

use super::study::{ErrorReport, RateTable};
use crate::assembly::Discretization;
use crate::error::Result;
use crate::localspaces::{PressureFunction, WgFunction};
use crate::polybasis::tri_quadrature;

pub const CSV_HEADER: &str =
    "case,scheme,k,nu,level,h,dofs,err_energy,rate_energy,err_ul2,rate_ul2,err_pl2,rate_pl2,wall_ms";

fn fmt_rate(r: Option<f64>) -> String {
    r.map(|r| format!("{r:.4}")).unwrap_or_default()
}

/// One CSV line. `timing = false` writes `wall_ms` as 0 so that repeated
/// runs produce identical bytes.
pub fn csv_row(r: &ErrorReport, rates: Option<[f64; 3]>, timing: bool) -> String {
    let rate = |i: usize| fmt_rate(rates.map(|r| r[i]));
    format!(
        "{},{},{},{:e},{},{:.6e},{},{:.6e},{},{:.6e},{},{:.6e},{},{}",
        r.case,
        r.scheme,
        r.k,
        r.nu,
        r.level,
        r.h,
        r.dofs,
        r.errors.energy,
        rate(0),
        r.errors.velocity_l2,
        rate(1),
        r.errors.pressure_l2,
        rate(2),
        if timing { format!("{:.1}", r.wall_ms) } else { "0".into() },
    )
}

pub fn write_csv<W: Write>(mut w: W, tables: &[RateTable], timing: bool) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for t in tables {
        for (r, rate) in t.reports.iter().zip(&t.rates) {
            writeln!(w, "{}", csv_row(r, *rate, timing))?;
        }
    }
    Ok(())
}

/// Reports without rates (each on its own), e.g. a robustness sweep.
pub fn write_reports_csv<W: Write>(mut w: W, reports: &[ErrorReport], timing: bool) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in reports {
        writeln!(w, "{}", csv_row(r, None, timing))?;
    }
    Ok(())
}

/// Legacy ASCII VTK point cloud: `u_0` and `p_h` sampled at quadrature
/// points of every sub-triangle.
pub fn write_vtk<W: Write>(
    mut w: W,
    disc: &Discretization,
    u: &WgFunction,
    p: &PressureFunction,
    title: &str,
) -> Result<()> {
    let rule = tri_quadrature(2 * disc.degree.max(1))?;
    let mut pts = Vec::new();
    let mut vel = Vec::new();
    let mut pre = Vec::new();
    let mut cell_id = Vec::new();
    for cs in &disc.cells {
        let lc = &cs.local;
        for map in &lc.sub.maps {
            for xh in &rule.points {
                let x = map.forward(*xh);
                pts.push(x);
                vel.push(u.eval_interior(lc, x));
                pre.push(p.eval(lc, x));
                cell_id.push(lc.cell);
            }
        }
    }
    let n = pts.len();
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{}", title.lines().next().unwrap_or("polywg"))?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {n} double")?;
    for x in &pts {
        writeln!(w, "{:.12e} {:.12e} 0", x[0], x[1])?;
    }
    writeln!(w, "CELLS {n} {}", 2 * n)?;
    for i in 0..n {
        writeln!(w, "1 {i}")?;
    }
    writeln!(w, "CELL_TYPES {n}")?;
    for _ in 0..n {
        writeln!(w, "1")?;
    }
    writeln!(w, "POINT_DATA {n}")?;
    writeln!(w, "VECTORS velocity double")?;
    for v in &vel {
        writeln!(w, "{:.12e} {:.12e} 0", v[0], v[1])?;
    }
    writeln!(w, "SCALARS pressure double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for v in &pre {
        writeln!(w, "{v:.12e}")?;
    }
    writeln!(w, "SCALARS cell int 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for c in &cell_id {
        writeln!(w, "{c}")?;
    }
    Ok(())
}
