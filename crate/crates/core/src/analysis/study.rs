//! Solves on mesh sequences: single runs, convergence tables and the
//! viscosity-robustness comparison.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use super::cases::{CaseName, Domain, ManufacturedCase};
use super::norms::{coefficient_norm, compute_errors, weak_divergence_residual, ErrorNorms};
use crate::assembly::{assemble_system, BoundaryData, Discretization, GlobalSystem, Scheme};
use crate::error::{Error, Result};
use crate::mesh::{
    generate_deformed_rect_mesh, generate_hex_mesh, generate_lshape_mesh, generate_rect_mesh,
    hex_columns_per_unit, PolyMesh, DEFAULT_DEFORM_AMPLITUDE,
};
use crate::solver::{solve, Solution};

/// Mesh sequence. For the square grids the level is the number of cells
/// per side; for the hexagonal tilings it is the refinement level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshFamily {
    Rect,
    Deformed { amplitude: f64, seed: u64 },
    Hex,
    LShape,
}

impl MeshFamily {
    pub fn deformed(seed: u64) -> Self {
        MeshFamily::Deformed {
            amplitude: DEFAULT_DEFORM_AMPLITUDE,
            seed,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MeshFamily::Rect => "rect",
            MeshFamily::Deformed { .. } => "deformed",
            MeshFamily::Hex => "hex",
            MeshFamily::LShape => "lshape",
        }
    }

    pub fn domain(&self) -> Domain {
        match self {
            MeshFamily::LShape => Domain::LShape,
            _ => Domain::UnitSquare,
        }
    }

    pub fn build(&self, level: usize) -> Result<PolyMesh> {
        if level == 0 {
            return Err(Error::Config("mesh level must be at least 1".into()));
        }
        match *self {
            MeshFamily::Rect => Ok(generate_rect_mesh(level)),
            MeshFamily::Deformed { amplitude, seed } => {
                generate_deformed_rect_mesh(level, amplitude, seed)
            }
            MeshFamily::Hex => Ok(generate_hex_mesh(level)),
            MeshFamily::LShape => Ok(generate_lshape_mesh(level)),
        }
    }

    /// Nominal mesh size; halves exactly between refinement steps.
    pub fn nominal_h(&self, level: usize) -> f64 {
        match self {
            MeshFamily::Rect | MeshFamily::Deformed { .. } => 1.0 / level as f64,
            MeshFamily::Hex | MeshFamily::LShape => 1.0 / hex_columns_per_unit(level) as f64,
        }
    }

    pub fn mesh_id(&self, level: usize) -> String {
        match self {
            MeshFamily::Deformed { seed, .. } => format!("deformed-{level}-s{seed}"),
            f => format!("{}-{level}", f.name()),
        }
    }

    /// Two successive coarse levels used by the stability monitors.
    pub fn coarse_pair(&self) -> [usize; 2] {
        match self {
            MeshFamily::Rect | MeshFamily::Deformed { .. } => [4, 8],
            MeshFamily::Hex | MeshFamily::LShape => [1, 2],
        }
    }
}

impl fmt::Display for MeshFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeshFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rect" => Ok(MeshFamily::Rect),
            "deformed" => Ok(MeshFamily::deformed(0)),
            "hex" => Ok(MeshFamily::Hex),
            "lshape" => Ok(MeshFamily::LShape),
            _ => Err(Error::Config(format!("unknown mesh family `{s}` (rect|deformed|hex|lshape)"))),
        }
    }
}

/// Errors and bookkeeping of one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub case: CaseName,
    pub scheme: Scheme,
    pub k: usize,
    pub nu: f64,
    pub level: usize,
    pub h: f64,
    pub mesh_id: String,
    pub n_cells: usize,
    pub dofs: usize,
    pub errors: ErrorNorms,
    pub wall_ms: f64,
    /// relative residual of the linear solve
    pub residual: f64,
    /// `max |(div_w u_h, chi)| / ||u_h||`
    pub divergence: f64,
    /// `\int p_h`
    pub pressure_integral: f64,
}

/// Assembled system, solution and errors of one run.
#[derive(Debug, Clone)]
pub struct Run {
    pub system: GlobalSystem,
    pub solution: Solution,
    pub report: ErrorReport,
}

fn check_case(case: &ManufacturedCase, disc: &Discretization, family: Option<MeshFamily>) -> Result<()> {
    if let Some(f) = family {
        if f.domain() != case.domain {
            return Err(Error::Config(format!(
                "case {} lives on a different domain than mesh family {f}",
                case.name
            )));
        }
    }
    let area = disc.mesh.total_area();
    if (area - case.domain.area()).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "case {} needs domain area {}, mesh has {area}",
            case.name,
            case.domain.area()
        )));
    }
    Ok(())
}

/// Assemble, solve and measure one case on a prepared discretization.
pub fn run_case(disc: &Discretization, case: &ManufacturedCase, scheme: Scheme, level: usize, h: f64) -> Result<Run> {
    check_case(case, disc, None)?;
    let start = Instant::now();
    let g = |x| case.u(x);
    let bc = if case.homogeneous {
        BoundaryData::Homogeneous
    } else {
        BoundaryData::Dirichlet(&g)
    };
    let system = assemble_system(disc, case.nu, |x| case.f(x), scheme, bc)?;
    let solution = solve(&system)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let errors = compute_errors(disc, &solution.velocity, &solution.pressure, case)?;
    let unorm = coefficient_norm(&solution.velocity);
    let report = ErrorReport {
        case: case.name,
        scheme,
        k: disc.degree,
        nu: case.nu,
        level,
        h,
        mesh_id: disc.mesh_id.clone(),
        n_cells: disc.mesh.n_cells(),
        dofs: system.dim(),
        errors,
        wall_ms,
        residual: solution.stats.residual,
        divergence: weak_divergence_residual(disc, &solution.velocity) / unorm.max(f64::MIN_POSITIVE),
        pressure_integral: solution.pressure.integral(&disc.cells),
    };
    Ok(Run {
        system,
        solution,
        report,
    })
}

/// Execution settings shared by every run of a study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// single-threaded, bit-reproducible execution
    pub serial: bool,
    /// quadrature degree for the load integrals, if not the default
    pub load_quadrature: Option<usize>,
}

impl RunOptions {
    pub fn serial() -> Self {
        Self {
            serial: true,
            ..Self::default()
        }
    }
}

/// Build the discretization of one level, timing it.
pub fn discretize(family: MeshFamily, level: usize, k: usize, opts: RunOptions) -> Result<(Discretization, f64)> {
    let start = Instant::now();
    let mesh = family.build(level)?;
    let mut disc = Discretization::new(mesh, k, opts.serial)?.with_id(family.mesh_id(level));
    if let Some(q) = opts.load_quadrature {
        disc = disc.with_load_quadrature(q)?;
    }
    Ok((disc, start.elapsed().as_secs_f64() * 1e3))
}

/// Runs of every `(nu, scheme)` pair on one level; the discretization is
/// shared and its build time is charged to every run.
pub fn run_level(
    case: CaseName,
    family: MeshFamily,
    level: usize,
    k: usize,
    nus: &[f64],
    schemes: &[Scheme],
    opts: RunOptions,
) -> Result<Vec<ErrorReport>> {
    let wrap = |e| Error::Level {
        level,
        source: Box::new(e),
    };
    let (disc, setup_ms) = discretize(family, level, k, opts).map_err(wrap)?;
    let h = family.nominal_h(level);
    let mut out = Vec::new();
    for &nu in nus {
        let c = ManufacturedCase::new(case, nu);
        check_case(&c, &disc, Some(family))?;
        for &scheme in schemes {
            let mut r = run_case(&disc, &c, scheme, level, h).map_err(wrap)?.report;
            r.wall_ms += setup_ms;
            out.push(r);
        }
    }
    Ok(out)
}

/// Observed orders between consecutive levels of one case, scheme, k and nu.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub reports: Vec<ErrorReport>,
    /// `[energy, velocity L2, pressure L2]`; `None` on the first level
    pub rates: Vec<Option<[f64; 3]>>,
}

pub fn observed_rate(e0: f64, e1: f64, h0: f64, h1: f64) -> f64 {
    (e0 / e1).ln() / (h0 / h1).ln()
}

impl RateTable {
    pub fn new(reports: Vec<ErrorReport>) -> Self {
        let mut rates = vec![None];
        for w in reports.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let same = a.case == b.case && a.scheme == b.scheme && a.k == b.k && a.nu == b.nu;
            rates.push(same.then(|| {
                [
                    observed_rate(a.errors.energy, b.errors.energy, a.h, b.h),
                    observed_rate(a.errors.velocity_l2, b.errors.velocity_l2, a.h, b.h),
                    observed_rate(a.errors.pressure_l2, b.errors.pressure_l2, a.h, b.h),
                ]
            }));
        }
        rates.truncate(reports.len());
        Self { reports, rates }
    }

    /// Rates between the last two levels.
    pub fn terminal(&self) -> Option<[f64; 3]> {
        self.rates.last().copied().flatten()
    }

    pub fn last(&self) -> Option<&ErrorReport> {
        self.reports.last()
    }
}

fn check_levels(levels: &[usize]) -> Result<()> {
    if levels.len() < 2 {
        return Err(Error::Config("a convergence study needs at least two levels".into()));
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("levels must be strictly increasing".into()));
    }
    Ok(())
}

/// Convergence tables, one per scheme, over increasing levels.
pub fn convergence_study(
    case: CaseName,
    family: MeshFamily,
    k: usize,
    nu: f64,
    levels: &[usize],
    schemes: &[Scheme],
    opts: RunOptions,
) -> Result<Vec<RateTable>> {
    check_levels(levels)?;
    let mut per_scheme: Vec<Vec<ErrorReport>> = vec![Vec::new(); schemes.len()];
    for &level in levels {
        for r in run_level(case, family, level, k, &[nu], schemes, opts)? {
            let i = schemes.iter().position(|&s| s == r.scheme).expect("requested scheme");
            per_scheme[i].push(r);
        }
    }
    Ok(per_scheme.into_iter().map(RateTable::new).collect())
}

/// One named pass/fail observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub threshold: String,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, observed: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            observed,
            threshold: format!("<= {limit:e}"),
            pass: observed <= limit,
        }
    }

    pub fn at_least(name: impl Into<String>, observed: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            observed,
            threshold: format!(">= {limit:e}"),
            pass: observed >= limit,
        }
    }

    pub fn within(name: impl Into<String>, observed: f64, target: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            observed,
            threshold: format!("{target} +- {tol}"),
            pass: (observed - target).abs() <= tol,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: observed {:.4e}, required {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.observed,
            self.threshold
        )
    }
}

/// Errors per viscosity and scheme with the scaling checks.
#[derive(Debug, Clone)]
pub struct RobustnessReport {
    pub reports: Vec<ErrorReport>,
    pub checks: Vec<Check>,
}

impl RobustnessReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn rel_spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    (max - min) / max.abs().max(f64::MIN_POSITIVE)
}

/// Compare the schemes across viscosities on one mesh.
///
/// For a body force whose viscosity-dependent part is `-nu Lap u`, the
/// pressure-robust velocity does not depend on `nu` and its pressure error
/// is proportional to `nu`; the standard velocity error grows like `1/nu`.
pub fn robustness_diagnostics(
    case: CaseName,
    family: MeshFamily,
    level: usize,
    k: usize,
    nus: &[f64],
    opts: RunOptions,
) -> Result<RobustnessReport> {
    if nus.len() < 2 {
        return Err(Error::Config("need at least two viscosities".into()));
    }
    let reports = run_level(case, family, level, k, nus, &Scheme::ALL, opts)?;
    let pick = |s: Scheme| -> Vec<&ErrorReport> { reports.iter().filter(|r| r.scheme == s).collect() };
    let robust = pick(Scheme::Robust);
    let standard = pick(Scheme::Standard);
    let mut checks = Vec::new();
    let ve: Vec<f64> = robust.iter().map(|r| r.errors.energy).collect();
    let vl: Vec<f64> = robust.iter().map(|r| r.errors.velocity_l2).collect();
    checks.push(Check::at_most("robust energy error spread across nu", rel_spread(&ve), 1e-6));
    checks.push(Check::at_most("robust velocity L2 error spread across nu", rel_spread(&vl), 1e-6));
    for i in 1..nus.len() {
        let step = nus[i - 1] / nus[i];
        let tag = format!("nu {:e} -> {:e}", nus[i - 1], nus[i]);
        let pr = robust[i - 1].errors.pressure_l2 / robust[i].errors.pressure_l2;
        checks.push(Check::within(
            format!("robust pressure error ratio / nu ratio, {tag}"),
            pr / step,
            1.0,
            0.01,
        ));
        let sr = standard[i].errors.energy / standard[i - 1].errors.energy;
        checks.push(Check::within(
            format!("standard energy error ratio / inverse nu ratio, {tag}"),
            sr / step,
            1.0,
            0.05,
        ));
    }
    Ok(RobustnessReport { reports, checks })
}
