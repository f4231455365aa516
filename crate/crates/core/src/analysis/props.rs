//! The invariant suite: local-space, reconstruction, assembly and solver
//! properties checked on one mesh, plus two coarse-level stability monitors.

use std::f64::consts::SQRT_2;
use std::io::Write;

use faer::linalg::triangular_solve::solve_lower_triangular_in_place;
use faer::prelude::*;
use faer::{Mat, Par, Side};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::cases::{CaseName, Domain, ManufacturedCase};
use super::norms::{coefficient_norm, local_h1h_matrix, reconstruction_divergence_l2, weak_divergence_residual};
use super::study::{run_case, Check, MeshFamily};
use crate::assembly::{assemble_div, assemble_rhs, assemble_stiffness, assemble_system, BoundaryData, Discretization, Scheme};
use crate::error::Result;
use crate::localspaces::{
    build_lambda_basis, interface_rows, interpolate_pressure, lambda_dim, project_qb, project_qbb,
    weak_divergence, weak_gradient, LocalCell, WgFunction,
};
use crate::mesh::{PolyMesh, Point};
use crate::polybasis::{monomial_exponents, EdgePolyBasis};
use crate::reconstruct::{build_recon_operator, check_conditions, eval_recon, reconstruct, ConditionCheck};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropsConfig {
    pub family: MeshFamily,
    pub level: usize,
    pub k: usize,
    pub seed: u64,
    /// random WG functions per reconstruction check
    pub samples: usize,
    pub serial: bool,
}

impl PropsConfig {
    pub fn new(family: MeshFamily, level: usize, k: usize, seed: u64) -> Self {
        Self {
            family,
            level,
            k,
            seed,
            samples: 50,
            serial: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PropsReport {
    pub config: PropsConfig,
    pub checks: Vec<Check>,
    /// checks that were not run, with the reason
    pub skipped: Vec<String>,
}

impl PropsReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn write_summary<W: Write>(&self, mut w: W) -> Result<()> {
        let c = &self.config;
        writeln!(
            w,
            "# property suite: mesh={} level={} k={} seed={} samples={}",
            c.family, c.level, c.k, c.seed, c.samples
        )?;
        for check in &self.checks {
            writeln!(w, "{check}")?;
        }
        for s in &self.skipped {
            writeln!(w, "# skipped: {s}")?;
        }
        let failed = self.failures().count();
        writeln!(
            w,
            "# {} checks, {} failed: {}",
            self.checks.len(),
            failed,
            if failed == 0 { "PASS" } else { "FAIL" }
        )?;
        Ok(())
    }
}

fn single(points: Vec<Point>) -> PolyMesh {
    let ids = (0..points.len()).collect();
    PolyMesh::new(points, vec![ids]).expect("reference cell is valid")
}

fn reference_cells() -> Vec<(&'static str, PolyMesh)> {
    let hex = (0..6)
        .map(|i| {
            let t = std::f64::consts::PI / 3.0 * i as f64;
            [t.cos(), t.sin()]
        })
        .collect();
    vec![
        ("pentagon", single(vec![[0.0, 0.0], [1.0, 0.0], [1.3, 0.8], [0.5, 1.3], [-0.3, 0.8]])),
        ("square", single(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])),
        ("hexagon", single(hex)),
    ]
}

/// The 9x9 reconstruction matrix for `k = 0` on a pentagon whose fan
/// triangles are `(0,0),(1,0),(1,1)`, `(0,0),(1,1),(0,1)`, `(0,0),(0,1),(-1,1)`
/// up to the ratios of triangle areas.
fn hand_pentagon_matrix(areas: &[f64]) -> DMatrix<f64> {
    let (r2, r3) = (areas[0] / areas[1], areas[0] / areas[2]);
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(9, 9, &[
        0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        SQRT_2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, SQRT_2, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, SQRT_2, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0,
        0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0,
        -SQRT_2, -1.0, -1.0, SQRT_2 * r2, r2, r2, 0.0, 0.0, 0.0,
        -SQRT_2, -1.0, -1.0, 0.0, 0.0, 0.0, SQRT_2 * r3, r3, r3,
    ]);
    m
}

fn local_space_checks(disc: &Discretization, checks: &mut Vec<Check>) -> Result<()> {
    let mut area = 0.0f64;
    for cs in &disc.cells {
        let lc = &cs.local;
        let s: f64 = lc.sub.areas.iter().sum();
        area = area.max((s - lc.area).abs() / lc.area);
    }
    checks.push(Check::at_most("sub-triangle areas sum to the cell area (relative)", area, 1e-12));

    let mut mismatches = 0usize;
    for (_, m) in reference_cells() {
        for k in 0..=2 {
            let lc = LocalCell::new(&m, 0, k)?;
            if build_lambda_basis(&lc)?.dim() != lambda_dim(lc.sub.n_triangles(), k) {
                mismatches += 1;
            }
        }
    }
    for cs in &disc.cells {
        if cs.lambda.dim() != lambda_dim(cs.local.sub.n_triangles(), disc.degree) {
            mismatches += 1;
        }
    }
    checks.push(Check::at_most(
        "Lambda_k dimension identity (pentagon, square, hexagon for k=0..2 and every mesh cell)",
        mismatches as f64,
        0.0,
    ));

    let res = disc
        .cells
        .iter()
        .map(|cs| Ok((interface_rows(&cs.local)? * &cs.lambda.coeffs).amax()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(Check::at_most("Lambda_k basis: normal jumps and divergence compatibility", res, 1e-11));
    Ok(())
}

fn random_wg(mesh: &PolyMesh, k: usize, rng: &mut ChaCha8Rng, homogeneous: bool) -> WgFunction {
    let mut v = WgFunction::zeros(mesh, k);
    v.interior.iter_mut().for_each(|x| *x = rng.random_range(-1.0..1.0));
    v.edge.iter_mut().for_each(|x| *x = rng.random_range(-1.0..1.0));
    if homogeneous {
        for (e, edge) in mesh.edges.iter().enumerate() {
            if edge.boundary {
                v.edge_block_mut(e, 0).iter_mut().for_each(|x| *x = 0.0);
                v.edge_block_mut(e, 1).iter_mut().for_each(|x| *x = 0.0);
            }
        }
    }
    v
}

/// Largest normal-jump moment of `Pi_h v` across interior mesh edges,
/// relative to `max |v|`.
fn global_normal_jump(disc: &Discretization, v: &WgFunction) -> Result<f64> {
    let k = disc.degree;
    let recs: Vec<_> = disc
        .cells
        .iter()
        .zip(&disc.recon)
        .map(|(cs, op)| reconstruct(op, &v.local_dofs(&cs.local)))
        .collect();
    let scale = coefficient_max(v);
    let mut worst = 0.0f64;
    let mut leg = vec![0.0; k + 1];
    for (e, edge) in disc.mesh.edges.iter().enumerate() {
        if edge.boundary {
            continue;
        }
        let [a, b] = edge.vertices;
        let basis = EdgePolyBasis::new(k, disc.mesh.vertices[a], disc.mesh.vertices[b]);
        let mut mom = vec![0.0; k + 1];
        for (side, &c) in edge.cells.iter().enumerate() {
            let lc = &disc.cells[c].local;
            let i = lc.edge_ids.iter().position(|&x| x == e).expect("edge of its cell");
            let (t, _) = lc.sub.boundary_edges[i];
            let sign = if side == 0 { 1.0 } else { -1.0 };
            for (sp, x, w) in crate::localspaces::segment_quadrature(&basis, 2 * k + 2)? {
                basis.eval_into(sp, &mut leg);
                let (val, _) = eval_recon(lc, &recs[c], t, x);
                let vn = val[0] * edge.normal[0] + val[1] * edge.normal[1];
                for p in 0..=k {
                    mom[p] += sign * w * vn * leg[p];
                }
            }
        }
        worst = mom.iter().fold(worst, |m, x| m.max(x.abs() / edge.length));
    }
    Ok(worst / scale)
}

fn coefficient_max(v: &WgFunction) -> f64 {
    v.interior.iter().chain(&v.edge).fold(0.0f64, |a, b| a.max(b.abs())).max(f64::MIN_POSITIVE)
}

fn reconstruction_checks(disc: &Discretization, cfg: &PropsConfig, checks: &mut Vec<Check>) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let samples: Vec<WgFunction> = (0..cfg.samples)
        .map(|_| random_wg(&disc.mesh, disc.degree, &mut rng, false))
        .collect();
    let per_cell = |c: usize| -> Result<ConditionCheck> {
        let mut acc = ConditionCheck::default();
        for v in &samples {
            let local = v.local_dofs(&disc.cells[c].local);
            acc.merge(&check_conditions(&disc.cells[c], &disc.recon[c], &local)?);
        }
        Ok(acc)
    };
    let parts = if cfg.serial {
        (0..disc.cells.len()).map(per_cell).collect::<Result<Vec<_>>>()?
    } else {
        (0..disc.cells.len()).into_par_iter().map(per_cell).collect::<Result<Vec<_>>>()?
    };
    let mut all = ConditionCheck::default();
    parts.iter().for_each(|p| all.merge(p));
    let n = cfg.samples;
    let tol = 1e-10;
    checks.push(Check::at_most(format!("Pi_h boundary flux moments, {n} random v"), all.flux, tol));
    checks.push(Check::at_most(format!("Pi_h cell moments along n1, {n} random v"), all.n1_moments, tol));
    checks.push(Check::at_most(format!("Pi_h triangle moments along n2, {n} random v"), all.n2_moments, tol));
    checks.push(Check::at_most(format!("Pi_h normal jumps inside cells, {n} random v"), all.jumps, tol));
    checks.push(Check::at_most(format!("Pi_h divergence compatibility, {n} random v"), all.div_compat, tol));
    checks.push(Check::at_most(format!("Pi_h moments against [P_(k-1)]^2, {n} random v"), all.moments, tol));
    checks.push(Check::at_most(format!("Pi_h divergence transfer div Pi_h v = div_w v, {n} random v"), all.divergence, tol));

    let mut jump = 0.0f64;
    for v in samples.iter().take(5) {
        jump = jump.max(global_normal_jump(disc, v)?);
    }
    checks.push(Check::at_most("Pi_h v normal continuity across mesh edges", jump, tol));

    let pent = &reference_cells()[0].1;
    let lc = LocalCell::new(pent, 0, 0)?;
    let op = build_recon_operator(&lc, &build_lambda_basis(&lc)?)?;
    let dev = (&op.matrix - hand_pentagon_matrix(&lc.sub.areas)).amax();
    checks.push(Check::at_most("pentagon k=0 reconstruction matrix against the hand derivation", dev, 1e-12));
    Ok(())
}

/// Random polynomial of total degree `deg` with its gradient.
struct RandomPoly {
    coef: Vec<f64>,
    exps: Vec<(usize, usize)>,
}

impl RandomPoly {
    fn new(deg: usize, rng: &mut ChaCha8Rng) -> Self {
        let exps = monomial_exponents(deg);
        let coef = exps.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
        Self { coef, exps }
    }

    fn eval(&self, x: Point) -> f64 {
        self.coef
            .iter()
            .zip(&self.exps)
            .map(|(c, &(a, b))| c * x[0].powi(a as i32) * x[1].powi(b as i32))
            .sum()
    }

    fn grad(&self, x: Point) -> Point {
        let mut g = [0.0; 2];
        for (c, &(a, b)) in self.coef.iter().zip(&self.exps) {
            if a > 0 {
                g[0] += c * a as f64 * x[0].powi(a as i32 - 1) * x[1].powi(b as i32);
            }
            if b > 0 {
                g[1] += c * b as f64 * x[0].powi(a as i32) * x[1].powi(b as i32 - 1);
            }
        }
        g
    }
}

fn commutativity_checks(disc: &Discretization, cfg: &PropsConfig, checks: &mut Vec<Check>) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let k = disc.degree;
    let (mut grad_dev, mut div_dev) = (0.0f64, 0.0f64);
    for cs in &disc.cells {
        let lc = &cs.local;
        let p0 = RandomPoly::new(k + 1, &mut rng);
        let p1 = RandomPoly::new(k + 1, &mut rng);
        let u = |x: Point| [p0.eval(x), p1.eval(x)];
        let [a, b] = lc.project_vector(u)?;
        let s = lc.scalar_dofs();
        let np = lc.dim_p();
        let mut local = vec![0.0; 2 * s];
        local[..np].copy_from_slice(&a);
        local[s..s + np].copy_from_slice(&b);
        for (i, &e) in lc.edge_ids.iter().enumerate() {
            let [ex, ey] = project_qb(&disc.mesh, e, k, u)?;
            let o = lc.edge_offset(i);
            local[o..o + k + 1].copy_from_slice(&ex);
            local[s + o..s + o + k + 1].copy_from_slice(&ey);
        }
        let g = weak_gradient(&cs.ops, &local);
        let want = project_qbb(lc, &cs.lambda, |x| [p0.grad(x), p1.grad(x)])?;
        for c in 0..2 {
            grad_dev = grad_dev.max((&g[c] - &want[c]).amax());
        }
        let d = weak_divergence(lc, &cs.ops, &local);
        let dd = lc.project_scalar(|x| p0.grad(x)[0] + p1.grad(x)[1])?;
        div_dev = div_dev.max((d - DVector::from_vec(dd)).amax());
    }
    checks.push(Check::at_most("weak gradient of Q_h phi equals projected gradient", grad_dev, 1e-10));
    checks.push(Check::at_most("weak divergence of Q_h phi equals projected divergence", div_dev, 1e-10));
    Ok(())
}

fn assembly_checks(disc: &Discretization, checks: &mut Vec<Check>) -> Result<()> {
    let zf = ManufacturedCase::new(CaseName::ZeroFlow, 1.0);
    let f = |x: Point| zf.f(x);
    let robust = assemble_system(disc, 1.0, f, Scheme::Robust, BoundaryData::Homogeneous)?;
    let standard = assemble_system(disc, 1.0, f, Scheme::Standard, BoundaryData::Homogeneous)?;
    let differing = if robust.entries.len() != standard.entries.len() {
        robust.entries.len().max(standard.entries.len())
    } else {
        robust
            .entries
            .iter()
            .zip(&standard.entries)
            .filter(|(a, b)| a.0 != b.0 || a.1 != b.1 || a.2.to_bits() != b.2.to_bits())
            .count()
    };
    checks.push(Check::at_most(
        "stiffness and divergence blocks bit-identical across schemes (differing entries)",
        differing as f64,
        0.0,
    ));

    let a = robust.a_block();
    let amax = a.iter().fold(0.0f64, |m, e| m.max(e.2.abs()));
    let mut lookup = std::collections::HashMap::with_capacity(a.len());
    for &(r, c, v) in &a {
        lookup.insert((r, c), v);
    }
    let asym = a
        .iter()
        .map(|&(r, c, v)| (v - lookup.get(&(c, r)).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
        / amax;
    checks.push(Check::at_most("A block symmetric (relative)", asym, 1e-12));

    // (grad p, Pi_h v) = -(Qcal_h p, div_w v): the robust load of a gradient
    // is B^T applied to the projected pressure
    let load = assemble_rhs(disc, f, Scheme::Robust)?;
    let qp = interpolate_pressure(&disc.mesh, &disc.cells, |x| zf.p(x))?;
    let mut res = load[..disc.dofs.n_velocity()].to_vec();
    for (r, c, v) in assemble_div(disc) {
        res[c] += v * qp.coeffs[r - disc.dofs.pressure_offset];
    }
    let lmax = load.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let dev = res.iter().fold(0.0f64, |m, x| m.max(x.abs())) / lmax;
    checks.push(Check::at_most("robust load of a gradient lies in the range of B^T", dev, 1e-11));
    Ok(())
}

fn solve_checks(disc: &Discretization, family: MeshFamily, checks: &mut Vec<Check>) -> Result<()> {
    let case = match family.domain() {
        Domain::UnitSquare => CaseName::Poly61,
        Domain::LShape => CaseName::LShape,
    };
    let c = ManufacturedCase::new(case, 1.0);
    for scheme in Scheme::ALL {
        let run = run_case(disc, &c, scheme, 0, 0.0)?;
        let tag = format!("{case}, {scheme}");
        checks.push(Check::at_most(format!("relative residual ({tag})"), run.solution.stats.residual, 1e-10));
        checks.push(Check::at_most(format!("|B u_h| / |u_h| after solve ({tag})"), run.report.divergence, 1e-9));
        checks.push(Check::at_most(format!("|int p_h| ({tag})"), run.report.pressure_integral.abs(), 1e-10));
        let div = reconstruction_divergence_l2(disc, &run.solution.velocity)?;
        let rel = div / coefficient_norm(&run.solution.velocity).max(f64::MIN_POSITIVE);
        checks.push(Check::at_most(format!("||div Pi_h u_h|| / |u_h| ({tag})"), rel, 1e-9));
    }
    if family.domain() == Domain::UnitSquare {
        let zf = ManufacturedCase::new(CaseName::ZeroFlow, 1.0);
        let robust = run_case(disc, &zf, Scheme::Robust, 0, 0.0)?;
        checks.push(Check::at_most(
            "zero flow: ||u_0|| with the pressure-robust load",
            robust.report.errors.velocity_l2,
            1e-10,
        ));
        let w = weak_divergence_residual(disc, &robust.solution.velocity);
        checks.push(Check::at_most("zero flow: weak divergence residual", w, 1e-9));
    }
    Ok(())
}

/// Dense `A` (nu = 1), `B` and the `||.||_{1,h}` Gram matrix over the system
/// velocity unknowns, with the block-diagonal pressure mass.
fn dense_blocks(disc: &Discretization) -> Result<[Mat<f64>; 4]> {
    let nv = disc.dofs.n_velocity();
    let np = disc.dofs.n_pressure();
    let mut a = Mat::zeros(nv, nv);
    for (r, c, v) in assemble_stiffness(disc, 1.0) {
        a[(r, c)] += v;
    }
    let mut b = Mat::zeros(np, nv);
    for (r, c, v) in assemble_div(disc) {
        b[(r - disc.dofs.pressure_offset, c)] += v;
    }
    let mut h = Mat::zeros(nv, nv);
    let mut mp = Mat::zeros(np, np);
    for cs in &disc.cells {
        let lc = &cs.local;
        let hl = local_h1h_matrix(lc)?;
        let s = lc.scalar_dofs();
        let map = disc.dofs.local_velocity(lc);
        for (i, gi) in map.iter().enumerate() {
            let Some(gi) = *gi else { continue };
            for (j, gj) in map.iter().enumerate() {
                let Some(gj) = *gj else { continue };
                if i / s == j / s {
                    h[(gi, gj)] += hl[(i % s, j % s)];
                }
            }
        }
        let o = disc.dofs.pressure_dof(lc.cell, 0) - disc.dofs.pressure_offset;
        for i in 0..lc.dim_p() {
            for j in 0..lc.dim_p() {
                mp[(o + i, o + j)] = lc.p_mass[(i, j)];
            }
        }
    }
    Ok([a, b, h, mp])
}

/// Eigenvalues of `L^{-1} S L^{-T}` for `M = L L^T`, ascending.
fn congruence_eigenvalues(s: &Mat<f64>, m: &Mat<f64>) -> Option<Vec<f64>> {
    let l = m.llt(Side::Lower).ok()?;
    let l = l.L();
    let mut y = s.clone();
    solve_lower_triangular_in_place(l, y.as_mut(), Par::rayon(0));
    let mut z = y.transpose().to_owned();
    solve_lower_triangular_in_place(l, z.as_mut(), Par::rayon(0));
    let t = Mat::from_fn(z.nrows(), z.ncols(), |i, j| 0.5 * (z[(i, j)] + z[(j, i)]));
    t.self_adjoint_eigenvalues(Side::Lower).ok()
}

/// `(C1, C2, beta)` on one discretization.
fn stability_constants(disc: &Discretization) -> Result<(f64, f64, f64)> {
    let [a, b, h, mp] = dense_blocks(disc)?;
    let nan = (f64::NAN, f64::NAN, f64::NAN);
    let Some(ev) = congruence_eigenvalues(&a, &h) else { return Ok(nan) };
    let (c1, c2) = (ev[0].max(0.0).sqrt(), ev[ev.len() - 1].sqrt());
    let Ok(chol) = a.llt(Side::Lower) else { return Ok(nan) };
    let x = chol.solve(b.transpose());
    let s = &b * &x;
    let Some(ev) = congruence_eigenvalues(&s, &mp) else { return Ok(nan) };
    // the smallest eigenvalue belongs to the constants, which the mean
    // constraint removes
    let beta = ev.get(1).copied().unwrap_or(f64::NAN).max(0.0).sqrt();
    Ok((c1, c2, beta))
}

/// Largest velocity space the dense stability monitor will factor.
pub const STABILITY_DENSE_LIMIT: usize = 5000;

fn stability_checks(cfg: &PropsConfig, checks: &mut Vec<Check>, skipped: &mut Vec<String>) -> Result<()> {
    let [l0, l1] = cfg.family.coarse_pair();
    let mut discs = Vec::new();
    for level in [l0, l1] {
        let mesh = cfg.family.build(level)?;
        discs.push(Discretization::new(mesh, cfg.k, cfg.serial)?);
    }
    let n = discs[1].dofs.n_velocity();
    if n > STABILITY_DENSE_LIMIT {
        skipped.push(format!(
            "stability constants on levels {l0}, {l1}: {n} velocity unknowns exceed the dense limit {STABILITY_DENSE_LIMIT}"
        ));
        return Ok(());
    }
    let consts = discs.iter().map(stability_constants).collect::<Result<Vec<_>>>()?;
    let (a, b) = (consts[0], consts[1]);
    let drift = |x: f64, y: f64| (y / x - 1.0).abs();
    checks.push(Check::at_least(format!("norm equivalence C1 at level {l1}"), b.0, 1e-3));
    checks.push(Check::at_most(format!("norm equivalence C2 at level {l1}"), b.1, 1e3));
    checks.push(Check::at_most(
        format!("norm equivalence C1 drift, levels {l0} -> {l1}"),
        drift(a.0, b.0),
        0.25,
    ));
    checks.push(Check::at_most(
        format!("norm equivalence C2 drift, levels {l0} -> {l1}"),
        drift(a.1, b.1),
        0.25,
    ));
    checks.push(Check::at_least(format!("discrete inf-sup beta at level {l1}"), b.2, 1e-3));
    checks.push(Check::at_most(format!("discrete inf-sup beta drift, levels {l0} -> {l1}"), drift(a.2, b.2), 0.25));
    Ok(())
}

/// Run every check on the configured mesh.
pub fn run_property_suite(cfg: PropsConfig) -> Result<PropsReport> {
    let mesh = cfg.family.build(cfg.level)?;
    let disc = Discretization::new(mesh, cfg.k, cfg.serial)?.with_id(cfg.family.mesh_id(cfg.level));
    let mut checks = Vec::new();
    local_space_checks(&disc, &mut checks)?;
    reconstruction_checks(&disc, &cfg, &mut checks)?;
    commutativity_checks(&disc, &cfg, &mut checks)?;
    assembly_checks(&disc, &mut checks)?;
    solve_checks(&disc, cfg.family, &mut checks)?;
    let mut skipped = Vec::new();
    stability_checks(&cfg, &mut checks, &mut skipped)?;
    Ok(PropsReport {
        config: cfg,
        checks,
        skipped,
    })
}
