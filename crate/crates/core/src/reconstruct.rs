//! H(div)-conforming velocity reconstruction `Pi_h` on each cell and the
//! pressure-robust load `(f, Pi_h v)`.
//!
//! `Pi_h v` is a piecewise `RT_k` field on the sub-triangulation. Its
//! coefficients solve `M c = b`, where the rows of `M` are, in order: normal
//! flux moments on the cell edges, cell moments of `Pi_h v . n1` (k >= 1),
//! per-triangle moments of `Pi_h v . n2` (k >= 1), normal-jump moments on
//! the diagonals and divergence-compatibility moments on `T_1`.
//!
//! The last two groups say exactly that `Pi_h v` lies in `Lambda_k(T)`, so
//! the solve is done in the orthonormal `Lambda_k(T)` basis `Z`: the square
//! system `(M_top Z) y = b_top` is far better conditioned than `M` itself
//! and gives the same `c = Z y`.

use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::error::{Error, Result};
use crate::localspaces::{
    interface_rows, poly_quad_degree, weak_divergence, CellSpace, LambdaBasis, LocalCell,
    DATA_QUAD_DEGREE,
};
use crate::mesh::Point;
use crate::polybasis::{dim_pk, CellPolyBasis};

/// `M` is rejected when the condition number of its row-equilibrated form
/// exceeds this value.
pub const MAX_RECON_CONDITION: f64 = 1e12;

const PARALLEL_TOL: f64 = 1e-8;

/// Per-cell reconstruction operator.
#[derive(Debug, Clone)]
pub struct ReconOperator {
    pub cell: usize,
    pub degree: usize,
    /// the square matrix `M`
    pub matrix: DMatrix<f64>,
    lu: LU<f64, Dyn, Dyn>,
    /// `Lambda_k(T)` basis and the factorized reduced system `M_top Z`
    z: DMatrix<f64>,
    reduced: LU<f64, Dyn, Dyn>,
    reduced_t: LU<f64, Dyn, Dyn>,
    n_top: usize,
    /// maps the local vector unknowns to the right-hand side `b`
    pub bmap: DMatrix<f64>,
    pub n1: Point,
    /// sweep angle of `n1` in degrees (0 when unused)
    pub angle_deg: u32,
    pub condition: f64,
}

/// Piecewise `RT_k` coefficients of `Pi_h v`, blocked by sub-triangle.
#[derive(Debug, Clone)]
pub struct ReconCoeffs {
    pub coeffs: DVector<f64>,
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let mut a = m.clone();
    for i in 0..a.nrows() {
        let n = a.row(i).norm();
        if n > 0.0 {
            a.row_mut(i).scale_mut(1.0 / n);
        }
    }
    let sv = a.singular_values();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        sv.max() / min
    }
}

/// First sweep direction at 1, 2, ... degrees not parallel to any diagonal normal.
fn sweep_directions(lc: &LocalCell) -> impl Iterator<Item = (u32, Point)> + '_ {
    (1..180u32).filter_map(move |deg| {
        let th = (deg as f64).to_radians();
        let n1 = [th.cos(), th.sin()];
        let parallel = lc
            .sub
            .interior_edges
            .iter()
            .any(|e| (n1[0] * e.normal[1] - n1[1] * e.normal[0]).abs() < PARALLEL_TOL);
        (!parallel).then_some((deg, n1))
    })
}

/// Rows and right-hand-side map of the flux and interior-moment conditions.
fn moment_rows(lc: &LocalCell, n1: Point) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let k = lc.degree;
    let nt = lc.sub.n_triangles();
    let nrt = lc.rt_dim();
    let s = lc.scalar_dofs();
    let np = lc.dim_p();
    let nm = if k == 0 { 0 } else { dim_pk(k - 1) };
    let n_flux = lc.n_edges() * (k + 1);
    let nrows = n_flux + nm + nt * nm;
    let mut rows = DMatrix::zeros(nrows, lc.n_rt());
    let mut bmap = DMatrix::zeros(nrows, 2 * s);
    let mut vals = vec![[0.0; 2]; nrt];
    let mut divs = vec![0.0; nrt];
    let mut leg = vec![0.0; k + 1];

    for i in 0..lc.n_edges() {
        let (t, _) = lc.sub.boundary_edges[i];
        let n = lc.normals[i];
        for (sp, x, w) in lc.edge_quadrature(i, 2 * k + 2)? {
            lc.rt_eval(t, x, &mut vals, &mut divs);
            lc.edges[i].eval_into(sp, &mut leg);
            for j in 0..nrt {
                let qn = vals[j][0] * n[0] + vals[j][1] * n[1];
                for p in 0..=k {
                    rows[(i * (k + 1) + p, t * nrt + j)] += w * qn * leg[p];
                }
            }
        }
        let off = lc.edge_offset(i);
        for p in 0..=k {
            let m = lc.edges[i].mass_diag(p);
            bmap[(i * (k + 1) + p, off + p)] = n[0] * m;
            bmap[(i * (k + 1) + p, s + off + p)] = n[1] * m;
        }
    }

    if k >= 1 {
        let n2 = [-n1[1], n1[0]];
        let test = CellPolyBasis::new(k - 1, lc.poly.center, lc.poly.scale);
        let mut pv = vec![0.0; nm];
        let mut phi = vec![0.0; np];
        let q = lc.quadrature(poly_quad_degree(k))?;
        for ((x, w), &t) in q.points.iter().zip(&q.weights).zip(&q.triangle) {
            lc.rt_eval(t, *x, &mut vals, &mut divs);
            test.eval_into(*x, &mut pv);
            lc.poly.eval_into(*x, &mut phi);
            let r2 = n_flux;
            let r3 = n_flux + nm + t * nm;
            for (a, &pa) in pv.iter().enumerate() {
                for j in 0..nrt {
                    let v1 = vals[j][0] * n1[0] + vals[j][1] * n1[1];
                    let v2 = vals[j][0] * n2[0] + vals[j][1] * n2[1];
                    rows[(r2 + a, t * nrt + j)] += w * v1 * pa;
                    rows[(r3 + a, t * nrt + j)] += w * v2 * pa;
                }
                for (l, &pl) in phi.iter().enumerate() {
                    let base = w * pl * pa;
                    bmap[(r2 + a, l)] += base * n1[0];
                    bmap[(r2 + a, s + l)] += base * n1[1];
                    bmap[(r3 + a, l)] += base * n2[0];
                    bmap[(r3 + a, s + l)] += base * n2[1];
                }
            }
        }
    }
    Ok((rows, bmap))
}

/// Assemble `M`, choosing `n1` by an angle sweep until `M` is well conditioned.
pub fn build_recon_operator(lc: &LocalCell, lambda: &LambdaBasis) -> Result<ReconOperator> {
    let iface = interface_rows(lc)?;
    let n = lc.n_rt();
    let assemble = |n1: Point| -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let (top, btop) = moment_rows(lc, n1)?;
        let mut m = DMatrix::zeros(top.nrows() + iface.nrows(), n);
        m.rows_mut(0, top.nrows()).copy_from(&top);
        m.rows_mut(top.nrows(), iface.nrows()).copy_from(&iface);
        let mut b = DMatrix::zeros(m.nrows(), btop.ncols());
        b.rows_mut(0, btop.nrows()).copy_from(&btop);
        Ok((m, b))
    };

    let candidates: Vec<(u32, Point)> = if lc.degree == 0 {
        vec![(0, [1.0, 0.0])]
    } else {
        sweep_directions(lc).collect()
    };
    let mut best = f64::INFINITY;
    for (deg, n1) in candidates {
        let (m, bmap) = assemble(n1)?;
        if m.nrows() != n {
            return Err(Error::LambdaDimension {
                cell: lc.cell,
                expected: n,
                found: m.nrows(),
            });
        }
        let cond = condition_number(&m);
        best = best.min(cond);
        if cond <= MAX_RECON_CONDITION {
            let n_top = n - iface.nrows();
            let red = m.rows(0, n_top) * &lambda.coeffs;
            if red.nrows() != red.ncols() {
                return Err(Error::LambdaDimension {
                    cell: lc.cell,
                    expected: n_top,
                    found: red.ncols(),
                });
            }
            let lu = m.clone().lu();
            let reduced_t = red.transpose().lu();
            let reduced = red.lu();
            return Ok(ReconOperator {
                cell: lc.cell,
                degree: lc.degree,
                matrix: m,
                lu,
                z: lambda.coeffs.clone(),
                reduced,
                reduced_t,
                n_top,
                bmap,
                n1,
                angle_deg: deg,
                condition: cond,
            });
        }
        if lc.degree == 0 {
            break;
        }
    }
    Err(Error::SingularReconstruction {
        cell: lc.cell,
        cond: best,
    })
}

impl ReconOperator {
    /// Right-hand side `b` for the local vector unknowns of `v`.
    pub fn rhs(&self, local: &[f64]) -> DVector<f64> {
        &self.bmap * DVector::from_column_slice(local)
    }

    /// `M^{-1} b` for a right-hand side whose interface part is zero.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let y = self
            .reduced
            .solve(&b.rows(0, self.n_top).into_owned())
            .expect("factorization checked at build time");
        &self.z * y
    }

    /// `M^{-1} b` through the full matrix; kept as a cross-check.
    pub fn solve_full(&self, b: &DVector<f64>) -> DVector<f64> {
        self.lu.solve(b).expect("factorization checked at build time")
    }

    /// `B^T M^{-T} g`: pairs moments `g` against the reconstruction of every
    /// local unknown.
    pub fn load_map(&self, g: &DVector<f64>) -> DVector<f64> {
        let y = self
            .reduced_t
            .solve(&(self.z.transpose() * g))
            .expect("factorization checked at build time");
        self.bmap.rows(0, self.n_top).transpose() * y
    }
}

/// `Pi_h v` on one cell.
pub fn reconstruct(op: &ReconOperator, local: &[f64]) -> ReconCoeffs {
    ReconCoeffs {
        coeffs: op.solve(&op.rhs(local)),
    }
}

/// Value and divergence of a piecewise `RT_k` field on sub-triangle `t`.
pub fn eval_recon(lc: &LocalCell, rc: &ReconCoeffs, t: usize, x: Point) -> (Point, f64) {
    let nrt = lc.rt_dim();
    let mut vals = vec![[0.0; 2]; nrt];
    let mut divs = vec![0.0; nrt];
    lc.rt_eval(t, x, &mut vals, &mut divs);
    let mut v = [0.0; 2];
    let mut d = 0.0;
    for j in 0..nrt {
        let c = rc.coeffs[t * nrt + j];
        v[0] += c * vals[j][0];
        v[1] += c * vals[j][1];
        d += c * divs[j];
    }
    (v, d)
}

/// Moments `\int_{T_t} f . psi_j` of a vector field against every piecewise
/// `RT_k` function.
pub fn rt_moments<F: Fn(Point) -> Point>(lc: &LocalCell, f: F) -> Result<DVector<f64>> {
    rt_moments_with(lc, f, DATA_QUAD_DEGREE)
}

/// [`rt_moments`] with an explicit quadrature degree.
pub fn rt_moments_with<F: Fn(Point) -> Point>(lc: &LocalCell, f: F, degree: usize) -> Result<DVector<f64>> {
    let nrt = lc.rt_dim();
    let mut out = DVector::zeros(lc.n_rt());
    let mut vals = vec![[0.0; 2]; nrt];
    let mut divs = vec![0.0; nrt];
    let q = lc.quadrature(degree)?;
    for ((x, w), &t) in q.points.iter().zip(&q.weights).zip(&q.triangle) {
        lc.rt_eval(t, *x, &mut vals, &mut divs);
        let fx = f(*x);
        for j in 0..nrt {
            out[t * nrt + j] += w * (fx[0] * vals[j][0] + fx[1] * vals[j][1]);
        }
    }
    Ok(out)
}

/// Pressure-robust load on one cell: entry `i` is `(f, Pi_h e_i)` for the
/// unit local unknown `e_i`.
pub fn robust_rhs_cell<F: Fn(Point) -> Point>(
    lc: &LocalCell,
    op: &ReconOperator,
    f: F,
) -> Result<DVector<f64>> {
    robust_rhs_cell_with(lc, op, f, DATA_QUAD_DEGREE)
}

pub fn robust_rhs_cell_with<F: Fn(Point) -> Point>(
    lc: &LocalCell,
    op: &ReconOperator,
    f: F,
    degree: usize,
) -> Result<DVector<f64>> {
    let fphi = rt_moments_with(lc, f, degree)?;
    Ok(op.load_map(&fphi))
}

/// Standard load on one cell: `(f, v_0)` against each local unknown.
pub fn standard_rhs_cell<F: Fn(Point) -> Point>(lc: &LocalCell, f: F) -> Result<DVector<f64>> {
    standard_rhs_cell_with(lc, f, DATA_QUAD_DEGREE)
}

pub fn standard_rhs_cell_with<F: Fn(Point) -> Point>(lc: &LocalCell, f: F, degree: usize) -> Result<DVector<f64>> {
    let np = lc.dim_p();
    let s = lc.scalar_dofs();
    let mut out = DVector::zeros(2 * s);
    let mut phi = vec![0.0; np];
    let q = lc.quadrature(degree)?;
    for (x, w) in q.points.iter().zip(&q.weights) {
        lc.poly.eval_into(*x, &mut phi);
        let fx = f(*x);
        for l in 0..np {
            out[l] += w * fx[0] * phi[l];
            out[s + l] += w * fx[1] * phi[l];
        }
    }
    Ok(out)
}

/// Largest violation of each defining property of `Pi_h v` on one cell.
///
/// Moment residuals are divided by the measure of their domain and by
/// `max |v|`, so every entry is a relative error.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConditionCheck {
    /// boundary flux moments against `v_b . n` (also the edge identity
    /// for `Pi_h v . n`)
    pub flux: f64,
    /// cell moments of `(Pi_h v - v_0) . n1`
    pub n1_moments: f64,
    /// per-triangle moments of `(Pi_h v - v_0) . n2`
    pub n2_moments: f64,
    /// normal-jump moments on the diagonals
    pub jumps: f64,
    /// divergence compatibility on `T_1`, relative to the divergence scale
    pub div_compat: f64,
    /// `(Pi_h v - v_0, q)_T` for `q` in `[P_{k-1}(T)]^2`
    pub moments: f64,
    /// `div Pi_h v - div_w v` as `P_k(T)` coefficients, relative to the
    /// divergence scale
    pub divergence: f64,
}

impl ConditionCheck {
    pub fn max(&self) -> f64 {
        [
            self.flux,
            self.n1_moments,
            self.n2_moments,
            self.jumps,
            self.div_compat,
            self.moments,
            self.divergence,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn merge(&mut self, o: &ConditionCheck) {
        self.flux = self.flux.max(o.flux);
        self.n1_moments = self.n1_moments.max(o.n1_moments);
        self.n2_moments = self.n2_moments.max(o.n2_moments);
        self.jumps = self.jumps.max(o.jumps);
        self.div_compat = self.div_compat.max(o.div_compat);
        self.moments = self.moments.max(o.moments);
        self.divergence = self.divergence.max(o.divergence);
    }
}

/// Evaluate every defining property of `Pi_h v` by quadrature, independently
/// of the rows of `M`.
pub fn check_conditions(cs: &CellSpace, op: &ReconOperator, local: &[f64]) -> Result<ConditionCheck> {
    let lc = &cs.local;
    let k = lc.degree;
    let s = lc.scalar_dofs();
    let np = lc.dim_p();
    let nt = lc.sub.n_triangles();
    let scale = local.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(f64::MIN_POSITIVE);
    let rc = reconstruct(op, local);
    let mut out = ConditionCheck::default();
    let v0 = |x: Point| {
        [
            lc.poly.eval_poly(&local[..np], x),
            lc.poly.eval_poly(&local[s..s + np], x),
        ]
    };
    let dot = |a: Point, b: Point| a[0] * b[0] + a[1] * b[1];
    let deg = 2 * k + 4;
    let mut leg = vec![0.0; k + 1];

    for i in 0..lc.n_edges() {
        let (t, _) = lc.sub.boundary_edges[i];
        let n = lc.normals[i];
        let off = lc.edge_offset(i);
        let mut res = vec![0.0; k + 1];
        for (sp, x, w) in lc.edge_quadrature(i, deg)? {
            lc.edges[i].eval_into(sp, &mut leg);
            let (val, _) = eval_recon(lc, &rc, t, x);
            let mut vb = [0.0; 2];
            for r in 0..=k {
                vb[0] += local[off + r] * leg[r];
                vb[1] += local[s + off + r] * leg[r];
            }
            for p in 0..=k {
                res[p] += w * (dot(val, n) - dot(vb, n)) * leg[p];
            }
        }
        let len = lc.edges[i].length;
        out.flux = res.iter().fold(out.flux, |a, r| a.max(r.abs() / len));
    }

    for e in &lc.sub.interior_edges {
        let basis = crate::polybasis::EdgePolyBasis::new(k, e.start, e.end);
        let mut res = vec![0.0; k + 1];
        for (sp, x, w) in crate::localspaces::segment_quadrature(&basis, deg)? {
            basis.eval_into(sp, &mut leg);
            let (a, _) = eval_recon(lc, &rc, e.triangles[0], x);
            let (b, _) = eval_recon(lc, &rc, e.triangles[1], x);
            for p in 0..=k {
                res[p] += w * (dot(a, e.normal) - dot(b, e.normal)) * leg[p];
            }
        }
        out.jumps = res.iter().fold(out.jumps, |a, r| a.max(r.abs() / e.length));
    }

    let dw = weak_divergence(lc, &cs.ops, local);
    let q = lc.quadrature(deg)?;
    if k >= 1 {
        let n1 = op.n1;
        let n2 = [-n1[1], n1[0]];
        let test = CellPolyBasis::new(k - 1, lc.poly.center, lc.poly.scale);
        let nm = test.dim();
        let mut cell1 = vec![0.0; nm];
        let mut per_tri = vec![vec![0.0; nm]; nt];
        let mut mom = vec![[0.0; 2]; nm];
        for ((x, w), &t) in q.points.iter().zip(&q.weights).zip(&q.triangle) {
            let (val, _) = eval_recon(lc, &rc, t, *x);
            let u0 = v0(*x);
            let d = [val[0] - u0[0], val[1] - u0[1]];
            let pv = test.eval(*x);
            for a in 0..nm {
                cell1[a] += w * dot(d, n1) * pv[a];
                per_tri[t][a] += w * dot(d, n2) * pv[a];
                mom[a][0] += w * d[0] * pv[a];
                mom[a][1] += w * d[1] * pv[a];
            }
        }
        out.n1_moments = cell1.iter().fold(0.0, |a, r| a.max(r.abs() / lc.area));
        for (t, r) in per_tri.iter().enumerate() {
            let area = lc.sub.areas[t];
            out.n2_moments = r.iter().fold(out.n2_moments, |a, r| a.max(r.abs() / area));
        }
        out.moments = mom
            .iter()
            .fold(0.0, |a, r| a.max(r[0].abs().max(r[1].abs()) / lc.area));
    }
    // divergences are compared as P_k(T) coefficients, relative to the
    // larger of max |v| and the weak divergence itself
    let dscale = dw.amax().max(scale);
    let mut pdiv = DVector::zeros(np);
    for ((x, w), &t) in q.points.iter().zip(&q.weights).zip(&q.triangle) {
        let (_, d) = eval_recon(lc, &rc, t, *x);
        pdiv += DVector::from_vec(lc.poly.eval(*x)) * (w * d);
    }
    out.divergence = (lc.solve_p_mass(&pdiv) - &dw).amax() / dscale;

    // every piece's divergence, extended to T_1, against that of T_1
    let map1 = &lc.sub.maps[0];
    let rule = crate::polybasis::tri_quadrature(deg)?;
    let test = CellPolyBasis::new(k, lc.poly.center, lc.poly.scale);
    for i in 1..nt {
        let mut res = vec![0.0; np];
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            let x = map1.forward(*p);
            let w = w * map1.det.abs();
            let (_, d1) = eval_recon(lc, &rc, 0, x);
            let (_, di) = eval_recon(lc, &rc, i, x);
            for (a, ph) in test.eval(x).iter().enumerate() {
                res[a] += w * (di - d1) * ph;
            }
        }
        let area = lc.sub.areas[0];
        out.div_compat = res.iter().fold(out.div_compat, |a, r| a.max(r.abs() / area));
    }
    out.div_compat /= dscale;

    for v in [
        &mut out.flux,
        &mut out.n1_moments,
        &mut out.n2_moments,
        &mut out.jumps,
        &mut out.moments,
    ] {
        *v /= scale;
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
