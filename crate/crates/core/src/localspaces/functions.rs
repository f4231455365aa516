//! Discrete velocity and pressure functions and the L2 projections onto them.

use nalgebra::{Cholesky, DVector};

use super::cell::{
    cell_quadrature, poly_mass, segment_quadrature, LocalCell, DATA_QUAD_DEGREE,
};
use super::lambda::LambdaBasis;
use crate::error::{Error, Result};
use crate::mesh::{subtriangulate, PolyMesh, Point};
use crate::polybasis::{dim_pk, CellPolyBasis, EdgePolyBasis};

/// Weak Galerkin velocity `{v_0, v_b}`.
///
/// `interior[(cell * 2 + c) * dim P_k + j]` and
/// `edge[(edge * 2 + c) * (k + 1) + p]` hold component `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct WgFunction {
    pub degree: usize,
    pub interior: Vec<f64>,
    pub edge: Vec<f64>,
}

impl WgFunction {
    pub fn zeros(mesh: &PolyMesh, k: usize) -> Self {
        Self {
            degree: k,
            interior: vec![0.0; mesh.n_cells() * 2 * dim_pk(k)],
            edge: vec![0.0; mesh.n_edges() * 2 * (k + 1)],
        }
    }

    fn np(&self) -> usize {
        dim_pk(self.degree)
    }

    pub fn interior_block(&self, cell: usize, c: usize) -> &[f64] {
        let np = self.np();
        let o = (cell * 2 + c) * np;
        &self.interior[o..o + np]
    }

    pub fn interior_block_mut(&mut self, cell: usize, c: usize) -> &mut [f64] {
        let np = self.np();
        let o = (cell * 2 + c) * np;
        &mut self.interior[o..o + np]
    }

    pub fn edge_block(&self, edge: usize, c: usize) -> &[f64] {
        let ne = self.degree + 1;
        let o = (edge * 2 + c) * ne;
        &self.edge[o..o + ne]
    }

    pub fn edge_block_mut(&mut self, edge: usize, c: usize) -> &mut [f64] {
        let ne = self.degree + 1;
        let o = (edge * 2 + c) * ne;
        &mut self.edge[o..o + ne]
    }

    /// Gather the local vector of one cell (x block, then y block).
    pub fn local_dofs(&self, lc: &LocalCell) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * lc.scalar_dofs());
        for c in 0..2 {
            out.extend_from_slice(self.interior_block(lc.cell, c));
            for &e in &lc.edge_ids {
                out.extend_from_slice(self.edge_block(e, c));
            }
        }
        out
    }

    /// True when every boundary-edge coefficient vanishes, i.e. `v` is in `V_h^0`.
    pub fn vanishes_on_boundary(&self, mesh: &PolyMesh) -> bool {
        mesh.edges.iter().enumerate().filter(|(_, e)| e.boundary).all(|(i, _)| {
            self.edge_block(i, 0).iter().chain(self.edge_block(i, 1)).all(|&v| v == 0.0)
        })
    }

    /// `v_0` at `x`, using the basis of cell `lc`.
    pub fn eval_interior(&self, lc: &LocalCell, x: Point) -> Point {
        [
            lc.poly.eval_poly(self.interior_block(lc.cell, 0), x),
            lc.poly.eval_poly(self.interior_block(lc.cell, 1), x),
        ]
    }
}

/// Piecewise `P_k` pressure, `coeffs[cell * dim P_k + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureFunction {
    pub degree: usize,
    pub coeffs: Vec<f64>,
}

impl PressureFunction {
    pub fn zeros(mesh: &PolyMesh, k: usize) -> Self {
        Self {
            degree: k,
            coeffs: vec![0.0; mesh.n_cells() * dim_pk(k)],
        }
    }

    pub fn block(&self, cell: usize) -> &[f64] {
        let np = dim_pk(self.degree);
        &self.coeffs[cell * np..(cell + 1) * np]
    }

    pub fn block_mut(&mut self, cell: usize) -> &mut [f64] {
        let np = dim_pk(self.degree);
        &mut self.coeffs[cell * np..(cell + 1) * np]
    }

    pub fn eval(&self, lc: &LocalCell, x: Point) -> f64 {
        lc.poly.eval_poly(self.block(lc.cell), x)
    }

    /// `\int_Omega p_h`.
    pub fn integral<C: AsRef<LocalCell>>(&self, cells: &[C]) -> f64 {
        cells
            .iter()
            .map(|c| c.as_ref())
            .map(|lc| lc.p_mean.iter().zip(self.block(lc.cell)).map(|(a, b)| a * b).sum::<f64>())
            .sum()
    }
}

fn l2_project<F: Fn(Point) -> f64>(
    basis: &CellPolyBasis,
    points: &[Point],
    weights: &[f64],
    f: F,
) -> DVector<f64> {
    let mut rhs = DVector::zeros(basis.dim());
    let mut v = vec![0.0; basis.dim()];
    for (x, w) in points.iter().zip(weights) {
        basis.eval_into(*x, &mut v);
        let fx = f(*x);
        for j in 0..v.len() {
            rhs[j] += w * fx * v[j];
        }
    }
    rhs
}

fn edge_project<F: Fn(Point) -> [f64; 2]>(basis: &EdgePolyBasis, g: F) -> Result<[Vec<f64>; 2]> {
    let k = basis.degree;
    let mut out = [vec![0.0; k + 1], vec![0.0; k + 1]];
    let mut leg = vec![0.0; k + 1];
    for (t, x, w) in segment_quadrature(basis, DATA_QUAD_DEGREE)? {
        basis.eval_into(t, &mut leg);
        let gx = g(x);
        for p in 0..=k {
            out[0][p] += w * gx[0] * leg[p];
            out[1][p] += w * gx[1] * leg[p];
        }
    }
    for p in 0..=k {
        let m = basis.mass_diag(p);
        out[0][p] /= m;
        out[1][p] /= m;
    }
    Ok(out)
}

/// `Q_0 u` on one cell, for any `k <= 7`.
pub fn project_q0<F: Fn(Point) -> [f64; 2]>(
    mesh: &PolyMesh,
    cell: usize,
    k: usize,
    u: F,
) -> Result<[Vec<f64>; 2]> {
    let sub = subtriangulate(mesh, cell)?;
    let basis = CellPolyBasis::new(k, mesh.centroid(cell), mesh.cell_diameters[cell]);
    let q = cell_quadrature(&sub, DATA_QUAD_DEGREE.max(2 * k + 2))?;
    let chol = Cholesky::new(poly_mass(&basis, &q)).ok_or(Error::SingularLocal(cell))?;
    let mut out = [vec![], vec![]];
    for (c, o) in out.iter_mut().enumerate() {
        let rhs = l2_project(&basis, &q.points, &q.weights, |x| u(x)[c]);
        *o = chol.solve(&rhs).as_slice().to_vec();
    }
    Ok(out)
}

/// `Q_b u` on one edge, in the edge's global parameter direction.
pub fn project_qb<F: Fn(Point) -> [f64; 2]>(
    mesh: &PolyMesh,
    edge: usize,
    k: usize,
    u: F,
) -> Result<[Vec<f64>; 2]> {
    let [a, b] = mesh.edges[edge].vertices;
    edge_project(&EdgePolyBasis::new(k, mesh.vertices[a], mesh.vertices[b]), u)
}

/// Scalar `L^2` projection onto `P_k(T)`.
pub fn project_qcal<F: Fn(Point) -> f64>(
    mesh: &PolyMesh,
    cell: usize,
    k: usize,
    p: F,
) -> Result<Vec<f64>> {
    let [c, _] = project_q0(mesh, cell, k, |x| [p(x), 0.0])?;
    Ok(c)
}

impl LocalCell {
    /// `Q_0 u` using this cell's cached mass matrix.
    pub fn project_vector<F: Fn(Point) -> [f64; 2]>(&self, u: F) -> Result<[Vec<f64>; 2]> {
        let q = self.quadrature(DATA_QUAD_DEGREE)?;
        let mut out = [vec![], vec![]];
        for (c, o) in out.iter_mut().enumerate() {
            let rhs = l2_project(&self.poly, &q.points, &q.weights, |x| u(x)[c]);
            *o = self.solve_p_mass(&rhs).as_slice().to_vec();
        }
        Ok(out)
    }

    pub fn project_scalar<F: Fn(Point) -> f64>(&self, p: F) -> Result<Vec<f64>> {
        let q = self.quadrature(DATA_QUAD_DEGREE)?;
        let rhs = l2_project(&self.poly, &q.points, &q.weights, p);
        Ok(self.solve_p_mass(&rhs).as_slice().to_vec())
    }
}

/// `Q_bb G`: row-wise projection of a matrix field onto `Lambda_k(T)`. The
/// basis is orthonormal, so coefficients are plain moments.
pub fn project_qbb<F: Fn(Point) -> [[f64; 2]; 2]>(
    lc: &LocalCell,
    lambda: &LambdaBasis,
    g: F,
) -> Result<[DVector<f64>; 2]> {
    let nrt = lc.rt_dim();
    let q = lc.quadrature(DATA_QUAD_DEGREE)?;
    let mut vals = vec![[0.0; 2]; nrt];
    let mut divs = vec![0.0; nrt];
    let mut mom = [DVector::zeros(lc.n_rt()), DVector::zeros(lc.n_rt())];
    for ((x, w), &t) in q.points.iter().zip(&q.weights).zip(&q.triangle) {
        lc.rt_eval(t, *x, &mut vals, &mut divs);
        let gx = g(*x);
        for (r, m) in mom.iter_mut().enumerate() {
            for j in 0..nrt {
                m[t * nrt + j] += w * (gx[r][0] * vals[j][0] + gx[r][1] * vals[j][1]);
            }
        }
    }
    let zt = lambda.coeffs.transpose();
    Ok([&zt * &mom[0], &zt * &mom[1]])
}

/// Value at `x` (inside sub-triangle `t`) of the Lambda function with
/// coefficients `coef`.
pub fn eval_lambda(lc: &LocalCell, lambda: &LambdaBasis, coef: &DVector<f64>, t: usize, x: Point) -> Point {
    let nrt = lc.rt_dim();
    let mut vals = vec![[0.0; 2]; nrt];
    let mut divs = vec![0.0; nrt];
    lc.rt_eval(t, x, &mut vals, &mut divs);
    let piece = lambda.coeffs.rows(t * nrt, nrt) * coef;
    let mut out = [0.0; 2];
    for j in 0..nrt {
        out[0] += piece[j] * vals[j][0];
        out[1] += piece[j] * vals[j][1];
    }
    out
}

/// `Q_h u = {Q_0 u, Q_b u}` over the whole mesh.
pub fn interpolate<C: AsRef<LocalCell>, F: Fn(Point) -> [f64; 2] + Sync>(
    mesh: &PolyMesh,
    cells: &[C],
    u: F,
) -> Result<WgFunction> {
    let k = cells.first().map_or(0, |c| c.as_ref().degree);
    let mut v = WgFunction::zeros(mesh, k);
    for lc in cells.iter().map(|c| c.as_ref()) {
        let [a, b] = lc.project_vector(&u)?;
        v.interior_block_mut(lc.cell, 0).copy_from_slice(&a);
        v.interior_block_mut(lc.cell, 1).copy_from_slice(&b);
    }
    for e in 0..mesh.n_edges() {
        let [a, b] = project_qb(mesh, e, k, &u)?;
        v.edge_block_mut(e, 0).copy_from_slice(&a);
        v.edge_block_mut(e, 1).copy_from_slice(&b);
    }
    Ok(v)
}

/// Projection of a scalar field onto the piecewise `P_k` pressure space.
pub fn interpolate_pressure<C: AsRef<LocalCell>, F: Fn(Point) -> f64 + Sync>(
    mesh: &PolyMesh,
    cells: &[C],
    p: F,
) -> Result<PressureFunction> {
    let k = cells.first().map_or(0, |c| c.as_ref().degree);
    let mut out = PressureFunction::zeros(mesh, k);
    for lc in cells.iter().map(|c| c.as_ref()) {
        let c = lc.project_scalar(&p)?;
        out.block_mut(lc.cell).copy_from_slice(&c);
    }
    Ok(out)
}
