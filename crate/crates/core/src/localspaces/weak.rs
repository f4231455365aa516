//! Weak gradient and weak divergence on one cell.
//!
//! Scalar local vectors list the interior `P_k(T)` coefficients followed by
//! each cell edge's `P_k(e)` block in local edge order. Vector local vectors
//! stack the x-component scalar vector on top of the y-component one.

use nalgebra::{DMatrix, DVector};

use super::cell::{poly_quad_degree, LocalCell};
use super::lambda::LambdaBasis;
use crate::error::Result;

/// Local matrices of the weak differential operators.
#[derive(Debug, Clone)]
pub struct LocalOperators {
    /// `m x s`: Lambda coefficients of the weak gradient of a scalar
    pub grad: DMatrix<f64>,
    /// `s x s`: `grad^T grad`, the scalar stiffness
    pub stiffness: DMatrix<f64>,
    /// `dim P_k x 2s`: `(div_w v, phi_i)_T` for each local vector unknown
    pub div: DMatrix<f64>,
}

impl LocalOperators {
    pub fn new(lc: &LocalCell, lambda: &LambdaBasis) -> Result<Self> {
        let grad = lambda.coeffs.transpose() * rt_weak_gradient(lc)?;
        let stiffness = grad.transpose() * &grad;
        let div = weak_divergence_matrix(lc)?;
        Ok(Self {
            grad,
            stiffness,
            div,
        })
    }

    /// Vector stiffness: two copies of the scalar stiffness.
    pub fn vector_stiffness(&self) -> DMatrix<f64> {
        let s = self.stiffness.nrows();
        let mut a = DMatrix::zeros(2 * s, 2 * s);
        a.view_mut((0, 0), (s, s)).copy_from(&self.stiffness);
        a.view_mut((s, s), (s, s)).copy_from(&self.stiffness);
        a
    }
}

/// Weak-gradient right-hand sides against every piecewise `RT_k` function:
/// `-(w_0, div psi)_T + <w_b, psi.n>_{dT}`.
fn rt_weak_gradient(lc: &LocalCell) -> Result<DMatrix<f64>> {
    let k = lc.degree;
    let nrt = lc.rt_dim();
    let np = lc.dim_p();
    let mut r = DMatrix::zeros(lc.n_rt(), lc.scalar_dofs());
    let mut vals = vec![[0.0; 2]; nrt];
    let mut divs = vec![0.0; nrt];
    let mut phi = vec![0.0; np];
    let q = lc.quadrature(poly_quad_degree(k))?;
    for ((x, w), &t) in q.points.iter().zip(&q.weights).zip(&q.triangle) {
        lc.rt_eval(t, *x, &mut vals, &mut divs);
        lc.poly.eval_into(*x, &mut phi);
        for j in 0..nrt {
            for (l, ph) in phi.iter().enumerate() {
                r[(t * nrt + j, l)] -= w * divs[j] * ph;
            }
        }
    }
    let mut leg = vec![0.0; k + 1];
    for i in 0..lc.n_edges() {
        let (t, _) = lc.sub.boundary_edges[i];
        let n = lc.normals[i];
        let off = lc.edge_offset(i);
        for (s, x, w) in lc.edge_quadrature(i, poly_quad_degree(k))? {
            lc.rt_eval(t, x, &mut vals, &mut divs);
            lc.edges[i].eval_into(s, &mut leg);
            for j in 0..nrt {
                let qn = vals[j][0] * n[0] + vals[j][1] * n[1];
                for p in 0..=k {
                    r[(t * nrt + j, off + p)] += w * qn * leg[p];
                }
            }
        }
    }
    Ok(r)
}

/// `S[i, (c, j)]`: `-(v_0, d_c phi_i)_T + <v_b n_c, phi_i>_{dT}` per unit dof.
pub fn weak_divergence_matrix(lc: &LocalCell) -> Result<DMatrix<f64>> {
    let k = lc.degree;
    let np = lc.dim_p();
    let s = lc.scalar_dofs();
    let mut d = DMatrix::zeros(np, 2 * s);
    let q = lc.quadrature(poly_quad_degree(k))?;
    let mut phi = vec![0.0; np];
    for (x, w) in q.points.iter().zip(&q.weights) {
        lc.poly.eval_into(*x, &mut phi);
        let grads = lc.poly.eval_grad(*x);
        for (i, g) in grads.iter().enumerate() {
            for (l, ph) in phi.iter().enumerate() {
                d[(i, l)] -= w * ph * g[0];
                d[(i, s + l)] -= w * ph * g[1];
            }
        }
    }
    let mut leg = vec![0.0; k + 1];
    for e in 0..lc.n_edges() {
        let n = lc.normals[e];
        let off = lc.edge_offset(e);
        for (t, x, w) in lc.edge_quadrature(e, poly_quad_degree(k))? {
            lc.poly.eval_into(x, &mut phi);
            lc.edges[e].eval_into(t, &mut leg);
            for i in 0..np {
                for p in 0..=k {
                    let base = w * leg[p] * phi[i];
                    d[(i, off + p)] += base * n[0];
                    d[(i, s + off + p)] += base * n[1];
                }
            }
        }
    }
    Ok(d)
}

/// Lambda coefficients of the weak gradient of each velocity component.
pub fn weak_gradient(ops: &LocalOperators, local: &[f64]) -> [DVector<f64>; 2] {
    let s = ops.stiffness.nrows();
    [
        &ops.grad * DVector::from_column_slice(&local[..s]),
        &ops.grad * DVector::from_column_slice(&local[s..2 * s]),
    ]
}

/// `P_k(T)` coefficients of the weak divergence.
pub fn weak_divergence(lc: &LocalCell, ops: &LocalOperators, local: &[f64]) -> DVector<f64> {
    lc.solve_p_mass(&(&ops.div * DVector::from_column_slice(local)))
}
