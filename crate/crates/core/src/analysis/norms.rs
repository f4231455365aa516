//! Discrete error norms and related functionals.

use nalgebra::{DMatrix, DVector};

use super::cases::ManufacturedCase;
use crate::assembly::Discretization;
use crate::error::Result;
use crate::localspaces::{interpolate, interpolate_pressure, poly_quad_degree, LocalCell, PressureFunction, WgFunction};
use crate::reconstruct::{eval_recon, reconstruct};

/// The three error norms reported for every run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    /// `|||Q_h u - u_h|||`
    pub energy: f64,
    /// `||Q_0 u - u_0||`
    pub velocity_l2: f64,
    /// `||Qcal_h p - p_h||` with `p` normalized to zero mean
    pub pressure_l2: f64,
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn wg_diff(a: &WgFunction, b: &WgFunction) -> WgFunction {
    WgFunction {
        degree: a.degree,
        interior: diff(&a.interior, &b.interior),
        edge: diff(&a.edge, &b.edge),
    }
}

/// `|||v|||^2 = sum_T ||grad_w v||_T^2`.
pub fn energy_norm(disc: &Discretization, v: &WgFunction) -> f64 {
    disc.cells
        .iter()
        .map(|cs| {
            let l = DVector::from_vec(v.local_dofs(&cs.local));
            let s = cs.ops.stiffness.nrows();
            let (x, y) = (l.rows(0, s), l.rows(s, s));
            x.dot(&(&cs.ops.stiffness * x)) + y.dot(&(&cs.ops.stiffness * y))
        })
        .sum::<f64>()
        .max(0.0)
        .sqrt()
}

/// `||v_0||` over the mesh.
pub fn interior_l2_norm(disc: &Discretization, v: &WgFunction) -> f64 {
    disc.cells
        .iter()
        .map(|cs| {
            let m = &cs.local.p_mass;
            (0..2)
                .map(|c| {
                    let b = DVector::from_column_slice(v.interior_block(cs.local.cell, c));
                    b.dot(&(m * &b))
                })
                .sum::<f64>()
        })
        .sum::<f64>()
        .max(0.0)
        .sqrt()
}

pub fn pressure_l2_norm(disc: &Discretization, p: &PressureFunction) -> f64 {
    disc.cells
        .iter()
        .map(|cs| {
            let b = DVector::from_column_slice(p.block(cs.local.cell));
            b.dot(&(&cs.local.p_mass * &b))
        })
        .sum::<f64>()
        .max(0.0)
        .sqrt()
}

pub fn error_energy(disc: &Discretization, uh: &WgFunction, case: &ManufacturedCase) -> Result<f64> {
    let qu = interpolate(&disc.mesh, &disc.cells, |x| case.u(x))?;
    Ok(energy_norm(disc, &wg_diff(&qu, uh)))
}

pub fn error_l2_velocity(disc: &Discretization, uh: &WgFunction, case: &ManufacturedCase) -> Result<f64> {
    let qu = interpolate(&disc.mesh, &disc.cells, |x| case.u(x))?;
    Ok(interior_l2_norm(disc, &wg_diff(&qu, uh)))
}

pub fn error_l2_pressure(disc: &Discretization, ph: &PressureFunction, case: &ManufacturedCase) -> Result<f64> {
    let qp = interpolate_pressure(&disc.mesh, &disc.cells, |x| case.p(x))?;
    let e = PressureFunction {
        degree: ph.degree,
        coeffs: diff(&qp.coeffs, &ph.coeffs),
    };
    Ok(pressure_l2_norm(disc, &e))
}

/// All three norms, sharing the projections of the exact solution.
pub fn compute_errors(
    disc: &Discretization,
    uh: &WgFunction,
    ph: &PressureFunction,
    case: &ManufacturedCase,
) -> Result<ErrorNorms> {
    let qu = interpolate(&disc.mesh, &disc.cells, |x| case.u(x))?;
    let e = wg_diff(&qu, uh);
    Ok(ErrorNorms {
        energy: energy_norm(disc, &e),
        velocity_l2: interior_l2_norm(disc, &e),
        pressure_l2: error_l2_pressure(disc, ph, case)?,
    })
}

/// `||div Pi_h v||` over the mesh.
pub fn reconstruction_divergence_l2(disc: &Discretization, v: &WgFunction) -> Result<f64> {
    let mut total = 0.0;
    for (cs, op) in disc.cells.iter().zip(&disc.recon) {
        let lc = &cs.local;
        let rc = reconstruct(op, &v.local_dofs(lc));
        let q = lc.quadrature(2 * lc.degree + 2)?;
        for ((x, w), &t) in q.points.iter().zip(&q.weights).zip(&q.triangle) {
            let (_, d) = eval_recon(lc, &rc, t, *x);
            total += w * d * d;
        }
    }
    Ok(total.sqrt())
}

/// `max |(div_w v, chi)|` over all pressure basis functions `chi`.
pub fn weak_divergence_residual(disc: &Discretization, v: &WgFunction) -> f64 {
    disc.cells
        .iter()
        .map(|cs| (&cs.ops.div * DVector::from_vec(v.local_dofs(&cs.local))).amax())
        .fold(0.0, f64::max)
}

/// Euclidean norm of all coefficients of `v`.
pub fn coefficient_norm(v: &WgFunction) -> f64 {
    v.interior.iter().chain(&v.edge).map(|x| x * x).sum::<f64>().sqrt()
}

/// Local matrix of `||grad v_0||_T^2 + h_T^{-1} ||v_0 - v_b||_{dT}^2` for one
/// scalar component.
pub fn local_h1h_matrix(lc: &LocalCell) -> Result<DMatrix<f64>> {
    let k = lc.degree;
    let np = lc.dim_p();
    let s = lc.scalar_dofs();
    let mut m = DMatrix::zeros(s, s);
    let q = lc.quadrature(poly_quad_degree(k))?;
    for (x, w) in q.points.iter().zip(&q.weights) {
        let g = lc.poly.eval_grad(*x);
        for i in 0..np {
            for j in 0..np {
                m[(i, j)] += w * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
            }
        }
    }
    let mut leg = vec![0.0; k + 1];
    let mut phi = vec![0.0; np];
    let mut row = vec![0.0; s];
    for e in 0..lc.n_edges() {
        let off = lc.edge_offset(e);
        for (t, x, w) in lc.edge_quadrature(e, 2 * k + 2)? {
            lc.poly.eval_into(x, &mut phi);
            lc.edges[e].eval_into(t, &mut leg);
            row.iter_mut().for_each(|r| *r = 0.0);
            row[..np].copy_from_slice(&phi);
            for p in 0..=k {
                row[off + p] = -leg[p];
            }
            let w = w / lc.diameter;
            for i in 0..s {
                if row[i] == 0.0 {
                    continue;
                }
                for j in 0..s {
                    m[(i, j)] += w * row[i] * row[j];
                }
            }
        }
    }
    Ok(m)
}
