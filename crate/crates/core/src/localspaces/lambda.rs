//! The local space `Lambda_k(T)`: piecewise `RT_k` fields on the
//! sub-triangulation with continuous normal trace and a divergence that is a
//! single polynomial on the whole cell.

use nalgebra::{Cholesky, DMatrix};

use super::cell::{segment_quadrature, LocalCell};
use crate::error::{Error, Result};
use crate::polybasis::{CellPolyBasis, EdgePolyBasis};

/// Relative singular value threshold for the null space.
pub const NULL_SPACE_TOL: f64 = 1e-10;

/// Rows of the interface conditions on concatenated piecewise `RT_k`
/// coordinates: normal-jump moments on every diagonal, then the divergence
/// of each `T_i`, `i >= 2`, minus that of `T_1`, tested on `T_1`.
pub fn interface_rows(lc: &LocalCell) -> Result<DMatrix<f64>> {
    let k = lc.degree;
    let nt = lc.sub.n_triangles();
    let nrt = lc.rt_dim();
    let np = lc.dim_p();
    let n_jump = (nt - 1) * (k + 1);
    let mut rows = DMatrix::zeros(n_jump + (nt - 1) * np, nt * nrt);
    let mut vals = vec![[0.0; 2]; nrt];
    let mut divs = vec![0.0; nrt];
    let mut leg = vec![0.0; k + 1];

    for (ie, e) in lc.sub.interior_edges.iter().enumerate() {
        let basis = EdgePolyBasis::new(k, e.start, e.end);
        for (t, x, w) in segment_quadrature(&basis, 2 * k + 2)? {
            basis.eval_into(t, &mut leg);
            for (side, &tri) in e.triangles.iter().enumerate() {
                let sign = if side == 0 { 1.0 } else { -1.0 };
                lc.rt_eval(tri, x, &mut vals, &mut divs);
                for j in 0..nrt {
                    let qn = vals[j][0] * e.normal[0] + vals[j][1] * e.normal[1];
                    for p in 0..=k {
                        rows[(ie * (k + 1) + p, tri * nrt + j)] += sign * w * qn * leg[p];
                    }
                }
            }
        }
    }

    let rule = crate::polybasis::tri_quadrature(2 * k + 2)?;
    let map1 = &lc.sub.maps[0];
    let jac1 = map1.det.abs();
    // test functions scaled to T_1 itself; cell-scaled monomials are badly
    // conditioned on a small sub-triangle
    let centre = map1.forward([1.0 / 3.0, 1.0 / 3.0]);
    let test = CellPolyBasis::new(k, centre, map1.diameter());
    let mut phi = vec![0.0; np];
    let mut div1 = vec![0.0; nrt];
    for (p, w) in rule.points.iter().zip(&rule.weights) {
        let x = map1.forward(*p);
        let w = w * jac1;
        test.eval_into(x, &mut phi);
        lc.rt_eval(0, x, &mut vals, &mut div1);
        for i in 1..nt {
            lc.rt_eval(i, x, &mut vals, &mut divs);
            let r0 = n_jump + (i - 1) * np;
            for (a, ph) in phi.iter().enumerate() {
                for j in 0..nrt {
                    rows[(r0 + a, i * nrt + j)] += w * divs[j] * ph;
                    rows[(r0 + a, j)] -= w * div1[j] * ph;
                }
            }
        }
    }
    Ok(rows)
}

/// Block-diagonal mass matrix of the piecewise `RT_k` functions.
pub fn piecewise_rt_mass(lc: &LocalCell) -> Result<DMatrix<f64>> {
    let nrt = lc.rt_dim();
    let n = lc.n_rt();
    let mut m = DMatrix::zeros(n, n);
    let q = lc.quadrature(2 * lc.degree + 2)?;
    let mut vals = vec![[0.0; 2]; nrt];
    let mut divs = vec![0.0; nrt];
    for ((x, w), &t) in q.points.iter().zip(&q.weights).zip(&q.triangle) {
        lc.rt_eval(t, *x, &mut vals, &mut divs);
        let o = t * nrt;
        for i in 0..nrt {
            for j in 0..=i {
                m[(o + i, o + j)] += w * (vals[i][0] * vals[j][0] + vals[i][1] * vals[j][1]);
            }
        }
    }
    m.fill_upper_triangle_with_lower_triangle();
    Ok(m)
}

/// Orthonormal basis of the null space of `c` (columns), using the relative
/// threshold [`NULL_SPACE_TOL`].
pub fn null_space(c: &DMatrix<f64>) -> DMatrix<f64> {
    let n = c.ncols();
    if c.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    // equilibrate rows, then pad to square so the SVD yields a full V
    let mut a = DMatrix::zeros(n.max(c.nrows()), n);
    for i in 0..c.nrows() {
        let norm = c.row(i).norm();
        if norm > 0.0 {
            a.row_mut(i).copy_from(&(c.row(i) / norm));
        }
    }
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= NULL_SPACE_TOL * smax)
        .collect();
    let mut z = DMatrix::zeros(n, keep.len());
    for (col, &i) in keep.iter().enumerate() {
        z.column_mut(col).copy_from(&vt.row(i).transpose());
    }
    z
}

/// Predicted dimension of `Lambda_k(T)` for a cell split into `n` triangles.
pub fn lambda_dim(n: usize, k: usize) -> usize {
    n * (k + 1) * (k + 3) - (n - 1) * (k + 1) - (n - 1) * (k + 1) * (k + 2) / 2
}

/// Basis of `Lambda_k(T)`, orthonormal in `L^2(T)`.
#[derive(Debug, Clone)]
pub struct LambdaBasis {
    pub cell: usize,
    pub degree: usize,
    /// `N x m` coefficients over the piecewise `RT_k` functions
    pub coeffs: DMatrix<f64>,
    /// mass matrix of the piecewise `RT_k` functions
    pub rt_mass: DMatrix<f64>,
}

impl LambdaBasis {
    pub fn dim(&self) -> usize {
        self.coeffs.ncols()
    }
}

pub fn build_lambda_basis(lc: &LocalCell) -> Result<LambdaBasis> {
    let c = interface_rows(lc)?;
    let z = null_space(&c);
    let n = lc.sub.n_triangles();
    let expected = lambda_dim(n, lc.degree);
    if z.ncols() != expected {
        return Err(Error::LambdaDimension {
            cell: lc.cell,
            expected,
            found: z.ncols(),
        });
    }
    let rt_mass = piecewise_rt_mass(lc)?;
    let gram = z.transpose() * &rt_mass * &z;
    let chol = Cholesky::new(gram).ok_or(Error::SingularLocal(lc.cell))?;
    // Z L^{-T}: solve L Y = Z^T, then transpose
    let l = chol.l();
    let y = l
        .solve_lower_triangular(&z.transpose())
        .ok_or(Error::SingularLocal(lc.cell))?;
    Ok(LambdaBasis {
        cell: lc.cell,
        degree: lc.degree,
        coeffs: y.transpose(),
        rt_mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_hex_mesh, PolyMesh};

    fn single(points: Vec<[f64; 2]>) -> PolyMesh {
        let ids = (0..points.len()).collect();
        PolyMesh::new(points, vec![ids]).unwrap()
    }

    fn pentagon() -> PolyMesh {
        single(vec![[0.0, 0.0], [1.0, 0.0], [1.3, 0.8], [0.5, 1.3], [-0.3, 0.8]])
    }

    #[test]
    fn pentagon_and_square_dimensions() {
        let lc = LocalCell::new(&pentagon(), 0, 0).unwrap();
        assert_eq!(interface_rows(&lc).unwrap().shape(), (4, 9));
        assert_eq!(build_lambda_basis(&lc).unwrap().dim(), 5);
        let sq = single(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        let lc = LocalCell::new(&sq, 0, 0).unwrap();
        assert_eq!(build_lambda_basis(&lc).unwrap().dim(), 4);
    }

    #[test]
    fn triangle_cell_is_plain_rt() {
        let t = single(vec![[0.0, 0.0], [2.0, 0.3], [0.4, 1.0]]);
        for k in 0..=3 {
            let lc = LocalCell::new(&t, 0, k).unwrap();
            assert_eq!(build_lambda_basis(&lc).unwrap().dim(), (k + 1) * (k + 3));
        }
    }

    #[test]
    fn basis_satisfies_constraints_and_is_orthonormal() {
        let m = generate_hex_mesh(1);
        for k in 0..=2 {
            for c in [0, 3, 12, 17] {
                let lc = LocalCell::new(&m, c, k).unwrap();
                let lb = build_lambda_basis(&lc).unwrap();
                assert_eq!(lb.dim(), lambda_dim(lc.sub.n_triangles(), k));
                let res = interface_rows(&lc).unwrap() * &lb.coeffs;
                assert!(res.amax() < 1e-11, "k={k} cell={c}: {}", res.amax());
                let g = lb.coeffs.transpose() * &lb.rt_mass * &lb.coeffs;
                let id = DMatrix::<f64>::identity(lb.dim(), lb.dim());
                assert!((g - id).amax() < 1e-10);
                let sv = lb.coeffs.clone().svd(false, false).singular_values;
                assert!(sv.min() / sv.max() > 1e-10);
            }
        }
    }

    #[test]
    fn dimension_identity() {
        for n in 1..=6 {
            for k in 0..=2 {
                let m = lambda_dim(n, k);
                assert_eq!(
                    m + (n - 1) * (k + 1) + (n - 1) * (k + 1) * (k + 2) / 2,
                    n * (k + 1) * (k + 3)
                );
            }
        }
        assert_eq!(lambda_dim(3, 0), 5);
        assert_eq!(lambda_dim(2, 0), 4);
    }
}
