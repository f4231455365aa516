//! Per-cell geometry, bases and quadrature shared by the local operators.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::mesh::{subtriangulate, PolyMesh, Point, SubTriangulation};
use crate::polybasis::{
    dim_pk, edge_quadrature, rt_basis_cached, tri_quadrature, CellPolyBasis, EdgePolyBasis,
    RtRefBasis,
};

/// Highest polynomial degree supported by the discrete spaces.
pub const MAX_DEGREE: usize = 3;

/// Quadrature degree for non-polynomial data (loads, exact solutions).
pub const DATA_QUAD_DEGREE: usize = 14;

/// Quadrature degree for polynomial integrands of a degree-`k` space.
pub fn poly_quad_degree(k: usize) -> usize {
    2 * k + 4
}

/// Physical quadrature points over a whole cell, tagged by sub-triangle.
#[derive(Debug, Clone)]
pub struct CellQuadrature {
    pub points: Vec<Point>,
    /// physical weights; they sum to the cell area
    pub weights: Vec<f64>,
    pub triangle: Vec<usize>,
}

pub(crate) fn cell_quadrature(sub: &SubTriangulation, degree: usize) -> Result<CellQuadrature> {
    let rule = tri_quadrature(degree)?;
    let n = rule.points.len() * sub.n_triangles();
    let mut q = CellQuadrature {
        points: Vec::with_capacity(n),
        weights: Vec::with_capacity(n),
        triangle: Vec::with_capacity(n),
    };
    for (t, map) in sub.maps.iter().enumerate() {
        let jac = map.det.abs();
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            q.points.push(map.forward(*p));
            q.weights.push(w * jac);
            q.triangle.push(t);
        }
    }
    Ok(q)
}

/// Points `(t, x, w)` on a segment: parameter, physical point, physical weight.
pub fn segment_quadrature(
    basis: &EdgePolyBasis,
    degree: usize,
) -> Result<Vec<(f64, Point, f64)>> {
    let rule = edge_quadrature(degree)?;
    Ok(rule
        .points
        .iter()
        .zip(&rule.weights)
        .map(|(&t, &w)| (t, basis.point(t), w * basis.length))
        .collect())
}

/// Local data of one cell for a degree-`k` discretization.
#[derive(Debug, Clone)]
pub struct LocalCell {
    pub cell: usize,
    pub degree: usize,
    pub sub: SubTriangulation,
    pub poly: CellPolyBasis,
    /// cell edges in local order, parametrized in the global edge direction
    pub edges: Vec<EdgePolyBasis>,
    pub edge_ids: Vec<usize>,
    /// outward unit normals of the cell edges
    pub normals: Vec<Point>,
    pub on_boundary: Vec<bool>,
    pub area: f64,
    pub diameter: f64,
    pub rt: &'static RtRefBasis,
    /// mass matrix of `P_k(T)` in the scaled monomial basis
    pub p_mass: DMatrix<f64>,
    p_mass_chol: Cholesky<f64, Dyn>,
    /// `\int_T phi_j`
    pub p_mean: DVector<f64>,
}

pub(crate) fn check_degree(k: usize) -> Result<()> {
    if k > MAX_DEGREE {
        return Err(Error::UnsupportedDegree {
            degree: k,
            supported: "0..=3",
        });
    }
    Ok(())
}

pub(crate) fn cell_edge_bases(mesh: &PolyMesh, cell: usize, k: usize) -> Vec<EdgePolyBasis> {
    mesh.cell_edges[cell]
        .iter()
        .map(|&e| {
            let [a, b] = mesh.edges[e].vertices;
            EdgePolyBasis::new(k, mesh.vertices[a], mesh.vertices[b])
        })
        .collect()
}

pub(crate) fn poly_mass(basis: &CellPolyBasis, quad: &CellQuadrature) -> DMatrix<f64> {
    let n = basis.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut v = vec![0.0; n];
    for (x, w) in quad.points.iter().zip(&quad.weights) {
        basis.eval_into(*x, &mut v);
        for i in 0..n {
            for j in 0..=i {
                m[(i, j)] += w * v[i] * v[j];
            }
        }
    }
    m.fill_upper_triangle_with_lower_triangle();
    m
}

impl AsRef<LocalCell> for LocalCell {
    fn as_ref(&self) -> &LocalCell {
        self
    }
}

impl LocalCell {
    pub fn new(mesh: &PolyMesh, cell: usize, k: usize) -> Result<Self> {
        check_degree(k)?;
        let sub = subtriangulate(mesh, cell)?;
        let poly = CellPolyBasis::new(k, mesh.centroid(cell), mesh.cell_diameters[cell]);
        let edges = cell_edge_bases(mesh, cell, k);
        let edge_ids = mesh.cell_edges[cell].clone();
        let normals = (0..edges.len()).map(|i| mesh.outward_normal(cell, i)).collect();
        let on_boundary = edge_ids.iter().map(|&e| mesh.edges[e].boundary).collect();
        let quad = cell_quadrature(&sub, poly_quad_degree(k))?;
        let p_mass = poly_mass(&poly, &quad);
        let p_mass_chol = Cholesky::new(p_mass.clone()).ok_or(Error::SingularLocal(cell))?;
        let mut p_mean = DVector::zeros(poly.dim());
        let mut v = vec![0.0; poly.dim()];
        for (x, w) in quad.points.iter().zip(&quad.weights) {
            poly.eval_into(*x, &mut v);
            for j in 0..v.len() {
                p_mean[j] += w * v[j];
            }
        }
        Ok(Self {
            cell,
            degree: k,
            sub,
            poly,
            edges,
            edge_ids,
            normals,
            on_boundary,
            area: mesh.cell_areas[cell],
            diameter: mesh.cell_diameters[cell],
            rt: rt_basis_cached(k)?,
            p_mass,
            p_mass_chol,
            p_mean,
        })
    }

    pub fn dim_p(&self) -> usize {
        dim_pk(self.degree)
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Scalar local unknowns: interior `P_k(T)` then `P_k(e)` per edge.
    pub fn scalar_dofs(&self) -> usize {
        self.dim_p() + self.n_edges() * (self.degree + 1)
    }

    /// Offset of edge `i`'s block inside the scalar local vector.
    pub fn edge_offset(&self, i: usize) -> usize {
        self.dim_p() + i * (self.degree + 1)
    }

    /// `RT_k` functions per sub-triangle.
    pub fn rt_dim(&self) -> usize {
        self.rt.dim()
    }

    /// Length of the concatenated piecewise `RT_k` coordinate vector.
    pub fn n_rt(&self) -> usize {
        self.sub.n_triangles() * self.rt.dim()
    }

    pub fn quadrature(&self, degree: usize) -> Result<CellQuadrature> {
        cell_quadrature(&self.sub, degree)
    }

    pub fn edge_quadrature(&self, i: usize, degree: usize) -> Result<Vec<(f64, Point, f64)>> {
        segment_quadrature(&self.edges[i], degree)
    }

    /// Physical values and divergences of the `RT_k` functions of
    /// sub-triangle `t` at `x`. Points outside `T_t` evaluate the polynomial
    /// extension.
    pub fn rt_eval(&self, t: usize, x: Point, vals: &mut [[f64; 2]], divs: &mut [f64]) {
        let map = &self.sub.maps[t];
        self.rt.eval_into(map.inverse(x), vals, divs);
        for v in vals.iter_mut() {
            *v = map.piola(*v);
        }
        for d in divs.iter_mut() {
            *d /= map.det;
        }
    }

    /// Solve `M_P c = rhs` with the cell mass matrix.
    pub fn solve_p_mass(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.p_mass_chol.solve(rhs)
    }
}
