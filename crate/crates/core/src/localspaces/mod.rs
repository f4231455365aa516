//! Local spaces on each polygon: `Lambda_k(T)`, weak gradient and weak
//! divergence, and L2 projections.

mod cell;
mod functions;
mod lambda;
mod weak;

use rayon::prelude::*;

pub use cell::{
    poly_quad_degree, segment_quadrature, CellQuadrature, LocalCell, DATA_QUAD_DEGREE, MAX_DEGREE,
};
pub use functions::{
    eval_lambda, interpolate, interpolate_pressure, project_q0, project_qb, project_qbb,
    project_qcal, PressureFunction, WgFunction,
};
pub use lambda::{
    build_lambda_basis, interface_rows, lambda_dim, null_space, piecewise_rt_mass, LambdaBasis,
    NULL_SPACE_TOL,
};
pub use weak::{weak_divergence, weak_divergence_matrix, weak_gradient, LocalOperators};

use crate::error::Result;
use crate::mesh::PolyMesh;

/// Everything the global assembly needs from one cell.
#[derive(Debug, Clone)]
pub struct CellSpace {
    pub local: LocalCell,
    pub lambda: LambdaBasis,
    pub ops: LocalOperators,
}

impl CellSpace {
    pub fn new(mesh: &PolyMesh, cell: usize, k: usize) -> Result<Self> {
        let local = LocalCell::new(mesh, cell, k)?;
        let lambda = build_lambda_basis(&local)?;
        let ops = LocalOperators::new(&local, &lambda)?;
        Ok(Self { local, lambda, ops })
    }
}

impl AsRef<LocalCell> for CellSpace {
    fn as_ref(&self) -> &LocalCell {
        &self.local
    }
}

/// Build every cell's local spaces, in parallel unless `serial`.
pub fn build_cell_spaces(mesh: &PolyMesh, k: usize, serial: bool) -> Result<Vec<CellSpace>> {
    if serial {
        (0..mesh.n_cells()).map(|c| CellSpace::new(mesh, c, k)).collect()
    } else {
        (0..mesh.n_cells()).into_par_iter().map(|c| CellSpace::new(mesh, c, k)).collect()
    }
}
