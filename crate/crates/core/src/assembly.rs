//! Global degrees of freedom and the saddle-point system shared by the
//! pressure-robust and the standard scheme.
//!
//! Unknowns are ordered as cell-interior velocity, interior-edge velocity,
//! pressure, then one Lagrange multiplier enforcing `\int p_h = 0`. The
//! matrix is
//!
//! ```text
//! [  A   -B^T  0 ]
//! [ -B    0    c ]
//! [  0    c^T  0 ]
//! ```
//!
//! with `A` the weak-gradient stiffness scaled by `nu`, `B` the weak
//! divergence tested against the pressure basis and `c` the cell means of
//! the pressure basis. Boundary-edge velocity unknowns are not part of the
//! system.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::localspaces::{build_cell_spaces, project_qb, CellSpace, LocalCell, WgFunction, DATA_QUAD_DEGREE};
use crate::mesh::{PolyMesh, Point};
use crate::polybasis::{dim_pk, MAX_QUAD_DEGREE};
use crate::reconstruct::{build_recon_operator, robust_rhs_cell_with, standard_rhs_cell_with, ReconOperator};

/// Load-term discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// `(f, Pi_h v)`
    Robust,
    /// `(f, v_0)`
    Standard,
}

impl Scheme {
    pub const ALL: [Scheme; 2] = [Scheme::Robust, Scheme::Standard];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Robust => "robust",
            Scheme::Standard => "standard",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "robust" => Ok(Scheme::Robust),
            "standard" => Ok(Scheme::Standard),
            _ => Err(Error::Config(format!("unknown scheme `{s}` (robust|standard)"))),
        }
    }
}

/// What a global unknown belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofOwner {
    CellVelocity { cell: usize, comp: usize, index: usize },
    EdgeVelocity { edge: usize, comp: usize, index: usize },
    Pressure { cell: usize, index: usize },
    Multiplier,
}

/// Numbering of the global unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub degree: usize,
    pub n_cells: usize,
    pub n_edges: usize,
    /// interior index of each mesh edge, `None` on the boundary
    pub interior_edge: Vec<Option<usize>>,
    pub interior_edges: Vec<usize>,
    pub edge_offset: usize,
    pub pressure_offset: usize,
    pub multiplier: usize,
}

impl DofMap {
    pub fn new(mesh: &PolyMesh, k: usize) -> Self {
        let np = dim_pk(k);
        let mut interior_edge = vec![None; mesh.n_edges()];
        let mut interior_edges = Vec::new();
        for (e, edge) in mesh.edges.iter().enumerate() {
            if !edge.boundary {
                interior_edge[e] = Some(interior_edges.len());
                interior_edges.push(e);
            }
        }
        let edge_offset = mesh.n_cells() * 2 * np;
        let pressure_offset = edge_offset + interior_edges.len() * 2 * (k + 1);
        let multiplier = pressure_offset + mesh.n_cells() * np;
        Self {
            degree: k,
            n_cells: mesh.n_cells(),
            n_edges: mesh.n_edges(),
            interior_edge,
            interior_edges,
            edge_offset,
            pressure_offset,
            multiplier,
        }
    }

    fn np(&self) -> usize {
        dim_pk(self.degree)
    }

    pub fn dim(&self) -> usize {
        self.multiplier + 1
    }

    pub fn n_velocity(&self) -> usize {
        self.pressure_offset
    }

    pub fn n_pressure(&self) -> usize {
        self.multiplier - self.pressure_offset
    }

    pub fn cell_dof(&self, cell: usize, comp: usize, j: usize) -> usize {
        (cell * 2 + comp) * self.np() + j
    }

    pub fn edge_dof(&self, edge: usize, comp: usize, p: usize) -> Option<usize> {
        let ne = self.degree + 1;
        self.interior_edge[edge].map(|ie| self.edge_offset + (ie * 2 + comp) * ne + p)
    }

    pub fn pressure_dof(&self, cell: usize, j: usize) -> usize {
        self.pressure_offset + cell * self.np() + j
    }

    /// Global index of every entry of a cell's local vector unknowns;
    /// `None` for boundary-edge unknowns.
    pub fn local_velocity(&self, lc: &LocalCell) -> Vec<Option<usize>> {
        let mut out = Vec::with_capacity(2 * lc.scalar_dofs());
        for comp in 0..2 {
            for j in 0..self.np() {
                out.push(Some(self.cell_dof(lc.cell, comp, j)));
            }
            for &e in &lc.edge_ids {
                for p in 0..=self.degree {
                    out.push(self.edge_dof(e, comp, p));
                }
            }
        }
        out
    }

    pub fn owner(&self, dof: usize) -> Option<DofOwner> {
        let np = self.np();
        let ne = self.degree + 1;
        if dof < self.edge_offset {
            Some(DofOwner::CellVelocity {
                cell: dof / (2 * np),
                comp: (dof / np) % 2,
                index: dof % np,
            })
        } else if dof < self.pressure_offset {
            let r = dof - self.edge_offset;
            Some(DofOwner::EdgeVelocity {
                edge: self.interior_edges[r / (2 * ne)],
                comp: (r / ne) % 2,
                index: r % ne,
            })
        } else if dof < self.multiplier {
            let r = dof - self.pressure_offset;
            Some(DofOwner::Pressure {
                cell: r / np,
                index: r % np,
            })
        } else if dof == self.multiplier {
            Some(DofOwner::Multiplier)
        } else {
            None
        }
    }

    pub fn kind(&self, dof: usize) -> &'static str {
        match self.owner(dof) {
            Some(DofOwner::CellVelocity { .. }) => "cell velocity",
            Some(DofOwner::EdgeVelocity { .. }) => "edge velocity",
            Some(DofOwner::Pressure { .. }) => "pressure",
            Some(DofOwner::Multiplier) => "multiplier",
            None => "out of range",
        }
    }

    /// Global velocity vector of a WG function, boundary values dropped.
    pub fn restrict(&self, v: &WgFunction) -> Vec<f64> {
        let mut out = vec![0.0; self.n_velocity()];
        out[..self.edge_offset].copy_from_slice(&v.interior);
        let ne = self.degree + 1;
        for (ie, &e) in self.interior_edges.iter().enumerate() {
            let o = self.edge_offset + ie * 2 * ne;
            out[o..o + 2 * ne].copy_from_slice(&v.edge[e * 2 * ne..(e + 1) * 2 * ne]);
        }
        out
    }

    /// WG function from system velocity unknowns plus boundary values `lift`.
    pub fn extend(&self, x: &[f64], lift: &WgFunction) -> WgFunction {
        let mut v = lift.clone();
        v.interior.copy_from_slice(&x[..self.edge_offset]);
        let ne = self.degree + 1;
        for (ie, &e) in self.interior_edges.iter().enumerate() {
            let o = self.edge_offset + ie * 2 * ne;
            v.edge[e * 2 * ne..(e + 1) * 2 * ne].copy_from_slice(&x[o..o + 2 * ne]);
        }
        v
    }
}

/// Mesh, local spaces, reconstruction operators and DOF numbering for one
/// degree.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: PolyMesh,
    pub mesh_id: String,
    pub degree: usize,
    pub cells: Vec<CellSpace>,
    pub recon: Vec<ReconOperator>,
    pub dofs: DofMap,
    pub serial: bool,
    /// quadrature degree for load integrals
    pub load_quadrature: usize,
}

impl Discretization {
    pub fn new(mesh: PolyMesh, k: usize, serial: bool) -> Result<Self> {
        let cells = build_cell_spaces(&mesh, k, serial)?;
        let build = |cs: &CellSpace| build_recon_operator(&cs.local, &cs.lambda);
        let recon = if serial {
            cells.iter().map(build).collect::<Result<Vec<_>>>()?
        } else {
            cells.par_iter().map(build).collect::<Result<Vec<_>>>()?
        };
        let dofs = DofMap::new(&mesh, k);
        Ok(Self {
            mesh,
            mesh_id: String::from("mesh"),
            degree: k,
            cells,
            recon,
            dofs,
            serial,
            load_quadrature: DATA_QUAD_DEGREE,
        })
    }

    /// Override the quadrature degree of the load integrals.
    pub fn with_load_quadrature(mut self, degree: usize) -> Result<Self> {
        if degree < self.degree + 1 || degree > MAX_QUAD_DEGREE {
            return Err(Error::Config(format!(
                "load quadrature degree {degree} outside {}..={MAX_QUAD_DEGREE}",
                self.degree + 1
            )));
        }
        self.load_quadrature = degree;
        Ok(self)
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.mesh_id = id.into();
        self
    }

    /// Run `f` on every cell in cell order, in parallel unless serial.
    pub(crate) fn per_cell<T: Send, F>(&self, f: F) -> Result<Vec<T>>
    where
        F: Fn(usize) -> Result<T> + Sync + Send,
    {
        if self.serial {
            (0..self.cells.len()).map(f).collect()
        } else {
            (0..self.cells.len()).into_par_iter().map(f).collect()
        }
    }
}

/// Sparse entries `(row, col, value)`.
pub type Triplets = Vec<(usize, usize, f64)>;

/// Sort column-major and sum duplicates, keeping the summation order of the
/// input for equal keys.
pub fn merge_triplets(mut t: Triplets) -> Triplets {
    t.sort_by_key(|&(r, c, _)| (c, r));
    let mut out: Triplets = Vec::with_capacity(t.len());
    for (r, c, v) in t {
        match out.last_mut() {
            Some(last) if last.0 == r && last.1 == c => last.2 += v,
            _ => out.push((r, c, v)),
        }
    }
    out
}

/// `A` over the system velocity unknowns.
pub fn assemble_stiffness(disc: &Discretization, nu: f64) -> Triplets {
    let mut t = Vec::new();
    for cs in &disc.cells {
        let map = disc.dofs.local_velocity(&cs.local);
        let a = cs.ops.vector_stiffness();
        for (i, gi) in map.iter().enumerate() {
            let Some(gi) = *gi else { continue };
            for (j, gj) in map.iter().enumerate() {
                if let Some(gj) = *gj {
                    t.push((gi, gj, nu * a[(i, j)]));
                }
            }
        }
    }
    merge_triplets(t)
}

/// `B[w][v] = (div_w phi_v, chi_w)`, rows indexed by global pressure dof.
pub fn assemble_div(disc: &Discretization) -> Triplets {
    let mut t = Vec::new();
    for cs in &disc.cells {
        let map = disc.dofs.local_velocity(&cs.local);
        let d = &cs.ops.div;
        for i in 0..d.nrows() {
            let row = disc.dofs.pressure_dof(cs.local.cell, i);
            for (j, gj) in map.iter().enumerate() {
                if let Some(gj) = *gj {
                    t.push((row, gj, d[(i, j)]));
                }
            }
        }
    }
    merge_triplets(t)
}

/// The full system matrix; independent of the load and the scheme.
pub fn assemble_matrix(disc: &Discretization, nu: f64) -> Triplets {
    let mut t = assemble_stiffness(disc, nu);
    for (r, c, v) in assemble_div(disc) {
        t.push((r, c, -v));
        t.push((c, r, -v));
    }
    let m = disc.dofs.multiplier;
    for cs in &disc.cells {
        for (j, &mean) in cs.local.p_mean.iter().enumerate() {
            let p = disc.dofs.pressure_dof(cs.local.cell, j);
            t.push((p, m, mean));
            t.push((m, p, mean));
        }
    }
    merge_triplets(t)
}

/// Local load vector of one cell for the given scheme.
pub fn cell_load<F>(disc: &Discretization, cell: usize, f: F, scheme: Scheme) -> Result<DVector<f64>>
where
    F: Fn(Point) -> Point,
{
    let lc = &disc.cells[cell].local;
    match scheme {
        Scheme::Robust => robust_rhs_cell_with(lc, &disc.recon[cell], f, disc.load_quadrature),
        Scheme::Standard => standard_rhs_cell_with(lc, f, disc.load_quadrature),
    }
}

/// Load vector over the whole system (zero outside the velocity block).
pub fn assemble_rhs<F>(disc: &Discretization, f: F, scheme: Scheme) -> Result<Vec<f64>>
where
    F: Fn(Point) -> Point + Sync,
{
    let loads = disc.per_cell(|c| cell_load(disc, c, &f, scheme))?;
    let mut rhs = vec![0.0; disc.dofs.dim()];
    for (cs, load) in disc.cells.iter().zip(&loads) {
        for (i, g) in disc.dofs.local_velocity(&cs.local).into_iter().enumerate() {
            if let Some(g) = g {
                rhs[g] += load[i];
            }
        }
    }
    Ok(rhs)
}

/// Velocity boundary condition.
#[derive(Clone, Copy)]
pub enum BoundaryData<'a> {
    Homogeneous,
    /// `u = g` on the boundary, imposed as `u_b = Q_b g` on boundary edges
    Dirichlet(&'a (dyn Fn(Point) -> Point + Sync)),
}

impl fmt::Debug for BoundaryData<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryData::Homogeneous => f.write_str("Homogeneous"),
            BoundaryData::Dirichlet(_) => f.write_str("Dirichlet(..)"),
        }
    }
}

/// Boundary-edge values of the velocity: zero for homogeneous data,
/// `Q_b g` otherwise. Interior unknowns of the result are zero.
pub fn apply_boundary(mesh: &PolyMesh, k: usize, bc: BoundaryData<'_>) -> Result<WgFunction> {
    let mut lift = WgFunction::zeros(mesh, k);
    if let BoundaryData::Dirichlet(g) = bc {
        for (e, edge) in mesh.edges.iter().enumerate() {
            if edge.boundary {
                let [a, b] = project_qb(mesh, e, k, g)?;
                lift.edge_block_mut(e, 0).copy_from_slice(&a);
                lift.edge_block_mut(e, 1).copy_from_slice(&b);
            }
        }
    }
    Ok(lift)
}

/// Assembled saddle-point system with its metadata.
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    pub dofs: DofMap,
    /// merged, column-major sorted entries
    pub entries: Triplets,
    pub rhs: Vec<f64>,
    /// boundary-edge velocity values eliminated from the system
    pub lift: WgFunction,
    pub scheme: Scheme,
    pub nu: f64,
    pub degree: usize,
    pub mesh_id: String,
}

impl GlobalSystem {
    pub fn dim(&self) -> usize {
        self.dofs.dim()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    /// Entries of the velocity-velocity block.
    pub fn a_block(&self) -> Triplets {
        let nv = self.dofs.n_velocity();
        self.entries.iter().copied().filter(|&(r, c, _)| r < nv && c < nv).collect()
    }

    /// Entries of `B` (pressure rows, velocity columns), sign restored.
    pub fn b_block(&self) -> Triplets {
        let (nv, m) = (self.dofs.n_velocity(), self.dofs.multiplier);
        self.entries
            .iter()
            .filter(|&&(r, c, _)| r >= nv && r < m && c < nv)
            .map(|&(r, c, v)| (r, c, -v))
            .collect()
    }

    /// MatrixMarket coordinate dump of the matrix.
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(
            w,
            "% scheme={} nu={:e} k={} mesh={}",
            self.scheme, self.nu, self.degree, self.mesh_id
        )?;
        writeln!(w, "{} {} {}", self.dim(), self.dim(), self.nnz())?;
        for &(r, c, v) in &self.entries {
            writeln!(w, "{} {} {:.17e}", r + 1, c + 1, v)?;
        }
        Ok(())
    }
}

/// Assemble matrix, load and boundary terms for one scheme.
pub fn assemble_system<F>(
    disc: &Discretization,
    nu: f64,
    f: F,
    scheme: Scheme,
    bc: BoundaryData<'_>,
) -> Result<GlobalSystem>
where
    F: Fn(Point) -> Point + Sync,
{
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::Config(format!("viscosity must be positive, got {nu}")));
    }
    let entries = assemble_matrix(disc, nu);
    let mut rhs = assemble_rhs(disc, f, scheme)?;
    let lift = apply_boundary(&disc.mesh, disc.degree, bc)?;
    if matches!(bc, BoundaryData::Dirichlet(_)) {
        // move the known boundary values to the right-hand side
        for cs in &disc.cells {
            let lc = &cs.local;
            if !lc.on_boundary.iter().any(|&b| b) {
                continue;
            }
            let l = DVector::from_vec(lift.local_dofs(lc));
            let al = cs.ops.vector_stiffness() * &l * nu;
            let bl = &cs.ops.div * &l;
            for (i, g) in disc.dofs.local_velocity(lc).into_iter().enumerate() {
                if let Some(g) = g {
                    rhs[g] -= al[i];
                }
            }
            for (j, v) in bl.iter().enumerate() {
                rhs[disc.dofs.pressure_dof(lc.cell, j)] += v;
            }
        }
    }
    Ok(GlobalSystem {
        dofs: disc.dofs.clone(),
        entries,
        rhs,
        lift,
        scheme,
        nu,
        degree: disc.degree,
        mesh_id: disc.mesh_id.clone(),
    })
}

#[cfg(test)]
mod tests;
