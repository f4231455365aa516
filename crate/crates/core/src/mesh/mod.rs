//! Polygonal meshes: topology, generators, sub-triangulation and text I/O.

mod generate;
mod io;
mod subtri;

use std::collections::HashMap;

pub use generate::{
    generate_deformed_rect_mesh, generate_hex_mesh, generate_lshape_mesh, generate_rect_mesh,
    hex_columns_per_unit, DEFAULT_DEFORM_AMPLITUDE,
};
pub use io::{read_mesh, write_mesh};
pub use subtri::{subtriangulate, InteriorEdge, SubTriangulation};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// A mesh edge. `vertices[0] < vertices[1]` fixes the parameter direction of
/// edge polynomials, and `normal` points out of `cells[0]`, the lower-index
/// neighbour.
#[derive(Debug, Clone)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub cells: [usize; 2],
    pub normal: Point,
    pub length: f64,
    pub boundary: bool,
}

impl Edge {
    pub fn other_cell(&self, cell: usize) -> Option<usize> {
        if self.boundary {
            None
        } else if self.cells[0] == cell {
            Some(self.cells[1])
        } else {
            Some(self.cells[0])
        }
    }
}

/// Polygonal partition of a planar domain.
#[derive(Debug, Clone)]
pub struct PolyMesh {
    pub vertices: Vec<Point>,
    /// counter-clockwise vertex loops
    pub cells: Vec<Vec<usize>>,
    pub edges: Vec<Edge>,
    /// `cell_edges[c][i]` is the edge from local vertex `i` to `i + 1`
    pub cell_edges: Vec<Vec<usize>>,
    pub cell_areas: Vec<f64>,
    pub cell_diameters: Vec<f64>,
    pub h: f64,
}

pub fn signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    let mut a = 0.0;
    for i in 0..n {
        let p = pts[i];
        let q = pts[(i + 1) % n];
        a += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * a
}

pub(crate) fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Closed-segment intersection test with a relative tolerance `eps` on the
/// orientation determinants.
pub(crate) fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point, eps: f64) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps))
        && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps))
    {
        return true;
    }
    let on = |a: Point, b: Point, c: Point, d: f64| {
        d.abs() <= eps
            && c[0] >= a[0].min(b[0]) - 1e-14
            && c[0] <= a[0].max(b[0]) + 1e-14
            && c[1] >= a[1].min(b[1]) - 1e-14
            && c[1] <= a[1].max(b[1]) + 1e-14
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// True when the polygon has no two non-adjacent edges that touch.
pub fn is_simple_polygon(pts: &[Point]) -> bool {
    let n = pts.len();
    if n < 3 {
        return false;
    }
    let diam = pts
        .iter()
        .flat_map(|p| pts.iter().map(move |q| dist(*p, *q)))
        .fold(0.0, f64::max);
    let eps = 1e-12 * diam * diam;
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_intersect(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n], eps) {
                return false;
            }
        }
    }
    // consecutive edges must not fold back onto each other
    for i in 0..n {
        let a = pts[(i + n - 1) % n];
        let b = pts[i];
        let c = pts[(i + 1) % n];
        let back = (b[0] - a[0]) * (c[0] - b[0]) + (b[1] - a[1]) * (c[1] - b[1]);
        if orient(a, b, c).abs() <= eps && back < 0.0 {
            return false;
        }
    }
    true
}

impl PolyMesh {
    /// Build topology from vertices and counter-clockwise cell loops.
    pub fn new(vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<Self> {
        let mut edge_map: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut cell_edges = Vec::with_capacity(cells.len());
        let mut cell_areas = Vec::with_capacity(cells.len());
        let mut cell_diameters = Vec::with_capacity(cells.len());
        // traversal direction of the first owner, to check orientation consistency
        let mut first_dir: Vec<bool> = Vec::new();

        for (c, cell) in cells.iter().enumerate() {
            if cell.len() < 3 {
                return Err(Error::InvalidMesh(format!("cell {c} has {} vertices", cell.len())));
            }
            if let Some(&bad) = cell.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(format!("cell {c} references vertex {bad}")));
            }
            let mut sorted = cell.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != cell.len() {
                return Err(Error::InvalidMesh(format!("cell {c} repeats a vertex")));
            }
            let pts: Vec<Point> = cell.iter().map(|&v| vertices[v]).collect();
            let area = signed_area(&pts);
            let diam = pts
                .iter()
                .flat_map(|p| pts.iter().map(move |q| dist(*p, *q)))
                .fold(0.0, f64::max);
            if area <= 1e-14 * diam * diam {
                return Err(Error::InvalidMesh(format!(
                    "cell {c} has non-positive signed area {area:.3e}"
                )));
            }
            if !is_simple_polygon(&pts) {
                return Err(Error::InvalidMesh(format!("cell {c} is not a simple polygon")));
            }
            cell_areas.push(area);
            cell_diameters.push(diam);

            let n = cell.len();
            let mut local = Vec::with_capacity(n);
            for i in 0..n {
                let a = cell[i];
                let b = cell[(i + 1) % n];
                let key = (a.min(b), a.max(b));
                let forward = a < b;
                match edge_map.get(&key) {
                    Some(&e) => {
                        let edge = &mut edges[e];
                        if !edge.boundary {
                            return Err(Error::InvalidMesh(format!(
                                "edge {key:?} shared by more than two cells"
                            )));
                        }
                        if first_dir[e] == forward {
                            return Err(Error::InvalidMesh(format!(
                                "cells {} and {c} traverse edge {key:?} in the same direction",
                                edge.cells[0]
                            )));
                        }
                        edge.cells[1] = c;
                        edge.boundary = false;
                        local.push(e);
                    }
                    None => {
                        let p = vertices[a];
                        let q = vertices[b];
                        let length = dist(p, q);
                        // outward normal of a CCW loop is the tangent rotated clockwise
                        let normal = [(q[1] - p[1]) / length, -(q[0] - p[0]) / length];
                        let e = edges.len();
                        edges.push(Edge {
                            vertices: [key.0, key.1],
                            cells: [c, usize::MAX],
                            normal,
                            length,
                            boundary: true,
                        });
                        first_dir.push(forward);
                        edge_map.insert(key, e);
                        local.push(e);
                    }
                }
            }
            cell_edges.push(local);
        }
        let h = cell_diameters.iter().copied().fold(0.0, f64::max);
        Ok(Self {
            vertices,
            cells,
            edges,
            cell_edges,
            cell_areas,
            cell_diameters,
            h,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_interior_edges(&self) -> usize {
        self.edges.iter().filter(|e| !e.boundary).count()
    }

    pub fn cell_points(&self, c: usize) -> Vec<Point> {
        self.cells[c].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn total_area(&self) -> f64 {
        self.cell_areas.iter().sum()
    }

    /// Outward unit normal of local edge `i` of cell `c`.
    pub fn outward_normal(&self, c: usize, i: usize) -> Point {
        let e = &self.edges[self.cell_edges[c][i]];
        if e.cells[0] == c {
            e.normal
        } else {
            [-e.normal[0], -e.normal[1]]
        }
    }

    /// Area-weighted centroid of cell `c`.
    pub fn centroid(&self, c: usize) -> Point {
        let pts = self.cell_points(c);
        let n = pts.len();
        let mut cx = 0.0;
        let mut cy = 0.0;
        let mut a = 0.0;
        for i in 0..n {
            let p = pts[i];
            let q = pts[(i + 1) % n];
            let cr = p[0] * q[1] - q[0] * p[1];
            a += cr;
            cx += (p[0] + q[0]) * cr;
            cy += (p[1] + q[1]) * cr;
        }
        [cx / (3.0 * a), cy / (3.0 * a)]
    }

    /// Point-in-polygon test (strict interior) by winding.
    pub fn cell_contains(&self, c: usize, x: Point) -> bool {
        let pts = self.cell_points(c);
        let n = pts.len();
        let scale = self.cell_diameters[c];
        for i in 0..n {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            if segments_intersect(a, b, x, x, 1e-14 * scale * scale) {
                return false;
            }
        }
        let mut inside = false;
        for i in 0..n {
            let a = pts[i];
            let b = pts[(i + 1) % n];
            if (a[1] > x[1]) != (b[1] > x[1]) {
                let xi = a[0] + (x[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
                if x[0] < xi {
                    inside = !inside;
                }
            }
        }
        inside
    }
}
