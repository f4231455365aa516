//! Splitting a polygonal cell into triangles without new vertices.

use super::{orient, segments_intersect, PolyMesh, Point};
use crate::error::{Error, Result};
use crate::polybasis::AffineMap;

/// A diagonal shared by two sub-triangles of one cell.
#[derive(Debug, Clone)]
pub struct InteriorEdge {
    /// `triangles[0] < triangles[1]`
    pub triangles: [usize; 2],
    /// reference edge index of the diagonal inside each triangle
    pub ref_edges: [usize; 2],
    /// endpoints ordered by global vertex id; edge polynomials run start to end
    pub start: Point,
    pub end: Point,
    /// unit normal pointing out of `triangles[0]`
    pub normal: Point,
    pub length: f64,
}

/// Triangles `T_1, ..., T_n` of one cell.
#[derive(Debug, Clone)]
pub struct SubTriangulation {
    pub cell: usize,
    /// global vertex ids of each triangle, counter-clockwise
    pub triangles: Vec<[usize; 3]>,
    pub areas: Vec<f64>,
    pub maps: Vec<AffineMap>,
    pub interior_edges: Vec<InteriorEdge>,
    /// for each cell-local edge: (triangle, reference edge index)
    pub boundary_edges: Vec<(usize, usize)>,
}

impl SubTriangulation {
    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// |J| for triangle `i`; equals twice its area.
    pub fn jacobian_det(&self, i: usize) -> f64 {
        self.maps[i].det.abs()
    }
}

fn fan_is_valid(pts: &[Point], apex: usize, eps: f64) -> bool {
    let n = pts.len();
    let at = |i: usize| pts[(apex + i) % n];
    for i in 1..n - 1 {
        if orient(at(0), at(i), at(i + 1)) <= eps {
            return false;
        }
    }
    for i in 2..n - 1 {
        let a = apex;
        let b = (apex + i) % n;
        for j in 0..n {
            let jn = (j + 1) % n;
            if j == a || jn == a || j == b || jn == b {
                continue;
            }
            if segments_intersect(pts[a], pts[b], pts[j], pts[jn], eps) {
                return false;
            }
        }
    }
    true
}

fn ear_clip(pts: &[Point], eps: f64) -> Option<Vec<[usize; 3]>> {
    let mut remaining: Vec<usize> = (0..pts.len()).collect();
    let mut tris = Vec::with_capacity(pts.len() - 2);
    while remaining.len() > 3 {
        let m = remaining.len();
        let mut clipped = false;
        for i in 0..m {
            let ip = remaining[(i + m - 1) % m];
            let ic = remaining[i];
            let inx = remaining[(i + 1) % m];
            let (a, b, c) = (pts[ip], pts[ic], pts[inx]);
            if orient(a, b, c) <= eps {
                continue;
            }
            let blocked = remaining.iter().any(|&q| {
                if q == ip || q == ic || q == inx {
                    return false;
                }
                let p = pts[q];
                orient(a, b, p) >= -eps && orient(b, c, p) >= -eps && orient(c, a, p) >= -eps
            });
            if blocked {
                continue;
            }
            tris.push([ip, ic, inx]);
            remaining.remove(i);
            clipped = true;
            break;
        }
        if !clipped {
            return None;
        }
    }
    let (a, b, c) = (remaining[0], remaining[1], remaining[2]);
    if orient(pts[a], pts[b], pts[c]) <= eps {
        return None;
    }
    tris.push([a, b, c]);
    Some(tris)
}

/// Triangulate `cell`: a fan from the lowest-index kernel vertex when one
/// exists, ear clipping otherwise. `T_1` is the first triangle.
pub fn subtriangulate(mesh: &PolyMesh, cell: usize) -> Result<SubTriangulation> {
    let loop_ids = &mesh.cells[cell];
    let pts = mesh.cell_points(cell);
    let n = pts.len();
    let diam = mesh.cell_diameters[cell];
    let eps = 1e-12 * diam * diam;

    let local: Vec<[usize; 3]> = match (0..n).find(|&a| fan_is_valid(&pts, a, eps)) {
        Some(a) => (1..n - 1).map(|i| [a, (a + i) % n, (a + i + 1) % n]).collect(),
        None => ear_clip(&pts, eps).ok_or_else(|| Error::DegenerateCell {
            cell,
            reason: "polygon cannot be triangulated without new vertices".into(),
        })?,
    };

    let mut triangles = Vec::with_capacity(local.len());
    let mut areas = Vec::with_capacity(local.len());
    let mut maps = Vec::with_capacity(local.len());
    for t in &local {
        let corners = [pts[t[0]], pts[t[1]], pts[t[2]]];
        let map = AffineMap::from_triangle(corners);
        triangles.push([loop_ids[t[0]], loop_ids[t[1]], loop_ids[t[2]]]);
        areas.push(0.5 * map.det.abs());
        maps.push(map);
    }

    // local vertex pair of reference edge j of triangle t
    let edge_of = |t: &[usize; 3], j: usize| {
        let (a, b) = (t[(j + 1) % 3], t[(j + 2) % 3]);
        (a.min(b), a.max(b))
    };
    let mut boundary_edges = vec![(usize::MAX, 0); n];
    let mut interior_edges = Vec::new();
    for (ti, t) in local.iter().enumerate() {
        for j in 0..3 {
            let (a, b) = edge_of(t, j);
            let is_cell_edge = b == a + 1 || (a == 0 && b == n - 1);
            if is_cell_edge {
                let i = if b == a + 1 { a } else { n - 1 };
                boundary_edges[i] = (ti, j);
                continue;
            }
            // diagonal: record once, from the lower-index triangle
            let partner = local.iter().enumerate().skip(ti + 1).find_map(|(tj, s)| {
                (0..3).find(|&jj| edge_of(s, jj) == (a, b)).map(|jj| (tj, jj))
            });
            if let Some((tj, jj)) = partner {
                let (ga, gb) = (loop_ids[a], loop_ids[b]);
                let (start, end) = if ga < gb { (pts[a], pts[b]) } else { (pts[b], pts[a]) };
                let length = ((end[0] - start[0]).powi(2) + (end[1] - start[1]).powi(2)).sqrt();
                let mut normal = [(end[1] - start[1]) / length, -(end[0] - start[0]) / length];
                // orient out of triangle ti: its opposite vertex lies on the other side
                let opp = pts[t[j]];
                let side = (opp[0] - start[0]) * normal[0] + (opp[1] - start[1]) * normal[1];
                if side > 0.0 {
                    normal = [-normal[0], -normal[1]];
                }
                interior_edges.push(InteriorEdge {
                    triangles: [ti, tj],
                    ref_edges: [j, jj],
                    start,
                    end,
                    normal,
                    length,
                });
            }
        }
    }
    if boundary_edges.iter().any(|&(t, _)| t == usize::MAX) || interior_edges.len() + 3 != n {
        return Err(Error::DegenerateCell {
            cell,
            reason: "inconsistent sub-triangulation".into(),
        });
    }
    Ok(SubTriangulation {
        cell,
        triangles,
        areas,
        maps,
        interior_edges,
        boundary_edges,
    })
}
