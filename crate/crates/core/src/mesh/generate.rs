//! Mesh generators for the unit square and the L-shaped domain.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{PolyMesh, Point};
use crate::error::{Error, Result};

/// Default jitter of the deformed grid, as a fraction of `h`.
pub const DEFAULT_DEFORM_AMPLITUDE: f64 = 0.2;

const MAX_HALVINGS: usize = 10;

/// Uniform `n x n` grid of squares on the unit square.
pub fn generate_rect_mesh(n: usize) -> PolyMesh {
    assert!(n >= 1, "need at least one cell per side");
    rect_with_offsets(n, |_, _| [0.0, 0.0]).expect("uniform grid is valid")
}

fn rect_with_offsets<F: FnMut(usize, usize) -> Point>(n: usize, mut offset: F) -> Result<PolyMesh> {
    let h = 1.0 / n as f64;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let mut p = [i as f64 * h, j as f64 * h];
            if i > 0 && i < n && j > 0 && j < n {
                let d = offset(i, j);
                p[0] += d[0];
                p[1] += d[1];
            }
            vertices.push(p);
        }
    }
    let v = |i: usize, j: usize| j * (n + 1) + i;
    let mut cells = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            cells.push(vec![v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)]);
        }
    }
    PolyMesh::new(vertices, cells)
}

/// Uniform grid with every interior vertex jittered by a seeded uniform
/// offset in `[-amplitude h, amplitude h]` per coordinate.
///
/// If the jitter produces an invalid cell the amplitude is halved and the
/// same offsets are rescaled, up to ten times.
pub fn generate_deformed_rect_mesh(n: usize, amplitude: f64, seed: u64) -> Result<PolyMesh> {
    if !(0.0..0.5).contains(&amplitude) {
        return Err(Error::Config(format!("deformation amplitude {amplitude} outside [0, 0.5)")));
    }
    let h = 1.0 / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter: Vec<Point> = (0..(n + 1) * (n + 1))
        .map(|_| [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)])
        .collect();
    let mut amp = amplitude;
    for _ in 0..=MAX_HALVINGS {
        let scale = amp * h;
        let mesh = rect_with_offsets(n, |i, j| {
            let r = jitter[j * (n + 1) + i];
            [r[0] * scale, r[1] * scale]
        });
        match mesh {
            Ok(m) if all_cells_convex_enough(&m) => return Ok(m),
            _ => amp *= 0.5,
        }
    }
    Err(Error::MeshGeneration(MAX_HALVINGS))
}

// a jittered quadrilateral must stay simple; we also insist every fan
// triangle is non-degenerate so the sub-triangulation is well shaped
fn all_cells_convex_enough(m: &PolyMesh) -> bool {
    (0..m.n_cells()).all(|c| super::subtri::subtriangulate(m, c).is_ok())
}

/// Columns of hexagon centres per unit length at `level`.
pub fn hex_columns_per_unit(level: usize) -> usize {
    5 << (level - 1)
}

fn hex_rows_per_unit(level: usize) -> usize {
    6 << (level - 1)
}

type IPoint = (i64, i64);

// Sutherland-Hodgman against one axis-aligned half plane. Coordinates are
// integers in half-column / third-row units, and every crossing of a
// lattice edge with a clip line lands on a lattice point.
fn clip_half_plane(poly: &[IPoint], axis: usize, bound: i64, keep_above: bool) -> Vec<IPoint> {
    let coord = |p: &IPoint| if axis == 0 { p.0 } else { p.1 };
    let inside = |p: &IPoint| if keep_above { coord(p) >= bound } else { coord(p) <= bound };
    let mut out = Vec::with_capacity(poly.len() + 2);
    let n = poly.len();
    for i in 0..n {
        let cur = poly[i];
        let prev = poly[(i + n - 1) % n];
        let (ci, pi) = (inside(&cur), inside(&prev));
        if ci != pi {
            let (a, b) = if coord(&prev) < coord(&cur) { (prev, cur) } else { (cur, prev) };
            let (ax, ay, bx, by) = (a.0, a.1, b.0, b.1);
            let p = if axis == 0 {
                let num = (bound - ax) * (by - ay);
                let den = bx - ax;
                debug_assert_eq!(num % den, 0);
                (bound, ay + num / den)
            } else {
                let num = (bound - ay) * (bx - ax);
                let den = by - ay;
                debug_assert_eq!(num % den, 0);
                (ax + num / den, bound)
            };
            out.push(p);
        }
        if ci {
            out.push(cur);
        }
    }
    out.dedup();
    while out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    out
}

fn int_area2(poly: &[IPoint]) -> i64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (p, q) = (poly[i], poly[(i + 1) % n]);
            p.0 * q.1 - q.0 * p.1
        })
        .sum()
}

// pointy-top hexagon around lattice centre (cx, cy), in lattice units:
// half a column wide on each side, two thirds of a row spacing tall
fn hexagon(cx: i64, cy: i64) -> Vec<IPoint> {
    vec![
        (cx, cy - 2),
        (cx + 1, cy - 1),
        (cx + 1, cy + 1),
        (cx, cy + 2),
        (cx - 1, cy + 1),
        (cx - 1, cy - 1),
    ]
}

/// Hexagon lattice clipped to the boxes `[x0, x1] x [y0, y1]` (lattice
/// units), merged into one conforming mesh.
fn clipped_hex_mesh(level: usize, boxes: &[[i64; 4]]) -> PolyMesh {
    let ncol = hex_columns_per_unit(level) as f64;
    let nrow = hex_rows_per_unit(level) as f64;
    // lattice unit lengths
    let ux = 0.5 / ncol;
    let uy = 1.0 / (3.0 * nrow);

    let mut index: HashMap<IPoint, usize> = HashMap::new();
    let mut vertices: Vec<Point> = Vec::new();
    let mut cells: Vec<Vec<usize>> = Vec::new();
    for b in boxes {
        let [x0, x1, y0, y1] = *b;
        let jmin = y0.div_euclid(3) - 1;
        let jmax = y1.div_euclid(3) + 1;
        for j in jmin..=jmax {
            let cy = 3 * j;
            let shift = j.rem_euclid(2);
            let imin = (x0 - 2).div_euclid(2) - 1;
            let imax = (x1 + 2).div_euclid(2) + 1;
            for i in imin..=imax {
                let cx = 2 * i + shift;
                let mut poly = hexagon(cx, cy);
                poly = clip_half_plane(&poly, 0, x0, true);
                poly = clip_half_plane(&poly, 0, x1, false);
                poly = clip_half_plane(&poly, 1, y0, true);
                poly = clip_half_plane(&poly, 1, y1, false);
                if poly.len() < 3 || int_area2(&poly) <= 0 {
                    continue;
                }
                let ids = poly
                    .iter()
                    .map(|p| {
                        *index.entry(*p).or_insert_with(|| {
                            vertices.push([p.0 as f64 * ux, p.1 as f64 * uy]);
                            vertices.len() - 1
                        })
                    })
                    .collect();
                cells.push(ids);
            }
        }
    }
    PolyMesh::new(vertices, cells).expect("clipped hexagon lattice is a valid mesh")
}

/// Hexagon-dominant tiling of the unit square. Interior cells are
/// hexagons; boundary cells are pentagons or quadrilaterals. The mesh size
/// halves with each level.
pub fn generate_hex_mesh(level: usize) -> PolyMesh {
    assert!(level >= 1, "level starts at 1");
    let xmax = 2 * hex_columns_per_unit(level) as i64;
    let ymax = 3 * hex_rows_per_unit(level) as i64;
    clipped_hex_mesh(level, &[[0, xmax, 0, ymax]])
}

/// The same lattice on the L-shaped domain `(-1,1)^2 minus [0,1] x [-1,0]`.
/// Each of the three unit quadrants is clipped separately, so the
/// re-entrant corner is a vertex and no cell crosses it.
pub fn generate_lshape_mesh(level: usize) -> PolyMesh {
    assert!(level >= 1, "level starts at 1");
    let xm = 2 * hex_columns_per_unit(level) as i64;
    let ym = 3 * hex_rows_per_unit(level) as i64;
    clipped_hex_mesh(level, &[[-xm, 0, 0, ym], [0, xm, 0, ym], [-xm, 0, -ym, 0]])
}
