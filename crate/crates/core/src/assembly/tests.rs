use nalgebra::DMatrix;

use super::*;
use crate::analysis::{CaseName, ManufacturedCase};
use crate::localspaces::interpolate;
use crate::mesh::{generate_hex_mesh, generate_rect_mesh};

fn disc(mesh: PolyMesh, k: usize) -> Discretization {
    Discretization::new(mesh, k, true).unwrap()
}

fn dense(t: &Triplets, n: usize, m: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, m);
    for &(r, c, v) in t {
        a[(r, c)] += v;
    }
    a
}

#[test]
fn dof_counts_on_small_grids() {
    let m = generate_rect_mesh(2);
    let d = DofMap::new(&m, 0);
    assert_eq!(d.interior_edges.len(), 4);
    assert_eq!(d.pressure_offset - d.edge_offset, 8);
    assert_eq!(d.n_velocity(), 4 * 2 + 8);
    assert_eq!(d.dim(), 16 + 4 + 1);

    let m = generate_rect_mesh(1);
    let d = DofMap::new(&m, 0);
    assert_eq!(d.interior_edges.len(), 0);
    assert_eq!(d.n_velocity(), 2);
    assert_eq!(d.dim(), 2 + 1 + 1);

    let m = generate_hex_mesh(1);
    for k in 0..=2 {
        let d = DofMap::new(&m, k);
        let np = (k + 1) * (k + 2) / 2;
        assert_eq!(
            d.dim(),
            m.n_cells() * 2 * np + m.n_interior_edges() * 2 * (k + 1) + m.n_cells() * np + 1
        );
    }
}

#[test]
fn every_dof_has_exactly_one_owner() {
    let m = generate_hex_mesh(1);
    let d = DofMap::new(&m, 1);
    let mut seen = vec![0usize; d.dim()];
    for c in 0..m.n_cells() {
        for comp in 0..2 {
            for j in 0..3 {
                let g = d.cell_dof(c, comp, j);
                seen[g] += 1;
                assert_eq!(d.owner(g), Some(DofOwner::CellVelocity { cell: c, comp, index: j }));
            }
        }
        for j in 0..3 {
            let g = d.pressure_dof(c, j);
            seen[g] += 1;
            assert_eq!(d.owner(g), Some(DofOwner::Pressure { cell: c, index: j }));
        }
    }
    for e in 0..m.n_edges() {
        for comp in 0..2 {
            for p in 0..2 {
                match d.edge_dof(e, comp, p) {
                    Some(g) => {
                        seen[g] += 1;
                        assert_eq!(d.owner(g), Some(DofOwner::EdgeVelocity { edge: e, comp, index: p }));
                    }
                    None => assert!(m.edges[e].boundary),
                }
            }
        }
    }
    seen[d.multiplier] += 1;
    assert!(seen.iter().all(|&n| n == 1));
    assert_eq!(d.owner(d.dim()), None);
}

#[test]
fn restrict_and_extend_round_trip() {
    let m = generate_hex_mesh(1);
    let ds = disc(m.clone(), 1);
    let v = interpolate(&m, &ds.cells, |x| [x[0] * x[1], 1.0 - x[0]]).unwrap();
    let lift = apply_boundary(&m, 1, BoundaryData::Dirichlet(&|x: Point| [x[0] * x[1], 1.0 - x[0]])).unwrap();
    let x = ds.dofs.restrict(&v);
    assert_eq!(ds.dofs.extend(&x, &lift), v);
}

#[test]
fn stiffness_scales_with_viscosity_and_is_symmetric() {
    let ds = disc(generate_hex_mesh(1), 1);
    let a1 = assemble_stiffness(&ds, 1.0);
    let a2 = assemble_stiffness(&ds, 0.01);
    assert_eq!(a1.len(), a2.len());
    for (x, y) in a1.iter().zip(&a2) {
        assert_eq!((x.0, x.1), (y.0, y.1));
        assert!((0.01 * x.2 - y.2).abs() <= 1e-15 * x.2.abs());
    }
    let n = ds.dofs.n_velocity();
    let a = dense(&a1, n, n);
    assert!((&a - a.transpose()).amax() < 1e-12 * a.amax());
    // boundary elimination removes the constants from the kernel
    let ev = a.symmetric_eigenvalues();
    assert!(ev.min() > 1e-8 * ev.max());
}

#[test]
fn single_square_keeps_only_interior_unknowns() {
    let ds = disc(generate_rect_mesh(1), 0);
    let a = dense(&assemble_stiffness(&ds, 1.0), 2, 2);
    assert_eq!(a.shape(), (2, 2));
    assert!(a.clone().cholesky().is_some());
    assert!((a[(0, 1)]).abs() < 1e-14 && (a[(0, 0)] - a[(1, 1)]).abs() < 1e-14);
}

#[test]
fn divergence_rows_and_columns() {
    let m = generate_hex_mesh(1);
    let ds = disc(m.clone(), 1);
    // with the boundary kept: v = (x, y) has weak divergence 2
    let v = interpolate(&m, &ds.cells, |x| x).unwrap();
    let total: f64 = ds
        .cells
        .iter()
        .map(|cs| (&cs.ops.div * nalgebra::DVector::from_vec(v.local_dofs(&cs.local)))[0])
        .sum();
    assert!((total - 2.0 * m.total_area()).abs() < 1e-12);

    // a constant field restricted to V_h^0 still has zero divergence inside
    // cells away from the boundary
    let b = assemble_div(&ds);
    let c = interpolate(&m, &ds.cells, |_| [1.0, -2.0]).unwrap();
    let x = ds.dofs.restrict(&c);
    let mut bx = vec![0.0; ds.dofs.dim()];
    for &(r, col, val) in &b {
        bx[r] += val * x[col];
    }
    for cs in &ds.cells {
        if cs.local.on_boundary.iter().all(|b| !b) {
            for j in 0..3 {
                assert!(bx[ds.dofs.pressure_dof(cs.local.cell, j)].abs() < 1e-13);
            }
        }
    }
}

#[test]
fn projected_divergence_free_field_is_in_the_kernel() {
    // u = curl of x^2 (1-x)^2 y^2 (1-y)^2 vanishes on the boundary
    let u = |x: Point| {
        let (x, y) = (x[0], x[1]);
        let a = x * x * (1.0 - x).powi(2);
        let b = y * y * (1.0 - y).powi(2);
        let da = 2.0 * x * (1.0 - x) * (1.0 - 2.0 * x);
        let db = 2.0 * y * (1.0 - y) * (1.0 - 2.0 * y);
        [a * db, -da * b]
    };
    for k in 0..=2 {
        let m = generate_hex_mesh(1);
        let ds = disc(m.clone(), k);
        let v = interpolate(&m, &ds.cells, u).unwrap();
        let x = ds.dofs.restrict(&v);
        let mut bx = vec![0.0; ds.dofs.dim()];
        for (r, c, val) in assemble_div(&ds) {
            bx[r] += val * x[c];
        }
        let res = bx.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        assert!(res < 1e-12, "k={k}: {res}");
    }
}

#[test]
fn loads_of_both_schemes() {
    let ds = disc(generate_hex_mesh(1), 1);
    for s in Scheme::ALL {
        assert!(assemble_rhs(&ds, |_| [0.0, 0.0], s).unwrap().iter().all(|&x| x == 0.0));
    }
    let f = |x: Point| [x[0] * x[1], x[0] - x[1] * x[1]];
    let robust = assemble_rhs(&ds, f, Scheme::Robust).unwrap();
    let standard = assemble_rhs(&ds, f, Scheme::Standard).unwrap();
    let edges = ds.dofs.edge_offset..ds.dofs.pressure_offset;
    assert!(standard[edges.clone()].iter().all(|&x| x == 0.0));
    assert!(robust[edges].iter().any(|&x| x.abs() > 1e-6));
    assert!(robust[ds.dofs.pressure_offset..].iter().all(|&x| x == 0.0));
}

#[test]
fn robust_gradient_load_is_orthogonal_to_discretely_divergence_free_fields() {
    let ds = disc(generate_rect_mesh(3), 0);
    let zf = ManufacturedCase::new(CaseName::ZeroFlow, 1.0);
    let load = assemble_rhs(&ds, |x| zf.f(x), Scheme::Robust).unwrap();
    let nv = ds.dofs.n_velocity();
    let b = dense(
        &assemble_div(&ds)
            .into_iter()
            .map(|(r, c, v)| (r - ds.dofs.pressure_offset, c, v))
            .collect(),
        ds.dofs.n_pressure(),
        nv,
    );
    let z = crate::localspaces::null_space(&b);
    assert!(z.ncols() > 0);
    let l = nalgebra::DVector::from_column_slice(&load[..nv]);
    let res = (z.transpose() * &l).amax() / l.amax();
    assert!(res < 1e-11, "{res}");
    // the standard load is not
    let std = assemble_rhs(&ds, |x| zf.f(x), Scheme::Standard).unwrap();
    let l = nalgebra::DVector::from_column_slice(&std[..nv]);
    assert!((z.transpose() * &l).amax() / l.amax() > 1e-4);
}

#[test]
fn matrix_is_shared_by_both_schemes() {
    let ds = disc(generate_hex_mesh(1), 2);
    let f = |x: Point| [x[1].sin(), x[0].exp()];
    let a = assemble_system(&ds, 0.1, f, Scheme::Robust, BoundaryData::Homogeneous).unwrap();
    let b = assemble_system(&ds, 0.1, f, Scheme::Standard, BoundaryData::Homogeneous).unwrap();
    assert_eq!(a.entries.len(), b.entries.len());
    assert!(a
        .entries
        .iter()
        .zip(&b.entries)
        .all(|(x, y)| x.0 == y.0 && x.1 == y.1 && x.2.to_bits() == y.2.to_bits()));
    assert_ne!(a.rhs, b.rhs);
}

#[test]
fn parallel_and_serial_assembly_agree_bitwise() {
    let m = generate_hex_mesh(2);
    let s = Discretization::new(m.clone(), 1, true).unwrap();
    let p = Discretization::new(m, 1, false).unwrap();
    let f = |x: Point| [x[0], x[1] * x[1]];
    let a = assemble_system(&s, 1.0, f, Scheme::Robust, BoundaryData::Homogeneous).unwrap();
    let b = assemble_system(&p, 1.0, f, Scheme::Robust, BoundaryData::Homogeneous).unwrap();
    assert!(a.entries.iter().zip(&b.entries).all(|(x, y)| x.2.to_bits() == y.2.to_bits()));
    assert!(a.rhs.iter().zip(&b.rhs).all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn saddle_point_structure() {
    let ds = disc(generate_rect_mesh(2), 1);
    let sys = assemble_system(&ds, 2.0, |_| [1.0, 0.0], Scheme::Standard, BoundaryData::Homogeneous).unwrap();
    let n = sys.dim();
    let k = dense(&sys.entries, n, n);
    assert!((&k - k.transpose()).amax() < 1e-12 * k.amax());
    // zero pressure-pressure and multiplier-multiplier blocks
    let p0 = sys.dofs.pressure_offset;
    let np = sys.dofs.n_pressure();
    assert_eq!(k.view((p0, p0), (np, np)).amax(), 0.0);
    assert_eq!(k[(n - 1, n - 1)], 0.0);
    // the multiplier row holds the cell integrals of the pressure basis
    let row: f64 = k.row(sys.dofs.multiplier).iter().sum();
    assert!(row > 0.0);
    assert!(sys.b_block().iter().all(|&(r, c, _)| r >= p0 && c < p0));
    let a = sys.a_block();
    let a2 = assemble_stiffness(&ds, 2.0);
    assert_eq!(a, a2);
}

#[test]
fn dirichlet_lift_and_rejection_of_bad_viscosity() {
    let m = generate_rect_mesh(2);
    let g = |x: Point| [x[1], 2.0];
    let lift = apply_boundary(&m, 0, BoundaryData::Dirichlet(&g)).unwrap();
    for (e, edge) in m.edges.iter().enumerate() {
        let mid = {
            let [a, b] = edge.vertices;
            let (p, q) = (m.vertices[a], m.vertices[b]);
            [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0]
        };
        if edge.boundary {
            assert!((lift.edge_block(e, 0)[0] - mid[1]).abs() < 1e-14);
            assert!((lift.edge_block(e, 1)[0] - 2.0).abs() < 1e-14);
        } else {
            assert_eq!(lift.edge_block(e, 0)[0], 0.0);
        }
    }
    let zero = apply_boundary(&m, 0, BoundaryData::Homogeneous).unwrap();
    assert!(zero.vanishes_on_boundary(&m));
    let ds = disc(m, 0);
    assert!(assemble_system(&ds, 0.0, |_| [0.0; 2], Scheme::Robust, BoundaryData::Homogeneous).is_err());
}

#[test]
fn matrix_market_dump() {
    let ds = disc(generate_rect_mesh(2), 0);
    let sys = assemble_system(&ds, 1.0, |_| [1.0, 1.0], Scheme::Robust, BoundaryData::Homogeneous).unwrap();
    let mut buf = Vec::new();
    sys.write_matrix_market(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("%%MatrixMarket matrix coordinate real general"));
    assert!(lines.next().unwrap().starts_with('%'));
    let dims: Vec<usize> = lines.next().unwrap().split_whitespace().map(|x| x.parse().unwrap()).collect();
    assert_eq!(dims, vec![sys.dim(), sys.dim(), sys.nnz()]);
    assert_eq!(lines.count(), sys.nnz());
}

#[test]
fn scheme_names() {
    for s in Scheme::ALL {
        assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
    }
    assert!("both".parse::<Scheme>().is_err());
}

#[test]
fn load_quadrature_override() {
    let ds = disc(generate_hex_mesh(1), 1);
    assert!(Discretization::new(generate_hex_mesh(1), 1, true).unwrap().with_load_quadrature(1).is_err());
    assert!(Discretization::new(generate_hex_mesh(1), 1, true).unwrap().with_load_quadrature(21).is_err());
    // a quadratic load is integrated exactly by any rule of degree >= 4
    let f = |x: Point| [x[0] * x[1], 1.0 - x[0] * x[0]];
    let low = Discretization::new(generate_hex_mesh(1), 1, true).unwrap().with_load_quadrature(4).unwrap();
    for s in Scheme::ALL {
        let a = assemble_rhs(&ds, f, s).unwrap();
        let b = assemble_rhs(&low, f, s).unwrap();
        let dev = a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(dev < 1e-14, "{s}: {dev}");
    }
    // a rough load is not
    let g = |x: Point| [(20.0 * x[0]).sin(), (15.0 * x[1]).cos()];
    let a = assemble_rhs(&ds, g, Scheme::Standard).unwrap();
    let b = assemble_rhs(&low, g, Scheme::Standard).unwrap();
    assert!(a.iter().zip(&b).any(|(x, y)| (x - y).abs() > 1e-8));
}
