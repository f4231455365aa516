//! Raviart-Thomas shape functions on the reference triangle and the
//! contravariant Piola map onto physical triangles.

use nalgebra::DMatrix;

use super::poly::{dim_pk, homogeneous_exponents, legendre, monomial_exponents};
use super::quadrature::{edge_quadrature, tri_quadrature};
use crate::error::{Error, Result};

/// Reference vertices `(0,0), (1,0), (0,1)`.
pub const REF_VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

/// Reference edge `j` is opposite vertex `j`, traversed counter-clockwise.
pub const REF_EDGES: [(usize, usize); 3] = [(1, 2), (2, 0), (0, 1)];

/// Outward unit normals of the reference edges.
pub const REF_NORMALS: [[f64; 2]; 3] = [
    [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2],
    [-1.0, 0.0],
    [0.0, -1.0],
];

/// Highest supported Raviart-Thomas degree.
pub const MAX_RT_DEGREE: usize = 3;

/// `RT_k` shape functions on the reference triangle, stored as polynomial
/// coefficients over monomials of degree `<= k + 1`.
///
/// The basis is dual to the functionals
/// `l_{j,i}(q) = |e_j|^{-1} \int_{e_j} q.n L_i ds` followed by the interior
/// moments `\int q_c x^a y^b` with `a + b <= k - 1`. For `k = 0` this gives
/// `sqrt(2)(x, y)`, `(x - 1, y)` and `(x, y - 1)`.
#[derive(Debug, Clone)]
pub struct RtRefBasis {
    pub degree: usize,
    /// component polynomials: `comp[c][f]` holds coefficients of function `f`
    comp: [Vec<Vec<f64>>; 2],
    /// divergence coefficients over monomials of degree `<= k`
    div: Vec<Vec<f64>>,
    value_exps: Vec<(usize, usize)>,
}

impl RtRefBasis {
    pub fn dim(&self) -> usize {
        (self.degree + 1) * (self.degree + 3)
    }

    /// Values of every shape function at reference point `xh`.
    pub fn eval_into(&self, xh: [f64; 2], vals: &mut [[f64; 2]], divs: &mut [f64]) {
        let k1 = self.degree + 1;
        let mut mono = [0.0; 15];
        eval_monomials(&self.value_exps, xh, &mut mono);
        let nd = dim_pk(self.degree);
        for f in 0..self.dim() {
            let mut vx = 0.0;
            let mut vy = 0.0;
            for (i, m) in mono.iter().enumerate().take(dim_pk(k1)) {
                vx += self.comp[0][f][i] * m;
                vy += self.comp[1][f][i] * m;
            }
            vals[f] = [vx, vy];
            let mut d = 0.0;
            for i in 0..nd {
                d += self.div[f][i] * mono[i];
            }
            divs[f] = d;
        }
    }

    pub fn eval(&self, xh: [f64; 2]) -> (Vec<[f64; 2]>, Vec<f64>) {
        let mut v = vec![[0.0; 2]; self.dim()];
        let mut d = vec![0.0; self.dim()];
        self.eval_into(xh, &mut v, &mut d);
        (v, d)
    }

    /// Reference degrees of freedom of an arbitrary field, in the basis order.
    pub fn dofs_of<F: Fn([f64; 2]) -> [f64; 2]>(&self, q: F) -> Vec<f64> {
        let k = self.degree;
        let erule = edge_quadrature(2 * k + 2).expect("degree in range");
        let trule = tri_quadrature(2 * k + 2).expect("degree in range");
        let mut out = Vec::with_capacity(self.dim());
        let mut leg = vec![0.0; k + 1];
        for (j, &(a, b)) in REF_EDGES.iter().enumerate() {
            let pa = REF_VERTICES[a];
            let pb = REF_VERTICES[b];
            let n = REF_NORMALS[j];
            let mut mom = vec![0.0; k + 1];
            for (t, w) in erule.points.iter().zip(&erule.weights) {
                let x = [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])];
                let v = q(x);
                let qn = v[0] * n[0] + v[1] * n[1];
                legendre(k, 2.0 * t - 1.0, &mut leg);
                for i in 0..=k {
                    mom[i] += w * qn * leg[i];
                }
            }
            out.extend(mom);
        }
        if k >= 1 {
            let exps = monomial_exponents(k - 1);
            for c in 0..2 {
                let mut mom = vec![0.0; exps.len()];
                for (p, w) in trule.points.iter().zip(&trule.weights) {
                    let v = q(*p);
                    for (i, &(a, b)) in exps.iter().enumerate() {
                        mom[i] += w * v[c] * p[0].powi(a as i32) * p[1].powi(b as i32);
                    }
                }
                out.extend(mom);
            }
        }
        out
    }
}

fn eval_monomials(exps: &[(usize, usize)], x: [f64; 2], out: &mut [f64]) {
    for (o, &(a, b)) in out.iter_mut().zip(exps) {
        *o = x[0].powi(a as i32) * x[1].powi(b as i32);
    }
}

/// Build the reference `RT_k` basis by inverting the DOF matrix of the
/// spanning set `[P_k]^2 + x P~_k`.
pub fn rt_basis(k: usize) -> Result<RtRefBasis> {
    if k > MAX_RT_DEGREE {
        return Err(Error::UnsupportedDegree {
            degree: k,
            supported: "0..=3",
        });
    }
    let value_exps = monomial_exponents(k + 1);
    let nv = value_exps.len();
    let index_of = |a: usize, b: usize| value_exps.iter().position(|&e| e == (a, b)).unwrap();
    let nd = dim_pk(k);
    let div_exps = monomial_exponents(k);
    let div_index = |a: usize, b: usize| div_exps.iter().position(|&e| e == (a, b)).unwrap();

    // spanning set, as (x-comp, y-comp, div) coefficient vectors
    let mut span: Vec<([Vec<f64>; 2], Vec<f64>)> = Vec::new();
    for c in 0..2 {
        for &(a, b) in &monomial_exponents(k) {
            let mut comp = [vec![0.0; nv], vec![0.0; nv]];
            comp[c][index_of(a, b)] = 1.0;
            let mut div = vec![0.0; nd];
            if c == 0 && a > 0 {
                div[div_index(a - 1, b)] = a as f64;
            }
            if c == 1 && b > 0 {
                div[div_index(a, b - 1)] = b as f64;
            }
            span.push((comp, div));
        }
    }
    for &(a, b) in &homogeneous_exponents(k) {
        let mut comp = [vec![0.0; nv], vec![0.0; nv]];
        comp[0][index_of(a + 1, b)] = 1.0;
        comp[1][index_of(a, b + 1)] = 1.0;
        let mut div = vec![0.0; nd];
        div[div_index(a, b)] = (k + 2) as f64;
        span.push((comp, div));
    }
    let dim = span.len();
    debug_assert_eq!(dim, (k + 1) * (k + 3));

    let raw = RtRefBasis {
        degree: k,
        comp: [
            span.iter().map(|s| s.0[0].clone()).collect(),
            span.iter().map(|s| s.0[1].clone()).collect(),
        ],
        div: span.iter().map(|s| s.1.clone()).collect(),
        value_exps: value_exps.clone(),
    };
    let mut dofs = DMatrix::<f64>::zeros(dim, dim);
    for f in 0..dim {
        let col = raw.dofs_of(|x| {
            let (v, _) = raw.eval(x);
            v[f]
        });
        for (i, v) in col.into_iter().enumerate() {
            dofs[(i, f)] = v;
        }
    }
    let inv = dofs
        .try_inverse()
        .ok_or(Error::UnsupportedDegree {
            degree: k,
            supported: "0..=3",
        })?;
    // basis f = sum_s span_s inv[s, f]
    let mut comp = [vec![vec![0.0; nv]; dim], vec![vec![0.0; nv]; dim]];
    let mut div = vec![vec![0.0; nd]; dim];
    for f in 0..dim {
        for s in 0..dim {
            let c = inv[(s, f)];
            if c == 0.0 {
                continue;
            }
            for i in 0..nv {
                comp[0][f][i] += c * raw.comp[0][s][i];
                comp[1][f][i] += c * raw.comp[1][s][i];
            }
            for i in 0..nd {
                div[f][i] += c * raw.div[s][i];
            }
        }
    }
    // clean round-off so that k = 0 reproduces the closed form exactly
    for v in comp.iter_mut().flatten().flatten().chain(div.iter_mut().flatten()) {
        let r = v.round();
        if (*v - r).abs() < 1e-13 {
            *v = r;
        }
    }
    if k == 0 {
        let s2 = std::f64::consts::SQRT_2;
        comp[0][0][1] = s2;
        comp[1][0][2] = s2;
        div[0][0] = 2.0 * s2;
    }
    Ok(RtRefBasis {
        degree: k,
        comp,
        div,
        value_exps,
    })
}

/// Shared, lazily built copy of [`rt_basis`].
pub fn rt_basis_cached(k: usize) -> Result<&'static RtRefBasis> {
    static CACHE: std::sync::OnceLock<Vec<RtRefBasis>> = std::sync::OnceLock::new();
    let all = CACHE.get_or_init(|| {
        (0..=MAX_RT_DEGREE)
            .map(|d| rt_basis(d).expect("supported degree"))
            .collect()
    });
    all.get(k).ok_or(Error::UnsupportedDegree {
        degree: k,
        supported: "0..=3",
    })
}

/// Affine map `x = a0 + J xh` from the reference triangle onto `(a0, a1, a2)`.
#[derive(Debug, Clone, Copy)]
pub struct AffineMap {
    pub origin: [f64; 2],
    pub jac: [[f64; 2]; 2],
    pub det: f64,
    inv: [[f64; 2]; 2],
}

impl AffineMap {
    pub fn from_triangle(a: [[f64; 2]; 3]) -> Self {
        let jac = [
            [a[1][0] - a[0][0], a[2][0] - a[0][0]],
            [a[1][1] - a[0][1], a[2][1] - a[0][1]],
        ];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let inv = [
            [jac[1][1] / det, -jac[0][1] / det],
            [-jac[1][0] / det, jac[0][0] / det],
        ];
        Self {
            origin: a[0],
            jac,
            det,
            inv,
        }
    }

    pub fn forward(&self, xh: [f64; 2]) -> [f64; 2] {
        [
            self.origin[0] + self.jac[0][0] * xh[0] + self.jac[0][1] * xh[1],
            self.origin[1] + self.jac[1][0] * xh[0] + self.jac[1][1] * xh[1],
        ]
    }

    /// Inverse map; valid for any point of the plane, which is what lets a
    /// polynomial on one triangle be evaluated on another.
    pub fn inverse(&self, x: [f64; 2]) -> [f64; 2] {
        let d = [x[0] - self.origin[0], x[1] - self.origin[1]];
        [
            self.inv[0][0] * d[0] + self.inv[0][1] * d[1],
            self.inv[1][0] * d[0] + self.inv[1][1] * d[1],
        ]
    }

    /// Contravariant Piola transform of a reference vector: `J q / det J`.
    pub fn piola(&self, qh: [f64; 2]) -> [f64; 2] {
        [
            (self.jac[0][0] * qh[0] + self.jac[0][1] * qh[1]) / self.det,
            (self.jac[1][0] * qh[0] + self.jac[1][1] * qh[1]) / self.det,
        ]
    }

    pub fn diameter(&self) -> f64 {
        let a1 = self.forward([1.0, 0.0]);
        let a2 = self.forward([0.0, 1.0]);
        let d = |p: [f64; 2], q: [f64; 2]| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
        d(self.origin, a1).max(d(self.origin, a2)).max(d(a1, a2))
    }
}

/// A reference RT field pushed forward to a physical triangle.
#[derive(Debug, Clone)]
pub struct PiolaField<'a> {
    pub map: AffineMap,
    pub basis: &'a RtRefBasis,
    pub coeffs: Vec<f64>,
}

impl PiolaField<'_> {
    /// Field value at physical point `x`.
    pub fn value(&self, x: [f64; 2]) -> [f64; 2] {
        let (v, _) = self.basis.eval(self.map.inverse(x));
        let mut qh = [0.0; 2];
        for (c, vf) in self.coeffs.iter().zip(&v) {
            qh[0] += c * vf[0];
            qh[1] += c * vf[1];
        }
        self.map.piola(qh)
    }

    /// Divergence at physical point `x`: `div q = div_ref q / det J`.
    pub fn divergence(&self, x: [f64; 2]) -> f64 {
        let (_, d) = self.basis.eval(self.map.inverse(x));
        self.coeffs.iter().zip(&d).map(|(c, d)| c * d).sum::<f64>() / self.map.det
    }
}

/// Push the reference field with coefficients `ref_field` forward through `tri`.
pub fn piola_map<'a>(tri: AffineMap, basis: &'a RtRefBasis, ref_field: &[f64]) -> Result<PiolaField<'a>> {
    let h = tri.diameter();
    if tri.det.abs() <= 1e-14 * h * h {
        return Err(Error::DegenerateCell {
            cell: usize::MAX,
            reason: format!("Piola map with |J| = {:.3e}", tri.det),
        });
    }
    Ok(PiolaField {
        map: tri,
        basis,
        coeffs: ref_field.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn lowest_order_matches_closed_form() {
        let b = rt_basis(0).unwrap();
        assert_eq!(b.dim(), 3);
        for &x in &[[0.2, 0.3], [0.0, 0.0], [0.7, 0.1]] {
            let (v, d) = b.eval(x);
            let expect = [
                [SQRT_2 * x[0], SQRT_2 * x[1]],
                [x[0] - 1.0, x[1]],
                [x[0], x[1] - 1.0],
            ];
            for j in 0..3 {
                assert!((v[j][0] - expect[j][0]).abs() < 1e-15);
                assert!((v[j][1] - expect[j][1]).abs() < 1e-15);
            }
            assert!((d[0] - 2.0 * SQRT_2).abs() < 1e-15);
            assert!((d[1] - 2.0).abs() < 1e-15 && (d[2] - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn dimensions_and_duality() {
        for k in 0..=MAX_RT_DEGREE {
            let b = rt_basis(k).unwrap();
            assert_eq!(b.dim(), (k + 1) * (k + 3));
            for f in 0..b.dim() {
                let dofs = b.dofs_of(|x| b.eval(x).0[f]);
                for (i, v) in dofs.iter().enumerate() {
                    let expect = if i == f { 1.0 } else { 0.0 };
                    // k = 0 uses the closed form, whose hypotenuse dof is 1 as well
                    assert!((v - expect).abs() < 1e-11, "k={k} f={f} dof {i}: {v}");
                }
            }
        }
        assert!(rt_basis(4).is_err());
    }

    #[test]
    fn lowest_order_normal_flux_vanishes_off_own_edge() {
        let b = rt_basis(0).unwrap();
        for (j, &(a, c)) in REF_EDGES.iter().enumerate() {
            for t in [0.1, 0.5, 0.9] {
                let pa = REF_VERTICES[a];
                let pc = REF_VERTICES[c];
                let x = [pa[0] + t * (pc[0] - pa[0]), pa[1] + t * (pc[1] - pa[1])];
                let (v, _) = b.eval(x);
                for f in 0..3 {
                    let qn = v[f][0] * REF_NORMALS[j][0] + v[f][1] * REF_NORMALS[j][1];
                    if f != j {
                        assert!(qn.abs() < 1e-15);
                    } else {
                        assert!((qn - 1.0).abs() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn piola_identity_and_scaling() {
        let b = rt_basis(0).unwrap();
        let id = AffineMap::from_triangle(REF_VERTICES);
        let f = piola_map(id, &b, &[1.0, 0.0, 0.0]).unwrap();
        let x = [0.25, 0.4];
        let v = f.value(x);
        assert!((v[0] - SQRT_2 * 0.25).abs() < 1e-15 && (v[1] - SQRT_2 * 0.4).abs() < 1e-15);
        assert!((f.divergence(x) - 2.0 * SQRT_2).abs() < 1e-14);

        let s = 0.3;
        let scaled = AffineMap::from_triangle([[0.0, 0.0], [s, 0.0], [0.0, s]]);
        let g = piola_map(scaled, &b, &[1.0, 0.0, 0.0]).unwrap();
        assert!((g.divergence([0.1, 0.1]) - 2.0 * SQRT_2 / (s * s)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_map_rejected() {
        let b = rt_basis(0).unwrap();
        let flat = AffineMap::from_triangle([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]);
        assert!(piola_map(flat, &b, &[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn piola_divergence_integral_is_invariant() {
        // int_T div(P phi_1) = int_Tref div phi_1 = sqrt(2)
        let b = rt_basis(0).unwrap();
        let tri = [[0.3, -0.2], [1.4, 0.5], [-0.1, 0.9]];
        let map = AffineMap::from_triangle(tri);
        let f = piola_map(map, &b, &[1.0, 0.0, 0.0]).unwrap();
        let rule = tri_quadrature(4).unwrap();
        let phys: f64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(p, w)| w * map.det.abs() * f.divergence(map.forward(*p)))
            .sum();
        assert!((phys - SQRT_2).abs() < 1e-13);
    }

    #[test]
    fn piola_preserves_edge_flux_moments() {
        // reference moment of each basis function against L_i equals the
        // physical moment against L_i o F^{-1}, after length normalisation
        for k in 0..=2 {
            let b = rt_basis(k).unwrap();
            let tri = [[0.1, 0.2], [0.9, 0.35], [0.3, 1.1]];
            let map = AffineMap::from_triangle(tri);
            let rule = edge_quadrature(2 * k + 2).unwrap();
            let mut leg = vec![0.0; k + 1];
            for f in 0..b.dim() {
                let field = piola_map(map, &b, &unit(b.dim(), f)).unwrap();
                for (j, &(a, c)) in REF_EDGES.iter().enumerate() {
                    let pa = tri[a];
                    let pc = tri[c];
                    let len = ((pc[0] - pa[0]).powi(2) + (pc[1] - pa[1]).powi(2)).sqrt();
                    let n = [(pc[1] - pa[1]) / len, -(pc[0] - pa[0]) / len];
                    for i in 0..=k {
                        let mut phys = 0.0;
                        for (t, w) in rule.points.iter().zip(&rule.weights) {
                            let x = [pa[0] + t * (pc[0] - pa[0]), pa[1] + t * (pc[1] - pa[1])];
                            let v = field.value(x);
                            legendre(k, 2.0 * t - 1.0, &mut leg);
                            phys += w * len * (v[0] * n[0] + v[1] * n[1]) * leg[i];
                        }
                        let reference = b.dofs_of(|x| b.eval(x).0[f])[j * (k + 1) + i];
                        let ref_len = if j == 0 { SQRT_2 } else { 1.0 };
                        assert!(
                            (phys - reference * ref_len).abs() < 1e-12,
                            "k={k} f={f} edge {j} moment {i}"
                        );
                    }
                }
            }
        }
    }

    fn unit(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }
}
