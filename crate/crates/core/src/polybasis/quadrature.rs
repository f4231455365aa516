//! Gauss rules on the reference edge `[0, 1]` and the reference triangle
//! `(0,0), (1,0), (0,1)`.
//!
//! Triangle rules are collapsed (Duffy) products of Gauss-Legendre rules, so
//! every weight is positive and any exactness degree can be produced.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Highest exactness degree served by [`tri_quadrature`] and [`edge_quadrature`].
pub const MAX_QUAD_DEGREE: usize = 20;

/// Quadrature rule on the reference edge `[0, 1]`.
#[derive(Debug, Clone)]
pub struct EdgeRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Quadrature rule on the reference triangle.
#[derive(Debug, Clone)]
pub struct TriRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` with `n` points.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn check_degree(degree: usize) -> Result<()> {
    if degree > MAX_QUAD_DEGREE {
        return Err(Error::UnsupportedDegree {
            degree,
            supported: "0..=20",
        });
    }
    Ok(())
}

fn build_edge_rule(degree: usize) -> EdgeRule {
    let n = degree / 2 + 1;
    let (x, w) = gauss_legendre(n);
    EdgeRule {
        points: x.iter().map(|&t| 0.5 * (t + 1.0)).collect(),
        weights: w.iter().map(|&w| 0.5 * w).collect(),
        degree,
    }
}

fn build_tri_rule(degree: usize) -> TriRule {
    // x = u, y = v (1 - u); the Jacobian (1 - u) raises the u-degree by one.
    let nu = degree.div_ceil(2) + 1;
    let nv = degree / 2 + 1;
    let (xu, wu) = gauss_legendre(nu);
    let (xv, wv) = gauss_legendre(nv);
    let mut points = Vec::with_capacity(nu * nv);
    let mut weights = Vec::with_capacity(nu * nv);
    for (a, wa) in xu.iter().zip(&wu) {
        let u = 0.5 * (a + 1.0);
        for (b, wb) in xv.iter().zip(&wv) {
            let v = 0.5 * (b + 1.0);
            points.push([u, v * (1.0 - u)]);
            weights.push(0.25 * wa * wb * (1.0 - u));
        }
    }
    TriRule {
        points,
        weights,
        degree,
    }
}

static EDGE_RULES: OnceLock<Vec<EdgeRule>> = OnceLock::new();
static TRI_RULES: OnceLock<Vec<TriRule>> = OnceLock::new();

/// Gauss rule on `[0, 1]` exact for polynomials of degree `degree`.
pub fn edge_quadrature(degree: usize) -> Result<&'static EdgeRule> {
    check_degree(degree)?;
    let rules = EDGE_RULES.get_or_init(|| (0..=MAX_QUAD_DEGREE).map(build_edge_rule).collect());
    Ok(&rules[degree])
}

/// Collapsed Gauss rule on the reference triangle exact for degree `degree`.
pub fn tri_quadrature(degree: usize) -> Result<&'static TriRule> {
    check_degree(degree)?;
    let rules = TRI_RULES.get_or_init(|| (0..=MAX_QUAD_DEGREE).map(build_tri_rule).collect());
    Ok(&rules[degree])
}
