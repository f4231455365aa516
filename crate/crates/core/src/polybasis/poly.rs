//! Scaled monomial bases on cells and Legendre bases on edges.

/// Number of bivariate monomials of total degree `<= k`.
pub fn dim_pk(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

/// Exponents `(a, b)` of `x^a y^b`, ordered by total degree and then by
/// decreasing power of `x`.
pub fn monomial_exponents(k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(dim_pk(k));
    for d in 0..=k {
        for b in 0..=d {
            out.push((d - b, b));
        }
    }
    out
}

/// Exponents of the homogeneous monomials of exact degree `k`.
pub fn homogeneous_exponents(k: usize) -> Vec<(usize, usize)> {
    (0..=k).map(|b| (k - b, b)).collect()
}

fn powers(t: f64, k: usize) -> [f64; 8] {
    let mut p = [0.0; 8];
    p[0] = 1.0;
    for i in 1..=k.min(7) {
        p[i] = p[i - 1] * t;
    }
    p
}

/// `P_k(T)` in scaled monomials `((x - xc)/h)^a ((y - yc)/h)^b`.
#[derive(Debug, Clone)]
pub struct CellPolyBasis {
    pub degree: usize,
    pub center: [f64; 2],
    pub scale: f64,
    exps: Vec<(usize, usize)>,
}

impl CellPolyBasis {
    pub fn new(degree: usize, center: [f64; 2], scale: f64) -> Self {
        assert!(degree <= 7, "cell polynomial degree above 7");
        Self {
            degree,
            center,
            scale,
            exps: monomial_exponents(degree),
        }
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    pub fn exponents(&self) -> &[(usize, usize)] {
        &self.exps
    }

    pub fn eval_into(&self, x: [f64; 2], out: &mut [f64]) {
        let px = powers((x[0] - self.center[0]) / self.scale, self.degree);
        let py = powers((x[1] - self.center[1]) / self.scale, self.degree);
        for (o, &(a, b)) in out.iter_mut().zip(&self.exps) {
            *o = px[a] * py[b];
        }
    }

    pub fn eval(&self, x: [f64; 2]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(x, &mut out);
        out
    }

    /// Gradients of every basis function at `x`.
    pub fn eval_grad(&self, x: [f64; 2]) -> Vec<[f64; 2]> {
        let px = powers((x[0] - self.center[0]) / self.scale, self.degree);
        let py = powers((x[1] - self.center[1]) / self.scale, self.degree);
        let s = 1.0 / self.scale;
        self.exps
            .iter()
            .map(|&(a, b)| {
                let gx = if a > 0 { a as f64 * px[a - 1] * py[b] * s } else { 0.0 };
                let gy = if b > 0 { b as f64 * px[a] * py[b - 1] * s } else { 0.0 };
                [gx, gy]
            })
            .collect()
    }

    /// Evaluate the polynomial with coefficients `coef` at `x`.
    pub fn eval_poly(&self, coef: &[f64], x: [f64; 2]) -> f64 {
        let px = powers((x[0] - self.center[0]) / self.scale, self.degree);
        let py = powers((x[1] - self.center[1]) / self.scale, self.degree);
        coef.iter()
            .zip(&self.exps)
            .map(|(c, &(a, b))| c * px[a] * py[b])
            .sum()
    }
}

/// Legendre polynomials `L_0..=L_k` at `s` in `[-1, 1]`.
pub fn legendre(k: usize, s: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if k >= 1 {
        out[1] = s;
    }
    for j in 2..=k {
        let jf = j as f64;
        out[j] = ((2.0 * jf - 1.0) * s * out[j - 1] - (jf - 1.0) * out[j - 2]) / jf;
    }
}

/// `P_k(e)` as Legendre polynomials in the arclength parameter of a segment.
///
/// The parameter runs from `start` (t = 0) to `end` (t = 1), so the basis
/// is tied to the segment's orientation.
#[derive(Debug, Clone)]
pub struct EdgePolyBasis {
    pub degree: usize,
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub length: f64,
}

impl EdgePolyBasis {
    pub fn new(degree: usize, start: [f64; 2], end: [f64; 2]) -> Self {
        let length = ((end[0] - start[0]).powi(2) + (end[1] - start[1]).powi(2)).sqrt();
        Self {
            degree,
            start,
            end,
            length,
        }
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    pub fn point(&self, t: f64) -> [f64; 2] {
        [
            self.start[0] + t * (self.end[0] - self.start[0]),
            self.start[1] + t * (self.end[1] - self.start[1]),
        ]
    }

    /// Basis values at parameter `t` in `[0, 1]`.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        legendre(self.degree, 2.0 * t - 1.0, out);
    }

    /// Parameter of the orthogonal projection of `x` onto the segment line.
    pub fn param_of(&self, x: [f64; 2]) -> f64 {
        let d = [self.end[0] - self.start[0], self.end[1] - self.start[1]];
        ((x[0] - self.start[0]) * d[0] + (x[1] - self.start[1]) * d[1]) / (self.length * self.length)
    }

    /// Diagonal of the edge mass matrix: `|e| / (2i + 1)`.
    pub fn mass_diag(&self, i: usize) -> f64 {
        self.length / (2.0 * i as f64 + 1.0)
    }
}
