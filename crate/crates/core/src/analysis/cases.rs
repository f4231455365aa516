//! Manufactured solutions with `f = -nu Lap u + grad p`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::polybasis::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    UnitSquare,
    /// `(-1,1)^2` minus `[0,1] x [-1,0]`
    LShape,
}

impl Domain {
    pub fn area(self) -> f64 {
        match self {
            Domain::UnitSquare => 1.0,
            Domain::LShape => 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseName {
    /// polynomial velocity, `p = 10x`
    Poly61,
    /// `u = 0`, degree-7 polynomial pressure
    ZeroFlow,
    /// trigonometric velocity and pressure
    Trig,
    /// trigonometric velocity, `p = r^{2/3} sin(2 theta / 3)` on the L-shape
    LShape,
}

impl CaseName {
    pub const ALL: [CaseName; 4] = [
        CaseName::Poly61,
        CaseName::ZeroFlow,
        CaseName::Trig,
        CaseName::LShape,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseName::Poly61 => "poly61",
            CaseName::ZeroFlow => "zeroflow",
            CaseName::Trig => "trig",
            CaseName::LShape => "lshape",
        }
    }
}

impl fmt::Display for CaseName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CaseName::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown case `{s}` (poly61|zeroflow|trig|lshape)")))
    }
}

/// Exact solution and data of one test problem.
#[derive(Debug, Clone, Copy)]
pub struct ManufacturedCase {
    pub name: CaseName,
    pub domain: Domain,
    pub nu: f64,
    velocity: fn(Point) -> Point,
    laplacian: fn(Point) -> Point,
    pressure_raw: fn(Point) -> f64,
    pressure_grad: fn(Point) -> Point,
    /// mean of `pressure_raw` over the domain
    pressure_mean: f64,
    /// velocity vanishes on the boundary
    pub homogeneous: bool,
    pub notes: &'static str,
}

fn poly61_u(x: Point) -> Point {
    let (x, y) = (x[0], x[1]);
    [
        10.0 * x * x * y * (x - 1.0).powi(2) * (2.0 * y - 1.0) * (y - 1.0),
        -10.0 * x * y * y * (2.0 * x - 1.0) * (x - 1.0) * (y - 1.0).powi(2),
    ]
}

fn poly61_lap(x: Point) -> Point {
    let (x, y) = (x[0], x[1]);
    let (x2, y2) = (x * x, y * y);
    [
        20.0 * (2.0 * y - 1.0)
            * (3.0 * x2 * x2 - 6.0 * x2 * x + 6.0 * x2 * y2 - 6.0 * x2 * y + 3.0 * x2
                - 6.0 * x * y2
                + 6.0 * x * y
                + y2
                - y),
        -20.0 * (2.0 * x - 1.0)
            * (6.0 * x2 * y2 - 6.0 * x2 * y + x2 - 6.0 * x * y2 + 6.0 * x * y - x + 3.0 * y2 * y2
                - 6.0 * y2 * y
                + 3.0 * y2),
    ]
}

fn zero_vec(_: Point) -> Point {
    [0.0, 0.0]
}

fn zeroflow_p(x: Point) -> f64 {
    (0..=7).map(|j| x[0].powi(j) * x[1].powi(7 - j)).sum::<f64>() - 761.0 / 1260.0
}

fn zeroflow_grad(x: Point) -> Point {
    let mut g = [0.0; 2];
    for j in 0..=7 {
        if j > 0 {
            g[0] += j as f64 * x[0].powi(j - 1) * x[1].powi(7 - j);
        }
        if j < 7 {
            g[1] += (7 - j) as f64 * x[0].powi(j) * x[1].powi(6 - j);
        }
    }
    g
}

fn trig_u(x: Point) -> Point {
    let (sx, cx) = (PI * x[0]).sin_cos();
    let (sy, cy) = (PI * x[1]).sin_cos();
    [sx * sy, cx * cy]
}

fn trig_lap(x: Point) -> Point {
    let u = trig_u(x);
    [-2.0 * PI * PI * u[0], -2.0 * PI * PI * u[1]]
}

fn trig_p(x: Point) -> f64 {
    2.0 * (PI * x[0]).cos() * (PI * x[1]).sin()
}

fn trig_grad(x: Point) -> Point {
    let (sx, cx) = (PI * x[0]).sin_cos();
    let (sy, cy) = (PI * x[1]).sin_cos();
    [-2.0 * PI * sx * sy, 2.0 * PI * cx * cy]
}

/// Polar angle in `[0, 2 pi)`; on the L-shape it lies in `[0, 3 pi / 2]`.
fn angle(x: Point) -> f64 {
    let t = x[1].atan2(x[0]);
    if t < 0.0 {
        t + 2.0 * PI
    } else {
        t
    }
}

fn corner_p(x: Point) -> f64 {
    let r = x[0].hypot(x[1]);
    if r == 0.0 {
        return 0.0;
    }
    r.powf(2.0 / 3.0) * (2.0 * angle(x) / 3.0).sin()
}

fn corner_grad(x: Point) -> Point {
    let r = x[0].hypot(x[1]);
    if r == 0.0 {
        return [0.0, 0.0];
    }
    let t = angle(x) / 3.0;
    let c = 2.0 / 3.0 * r.powf(-1.0 / 3.0);
    [-c * t.sin(), c * t.cos()]
}

/// `\int` over the L-shape of `r^{2/3} sin(2 theta/3)`.
///
/// The integrand is homogeneous of degree `a = 2/3` about the corner, so on
/// the triangle spanned by the corner and a segment `[p, q]` the integral
/// is `|det(p, q)| / (a + 2)` times the mean of the integrand over the segment.
fn corner_mean() -> f64 {
    let a = 2.0 / 3.0;
    let path = [
        [1.0, 0.0],
        [1.0, 1.0],
        [0.0, 1.0],
        [-1.0, 1.0],
        [-1.0, 0.0],
        [-1.0, -1.0],
        [0.0, -1.0],
    ];
    let (nodes, weights) = gauss_legendre(24);
    let mut total = 0.0;
    for s in path.windows(2) {
        let (p, q): (Point, Point) = (s[0], s[1]);
        let det = (p[0] * q[1] - p[1] * q[0]).abs();
        let mean: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(t, w)| {
                let t = 0.5 * (t + 1.0);
                0.5 * w * corner_p([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])])
            })
            .sum();
        total += det / (a + 2.0) * mean;
    }
    total / Domain::LShape.area()
}

impl ManufacturedCase {
    pub fn new(name: CaseName, nu: f64) -> Self {
        match name {
            CaseName::Poly61 => Self {
                name,
                domain: Domain::UnitSquare,
                nu,
                velocity: poly61_u,
                laplacian: poly61_lap,
                pressure_raw: |x| 10.0 * x[0],
                pressure_grad: |_| [10.0, 0.0],
                pressure_mean: 5.0,
                homogeneous: true,
                notes: "smooth; velocity is a degree-7 polynomial",
            },
            CaseName::ZeroFlow => Self {
                name,
                domain: Domain::UnitSquare,
                nu,
                velocity: zero_vec,
                laplacian: zero_vec,
                pressure_raw: zeroflow_p,
                pressure_grad: zeroflow_grad,
                pressure_mean: 0.0,
                homogeneous: true,
                notes: "no flow; the body force is a pure gradient",
            },
            CaseName::Trig => Self {
                name,
                domain: Domain::UnitSquare,
                nu,
                velocity: trig_u,
                laplacian: trig_lap,
                pressure_raw: trig_p,
                pressure_grad: trig_grad,
                pressure_mean: 0.0,
                homogeneous: false,
                notes: "smooth; nonzero boundary velocity",
            },
            CaseName::LShape => Self {
                name,
                domain: Domain::LShape,
                nu,
                velocity: trig_u,
                laplacian: trig_lap,
                pressure_raw: corner_p,
                pressure_grad: corner_grad,
                pressure_mean: corner_mean(),
                homogeneous: false,
                notes: "pressure in H^{5/3 - eps} only; gradient singular at the corner",
            },
        }
    }

    pub fn u(&self, x: Point) -> Point {
        (self.velocity)(x)
    }

    /// Pressure normalized to zero mean.
    pub fn p(&self, x: Point) -> f64 {
        (self.pressure_raw)(x) - self.pressure_mean
    }

    pub fn grad_p(&self, x: Point) -> Point {
        (self.pressure_grad)(x)
    }

    pub fn lap_u(&self, x: Point) -> Point {
        (self.laplacian)(x)
    }

    pub fn f(&self, x: Point) -> Point {
        let l = self.lap_u(x);
        let g = self.grad_p(x);
        [-self.nu * l[0] + g[0], -self.nu * l[1] + g[1]]
    }

    pub fn pressure_mean(&self) -> f64 {
        self.pressure_mean
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_grad<F: Fn(Point) -> f64>(f: F, x: Point) -> Point {
        let h = 1e-5;
        [
            (f([x[0] + h, x[1]]) - f([x[0] - h, x[1]])) / (2.0 * h),
            (f([x[0], x[1] + h]) - f([x[0], x[1] - h])) / (2.0 * h),
        ]
    }

    fn fd_lap<F: Fn(Point) -> f64>(f: F, x: Point) -> f64 {
        let h = 1e-3;
        (f([x[0] + h, x[1]]) + f([x[0] - h, x[1]]) + f([x[0], x[1] + h]) + f([x[0], x[1] - h])
            - 4.0 * f(x))
            / (h * h)
    }

    const PROBES: [Point; 4] = [[0.3, 0.7], [0.61, 0.2], [0.15, 0.45], [0.83, 0.91]];

    #[test]
    fn derivatives_match_finite_differences() {
        for name in CaseName::ALL {
            let c = ManufacturedCase::new(name, 1.0);
            for x in PROBES {
                let x = if name == CaseName::LShape { [x[0] - 0.9, x[1] - 0.1] } else { x };
                let g = c.grad_p(x);
                let gf = fd_grad(|y| c.p(y), x);
                assert!((g[0] - gf[0]).abs() < 1e-6 && (g[1] - gf[1]).abs() < 1e-6, "{name} {x:?}");
                let l = c.lap_u(x);
                for comp in 0..2 {
                    let lf = fd_lap(|y| c.u(y)[comp], x);
                    assert!((l[comp] - lf).abs() < 1e-4 * (1.0 + l[comp].abs()), "{name}");
                }
                // divergence-free
                let d = fd_grad(|y| c.u(y)[0], x)[0] + fd_grad(|y| c.u(y)[1], x)[1];
                assert!(d.abs() < 1e-7, "{name}: div {d}");
            }
        }
    }

    #[test]
    fn corner_pressure_vanishes_on_the_adjacent_edges() {
        let c = ManufacturedCase::new(CaseName::LShape, 1.0);
        let m = c.pressure_mean();
        assert!((c.p([0.5, 0.0]) + m).abs() < 1e-14);
        assert!((c.p([0.0, -0.5]) + m).abs() < 1e-12);
        // continuity across the negative x axis
        assert!((c.p([-0.5, 1e-12]) - c.p([-0.5, -1e-12])).abs() < 1e-9);
    }

    #[test]
    fn corner_mean_by_brute_force() {
        // midpoint rule with many cells; the integrand is bounded
        let n = 600;
        let h = 1.0 / n as f64;
        let mut s = 0.0;
        for (ox, oy) in [(0.0, 0.0), (-1.0, 0.0), (-1.0, -1.0)] {
            for i in 0..n {
                for j in 0..n {
                    s += corner_p([ox + (i as f64 + 0.5) * h, oy + (j as f64 + 0.5) * h]) * h * h;
                }
            }
        }
        assert!((s / 3.0 - corner_mean()).abs() < 1e-6, "{} {}", s / 3.0, corner_mean());
    }

    #[test]
    fn names_round_trip() {
        for c in CaseName::ALL {
            assert_eq!(c.name().parse::<CaseName>().unwrap(), c);
        }
        assert!("nope".parse::<CaseName>().is_err());
    }
}
