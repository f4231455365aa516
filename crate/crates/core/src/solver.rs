//! Direct solution of the assembled saddle-point system.

use faer::dyn_stack::{MemBuffer, MemStack, StackReq};
use faer::linalg::cholesky::ldlt::factor::LdltRegularization;
use faer::prelude::*;
use faer::sparse::linalg::cholesky::{factorize_symbolic_cholesky, LdltRef, SymbolicCholesky, SymmetricOrdering};
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Conj, Mat, Par, Side};
use nalgebra::{DMatrix, DVector};

use crate::assembly::GlobalSystem;
use crate::error::{Error, Result};
use crate::localspaces::{PressureFunction, WgFunction};

/// Relative residual every solve must reach.
pub const RESIDUAL_TARGET: f64 = 1e-10;

/// Maximum number of iterative refinement passes.
pub const MAX_REFINEMENT: usize = 3;

/// Above this dimension the dense solver is refused.
pub const DENSE_LIMIT: usize = 2000;

/// Relative size of the diagonal shift that makes the system quasi-definite
/// for the symmetric factorization.
pub const REGULARIZATION: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// symmetric LDL^T of the slightly shifted system, falling back to LU
    /// if refinement cannot reach the residual target
    #[default]
    Auto,
    /// regularized symmetric LDL^T with AMD ordering only
    SparseLdlt,
    /// unsymmetric LU with partial pivoting
    SparseLu,
    /// dense LU, for debugging small systems
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverStats {
    /// `||K x - b|| / ||b||`
    pub residual: f64,
    pub refinements: usize,
    /// factor entries over matrix entries; the sparse LU does not report
    /// its factor sizes, so this is unset when it is used
    pub fill: Option<f64>,
    /// the factorization that produced the solution
    pub method: Method,
    pub dim: usize,
    pub nnz: usize,
}

#[derive(Debug, Clone)]
pub struct Solution {
    /// velocity including the boundary-edge values of the system
    pub velocity: WgFunction,
    pub pressure: PressureFunction,
    pub multiplier: f64,
    /// raw solution vector of the system
    pub raw: Vec<f64>,
    pub stats: SolverStats,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Fail on a row or column without entries, naming the unknown.
pub fn check_structure(sys: &GlobalSystem) -> Result<()> {
    let n = sys.dim();
    let mut row = vec![false; n];
    let mut col = vec![false; n];
    for &(r, c, v) in &sys.entries {
        if v != 0.0 {
            row[r] = true;
            col[c] = true;
        }
    }
    match (0..n).find(|&i| !row[i] || !col[i]) {
        Some(dof) => Err(Error::StructurallySingular {
            dof,
            kind: sys.dofs.kind(dof),
        }),
        None => Ok(()),
    }
}

trait Factor {
    fn solve(&self, b: &[f64]) -> Vec<f64>;
}

struct SparseFactor(faer::sparse::linalg::solvers::Lu<usize, f64>);

impl Factor for SparseFactor {
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
        let x = self.0.solve(&rhs);
        (0..b.len()).map(|i| x[(i, 0)]).collect()
    }
}

struct DenseFactor(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>);

impl Factor for DenseFactor {
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let x = self
            .0
            .solve(&DVector::from_column_slice(b))
            .unwrap_or_else(|| DVector::from_element(b.len(), f64::NAN));
        x.as_slice().to_vec()
    }
}

struct LdltFactor {
    symbolic: SymbolicCholesky<usize>,
    values: Vec<f64>,
}

impl Factor for LdltFactor {
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut x = Mat::from_fn(n, 1, |i, _| b[i]);
        let mut mem = MemBuffer::new(self.symbolic.solve_in_place_scratch::<f64>(1, Par::Seq));
        LdltRef::new(&self.symbolic, &self.values).solve_in_place_with_conj(
            Conj::No,
            x.as_mut(),
            Par::Seq,
            MemStack::new(&mut mem),
        );
        (0..n).map(|i| x[(i, 0)]).collect()
    }
}

/// `K` with `-delta` on the pressure diagonal and `+delta` on the
/// multiplier, which is quasi-definite: every symmetric ordering admits an
/// `LDL^T` factorization. Refinement against the true `K` removes the shift.
fn ldlt_factor(sys: &GlobalSystem) -> Result<(LdltFactor, f64)> {
    let n = sys.dim();
    let dofs = &sys.dofs;
    let (mut a, mut b) = (0.0f64, 0.0f64);
    for &(r, c, v) in &sys.entries {
        if r == c && r < dofs.pressure_offset {
            a = a.max(v.abs());
        } else if r >= dofs.pressure_offset && r < dofs.multiplier && c < dofs.pressure_offset {
            b = b.max(v.abs());
        }
    }
    let delta = if a > 0.0 && b > 0.0 { REGULARIZATION * b * b / a } else { REGULARIZATION };
    let mut trip: Vec<_> = sys
        .entries
        .iter()
        .filter(|&&(r, c, _)| r >= c)
        .map(|&(r, c, v)| Triplet::new(r, c, v))
        .collect();
    trip.extend((dofs.pressure_offset..dofs.multiplier).map(|i| Triplet::new(i, i, -delta)));
    trip.push(Triplet::new(dofs.multiplier, dofs.multiplier, delta));
    let lower = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip)
        .map_err(|e| Error::Factorization(format!("{e:?}")))?;
    let symbolic = factorize_symbolic_cholesky(
        lower.symbolic(),
        Side::Lower,
        SymmetricOrdering::Amd,
        Default::default(),
    )
    .map_err(|e| Error::Factorization(format!("{e:?}")))?;
    let mut values = vec![0.0; symbolic.len_val()];
    let mut mem = MemBuffer::new(StackReq::any_of(&[
        symbolic.factorize_numeric_ldlt_scratch::<f64>(Par::Seq, Default::default()),
        symbolic.solve_in_place_scratch::<f64>(1, Par::Seq),
    ]));
    symbolic
        .factorize_numeric_ldlt(
            &mut values,
            lower.rb(),
            Side::Lower,
            LdltRegularization::default(),
            Par::Seq,
            MemStack::new(&mut mem),
            Default::default(),
        )
        .map_err(|e| Error::Factorization(format!("LDL^T: {e:?}")))?;
    let fill = values.len() as f64 / trip.len() as f64;
    Ok((LdltFactor { symbolic, values }, fill))
}

fn sparse_factor(sys: &GlobalSystem) -> Result<SparseFactor> {
    let n = sys.dim();
    let trip: Vec<_> = sys.entries.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
    let k = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip)
        .map_err(|e| Error::Factorization(format!("{e:?}")))?;
    let lu = k.sp_lu().map_err(|e| match e {
        LuError::SymbolicSingular { index } => Error::StructurallySingular {
            dof: index,
            kind: sys.dofs.kind(index),
        },
        LuError::Generic(e) => Error::Factorization(format!("{e:?}")),
    })?;
    Ok(SparseFactor(lu))
}

fn dense_factor(sys: &GlobalSystem) -> Result<DenseFactor> {
    let n = sys.dim();
    if n > DENSE_LIMIT {
        return Err(Error::Factorization(format!(
            "dense solver limited to {DENSE_LIMIT} unknowns, system has {n}"
        )));
    }
    let mut k = DMatrix::zeros(n, n);
    for &(r, c, v) in &sys.entries {
        k[(r, c)] += v;
    }
    Ok(DenseFactor(k.lu()))
}

/// Solve with the default method.
pub fn solve(sys: &GlobalSystem) -> Result<Solution> {
    solve_with(sys, Method::Auto)
}

/// Factor-solve plus iterative refinement; returns the iterate with the
/// smallest residual.
fn refine(sys: &GlobalSystem, factor: &dyn Factor) -> (Vec<f64>, f64, usize) {
    let n = sys.dim();
    let b = &sys.rhs;
    let bnorm = norm(b);
    let residual_of = |x: &[f64]| -> (Vec<f64>, f64) {
        let kx = sys.matvec(x);
        let r: Vec<f64> = b.iter().zip(&kx).map(|(b, k)| b - k).collect();
        let rel = if bnorm == 0.0 { norm(&r) } else { norm(&r) / bnorm };
        (r, rel)
    };
    let mut x = if bnorm == 0.0 { vec![0.0; n] } else { factor.solve(b) };
    let (mut r, mut rel) = residual_of(&x);
    let mut refinements = 0;
    while rel > RESIDUAL_TARGET * 1e-4 && refinements < MAX_REFINEMENT {
        let d = factor.solve(&r);
        let trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + b).collect();
        let (r2, rel2) = residual_of(&trial);
        refinements += 1;
        if !(rel2 < rel) {
            break;
        }
        x = trial;
        r = r2;
        rel = rel2;
    }
    (x, rel, refinements)
}

pub fn solve_with(sys: &GlobalSystem, method: Method) -> Result<Solution> {
    let n = sys.dim();
    if n == 0 {
        return Err(Error::Factorization("empty system".into()));
    }
    check_structure(sys)?;
    let run = |m: Method| -> Result<(Vec<f64>, f64, usize, Option<f64>)> {
        let (factor, fill): (Box<dyn Factor>, Option<f64>) = match m {
            Method::Auto | Method::SparseLdlt => {
                let (f, fill) = ldlt_factor(sys)?;
                (Box::new(f), Some(fill))
            }
            Method::SparseLu => (Box::new(sparse_factor(sys)?), None),
            Method::Dense => (
                Box::new(dense_factor(sys)?),
                Some((n * n) as f64 / sys.nnz() as f64),
            ),
        };
        let (x, rel, refinements) = refine(sys, factor.as_ref());
        Ok((x, rel, refinements, fill))
    };
    let mut used = method;
    let mut attempt = run(method);
    if method == Method::Auto {
        used = Method::SparseLdlt;
        let ok = matches!(&attempt, Ok((_, rel, _, _)) if *rel <= RESIDUAL_TARGET);
        if !ok {
            used = Method::SparseLu;
            attempt = run(Method::SparseLu);
        }
    }
    let (x, rel, refinements, fill) = attempt?;
    if !(rel <= RESIDUAL_TARGET) {
        return Err(Error::Residual {
            achieved: rel,
            target: RESIDUAL_TARGET,
        });
    }

    let dofs = &sys.dofs;
    let velocity = dofs.extend(&x, &sys.lift);
    let pressure = PressureFunction {
        degree: sys.degree,
        coeffs: x[dofs.pressure_offset..dofs.multiplier].to_vec(),
    };
    Ok(Solution {
        velocity,
        pressure,
        multiplier: x[dofs.multiplier],
        raw: x,
        stats: SolverStats {
            residual: rel,
            refinements,
            fill,
            method: used,
            dim: n,
            nnz: sys.nnz(),
        },
    })
}
