//! Polynomial bases, Raviart-Thomas shape functions and quadrature.

pub mod poly;
pub mod quadrature;
pub mod rt;

pub use poly::{dim_pk, legendre, monomial_exponents, CellPolyBasis, EdgePolyBasis};
pub use quadrature::{edge_quadrature, gauss_legendre, tri_quadrature, EdgeRule, TriRule, MAX_QUAD_DEGREE};
pub use rt::{piola_map, rt_basis, rt_basis_cached, AffineMap, PiolaField, RtRefBasis};
