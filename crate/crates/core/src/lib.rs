//! Weak Galerkin finite elements for the Stokes equations on polygonal meshes,
//! with a standard scheme and a pressure-robust scheme built on an
//! H(div)-conforming velocity reconstruction.

pub mod analysis;
pub mod assembly;
pub mod error;
pub mod localspaces;
pub mod mesh;
pub mod polybasis;
pub mod reconstruct;
pub mod solver;

pub use error::{Error, Result};
