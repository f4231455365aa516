use thiserror::Error;

/// Errors raised while building meshes, local spaces, or solving.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("degenerate geometry in cell {cell}: {reason}")]
    DegenerateCell { cell: usize, reason: String },
    #[error("unsupported polynomial degree {degree} (supported: {supported})")]
    UnsupportedDegree { degree: usize, supported: &'static str },
    #[error("deformed mesh generation failed after {0} amplitude halvings")]
    MeshGeneration(usize),
    #[error("local space in cell {cell}: expected dimension {expected}, found {found}")]
    LambdaDimension { cell: usize, expected: usize, found: usize },
    #[error("reconstruction matrix singular in cell {cell} (best condition number {cond:.3e})")]
    SingularReconstruction { cell: usize, cond: f64 },
    #[error("singular local matrix in cell {0}")]
    SingularLocal(usize),
    #[error("structurally singular system: dof {dof} ({kind}) has no entries")]
    StructurallySingular { dof: usize, kind: &'static str },
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("residual target not reached: achieved {achieved:.3e}, target {target:.1e}")]
    Residual { achieved: f64, target: f64 },
    #[error("nonhomogeneous or unsupported boundary data: {0}")]
    Boundary(String),
    #[error("mesh file parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Config(String),
    #[error("at level {level}: {source}")]
    Level {
        level: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
