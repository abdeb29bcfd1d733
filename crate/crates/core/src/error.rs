use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex index {index} out of range ({n_vertices} vertices)")]
    VertexOutOfRange { index: usize, n_vertices: usize },
    #[error("edge ({0}, {1}) is shared by three or more triangles")]
    NonManifold(usize, usize),
    #[error("triangle {0} is degenerate (repeated vertex or zero area)")]
    DegenerateTriangle(usize),
    #[error("triangles {0} and {1} have the same vertex set")]
    DuplicateTriangle(usize, usize),
    #[error("surface mesh is not orientable")]
    NonOrientable,
    #[error("cochain degree {0} is not supported (expected 0, 1 or 2)")]
    InvalidDegree(usize),
    #[error("cochain of degree {degree} has {found} values, expected {expected}")]
    CochainLength {
        degree: usize,
        expected: usize,
        found: usize,
    },
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("quadrature produced a non-finite value on simplex {0}")]
    QuadratureFailure(usize),
    #[error("barycentric coordinates {0:?} are outside the triangle")]
    OutOfTriangle([f64; 3]),
    #[error("all input points are collinear")]
    AllCollinear,
    #[error("triangulation failed: {0}")]
    Triangulation(String),
    #[error("invalid family specification: {0}")]
    SpecInvalid(String),
    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("unsupported mesh format: {0}")]
    UnsupportedFormat(String),
    #[error("hodge star of degree {0} is not positive definite")]
    IndefiniteStar(usize),
    #[error("cochain is not closed (|d u| = {0:e})")]
    NotClosed(f64),
    #[error("harmonic basis has dimension {found}, expected {expected}")]
    MissingHarmonicBasis { expected: usize, found: usize },
    #[error("linear system is singular: {0}")]
    SingularSystem(String),
    #[error("eigenvalue computation failed: {0}")]
    EigenFailure(String),
    #[error("the complement of the kernel is empty for degree {0}")]
    EmptyComplement(usize),
    #[error("mesh family is not DEC-regular: {0}")]
    FamilyNotDecRegular(String),
    #[error("unknown study '{0}'")]
    UnknownStudy(String),
    #[error("solve failed: {0}")]
    SolveFailure(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors that reject an inadmissible mesh rather than signal a
    /// failure.
    pub fn is_admissibility(&self) -> bool {
        matches!(self, Error::FamilyNotDecRegular(_) | Error::IndefiniteStar(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
