use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter {0} outside the domain [0, 1]")]
    ParameterDomain(f64),

    #[error("invalid knot vector: {0}")]
    InvalidKnots(String),

    #[error("knot {u} already has multiplicity {multiplicity} for degree {degree}")]
    Multiplicity { u: f64, multiplicity: usize, degree: usize },

    #[error("degenerate mapping at ({0}, {1})")]
    DegenerateMapping(f64, f64),

    #[error("infinite patch parameter eta = {0} must be below 1")]
    InfiniteDomain(f64),

    #[error("source and field point coincide (r = {0:e})")]
    Singularity(f64),

    #[error("gauss rule order {0} outside 1..=64")]
    GaussOrder(usize),

    #[error("degenerate inclusion mapping: {0}")]
    DegenerateInclusion(String),

    #[error("model validation failed: {0}")]
    Validation(String),

    #[error("patch connectivity: {0}")]
    Connectivity(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("singular matrix in {0}")]
    SingularMatrix(&'static str),

    #[error("degenerate plastic tangent (b'De a = {0:e})")]
    DegenerateTangent(f64),

    #[error(
        "no convergence in increment {increment} after {iterations} iterations \
         (last relative change {last_change:.3e})"
    )]
    NonConvergence { increment: usize, iterations: usize, last_change: f64, history: Vec<f64> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
