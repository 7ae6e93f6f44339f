use crate::graph::VertexId;

/// Errors produced by the noise, spectral and repair routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("rejection sampler stalled after {iterations} proposals")]
    SamplerStall { iterations: u64 },

    #[error("tail probability {tail:.4} at lambda = {lambda_high} still exceeds delta = {delta}; widen the bracket")]
    Bracket {
        lambda_high: f64,
        tail: f64,
        delta: f64,
    },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),

    #[error("weighted degree of vertex {0} is zero in the reference graph")]
    ZeroWeightedDegree(VertexId),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("spectral normalization is zero (both spectra vanish)")]
    Normalization,

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("construction error: {0}")]
    Construction(String),

    #[error("graphs differ combinatorially: {0}")]
    CombinatoricsMismatch(String),

    #[error("no planar witness motif of degree {0} (admissible degrees are 1..=6)")]
    Catalogue(usize),

    #[error("kernel `{0}` is not nondecreasing and convex; extremal configurations are not characterized")]
    ExtremalityAssumption(String),

    #[error("motif instances overlap at vertex {0}")]
    Disjointness(VertexId),

    #[error("dense violation regime: {reason}")]
    DenseViolation { reason: String },

    #[error("{dropped} of {runs} replicate runs were degenerate")]
    Reliability { dropped: usize, runs: usize },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
