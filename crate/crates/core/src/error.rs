use thiserror::Error;

/// Errors produced by the cascade library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("site {site} out of range for a system of {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("partial trace needs at least one kept site")]
    EmptyKeep,

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("state is not normalized (norm deviation {0:e})")]
    NotNormalized(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("steady-state solve failed: {0}")]
    SteadyState(String),

    #[error("steady state is not unique (singular value of the trace-bordered generator {sigma:e} below {threshold:e})")]
    NonUniqueSteadyState { sigma: f64, threshold: f64 },

    #[error("integration step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    #[error("degenerate spectrum: p[{i}] = {p_i:e} and p[{j}] = {p_j:e}")]
    DegenerateSpectrum { i: usize, j: usize, p_i: f64, p_j: f64 },

    #[error("reduced steady state has rank {rank}; indices {indices:?} carry no weight")]
    ZeroSpectrum { rank: usize, indices: Vec<usize> },

    #[error("negative-counterpart symmetry condition violated by {violation:e} (tolerance {tolerance:e})")]
    SymmetryViolation { violation: f64, tolerance: f64 },

    #[error("target profile is not a permutation of the source profile")]
    NotAPermutation,

    #[error("profile violates the alternating pair condition at sites {0} and {1}")]
    PairingViolated(usize, usize),

    #[error("pole at index {0}")]
    Pole(usize),

    #[error("Fock cutoff {cutoff} is insufficient (truncated weight {weight:e})")]
    InsufficientCutoff { cutoff: usize, weight: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
