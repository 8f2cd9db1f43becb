//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("site index {site} out of range (1..={n_sites})")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("field strength must be non-negative, got {value}")]
    NegativeField { value: f64 },

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dense representation is gated to {max_sites} sites, requested {n_sites}")]
    DenseGate { n_sites: usize, max_sites: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("eigenbasis too ill-conditioned for spectral solve (cond ≈ {cond:.3e})")]
    IllConditioned { cond: f64 },

    #[error("steady state is not unique: {0}")]
    DegenerateSteadyState(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}
