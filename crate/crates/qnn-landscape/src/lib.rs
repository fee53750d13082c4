//! Loss landscapes of under-parameterized quantum neural networks.
//!
//! This crate builds, simulates and analyzes p-parameter quantum neural
//! networks whose gates are generated by two-level Hamiltonians
//! (`exp(-i θ H)` with `H² = I`, `tr H = 0`). It provides:
//!
//! - dense complex linear algebra for operators on small Hilbert spaces
//!   ([`numerics`]);
//! - circuit simulation, square loss and exact parameter-shift gradients
//!   ([`circuit`]);
//! - the Heisenberg-picture trigonometric expansion of observables and an
//!   FFT-based Fourier-degree checker ([`trig`]);
//! - Gram-matrix linear-independence tests and Monte-Carlo moment studies
//!   for Haar-random circuits ([`independence`]);
//! - hard-dataset constructions with `2^p` local minima, the canonical
//!   example instances and classical concept encodings ([`construction`]);
//! - first-order and quasi-Newton optimizers with seeded sweeps
//!   ([`optimize`]);
//! - numerical critical-point enumeration and classification
//!   ([`landscape`]);
//! - serializable experiment records ([`records`]).
//!
//! All randomness flows through explicit seeds (see [`stream`]); every
//! operation is deterministic given its inputs.

pub mod circuit;
pub mod construction;
pub mod independence;
pub mod landscape;
pub mod numerics;
pub mod optimize;
pub mod records;
pub mod stream;
pub mod tol;
pub mod trig;

use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("parameter count mismatch: expected {expected}, got {got}")]
    ParamCountMismatch { expected: usize, got: usize },

    #[error("not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("not unitary (max deviation of UU† from I: {0:.3e})")]
    NotUnitary(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("generator is not traceless (|tr| = {0:.3e})")]
    NotTraceless(f64),

    #[error("generator is not two-level (max deviation of H² from I: {0:.3e})")]
    NotTwoLevel(f64),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("trace has non-real residue {residue:.3e} beyond tolerance in {context}")]
    NumericalIntegrity { context: &'static str, residue: f64 },

    #[error("{context}: capacity exceeded ({detail}); use the simulation path instead")]
    CapacityExceeded {
        context: &'static str,
        detail: String,
    },

    #[error("operator family is linearly dependent (Gram min eigenvalue {lambda_min:.3e} ≤ tol {tol:.3e})")]
    DependentFamily { lambda_min: f64, tol: f64 },

    #[error("linear system is singular (max constraint residual {residual:.3e})")]
    SingularSystem { residual: f64 },

    #[error("breaking amplitude {amplitude} violates the bound {bound} = L0/(2 p r²)")]
    AmplitudeBound { amplitude: f64, bound: f64 },

    #[error("loss is not π-periodic along axis {axis} (residual {residual:.3e})")]
    NotPeriodic { axis: usize, residual: f64 },

    #[error("landscape is degenerate: {0}")]
    DegenerateLandscape(String),

    #[error("sample count {got} below the required minimum {min}")]
    InsufficientSamples { got: usize, min: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
