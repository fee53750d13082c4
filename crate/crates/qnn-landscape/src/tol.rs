//! Numerical tolerances used by validation checks throughout the crate.
//!
//! Exact algebraic identities (hermiticity of analytically Hermitian
//! expressions, trace identities) hold to a few ulps and get the tightest
//! bound; anything that passes through an iterative factorization or an
//! O(d³) accumulation gets an order of magnitude more slack.

/// Hermiticity of operators: `‖A − A†‖_max`.
pub const HERMITICITY: f64 = 1e-12;

/// Unitarity: `‖UU† − I‖_max`.
pub const UNITARITY: f64 = 1e-10;

/// Density operators: `|tr ρ − 1|` and `λ_min ≥ −PSD`.
pub const TRACE_ONE: f64 = 1e-10;

/// Density operators: allowed negative part of the spectrum.
pub const PSD: f64 = 1e-10;

/// Two-level generators: `|tr H|` and `‖H² − I‖_max`.
pub const TWO_LEVEL: f64 = 1e-10;

/// Imaginary residue allowed when a trace must be real. Treated as a hard
/// integrity check, not silent truncation.
pub const IMAGINARY_RESIDUE: f64 = 1e-10;

/// Relative factor on the max Gram diagonal below which the smallest Gram
/// eigenvalue counts as zero (dependent family).
pub const GRAM_INDEPENDENCE_REL: f64 = 1e-8;

/// Relative threshold on DFT magnitudes that defines the Fourier support.
pub const FOURIER_SUPPORT_REL: f64 = 1e-8;

/// Gradient norm at which a polished point counts as critical.
pub const CRITICAL_GRAD_NORM: f64 = 1e-10;

/// Hessian eigenvalue magnitude below which a critical point is degenerate.
pub const HESSIAN_EIGENVALUE: f64 = 1e-6;

/// Step used by central finite-difference Hessians.
pub const HESSIAN_STEP: f64 = 1e-4;

/// Wrap-aware deduplication radius for critical points on `[0, π)^p`.
pub const DEDUP_RADIUS: f64 = 1e-4;
