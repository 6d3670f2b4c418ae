//! Default numerical tolerances.
//!
//! Double-precision eigensolvers at dimensions below a few hundred resolve
//! Hermitian spectra to roughly machine epsilon times the matrix norm, so
//! structural checks (Hermiticity, trace) use 1e-10 and spectral slack
//! (positive semidefiniteness) uses 1e-9. Every check that consumes these
//! defaults also has a `*_with_tol` variant or an explicit `tol` argument.

/// Relative Hermiticity defect allowed before a matrix is rejected.
pub const HERMITICITY: f64 = 1e-10;

/// Allowed deviation of a state's trace from one.
pub const TRACE: f64 = 1e-10;

/// Relative slack on the minimum eigenvalue of a positive semidefinite matrix.
pub const PSD_SLACK: f64 = 1e-9;

/// Default tolerance for channel verification checks (trace preservation,
/// complete positivity, family membership).
pub const CHECK: f64 = 1e-9;

/// Residual allowed on the fixed-point equation `Φ(ρ) = ρ`.
pub const FIXED_POINT: f64 = 1e-8;

/// Eigenvalues of a Choi matrix below `RANK * λ_max` are treated as zero
/// when extracting Kraus operators.
pub const RANK: f64 = 1e-12;

/// Certificate feasibility and duality-gap tolerance.
pub const CERTIFICATE: f64 = 1e-10;
