//! Dense complex linear algebra with quantum-state semantics.
//!
//! [`ComplexMatrix`] is a row-major dense matrix over `Complex64`.
//! [`HermitianMatrix`] and [`DensityMatrix`] layer the Hermiticity and
//! state (unit trace, positive semidefinite) invariants on top of it, and
//! [`SpectralDecomposition`] holds a deterministically ordered, phase-fixed
//! Hermitian eigendecomposition. All values are immutable once built and
//! safe to share across threads.

mod matrix;
mod spectral;

pub use matrix::{ComplexMatrix, DensityMatrix, HermitianMatrix, Subsystem};
pub use spectral::{
    eigh_desc, evolution_unitary, gibbs, trace_distance, SpectralDecomposition,
};
