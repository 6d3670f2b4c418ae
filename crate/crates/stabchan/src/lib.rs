//! Construction, certification, and iteration of quantum channels with a
//! prescribed fixed point.
//!
//! Given a target density matrix `σ`, the library builds the minimum-trace
//! Choi matrix that stabilizes `σ` exactly, completes it to a one-parameter
//! family of trace-preserving channels, certifies optimality of the minimal
//! construction through a primal/dual certificate pair, and simulates
//! repeated applications of the channel (optionally interleaved with free
//! unitary evolution). A collision-model front end builds the channel
//! `ρ ↦ Tr_X[S(ρ_X ⊗ ρ)S†]` from a bath state and a joint unitary and tests
//! whether it belongs to the stabilizing family of a Gibbs target.

pub mod channel;
pub mod error;
pub mod json;
pub mod qmat;
pub mod scattering;
pub mod sdpcert;
pub mod stabilizer;
pub mod tol;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
