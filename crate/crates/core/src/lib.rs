//! Multipartite entanglement under particle-loss channels.
//!
//! States live on a tensor product of finite-dimensional subsystems with a
//! big-endian basis order: the first subsystem is the most significant digit
//! of a basis index. Losing particles is a partial trace; the crate decides
//! whether what survives is still (genuinely) entangled, how many losses a
//! state tolerates, what network topology predicts, and how the nonlinear
//! witnesses and Bell-type tests behave on the reduced states.

pub mod channels;
pub mod error;
pub mod inequalities;
pub mod network;
pub mod schema;
pub mod statefile;
pub mod states;
pub mod sweep;
pub mod tensor;
pub mod witnesses;

pub use channels::{lose, lose_state, LossOutcome, LossSpec, Ownership};
pub use error::{Error, Result};
pub use tensor::{
    kron, min_eigenvalue, partial_trace, partial_transpose, Bipartition, CMatrix, DensityMatrix,
    Dims, PureState, QuantumState, C64,
};
pub use witnesses::{DepthReport, Status, Verdict, VerdictOptions};

/// Hermiticity tolerance on construction (max entrywise deviation).
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Trace and normalization tolerance on construction.
pub const TRACE_TOL: f64 = 1e-12;
/// Eigenvalues above `-PSD_SLACK` count as nonnegative.
pub const PSD_SLACK: f64 = 1e-9;
/// A partial transpose with minimum eigenvalue below `-NPT_THRESHOLD` is NPT.
pub const NPT_THRESHOLD: f64 = 1e-9;
/// A witness fires when its value exceeds this.
pub const WITNESS_THRESHOLD: f64 = 1e-9;
/// Off-diagonal mass below this counts as diagonal.
pub const DIAGONAL_TOL: f64 = 1e-10;
/// Purity within this of 1 counts as pure; also the product-factor residual.
pub const PURITY_TOL: f64 = 1e-10;
