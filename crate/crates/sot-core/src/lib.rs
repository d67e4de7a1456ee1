//! States over time for finite-dimensional quantum processes.
//!
//! This crate builds pseudo-density operators for n-step processes on
//! multi-matrix algebras (direct sums of complex matrix blocks, with classical
//! probability as the all-1x1-blocks special case), and inverts the
//! construction: given a pseudo-density operator it recovers the initial state
//! and the channels that produced it.
//!
//! Organization:
//! - [`algebra`]: multi-matrix algebras, elements, tensor products, partial
//!   traces, Jordan products.
//! - [`channel`]: linear maps between algebras, their Jamiolkowski and Choi
//!   matrices, and verification (trace preservation, complete positivity).
//! - [`classical`]: stochastic maps, probability distributions and their
//!   embedding into the quantum formalism.
//! - [`bloom`]: one-step state-over-time constructions (right, left, symmetric
//!   and the interpolating lambda family).
//! - [`nstep`]: n-step processes, parenthesization trees, the closed-form
//!   expansions, marginals and reduction.
//! - [`extract`]: pseudo-density operator checks, the Sylvester-equation
//!   inverse, and full process extraction.
//! - [`qubit_pdo`]: the qubit-chain recursion and Pauli coefficient
//!   expansions.
//! - [`io`]: serde models for the JSON interchange formats.
//! - [`random`]: seeded generators for states, channels and process chains.

pub mod algebra;
pub mod bloom;
pub mod channel;
pub mod classical;
pub mod extract;
pub mod io;
pub mod nstep;
pub mod qubit_pdo;
pub mod random;

#[cfg(test)]
pub(crate) mod naive;

pub use num_complex::Complex64;

/// Default absolute tolerance for numerical checks.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),
    #[error("invalid element: {0}")]
    InvalidElement(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("algebra mismatch: {0}")]
    AlgebraMismatch(String),
    #[error("chain mismatch: {0}")]
    ChainMismatch(String),
    #[error("invalid parenthesization tree: {0}")]
    InvalidParenTree(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("empty list: {0}")]
    EmptyList(String),
    #[error("not a classical object: {0}")]
    NotClassical(String),
    #[error("not self-adjoint: {0}")]
    NotSelfAdjoint(String),
    #[error("singular marginal: {0}")]
    SingularMarginal(String),
    #[error("not a qubit algebra: {0}")]
    NotQubitAlgebra(String),
    #[error("not in the extractable class: {0}")]
    NotInTStar(String),
    #[error("chain too long: {0}")]
    ChainTooLong(String),
    #[error("enumeration too large: {0}")]
    TooLarge(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
