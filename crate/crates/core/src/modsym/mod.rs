//! Weight-2 modular symbols for Gamma_0(N): Manin-symbol presentation,
//! Hecke operators, eigensymbol extraction and path evaluation.

pub mod cache;
pub mod linalg;
mod p1;
mod space;
mod symbol;

pub use p1::P1Index;
pub use space::{cusps_equivalent, heilbronn_merel, lift_to_sl2z, ModularSymbolSpace, MAX_LEVEL};
pub use symbol::{convergents, eigensymbol, ContinuedFraction, EigenSymbol};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModsymError {
    #[error("level {0} out of range (1..={MAX_LEVEL})")]
    LevelOutOfRange(u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("q = {0} divides the level {1}")]
    PrimeDividesLevel(u64, u64),
    #[error("subspace is not invariant under the operator")]
    NotInvariant,
    #[error("empty eigenspace")]
    EmptyEigenspace,
    #[error("eigenspace has dimension {0}, expected 1")]
    EigenspaceDimension(usize),
    #[error("sign must be +1 or -1, got {0}")]
    BadSign(i8),
    #[error("symbol is not an eigenvector of the Fricke involution")]
    NotFrickeEigen,
    #[error("cache: {0}")]
    Cache(String),
}

/// Builds the space at level `n`; alias matching the pipeline vocabulary.
pub fn build_space(n: u64) -> Result<ModularSymbolSpace, ModsymError> {
    ModularSymbolSpace::new(n)
}
