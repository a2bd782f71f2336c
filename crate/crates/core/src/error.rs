use thiserror::Error;

/// Errors raised by the operator algebra, the motion constructors and the
/// game engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian: max asymmetry {asymmetry:.3e}")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not unitary: defect {defect:.3e}")]
    NotUnitary { defect: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid projector family: {0}")]
    InvalidProjectorFamily(String),

    #[error("projector {index} has rank {rank:.3}, matrix units need rank 1")]
    RankNotOne { index: usize, rank: f64 },

    #[error("slot {slot} out of range for {slots} subsystems")]
    SlotOutOfRange { slot: usize, slots: usize },

    #[error("index {index} out of range for modulus {modulus}")]
    IndexOutOfRange { index: usize, modulus: usize },

    #[error("mapping is not a bijection on 0..{0}")]
    NotBijective(usize),

    #[error("invalid phase assignment: {0}")]
    InvalidPhases(String),

    #[error("invalid multiplicities: {0}")]
    InvalidMultiplicities(String),

    #[error("observable is degenerate: {0}")]
    Degenerate(String),

    #[error("spectra differ: {0}")]
    SpectrumMismatch(String),

    #[error("not a classical act: {0}")]
    NotClassical(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid payoff: {0}")]
    InvalidPayoff(String),

    #[error("total dimension {dim} exceeds the cap of {cap}")]
    CapExceeded { dim: usize, cap: usize },

    #[error("bracketing stopped after {iterations} iterations at width {width:.3e}")]
    BracketNotConverged {
        iterations: usize,
        width: f64,
        lower: f64,
        upper: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
