//! Heisenberg-picture simulation of measurement, branching and
//! decision-theoretic game values on small Hilbert spaces.
//!
//! Observables evolve as `Â(t) = U†Â(0)U` under unit-step motions while the
//! state `ρ` stays fixed. [`measurement`] builds the motions, [`darwinism`]
//! decides which observables end up perfectly correlated, and [`games`]
//! derives game values in staged constructions that are checked against
//! the trace oracle `Tr(ρ·P(Â))`.

pub mod darwinism;
pub mod error;
pub mod games;
pub mod matrix;
pub mod measurement;
pub mod operator;
pub mod random;

pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, Complex64};
pub use operator::{
    accessible_info, evolve, express_in_family, is_pure, make_matrix_units, spectral_decompose,
    tensor_embed, CoefficientTensor, CompositeSpace, HeisenbergState, MatrixUnitFamily, Observable,
    ProjectorFamily, Spectrum, Unitary,
};

/// Residual bound for exact operator identities.
pub const ALGEBRA_TOL: f64 = 1e-10;

/// Eigenvalues closer than this are merged into one outcome.
pub const GROUPING_TOL: f64 = 1e-9;

/// Residual bound for correlation tests on products of evolved operators.
pub const CORRELATION_TOL: f64 = 1e-8;

/// Largest total Hilbert-space dimension any construction will build.
pub const DIMENSION_CAP: usize = 64;
