//! Dense operator algebra for small Hilbert spaces.

pub mod composite;
pub mod evolution;
pub mod family;
pub mod observable;
pub mod state;

pub use composite::{partial_trace, slot_matrix_element, tensor_embed, CompositeSpace};
pub use evolution::{conjugate, evolve, Unitary};
pub use family::{
    express_family, make_matrix_units, CoefficientTensor, Gauge, MatrixUnitFamily, ProjectorFamily,
};
pub use observable::{expansion_residual, express_in_family, spectral_decompose, Observable, Spectrum};
pub use state::{accessible_info, accessible_info_matrix, is_pure, HeisenbergState};
