//! Dense linear algebra over labeled multipartite systems: states, partial
//! traces, local unitaries, entropies and trace norms.
//!
//! Entropies are in bits. Eigenvalues in `[-1e-10, 0)` are clipped to zero;
//! anything more negative is rejected as non-PSD.

mod density;
mod layout;
pub mod linalg;
mod ops;

pub use density::{DensityMatrix, UnitaryMatrix, HERMITIAN_TOL, PSD_TOL, TRACE_TOL, UNITARY_TOL};
pub use layout::{Factor, SystemLayout};
pub use linalg::{CMatrix, C64};
pub use ops::{
    apply_unitary, conditional_entropy, conditional_mutual_information, entropy, entropy_of,
    mutual_information, partial_trace, random_density, spectrum_entropy, tensor, trace_distance,
    trace_norm, ENTROPY_CUTOFF,
};
pub(crate) use ops::conjugate_local;
