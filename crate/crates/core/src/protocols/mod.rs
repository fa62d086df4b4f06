//! Finite-n realizations of the coding constructions: unitary families,
//! distributed randomization, pretty-good and successive decoders, the
//! non-commutative union bound, full codes and typical projectors.
//!
//! Every random object comes from a stream derived from a master seed and
//! its coordinates (trial, sender, index, copy), so reports are identical
//! across runs and thread counts.
//!
//! Weyl–Heisenberg ("pauli") families are an extension used for exact
//! twirls; reports produced with them carry the
//! `deterministic-family-extension` flag.

mod code;
mod experiments;
mod family;
mod povm;
mod randomize;
mod report;
pub mod rng;
mod sequential;
mod setting;
mod typical;
mod union_bound;

pub use code::{
    build_code_with_sizes, build_qmap_code, evaluate_code, evaluate_code_detailed, sizes_from_rates,
    CodeDesign, CodeEvaluation, CodeSpec, DecoderKind, SenderSizes, DEFAULT_MESSAGE_SAMPLES,
    EXACT_MESSAGE_LIMIT,
};
pub use experiments::{
    chained_randomization_experiment, code_experiment, encoding_experiment, randomization_experiment,
    Experiment,
};
pub use family::{haar_unitary, haar_unitary_on, sample_family, weyl, FamilyKind, UnitaryFamily};
pub use povm::{pgm_decoder, pgm_with_diagnostics, PgmDiagnostics, Povm, COMPLETENESS_TOL, PINV_CUTOFF, POVM_PSD_TOL};
pub use randomize::{randomization_chain, randomize, ChainOutcome};
pub use report::SimulationReport;
pub use sequential::{
    encoded_states, flat_index, joint_pgm_decoder, sequential_decoder, unflatten, SequentialOutcome, StageSummary,
    MAX_DECODER_ENTRIES,
};
pub use setting::{Budget, Setting, DEFAULT_BUDGET_QUBITS, MAX_BUDGET_QUBITS};
pub use typical::{typical_projector, TypicalDiagnostics, TypicalProjector};
pub use union_bound::{
    random_effect, random_subnormalized, union_bound_check, UnionBoundOutcome, CHAIN_AGREEMENT_TOL,
    UNION_BOUND_SLACK,
};
