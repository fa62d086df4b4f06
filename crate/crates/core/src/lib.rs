//! Rate regions and desk-scale coding simulations for the quantum
//! multiple-access one-time pad.
//!
//! * [`qstate`]: labeled density matrices, partial traces, entropies.
//! * [`regions`]: the entropic set functions, their polymatroid structure,
//!   rate regions and rate splitting.
//! * [`protocols`]: Haar and Weyl unitary families, distributed
//!   randomization, pretty-good and sequential decoders, full codes and
//!   typical projectors.
//! * [`cli`]: the batch front end behind the `qmap` binary.

pub mod cli;
pub mod error;
pub mod lp;
pub mod protocols;
pub mod qstate;
pub mod regions;

pub use error::{Error, Result};
