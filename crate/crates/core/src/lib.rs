//! Entropic quantities and capacity-region inner bounds for two-sender quantum
//! multiple-access channels.
//!
//! * [`state`] labeled density matrices, pure states and low-rank mixtures
//! * [`channel`] Kraus channels, instruments and the built-in example channels
//! * [`entropic`] entropy, mutual and coherent information in bits
//! * [`region`] rectangle, pentagon and six-bound evaluators plus 2-D region geometry
//! * [`builtin`] the collective qubit flip and erasure examples
//! * [`optimize`] derivative-free frontier sweeps and the blocking additivity experiment
//!
//! Bases are ordered row-major over factors: the leftmost factor is the most significant
//! digit of a basis index.

pub mod builtin;
pub mod channel;
pub mod entropic;
mod error;
pub mod linalg;
pub mod optimize;
pub mod par;
pub mod region;
pub mod state;

pub use error::{Error, Result};

/// Complex scalar used by every matrix in the crate.
pub type C64 = num_complex::Complex64;
