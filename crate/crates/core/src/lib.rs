//! Teleportation through a non-Markovian dephasing channel.
//!
//! A photon pair shares polarization entanglement and a correlated frequency
//! spectrum. Quartz plates couple each polarization to its photon's
//! frequency, and the frequency correlations let Bob undo Alice's dephasing
//! after the Bell measurement. The crate computes the decoherence functions,
//! runs the protocol exactly, emulates finite-count tomography, and sweeps the
//! laboratory scenarios.

pub mod dephasing;
pub mod error;
pub mod experiments;
pub mod nonmarkov;
pub mod oracle;
pub mod protocol;
pub mod qstate;
pub mod spectrum;
pub mod tomography;

pub use error::{Error, Result};
