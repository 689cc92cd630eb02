//! Simulation of the Cirac–Zoller CNOT gate driven by quantized coherent
//! laser fields.
//!
//! The crate builds the exact one-gate channel on the twelve-level
//! ion⊗ion⊗phonon register that results from tracing out each pulse's field
//! mode, iterates it, and measures how far the result drifts from the
//! semiclassical CNOT.
//!
//! * [`field`]: Poisson statistics, certified truncation, the S-sum family
//! * [`dynamics`]: basis, pulses, the five-step protocol, amplitude maps
//! * [`channel`]: Kraus families, superoperators, Choi diagnostics
//! * [`metrics`]: phonon trace, expected states, failure probabilities
//! * [`oracle`]: brute-force joint evolution used to cross-check the channel

pub mod channel;
pub mod dynamics;
pub mod field;
pub mod linalg;
pub mod metrics;
pub mod oracle;
