//! Semi-quantum key distribution, simulated exactly: a quantum Alice, a Bob
//! restricted to Z measurements and reflection, and a per-round eavesdropper.

pub mod adversary;
pub mod bits;
pub mod mock;
pub mod postprocessing;
pub mod protocol;
pub mod quantum;
pub mod robustness;
mod round;
