//! Finite-blocklength covert communication over binary-input discrete memoryless channels.
//!
//! The crate evaluates exact covertness statistics of pulse-position-modulated (PPM) codes,
//! builds and decodes random PPM codebooks, checks one-shot existence certificates, plans
//! second-order message and key lengths for three covertness metrics (relative entropy,
//! variational distance, missed-detection probability), and bounds what any constant
//! composition code can achieve.
//!
//! All logarithms are natural; quantities are in nats unless a function says otherwise.

pub mod adversary;
pub mod asymptotics;
pub mod cli;
pub mod coding;
pub mod dmc_core;
pub mod error;
pub mod ppm;

pub use error::{Error, Result};
