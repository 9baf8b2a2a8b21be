//! Power-domain NOMA over multichannel slotted ALOHA.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: system configuration and the SIC power ladder.
//! - [`sic`]: per-channel decodability of one slot's outcome vector.
//! - [`bounds`]: closed-form per-channel throughput bounds.
//! - [`oracle`]: exact expected throughput by truncated enumeration.
//! - [`montecarlo`]: seeded, parallel slot-level simulation.
//! - [`cli`]: the command-line front end and its CSV/manifest output.
//!
//! All throughput values are per channel unless stated otherwise; the total
//! over `L` channels is `L` times the per-channel value.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod oracle;
pub mod rng;
pub mod sic;

pub use error::{Error, Result};
pub use model::{PowerLadder, SystemConfig};
pub use sic::{DecodeResult, Decoder, LevelStatus, OutcomeVector};
