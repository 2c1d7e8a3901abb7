//! Link-level simulator for the full-duplex amplify-and-forward relay
//! wiretap channel with cyclic-prefix artificial noise.

#![cfg_attr(test, allow(clippy::field_reassign_with_default))]

pub mod analytic;
pub mod channel;
pub mod cli;
pub mod error;
pub mod montecarlo;
pub mod numerics;
pub mod optimizer;
pub mod rates;
pub mod scenario;
pub mod selfcheck;
pub mod spectral;

pub use error::{Error, Result};
