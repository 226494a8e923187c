//! Multi-user TDD secret key agreement under the pilot contamination attack.
//!
//! The crate simulates uplink training, matched-filter downlink randomness
//! sharing and the three-stage leakage estimator (attack strength, own
//! effective gain, eavesdropper gain), and evaluates key length and secrecy
//! outage both analytically and by Monte Carlo.

pub mod error;
pub mod mathkit;

pub use error::{Error, Result};
pub mod channel;
pub mod estimation;
pub mod harness;
pub mod protocol;
pub mod secrecy;
