//! Evaluation toolkit for anti-fingerprinting privacy tools.
//!
//! Mask models inferred from paired observations ([`maskinfer`]) are applied
//! to fingerprint datasets ([`fpmodel`]) to estimate how much a tool reduces
//! trackability ([`hybrid`], [`metrics`], [`popsample`]). [`resolution`]
//! explores Tor-style screen-size spoofing and [`syngen`] builds synthetic
//! inputs with known answers.

pub mod cli;
pub mod error;
pub mod fpmodel;
pub mod hybrid;
mod jsonl;
pub mod maskinfer;
pub mod metrics;
pub mod popsample;
pub mod resolution;
pub mod syngen;

pub use error::{Error, Result};
pub use jsonl::write_atomic;
