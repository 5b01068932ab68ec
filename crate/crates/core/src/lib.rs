//! Measurement toolkit for NFT trade logs: cleaning, market statistics,
//! trade networks with null models, image-embedding analysis, sale price
//! regression and secondary-sale classification, plus a synthetic market
//! generator with known ground truth.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod ingest;
pub mod network;
pub mod predict;
pub mod stats;
pub mod synth;
pub mod visual;

pub use error::{Error, Result};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
