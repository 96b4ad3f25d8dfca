//! Analysis kernels for cross-platform video sharing studies.
//!
//! The crate is organised as a pipeline:
//!
//! - [`ingest`] parses tweet and video-status exports, extracts video
//!   identifiers, resolves availability and selects the suspect cohort.
//! - [`temporal`] builds the date × video incidence matrix and clusters the
//!   sampling window into epochs.
//! - [`coding`] analyses human content codes and reconstructs a
//!   coder-independent consensus coding.
//! - [`diffusion`] builds the user–link network, its link–link projection
//!   and the two-level Louvain clustering of diffusion paths.
//!
//! [`numerics`] and [`stats`] hold the shared statistical kernels.

pub mod coding;
pub mod diffusion;
pub mod error;
pub mod ingest;
pub mod numerics;
pub mod stats;
pub mod temporal;

pub use error::{Error, Result};
