//! Labeler-aware detection of epileptiform EEG micro-events.
//!
//! Single-channel event descriptors are extended with one-hot rows naming
//! the labeler who annotated each training example, and a boosted-tree
//! classifier learns the joint labeler-signal space. The crate also ships a
//! synthetic EEG/labeler generator and the experiment machinery that compares
//! consensus-based and singly-labeled training scenarios.

pub mod consensus;
pub mod descriptor;
pub mod encoding;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod gbdt;
pub mod signal;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
