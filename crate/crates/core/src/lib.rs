#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Compressive-sensing channel estimation for millimeter-wave full-dimensional
//! MIMO with lens arrays driven through an antenna switching network.
//!
//! The crate is organised bottom-up:
//!
//! - [`lens_model`]: focal-surface antenna layouts, sinc steering vectors and
//!   sparse multipath channel synthesis.
//! - [`dictionary`]: quantized virtual-angle grids, redundant dictionaries and the
//!   Kronecker-structured sparsifying operator.
//! - [`training`]: the block/slot pilot training protocol and the measurement
//!   operator it induces.
//! - [`pilot_design`]: total mutual coherence and the closed-form baseband
//!   pilot/combiner design.
//! - [`recovery`]: OMP over the structured operator, the LS baseline and NMSE.
//! - [`experiments`]: the Monte Carlo harness and CSV persistence.

pub mod dictionary;
pub mod error;
pub mod experiments;
pub mod lens_model;
pub mod linalg;
pub mod pilot_design;
pub mod recovery;
pub mod seed;
pub mod training;

pub use error::{Error, Result};

/// Complex scalar used across every operator.
pub type C64 = num_complex::Complex64;
