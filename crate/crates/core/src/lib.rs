//! Radar heartbeat biometrics.
//!
//! Cepstral heartbeat features from the amplitude, phase and complex
//! baseband signal of a vital-sign radar, a from-scratch SMO support vector
//! machine with session-grouped cross-validation, 2-D projections, and a
//! synthetic FMCW cohort simulator that stands in for recorded subjects.

pub mod classify;
pub mod embedding;
pub mod error;
pub mod io;
pub mod mfcc;
pub mod pipeline;
pub mod radar;
pub mod signal;
pub mod synth;

pub use error::{Error, Result};
