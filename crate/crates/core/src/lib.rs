//! Verb valence dictionary extraction from banks of reduced parse forests.
//!
//! The crate covers the whole extraction path: EM disambiguation of parse
//! forests ([`em`]), counted preliminary dictionaries ([`lexicon`]),
//! argument and frame filtering plus co-occurrence matrix correction
//! ([`filters`]), frame-set reconstruction ([`cooc`]), orchestration
//! ([`pipeline`]), dictionary evaluation ([`eval`]) and seeded synthetic
//! data ([`synth`]).

pub mod bank;
pub mod cli;
pub mod cooc;
pub mod em;
pub mod error;
pub mod eval;
pub mod filters;
pub mod frame;
pub mod lexicon;
pub mod manifest;
pub mod pipeline;
pub mod synth;

pub use error::{Result, ValexError};
