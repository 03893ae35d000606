//! Emote-aware sentiment analysis for Twitch chat.
//!
//! The crate covers the whole pipeline: loading chat logs and lexicons
//! ([`corpus`]), emote-aware tokenization ([`tokenize`]), bag-of-ngram
//! features ([`features`]) and supervised baselines ([`classify`]),
//! skip-gram embeddings ([`embed`]), the emote pseudo-dictionary
//! ([`pseudodict`]), the two-stage fusion classifier ([`loove`]) and corpus
//! analyses ([`analyze`]). [`grid`] runs the experiment tables and
//! [`manifest`] records what went into each run.

pub mod analyze;
pub mod classify;
pub mod config;
pub mod corpus;
pub mod embed;
pub mod error;
pub mod features;
pub mod grid;
pub mod loove;
pub mod manifest;
pub mod pseudodict;
pub mod tokenize;

pub use error::{Error, Result};
