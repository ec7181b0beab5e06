//! Toxicity interrogation engine.
//!
//! Scores text with a pluggable [`backend::ToxicityBackend`], attributes
//! relevance to word tokens, and proposes lower-toxicity rewordings for
//! single words and short spans. The [`stats`] module holds the evaluation
//! machinery used to compare explanation methods and analyse edit studies.

pub mod alternatives;
pub mod backend;
mod error;
pub mod explanation;
pub mod stats;
pub mod text;

pub use alternatives::{
    annotate, generate_alternatives, generate_span_alternatives, is_highlighted, Candidate,
    CandidateSource, ScoredText, SuggestionSet, MAX_SPAN_TOKENS,
};
pub use backend::{BackendPaths, Fill, ReferenceBackend, ToxicityBackend};
pub use error::{Error, Result};
pub use explanation::{
    calibrate_cutoff, flag_tokens, overlap, score_span, CalibrationResult, FlagSet, Thresholds,
};
pub use text::{apply_replacement, tokenize, Document, Span, Token, MAX_INPUT_BYTES};
