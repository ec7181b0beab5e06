//! The pluggable model contract and its deterministic reference implementation.
//!
//! Everything above this module (explanation, alternatives, the service) only
//! talks to [`ToxicityBackend`], so a transformer-backed implementation can be
//! swapped in as long as it aggregates its relevance scores to word tokens.

mod embedding;
mod lexicon;
mod ngram;
mod reference;

use std::collections::BTreeMap;

use serde::Serialize;

pub use embedding::EmbeddingTable;
pub use lexicon::{Lexicon, DEFAULT_BIAS};
pub use ngram::{NgramModel, POSITION_POOL};
pub use reference::{BackendPaths, ReferenceBackend};

use crate::error::Result;
use crate::text::{self, Document, Span};

/// One masked-position prediction. For multi-token spans `text` holds the
/// space-joined tuple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fill {
    pub text: String,
    pub probability: f64,
}

pub trait ToxicityBackend: Send + Sync {
    fn name(&self) -> &str;

    /// Probability in `[0, 1]` that `text` is toxic.
    fn score(&self, text: &str) -> Result<f64>;

    /// Per-token relevance in `[0, 1]`, one entry per token of `doc`.
    fn token_attention(&self, doc: &Document) -> Vec<f64>;

    /// Up to `k` words closest to `word`, never `word` itself, most similar
    /// first. Out-of-vocabulary queries yield an empty list.
    fn nearest_neighbors(&self, word: &str, k: usize) -> Vec<String>;

    /// Up to `k` most likely fillers for `span` with the span masked, sorted
    /// by descending probability.
    fn mask_fill(&self, doc: &Document, span: Span, k: usize) -> Result<Vec<Fill>>;

    /// Like [`mask_fill`](Self::mask_fill) for a multi-token span, but the
    /// tuples are restricted to the cartesian product of `options`, one list
    /// of words per masked position.
    fn rank_fills(
        &self,
        doc: &Document,
        span: Span,
        options: &[Vec<String>],
        k: usize,
    ) -> Result<Vec<Fill>>;

    /// True when nothing spliced over a span can score lower than deleting
    /// the span, and no text scores lower than the empty string. Callers use
    /// this to skip candidate generation once deletion has been rejected.
    fn deletion_is_floor(&self) -> bool {
        false
    }

    /// Whole-text score with each token deleted in turn, one entry per token.
    fn deletion_scores(&self, doc: &Document) -> Result<Vec<f64>> {
        let deletion = [String::new()];
        (0..doc.len())
            .map(|i| {
                let scores = self.score_replacements(doc, Span::single(i), &deletion)?;
                Ok(scores[0].expect("deletion never grows the text"))
            })
            .collect()
    }

    /// Whole-text score after splicing each replacement over `span`.
    /// `None` marks a replacement whose edited text exceeds the input limit.
    ///
    /// Implementations may override this with an incremental computation,
    /// but the result must equal `score(splice(doc, span, r))` bit for bit.
    fn score_replacements(
        &self,
        doc: &Document,
        span: Span,
        replacements: &[String],
    ) -> Result<Vec<Option<f64>>> {
        replacements
            .iter()
            .map(|r| {
                let edited = text::splice(doc, span, r)?;
                if edited.len() > text::MAX_INPUT_BYTES {
                    return Ok(None);
                }
                self.score(&edited).map(Some)
            })
            .collect()
    }

    /// Sizes of the loaded vocabularies, keyed by resource name.
    fn vocab_sizes(&self) -> BTreeMap<String, usize> {
        BTreeMap::new()
    }
}

/// Numerically stable logistic function.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
