//! Alternative wordings for a token or a contiguous span, and the highlight
//! criterion built on top of them.
//!
//! A token is highlighted when its attention exceeds the cutoff and at least
//! one admissible alternative exists. An alternative is admissible when it
//! scores below `alt_toxicity_max` on its own and strictly lowers the
//! whole-text score once spliced in.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::backend::ToxicityBackend;
use crate::error::{Error, Result};
use crate::explanation::Thresholds;
use crate::text::{fold, Document, Span, MAX_INPUT_BYTES};

/// Longest span accepted for joint replacement.
pub const MAX_SPAN_TOKENS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSource {
    Embedding,
    MaskedLm,
    Both,
    Deletion,
}

impl CandidateSource {
    fn merge(self, other: CandidateSource) -> CandidateSource {
        if self == other {
            self
        } else {
            CandidateSource::Both
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    /// Replacement text; empty for a deletion.
    pub replacement: String,
    pub individual_toxicity: f64,
    pub resulting_toxicity: f64,
    pub source: CandidateSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestionSet {
    pub span: Span,
    pub original_toxicity: f64,
    /// Ascending by resulting toxicity, ties broken by replacement text.
    pub candidates: Vec<Candidate>,
}

/// Overall score, attention profile and highlight flags for one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredText {
    pub toxicity: f64,
    pub attention: Vec<f64>,
    pub highlighted: Vec<bool>,
}

/// Candidate pool keyed by case-folded text, keeping the first surface form.
#[derive(Default)]
struct Pool {
    entries: Vec<(String, CandidateSource)>,
    keys: HashMap<String, usize>,
}

impl Pool {
    fn add(&mut self, surface: String, source: CandidateSource) {
        match self.keys.get(&fold(&surface)) {
            Some(&i) => self.entries[i].1 = self.entries[i].1.merge(source),
            None => {
                self.keys.insert(fold(&surface), self.entries.len());
                self.entries.push((surface, source));
            }
        }
    }

    fn remove(&mut self, key: &str) {
        if let Some(i) = self.keys.remove(key) {
            self.entries.remove(i);
            self.keys = self
                .entries
                .iter()
                .enumerate()
                .map(|(i, (s, _))| (fold(s), i))
                .collect();
        }
    }

    fn len(&self) -> usize {
        self.entries.len()
    }
}

fn span_key(doc: &Document, span: Span) -> Result<String> {
    Ok(doc
        .span_tokens(span)?
        .iter()
        .map(|t| t.folded())
        .collect::<Vec<_>>()
        .join(" "))
}

fn admit(
    doc: &Document,
    span: Span,
    pool: Pool,
    original: f64,
    backend: &dyn ToxicityBackend,
    thresholds: &Thresholds,
) -> Result<SuggestionSet> {
    let replacements: Vec<String> = pool.entries.iter().map(|(s, _)| s.clone()).collect();
    let resulting = backend.score_replacements(doc, span, &replacements)?;
    let mut candidates = Vec::new();
    for ((replacement, source), resulting) in pool.entries.into_iter().zip(resulting) {
        let Some(resulting_toxicity) = resulting else {
            continue;
        };
        if resulting_toxicity >= original || replacement.len() > MAX_INPUT_BYTES {
            continue;
        }
        let individual_toxicity = backend.score(&replacement)?;
        if individual_toxicity >= thresholds.alt_toxicity_max {
            continue;
        }
        candidates.push(Candidate {
            replacement,
            individual_toxicity,
            resulting_toxicity,
            source,
        });
    }
    candidates.sort_by(|a, b| {
        a.resulting_toxicity
            .total_cmp(&b.resulting_toxicity)
            .then_with(|| a.replacement.cmp(&b.replacement))
    });
    Ok(SuggestionSet {
        span,
        original_toxicity: original,
        candidates,
    })
}

fn empty(span: Span, original: f64) -> SuggestionSet {
    SuggestionSet {
        span,
        original_toxicity: original,
        candidates: Vec::new(),
    }
}

/// Whether deletion passes both filters, given the whole-text score after
/// deleting the span.
fn deletion_admitted(
    deleted: f64,
    original: f64,
    backend: &dyn ToxicityBackend,
    thresholds: &Thresholds,
) -> Result<bool> {
    Ok(deleted < original && backend.score("")? < thresholds.alt_toxicity_max)
}

/// True when the backend guarantees no candidate for `span` can pass.
fn hopeless(
    doc: &Document,
    span: Span,
    original: f64,
    backend: &dyn ToxicityBackend,
    thresholds: &Thresholds,
) -> Result<bool> {
    if !backend.deletion_is_floor() {
        return Ok(false);
    }
    let deleted = backend.score_replacements(doc, span, &[String::new()])?[0];
    Ok(match deleted {
        Some(d) => !deletion_admitted(d, original, backend, thresholds)?,
        None => false,
    })
}

fn single_alternatives(
    doc: &Document,
    index: usize,
    original: f64,
    backend: &dyn ToxicityBackend,
    thresholds: &Thresholds,
) -> Result<SuggestionSet> {
    let token = doc.token(index)?;
    let span = Span::single(index);
    if hopeless(doc, span, original, backend, thresholds)? {
        return Ok(empty(span, original));
    }
    let mut pool = Pool::default();
    for word in backend.nearest_neighbors(&token.text, thresholds.knn) {
        pool.add(word, CandidateSource::Embedding);
    }
    for fill in backend.mask_fill(doc, span, thresholds.mlm_topk)? {
        pool.add(fill.text, CandidateSource::MaskedLm);
    }
    pool.remove("");
    pool.remove(&token.folded());
    pool.add(String::new(), CandidateSource::Deletion);
    debug_assert!(pool.len() <= thresholds.knn + thresholds.mlm_topk + 1);
    admit(doc, span, pool, original, backend, thresholds)
}

/// Ranked replacements for the token at `token_index`, drawn from embedding
/// neighbours, masked-LM predictions and deletion.
pub fn generate_alternatives(
    doc: &Document,
    token_index: usize,
    backend: &dyn ToxicityBackend,
    thresholds: &Thresholds,
) -> Result<SuggestionSet> {
    doc.token(token_index)?;
    let original = backend.score(doc.raw())?;
    single_alternatives(doc, token_index, original, backend, thresholds)
}

/// Ranked joint replacements for a span of two to [`MAX_SPAN_TOKENS`]
/// tokens. A single-token span is delegated to [`generate_alternatives`].
///
/// Tuples come from the masked LM over the whole span and from
/// per-position embedding neighbours ranked by the same joint score.
pub fn generate_span_alternatives(
    doc: &Document,
    span: Span,
    backend: &dyn ToxicityBackend,
    thresholds: &Thresholds,
) -> Result<SuggestionSet> {
    doc.check_span(span)?;
    if span.len() == 1 {
        return generate_alternatives(doc, span.start_token, backend, thresholds);
    }
    if span.len() > MAX_SPAN_TOKENS {
        return Err(Error::SpanTooLong {
            len: span.len(),
            max: MAX_SPAN_TOKENS,
        });
    }
    let original = backend.score(doc.raw())?;
    if hopeless(doc, span, original, backend, thresholds)? {
        return Ok(empty(span, original));
    }
    let options: Vec<Vec<String>> = doc
        .span_tokens(span)?
        .iter()
        .map(|t| {
            let neighbours = backend.nearest_neighbors(&t.text, thresholds.knn);
            if neighbours.is_empty() {
                vec![t.text.clone()]
            } else {
                neighbours
            }
        })
        .collect();

    let mut pool = Pool::default();
    for fill in backend.rank_fills(doc, span, &options, thresholds.mlm_topk)? {
        pool.add(fill.text, CandidateSource::Embedding);
    }
    for fill in backend.mask_fill(doc, span, thresholds.mlm_topk)? {
        pool.add(fill.text, CandidateSource::MaskedLm);
    }
    pool.remove("");
    pool.remove(&span_key(doc, span)?);
    admit(doc, span, pool, original, backend, thresholds)
}

pub fn is_highlighted(
    doc: &Document,
    token_index: usize,
    backend: &dyn ToxicityBackend,
    thresholds: &Thresholds,
) -> Result<bool> {
    doc.token(token_index)?;
    let attention = backend.token_attention(doc);
    let weight = attention.get(token_index).copied().unwrap_or(0.0);
    if weight.partial_cmp(&thresholds.attn_cutoff) != Some(Ordering::Greater) {
        return Ok(false);
    }
    Ok(
        !generate_alternatives(doc, token_index, backend, thresholds)?
            .candidates
            .is_empty(),
    )
}

/// Scores `doc` and evaluates the highlight criterion for every token.
///
/// Deletion is always in a single token's candidate pool, so a token whose
/// deletion passes both filters is highlighted without building the rest of
/// the pool. When deletion fails the full pipeline runs, unless the backend
/// reports that deletion is a floor for every candidate.
pub fn annotate(
    doc: &Document,
    backend: &dyn ToxicityBackend,
    thresholds: &Thresholds,
) -> Result<ScoredText> {
    let toxicity = backend.score(doc.raw())?;
    let mut attention = backend.token_attention(doc);
    attention.resize(doc.len(), 0.0);
    let mut highlighted = vec![false; doc.len()];
    if attention.iter().any(|&w| w > thresholds.attn_cutoff) {
        let deleted = backend.deletion_scores(doc)?;
        for (i, &w) in attention.iter().enumerate() {
            if w <= thresholds.attn_cutoff {
                continue;
            }
            highlighted[i] = if deletion_admitted(deleted[i], toxicity, backend, thresholds)? {
                true
            } else if backend.deletion_is_floor() {
                false
            } else {
                !single_alternatives(doc, i, toxicity, backend, thresholds)?
                    .candidates
                    .is_empty()
            };
        }
    }
    Ok(ScoredText {
        toxicity,
        attention,
        highlighted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{EmbeddingTable, Lexicon, NgramModel, ReferenceBackend};
    use crate::text::{apply_replacement, tokenize};

    fn stupid_backend() -> ReferenceBackend {
        ReferenceBackend::new(
            Lexicon::from_entries([("stupid", 3.0)], -4.0).unwrap(),
            EmbeddingTable::from_entries([
                ("stupid", vec![1.0, 0.0, 0.0]),
                ("foolish", vec![0.95, 0.05, 0.0]),
                ("silly", vec![0.8, 0.3, 0.0]),
                ("kind", vec![0.0, 0.0, 1.0]),
            ])
            .unwrap(),
            NgramModel::from_corpus("you are kind. you are stupid. they are silly."),
        )
    }

    #[test]
    fn single_word_alternatives() {
        let b = stupid_backend();
        let doc = tokenize("you are stupid").unwrap();
        let set = generate_alternatives(&doc, 2, &b, &Thresholds::default()).unwrap();
        assert!((set.original_toxicity - 0.268_941_42).abs() < 1e-8);
        let foolish = set
            .candidates
            .iter()
            .find(|c| c.replacement == "foolish")
            .unwrap();
        assert_eq!(foolish.source, CandidateSource::Embedding);
        assert!((foolish.individual_toxicity - 0.017_986_21).abs() < 1e-8);
        assert!((foolish.resulting_toxicity - 0.017_986_21).abs() < 1e-8);
        let deletion = set
            .candidates
            .iter()
            .find(|c| c.replacement.is_empty())
            .unwrap();
        assert_eq!(deletion.source, CandidateSource::Deletion);
        let silly = set
            .candidates
            .iter()
            .find(|c| c.replacement == "silly")
            .unwrap();
        assert_eq!(silly.source, CandidateSource::Both);
        assert!(set.candidates.iter().all(|c| c.replacement != "stupid"));
        // every admissible candidate scores σ(-4); ties resolve lexicographically
        let order: Vec<&str> = set
            .candidates
            .iter()
            .map(|c| c.replacement.as_str())
            .collect();
        let mut sorted = order.clone();
        sorted.sort();
        assert_eq!(order, sorted);
        assert!(is_highlighted(&doc, 2, &b, &Thresholds::default()).unwrap());
        assert!(!is_highlighted(&doc, 0, &b, &Thresholds::default()).unwrap());
    }

    #[test]
    fn top_candidate_rescoring_is_exact() {
        let b = stupid_backend();
        let doc = tokenize("stupid, you are stupid").unwrap();
        let set = generate_alternatives(&doc, 3, &b, &Thresholds::default()).unwrap();
        for c in &set.candidates {
            let edited = apply_replacement(&doc, set.span, &c.replacement).unwrap();
            assert_eq!(b.score(edited.raw()).unwrap(), c.resulting_toxicity);
        }
    }

    #[test]
    fn span_alternatives() {
        let b = ReferenceBackend::new(
            Lexicon::from_entries([("stupid", 3.0), ("idiot", 3.0)], -4.0).unwrap(),
            EmbeddingTable::from_entries([
                ("stupid", vec![1.0, 0.0]),
                ("nice", vec![0.9, 0.1]),
                ("idiot", vec![0.0, 1.0]),
                ("person", vec![0.1, 0.9]),
            ])
            .unwrap(),
            NgramModel::from_corpus("you nice person. a nice person. nice person"),
        );
        let doc = tokenize("you stupid idiot").unwrap();
        let set =
            generate_span_alternatives(&doc, Span::new(1, 3), &b, &Thresholds::default()).unwrap();
        let best = b
            .rank_fills(
                &doc,
                Span::new(1, 3),
                &[
                    vec!["nice".into(), "person".into()],
                    vec!["person".into(), "nice".into()],
                ],
                1,
            )
            .unwrap();
        assert_eq!(best[0].text, "nice person");
        let nice = set
            .candidates
            .iter()
            .find(|c| c.replacement == "nice person")
            .unwrap();
        assert_eq!(nice.source, CandidateSource::Both);
        assert!((nice.resulting_toxicity - 0.017_986_21).abs() < 1e-8);
        assert_eq!(
            set.candidates[0].resulting_toxicity,
            nice.resulting_toxicity
        );
        assert!(set
            .candidates
            .windows(2)
            .all(|w| w[0].resulting_toxicity <= w[1].resulting_toxicity));
        // keeping one insult still improves on two, and stays under the individual cap
        assert!(set
            .candidates
            .iter()
            .any(|c| c.replacement == "nice stupid"));
        assert!(set.candidates.iter().all(|c| !c.replacement.is_empty()));

        let single =
            generate_span_alternatives(&doc, Span::single(1), &b, &Thresholds::default()).unwrap();
        assert_eq!(
            single,
            generate_alternatives(&doc, 1, &b, &Thresholds::default()).unwrap()
        );

        let long = tokenize("a b c d e f g").unwrap();
        assert!(matches!(
            generate_span_alternatives(&long, Span::new(0, 6), &b, &Thresholds::default()),
            Err(Error::SpanTooLong { len: 6, max: 5 })
        ));
        assert!(matches!(
            generate_span_alternatives(&doc, Span::new(2, 2), &b, &Thresholds::default()),
            Err(Error::SpanOutOfBounds { .. })
        ));
    }

    #[test]
    fn out_of_range_index() {
        let b = stupid_backend();
        let doc = tokenize("you are stupid").unwrap();
        let t = Thresholds::default();
        assert!(matches!(
            generate_alternatives(&doc, 3, &b, &t),
            Err(Error::SpanOutOfBounds { .. })
        ));
        assert!(matches!(
            is_highlighted(&doc, 7, &b, &t),
            Err(Error::SpanOutOfBounds { .. })
        ));
    }

    #[test]
    fn annotate_matches_is_highlighted() {
        let b = stupid_backend();
        let t = Thresholds::default();
        let doc = tokenize("Stupid is as stupid does, you know").unwrap();
        let scored = annotate(&doc, &b, &t).unwrap();
        for i in 0..doc.len() {
            assert_eq!(
                scored.highlighted[i],
                is_highlighted(&doc, i, &b, &t).unwrap()
            );
        }
        assert!(scored.highlighted[0]);
    }
}
