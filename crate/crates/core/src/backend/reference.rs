use std::collections::BTreeMap;
use std::path::PathBuf;

use super::lexicon::Hits;
use super::{sigmoid, EmbeddingTable, Fill, Lexicon, NgramModel, ToxicityBackend};
use crate::error::{Error, Result};
use crate::text::{words, Document, Span, MAX_INPUT_BYTES};

/// Files backing a [`ReferenceBackend`].
#[derive(Debug, Clone)]
pub struct BackendPaths {
    pub lexicon: PathBuf,
    pub embeddings: PathBuf,
    pub corpus: PathBuf,
}

/// Deterministic desk-scale backend: a logistic scorer over lexicon weights,
/// an embedding table for neighbours and a bigram model for mask filling.
#[derive(Debug, Clone)]
pub struct ReferenceBackend {
    lexicon: Lexicon,
    embeddings: EmbeddingTable,
    ngram: NgramModel,
}

impl ReferenceBackend {
    pub fn new(lexicon: Lexicon, embeddings: EmbeddingTable, ngram: NgramModel) -> Self {
        ReferenceBackend {
            lexicon,
            embeddings,
            ngram,
        }
    }

    pub fn load(paths: &BackendPaths) -> Result<Self> {
        Ok(Self::new(
            Lexicon::load(&paths.lexicon, super::DEFAULT_BIAS)?,
            EmbeddingTable::load(&paths.embeddings)?,
            NgramModel::load(&paths.corpus)?,
        ))
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn embeddings(&self) -> &EmbeddingTable {
        &self.embeddings
    }

    pub fn ngram(&self) -> &NgramModel {
        &self.ngram
    }

    fn hits<'w>(&self, words: impl Iterator<Item = &'w str>) -> Hits {
        let mut hits = Hits::new();
        self.lexicon.add_hits(&mut hits, words, 1);
        hits
    }

    fn doc_hits(&self, doc: &Document) -> Hits {
        self.hits(doc.tokens().iter().map(|t| t.text.as_str()))
    }
}

impl ToxicityBackend for ReferenceBackend {
    fn name(&self) -> &str {
        "reference-lexicon"
    }

    fn score(&self, text: &str) -> Result<f64> {
        if text.len() > MAX_INPUT_BYTES {
            return Err(Error::InputTooLarge {
                len: text.len(),
                max: MAX_INPUT_BYTES,
            });
        }
        Ok(sigmoid(self.lexicon.logit(&self.hits(words(text)))))
    }

    fn token_attention(&self, doc: &Document) -> Vec<f64> {
        let weights: Vec<f64> = doc
            .tokens()
            .iter()
            .map(|t| self.lexicon.weight(&t.text))
            .collect();
        let max = weights.iter().copied().fold(0.0, f64::max);
        if max > 0.0 {
            weights.into_iter().map(|w| w / max).collect()
        } else {
            vec![0.0; weights.len()]
        }
    }

    fn nearest_neighbors(&self, word: &str, k: usize) -> Vec<String> {
        self.embeddings.nearest_neighbors(word, k)
    }

    fn mask_fill(&self, doc: &Document, span: Span, k: usize) -> Result<Vec<Fill>> {
        self.ngram.mask_fill(doc, span, k)
    }

    fn rank_fills(
        &self,
        doc: &Document,
        span: Span,
        options: &[Vec<String>],
        k: usize,
    ) -> Result<Vec<Fill>> {
        self.ngram.rank_fills(doc, span, options, k)
    }

    // Tokens outside the span are untouched by a splice (token runs are
    // maximal and deletion only rewrites spaces), so the edited text's lexicon
    // hits are the original hits minus the span plus the replacement. The
    // logit is summed in key order, which makes this bit-identical to
    // rescoring the edited text.
    fn score_replacements(
        &self,
        doc: &Document,
        span: Span,
        replacements: &[String],
    ) -> Result<Vec<Option<f64>>> {
        let (start, end) = doc.span_bytes(span)?;
        let mut base = self.doc_hits(doc);
        self.lexicon.add_hits(
            &mut base,
            doc.span_tokens(span)?.iter().map(|t| t.text.as_str()),
            -1,
        );
        let kept = doc.raw().len() - (end - start);
        Ok(replacements
            .iter()
            .map(|r| {
                // Deletion never grows the text.
                if !r.is_empty() && kept + r.len() > MAX_INPUT_BYTES {
                    return None;
                }
                let mut hits = base.clone();
                self.lexicon.add_hits(&mut hits, words(r), 1);
                Some(sigmoid(self.lexicon.logit(&hits)))
            })
            .collect())
    }

    // Weights are non-negative, so adding words never lowers the logit.
    fn deletion_is_floor(&self) -> bool {
        true
    }

    fn deletion_scores(&self, doc: &Document) -> Result<Vec<f64>> {
        let base = self.doc_hits(doc);
        let unchanged = sigmoid(self.lexicon.logit(&base));
        Ok(doc
            .tokens()
            .iter()
            .map(|t| {
                let weight = self.lexicon.weight(&t.text);
                if weight <= 0.0 {
                    return unchanged;
                }
                let mut hits = base.clone();
                let count = hits
                    .get_mut(&weight.to_bits())
                    .expect("token counted in base");
                *count -= 1;
                if *count == 0 {
                    hits.remove(&weight.to_bits());
                }
                sigmoid(self.lexicon.logit(&hits))
            })
            .collect())
    }

    fn vocab_sizes(&self) -> BTreeMap<String, usize> {
        BTreeMap::from([
            ("lexicon".to_string(), self.lexicon.len()),
            ("embeddings".to_string(), self.embeddings.len()),
            ("ngram".to_string(), self.ngram.word_types()),
        ])
    }
}
