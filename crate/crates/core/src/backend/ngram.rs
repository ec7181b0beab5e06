use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::path::Path;

use super::Fill;
use crate::error::{read_file, Error, Result};
use crate::text::{fold, words, Document, Span};

/// Per-position candidate pool when filling a multi-token span.
pub const POSITION_POOL: usize = 20;

const BOS: u32 = 0;
const EOS: u32 = 1;
const SENTENCE_BREAKS: [char; 4] = ['.', '!', '?', '\n'];

/// Add-one smoothed bigram model used as the reference masked language model.
///
/// Sentences are wrapped in `<s>` / `</s>`. The smoothing vocabulary `V`
/// counts every word type plus `</s>`; `<s>` is never predicted.
#[derive(Debug, Clone)]
pub struct NgramModel {
    words: Vec<String>,
    index: HashMap<String, u32>,
    unigrams: Vec<u64>,
    bigrams: HashMap<(u32, u32), u64>,
    total_words: u64,
    /// Predictable word ids in lexicographic order of their text.
    sorted: Vec<u32>,
}

#[derive(Clone, Copy)]
struct Slot<'a> {
    surface: &'a str,
    id: Option<u32>,
}

struct Partial {
    score: f64,
    text: String,
}

impl NgramModel {
    fn empty() -> Self {
        let mut model = NgramModel {
            words: Vec::new(),
            index: HashMap::new(),
            unigrams: Vec::new(),
            bigrams: HashMap::new(),
            total_words: 0,
            sorted: Vec::new(),
        };
        model.intern("<s>");
        model.intern("</s>");
        model
    }

    /// Counts a plain-text corpus. Sentences end at line breaks and at
    /// `.`, `!` or `?`; words are case-folded.
    pub fn from_corpus(text: &str) -> Self {
        let mut model = Self::empty();
        for sentence in text.split(SENTENCE_BREAKS) {
            let ids: Vec<u32> = words(sentence).map(|w| model.intern(&fold(w))).collect();
            if ids.is_empty() {
                continue;
            }
            model.total_words += ids.len() as u64;
            let mut prev = BOS;
            model.unigrams[BOS as usize] += 1;
            for id in ids.into_iter().chain(std::iter::once(EOS)) {
                model.unigrams[id as usize] += 1;
                *model.bigrams.entry((prev, id)).or_insert(0) += 1;
                prev = id;
            }
        }
        model.finish();
        model
    }

    /// A model with the given vocabulary and no observations.
    pub fn with_vocabulary<I, S>(vocabulary: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut model = Self::empty();
        for word in vocabulary {
            model.intern(&fold(word.as_ref()));
        }
        model.finish();
        model
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(Self::from_corpus(&read_file(path.as_ref())?))
    }

    fn intern(&mut self, word: &str) -> u32 {
        if let Some(&id) = self.index.get(word) {
            return id;
        }
        let id = self.words.len() as u32;
        self.words.push(word.to_string());
        self.index.insert(word.to_string(), id);
        self.unigrams.push(0);
        id
    }

    fn finish(&mut self) {
        let mut sorted: Vec<u32> = (EOS + 1..self.words.len() as u32).collect();
        sorted.sort_by(|&a, &b| self.words[a as usize].cmp(&self.words[b as usize]));
        self.sorted = sorted;
    }

    /// Number of predictable word types, excluding the sentence markers.
    pub fn word_types(&self) -> usize {
        self.words.len() - 2
    }

    /// Smoothing vocabulary size: word types plus the end-of-sentence marker.
    pub fn smoothing_vocab(&self) -> usize {
        self.words.len() - 1
    }

    pub fn total_words(&self) -> u64 {
        self.total_words
    }

    fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    /// Raw count of `word` (`<s>` and `</s>` are addressable).
    pub fn unigram_count(&self, word: &str) -> u64 {
        self.id(word).map_or(0, |id| self.unigrams[id as usize])
    }

    pub fn bigram_count(&self, prev: &str, next: &str) -> u64 {
        match (self.id(prev), self.id(next)) {
            (Some(a), Some(b)) => self.bigrams.get(&(a, b)).copied().unwrap_or(0),
            _ => 0,
        }
    }

    /// Smoothed `P(next | prev)` over folded words.
    pub fn bigram_prob(&self, prev: &str, next: &str) -> f64 {
        self.p(self.id(prev), self.id(next))
    }

    fn p(&self, prev: Option<u32>, next: Option<u32>) -> f64 {
        let history = prev.map_or(0, |a| self.unigrams[a as usize]);
        let pair = match (prev, next) {
            (Some(a), Some(b)) => self.bigrams.get(&(a, b)).copied().unwrap_or(0),
            _ => 0,
        };
        (pair + 1) as f64 / (history + self.smoothing_vocab() as u64) as f64
    }

    fn p_unigram(&self, id: u32) -> f64 {
        (self.unigrams[id as usize] + 1) as f64
            / (self.total_words + self.smoothing_vocab() as u64) as f64
    }

    fn left_context(&self, doc: &Document, span: Span) -> Option<u32> {
        if span.start_token == 0 {
            return Some(BOS);
        }
        let prev = &doc.tokens()[span.start_token - 1];
        let first = &doc.tokens()[span.start_token];
        if doc.raw()[prev.byte_end..first.byte_start].contains(SENTENCE_BREAKS) {
            Some(BOS)
        } else {
            self.id(&prev.folded())
        }
    }

    fn right_context(&self, doc: &Document, span: Span) -> Option<u32> {
        if span.end_token == doc.len() {
            return Some(EOS);
        }
        let last = &doc.tokens()[span.end_token - 1];
        let next = &doc.tokens()[span.end_token];
        if doc.raw()[last.byte_end..next.byte_start].contains(SENTENCE_BREAKS) {
            Some(EOS)
        } else {
            self.id(&next.folded())
        }
    }

    fn vocabulary_slots(&self) -> Vec<Slot<'_>> {
        self.sorted
            .iter()
            .map(|&id| Slot {
                surface: &self.words[id as usize],
                id: Some(id),
            })
            .collect()
    }

    /// Top `k` fillers for `span` with the whole span masked.
    ///
    /// A single token is scored by `P(c | left) * P(right | c)` over the
    /// whole vocabulary. Longer spans draw a pool of [`POSITION_POOL`]
    /// candidates per position and rank tuples by the bigram chain through
    /// the boundary context.
    pub fn mask_fill(&self, doc: &Document, span: Span, k: usize) -> Result<Vec<Fill>> {
        doc.check_span(span)?;
        let (left, right) = (self.left_context(doc, span), self.right_context(doc, span));
        let n = span.len();
        let vocabulary = self.vocabulary_slots();
        if n == 1 {
            return Ok(self.rank(left, right, &[vocabulary], k));
        }
        let pools: Vec<Vec<Slot<'_>>> = (0..n)
            .map(|pos| {
                let mut scored: Vec<(f64, Slot<'_>)> = vocabulary
                    .iter()
                    .map(|&slot| {
                        let id = slot.id.expect("vocabulary slots are known words");
                        let s = if pos == 0 {
                            self.p(left, Some(id))
                        } else if pos == n - 1 {
                            self.p(Some(id), right)
                        } else {
                            self.p_unigram(id)
                        };
                        (s, slot)
                    })
                    .collect();
                scored.sort_by(|a, b| {
                    b.0.total_cmp(&a.0)
                        .then_with(|| a.1.surface.cmp(b.1.surface))
                });
                scored.truncate(POSITION_POOL);
                scored.into_iter().map(|(_, slot)| slot).collect()
            })
            .collect();
        Ok(self.rank(left, right, &pools, k))
    }

    /// Top `k` tuples from the cartesian product of `options`, scored by
    /// the same bigram chain as [`mask_fill`](Self::mask_fill).
    pub fn rank_fills(
        &self,
        doc: &Document,
        span: Span,
        options: &[Vec<String>],
        k: usize,
    ) -> Result<Vec<Fill>> {
        doc.check_span(span)?;
        if options.len() != span.len() {
            return Err(Error::OptionsMismatch {
                expected: span.len(),
                got: options.len(),
            });
        }
        let folded: Vec<Vec<String>> = options
            .iter()
            .map(|words| words.iter().map(|w| fold(w)).collect())
            .collect();
        let slots: Vec<Vec<Slot<'_>>> = options
            .iter()
            .zip(&folded)
            .map(|(words, keys)| {
                let mut seen = HashSet::new();
                words
                    .iter()
                    .zip(keys)
                    .filter(|(_, key)| seen.insert(key.as_str()))
                    .map(|(surface, key)| Slot {
                        surface,
                        id: self.id(key),
                    })
                    .collect()
            })
            .collect();
        let (left, right) = (self.left_context(doc, span), self.right_context(doc, span));
        Ok(self.rank(left, right, &slots, k))
    }

    /// Exact k-best search over the chain `P(w1|left) P(w2|w1) ... P(right|wn)`.
    /// Probabilities are normalized over the full product of `slots`.
    fn rank(
        &self,
        left: Option<u32>,
        right: Option<u32>,
        slots: &[Vec<Slot<'_>>],
        k: usize,
    ) -> Vec<Fill> {
        if k == 0 || slots.is_empty() || slots.iter().any(|s| s.is_empty()) {
            return Vec::new();
        }
        let n = slots.len();
        let last = &slots[n - 1];

        let mut alpha: Vec<f64> = slots[0].iter().map(|s| self.p(left, s.id)).collect();
        for i in 1..n {
            alpha = slots[i]
                .iter()
                .map(|b| {
                    slots[i - 1]
                        .iter()
                        .zip(&alpha)
                        .fold(0.0, |acc, (a, &w)| acc + w * self.p(a.id, b.id))
                })
                .collect();
        }
        let total: f64 = last
            .iter()
            .zip(&alpha)
            .fold(0.0, |acc, (s, &w)| acc + w * self.p(s.id, right));

        let by_rank = |a: &(f64, &str), b: &(f64, &str)| -> Ordering {
            b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1))
        };

        if n == 1 {
            let mut scored: Vec<(f64, &str)> = last
                .iter()
                .map(|s| (self.p(left, s.id) * self.p(s.id, right), s.surface))
                .collect();
            if k < scored.len() {
                scored.select_nth_unstable_by(k - 1, by_rank);
                scored.truncate(k);
            }
            scored.sort_by(by_rank);
            return scored
                .into_iter()
                .map(|(score, text)| Fill {
                    text: text.to_string(),
                    probability: score / total,
                })
                .collect();
        }

        // beams[j]: best partial tuples ending in slot j of the current position.
        let mut beams: Vec<Vec<Partial>> = slots[0]
            .iter()
            .map(|s| {
                vec![Partial {
                    score: self.p(left, s.id),
                    text: s.surface.to_string(),
                }]
            })
            .collect();
        for i in 1..n {
            beams = slots[i]
                .iter()
                .map(|b| {
                    let mut candidates: Vec<(f64, &str)> = Vec::new();
                    for (a, beam) in slots[i - 1].iter().zip(&beams) {
                        let step = self.p(a.id, b.id);
                        candidates.extend(beam.iter().map(|p| (p.score * step, p.text.as_str())));
                    }
                    // Every candidate gets the same suffix, so ordering by the
                    // prefix text equals ordering by the extended text.
                    candidates.sort_by(by_rank);
                    candidates.truncate(k);
                    candidates
                        .into_iter()
                        .map(|(score, prefix)| Partial {
                            score,
                            text: format!("{prefix} {}", b.surface),
                        })
                        .collect()
                })
                .collect();
        }
        let mut finals: Vec<(f64, &str)> = Vec::new();
        for (s, beam) in last.iter().zip(&beams) {
            let step = self.p(s.id, right);
            finals.extend(beam.iter().map(|p| (p.score * step, p.text.as_str())));
        }
        finals.sort_by(by_rank);
        finals.truncate(k);
        finals
            .into_iter()
            .map(|(score, text)| Fill {
                text: text.to_string(),
                probability: score / total,
            })
            .collect()
    }
}
