mod common;

use std::collections::HashSet;

use proptest::prelude::*;
use recast_core::backend::{Fill, ToxicityBackend};
use recast_core::text::{apply_replacement, fold, tokenize, Document, Span};
use recast_core::{
    annotate, generate_alternatives, generate_span_alternatives, is_highlighted, Result, Thresholds,
};

fn vocabulary() -> Vec<&'static str> {
    vec![
        "you", "are", "stupid", "an", "idiot", "that", "idea", "is", "garbage", "shut", "up",
        "kid", "I", "hate", "this", "ugly", "post", "nice", "friend", "Moron", "pathetic", "loser",
        "please", "calm", "down", "really", "trash", "dumb", "and", "useless",
    ]
}

fn sentence() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(vocabulary()), 1..12).prop_map(|w| w.join(" "))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn single_word_safeguards(text in sentence()) {
        let b = common::fixture_backend();
        let t = Thresholds::default();
        let doc = tokenize(&text).unwrap();
        for i in 0..doc.len() {
            let set = generate_alternatives(&doc, i, &b, &t).unwrap();
            let original = b.score(doc.raw()).unwrap();
            prop_assert_eq!(set.original_toxicity, original);
            let mut seen = HashSet::new();
            for c in &set.candidates {
                prop_assert!(c.resulting_toxicity < original);
                prop_assert!(c.individual_toxicity < t.alt_toxicity_max);
                prop_assert!(seen.insert(fold(&c.replacement)));
                prop_assert!(fold(&c.replacement) != doc.tokens()[i].folded());
                let edited = apply_replacement(&doc, set.span, &c.replacement).unwrap();
                prop_assert_eq!(b.score(edited.raw()).unwrap(), c.resulting_toxicity);
            }
            prop_assert!(set.candidates.len() <= t.knn + t.mlm_topk + 1);
            let ordered = set.candidates.windows(2).all(|w| {
                (w[0].resulting_toxicity, &w[0].replacement) < (w[1].resulting_toxicity, &w[1].replacement)
            });
            prop_assert!(ordered);
            prop_assert_eq!(&set, &generate_alternatives(&doc, i, &b, &t).unwrap());
        }
    }

    #[test]
    fn span_safeguards(text in sentence(), start in 0usize..12, len in 2usize..=5) {
        let b = common::fixture_backend();
        let t = Thresholds::default();
        let doc = tokenize(&text).unwrap();
        prop_assume!(doc.len() >= 2);
        let start = start % (doc.len() - 1);
        let span = Span::new(start, (start + len).min(doc.len()));
        let set = generate_span_alternatives(&doc, span, &b, &t).unwrap();
        for c in &set.candidates {
            prop_assert!(c.resulting_toxicity < set.original_toxicity);
            prop_assert!(c.individual_toxicity < t.alt_toxicity_max);
            let edited = apply_replacement(&doc, span, &c.replacement).unwrap();
            prop_assert_eq!(b.score(edited.raw()).unwrap(), c.resulting_toxicity);
        }
    }

    #[test]
    fn highlight_criterion(text in sentence()) {
        let b = common::fixture_backend();
        let t = Thresholds::default();
        let doc = tokenize(&text).unwrap();
        let att = b.token_attention(&doc);
        let scored = annotate(&doc, &b, &t).unwrap();
        prop_assert_eq!(att.len(), doc.len());
        for (i, &weight) in att.iter().enumerate() {
            let expected = weight > t.attn_cutoff
                && !generate_alternatives(&doc, i, &b, &t).unwrap().candidates.is_empty();
            prop_assert_eq!(is_highlighted(&doc, i, &b, &t).unwrap(), expected);
            prop_assert_eq!(scored.highlighted[i], expected);
        }
    }
}

/// The fixture backend without the deletion-floor guarantee, which forces the
/// full candidate pipeline everywhere.
struct NoFloor(recast_core::ReferenceBackend);

impl ToxicityBackend for NoFloor {
    fn name(&self) -> &str {
        "no-floor"
    }
    fn score(&self, text: &str) -> Result<f64> {
        self.0.score(text)
    }
    fn token_attention(&self, doc: &Document) -> Vec<f64> {
        self.0.token_attention(doc)
    }
    fn nearest_neighbors(&self, word: &str, k: usize) -> Vec<String> {
        self.0.nearest_neighbors(word, k)
    }
    fn mask_fill(&self, doc: &Document, span: Span, k: usize) -> Result<Vec<Fill>> {
        self.0.mask_fill(doc, span, k)
    }
    fn rank_fills(
        &self,
        doc: &Document,
        span: Span,
        options: &[Vec<String>],
        k: usize,
    ) -> Result<Vec<Fill>> {
        self.0.rank_fills(doc, span, options, k)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // Repetition pushes some texts far enough that the score saturates at 1.
    #[test]
    fn deletion_floor_shortcut_changes_nothing(
        text in (sentence(), 1usize..8).prop_map(|(s, n)| vec![s; n].join(" ")),
        strict in any::<bool>(),
    ) {
        let fast = common::fixture_backend();
        let slow = NoFloor(common::fixture_backend());
        let t = Thresholds {
            alt_toxicity_max: if strict { 0.01 } else { 0.4 },
            ..Thresholds::default()
        };
        let doc = tokenize(&text).unwrap();
        prop_assert_eq!(annotate(&doc, &fast, &t).unwrap(), annotate(&doc, &slow, &t).unwrap());
        for i in (0..doc.len()).step_by(3) {
            prop_assert_eq!(
                generate_alternatives(&doc, i, &fast, &t).unwrap(),
                generate_alternatives(&doc, i, &slow, &t).unwrap()
            );
            let span = Span::new(i, (i + 3).min(doc.len()));
            prop_assert_eq!(
                generate_span_alternatives(&doc, span, &fast, &t).unwrap(),
                generate_span_alternatives(&doc, span, &slow, &t).unwrap()
            );
        }
    }
}

/// Scores everything the same, so no edit can ever improve the text.
struct ConstantBackend;

impl ToxicityBackend for ConstantBackend {
    fn name(&self) -> &str {
        "constant"
    }
    fn score(&self, _: &str) -> Result<f64> {
        Ok(0.7)
    }
    fn token_attention(&self, doc: &Document) -> Vec<f64> {
        vec![1.0; doc.len()]
    }
    fn nearest_neighbors(&self, word: &str, k: usize) -> Vec<String> {
        ["alpha", "beta", word]
            .iter()
            .take(k)
            .map(|s| s.to_string())
            .collect()
    }
    fn mask_fill(&self, doc: &Document, span: Span, k: usize) -> Result<Vec<Fill>> {
        doc.check_span(span)?;
        Ok(vec![Fill {
            text: vec!["gamma"; span.len()].join(" "),
            probability: 1.0,
        }]
        .into_iter()
        .take(k)
        .collect())
    }
    fn rank_fills(
        &self,
        doc: &Document,
        span: Span,
        options: &[Vec<String>],
        _: usize,
    ) -> Result<Vec<Fill>> {
        doc.check_span(span)?;
        let first: Vec<&str> = options.iter().map(|o| o[0].as_str()).collect();
        Ok(vec![Fill {
            text: first.join(" "),
            probability: 1.0,
        }])
    }
}

#[test]
fn constant_backend_yields_valid_empty_output() {
    let t = Thresholds::default();
    let doc = tokenize("you are stupid, really").unwrap();
    for i in 0..doc.len() {
        let set = generate_alternatives(&doc, i, &ConstantBackend, &t).unwrap();
        assert!(set.candidates.is_empty());
        assert_eq!(set.original_toxicity, 0.7);
        assert!(!is_highlighted(&doc, i, &ConstantBackend, &t).unwrap());
    }
    let set = generate_span_alternatives(&doc, Span::new(1, 4), &ConstantBackend, &t).unwrap();
    assert!(set.candidates.is_empty());
    let scored = annotate(&doc, &ConstantBackend, &t).unwrap();
    assert_eq!(scored.highlighted, vec![false; 4]);
}

#[test]
fn stupid_example_on_fixture() {
    let b = common::fixture_backend();
    let t = Thresholds::default();
    let doc = tokenize("you are stupid").unwrap();
    assert_eq!(b.token_attention(&doc), vec![0.0, 0.0, 1.0]);
    let set = generate_alternatives(&doc, 2, &b, &t).unwrap();
    let foolish = set
        .candidates
        .iter()
        .find(|c| c.replacement == "foolish")
        .unwrap();
    assert!((foolish.resulting_toxicity - 0.017_986_21).abs() < 1e-8);
    assert!(set.candidates.iter().any(|c| c.replacement.is_empty()));
    assert!(is_highlighted(&doc, 2, &b, &t).unwrap());
}
