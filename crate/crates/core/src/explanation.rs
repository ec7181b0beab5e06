//! Token flagging, agreement between explanation methods, cutoff calibration
//! and span scoring.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::backend::ToxicityBackend;
use crate::error::{Error, Result};
use crate::text::{Document, Span};

/// Cutoffs governing highlighting and alternative generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Tokens with attention strictly above this are flagged.
    pub attn_cutoff: f64,
    /// Replacements must score strictly below this as standalone text.
    pub alt_toxicity_max: f64,
    /// Embedding neighbours considered per word.
    pub knn: usize,
    /// Masked-LM predictions considered per word or span.
    pub mlm_topk: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            attn_cutoff: 0.2,
            alt_toxicity_max: 0.4,
            knn: 10,
            mlm_topk: 20,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        if !open_unit(self.attn_cutoff) {
            return Err(Error::InvalidThresholds(format!(
                "attn_cutoff must lie in (0, 1), got {}",
                self.attn_cutoff
            )));
        }
        if !open_unit(self.alt_toxicity_max) {
            return Err(Error::InvalidThresholds(format!(
                "alt_toxicity_max must lie in (0, 1), got {}",
                self.alt_toxicity_max
            )));
        }
        if self.knn == 0 || self.mlm_topk == 0 {
            return Err(Error::InvalidThresholds(
                "knn and mlm_topk must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Indices of flagged tokens.
pub type FlagSet = BTreeSet<usize>;

/// Indices whose weight is strictly greater than `cutoff`.
pub fn flag_tokens(attention: &[f64], cutoff: f64) -> FlagSet {
    attention
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > cutoff)
        .map(|(i, _)| i)
        .collect()
}

/// Case-folded words at the flagged positions.
pub fn flagged_words(doc: &Document, flags: &FlagSet) -> BTreeSet<String> {
    flags
        .iter()
        .filter_map(|&i| doc.tokens().get(i))
        .map(|t| t.folded())
        .collect()
}

/// `|X ∩ Y| / min(|X|, |Y|)`, or 0 when either set is empty.
pub fn overlap<T: Ord>(x: &BTreeSet<T>, y: &BTreeSet<T>) -> f64 {
    let smaller = x.len().min(y.len());
    if smaller == 0 {
        return 0.0;
    }
    x.intersection(y).count() as f64 / smaller as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationResult {
    pub source_cutoff: f64,
    /// Empirical CDF of the source samples at `source_cutoff`.
    pub source_percentile: f64,
    /// Nearest-rank index into the sorted target samples.
    pub rank: usize,
    pub mapped_cutoff: f64,
}

fn sorted_finite(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteSample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted)
}

/// Maps `source_cutoff` onto the target distribution by matching empirical
/// percentiles, using the nearest-rank quantile of the target samples.
pub fn calibrate_cutoff(
    source_samples: &[f64],
    target_samples: &[f64],
    source_cutoff: f64,
) -> Result<CalibrationResult> {
    let source = sorted_finite(source_samples)?;
    let target = sorted_finite(target_samples)?;
    let below = source.partition_point(|&x| x <= source_cutoff);
    // ceil(p * n_target) with p = below / n_source, in exact integer arithmetic.
    let ceil = (below * target.len()).div_ceil(source.len());
    let rank = ceil.saturating_sub(1);
    Ok(CalibrationResult {
        source_cutoff,
        source_percentile: below as f64 / source.len() as f64,
        rank,
        mapped_cutoff: target[rank],
    })
}

/// Score of the span's raw text evaluated on its own.
pub fn score_span(doc: &Document, span: Span, backend: &dyn ToxicityBackend) -> Result<f64> {
    backend.score(doc.span_text(span)?)
}

/// A per-token relevance method.
pub trait TokenScorer {
    fn name(&self) -> &str;
    fn token_scores(&self, doc: &Document) -> Result<Vec<f64>>;
}

impl<F> TokenScorer for F
where
    F: Fn(&Document) -> Vec<f64>,
{
    fn name(&self) -> &str {
        "custom"
    }

    fn token_scores(&self, doc: &Document) -> Result<Vec<f64>> {
        Ok(self(doc))
    }
}

/// The backend's own attention profile.
pub struct AttentionExplainer<'a>(pub &'a dyn ToxicityBackend);

impl TokenScorer for AttentionExplainer<'_> {
    fn name(&self) -> &str {
        "attention"
    }

    fn token_scores(&self, doc: &Document) -> Result<Vec<f64>> {
        Ok(self.0.token_attention(doc))
    }
}

/// Leave-one-out relevance: how much the whole-text score drops when a token
/// is deleted, floored at zero. Model agnostic and gradient free, but needs
/// one extra scoring pass per token.
pub struct OcclusionExplainer<'a>(pub &'a dyn ToxicityBackend);

impl TokenScorer for OcclusionExplainer<'_> {
    fn name(&self) -> &str {
        "occlusion"
    }

    fn token_scores(&self, doc: &Document) -> Result<Vec<f64>> {
        let base = self.0.score(doc.raw())?;
        Ok(self
            .0
            .deletion_scores(doc)?
            .into_iter()
            .map(|s| (base - s).max(0.0))
            .collect())
    }
}
