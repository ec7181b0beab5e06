use std::time::{Duration, Instant};

use serde::{Serialize, Serializer};

use super::proportion::{mean_ci_halfwidth, Z_95};
use crate::error::{Error, Result};
use crate::explanation::{
    calibrate_cutoff, flag_tokens, flagged_words, overlap, CalibrationResult, TokenScorer,
};
use crate::text::{tokenize, Document};

fn millis<S: Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1e3)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExplainerReport {
    pub method_a: String,
    pub method_b: String,
    pub cutoff_a: f64,
    pub cutoff_b: f64,
    /// Present when `cutoff_b` was derived by percentile matching.
    pub calibration: Option<CalibrationResult>,
    pub texts: usize,
    /// Texts where neither method flagged anything; they carry no evidence
    /// of agreement or disagreement and are left out of the mean.
    pub skipped: usize,
    /// Per-text overlap, `None` for skipped texts.
    pub overlaps: Vec<Option<f64>>,
    pub mean_overlap: f64,
    pub overlap_ci_halfwidth: f64,
    #[serde(rename = "mean_latency_a_ms", serialize_with = "millis")]
    pub mean_latency_a: Duration,
    #[serde(rename = "mean_latency_b_ms", serialize_with = "millis")]
    pub mean_latency_b: Duration,
}

fn run(method: &dyn TokenScorer, docs: &[Document]) -> Result<(Vec<Vec<f64>>, Duration)> {
    let start = Instant::now();
    let scores = docs
        .iter()
        .map(|doc| {
            let s = method.token_scores(doc)?;
            if s.len() != doc.len() {
                return Err(Error::TokenScoreLength {
                    expected: doc.len(),
                    got: s.len(),
                });
            }
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((scores, start.elapsed() / docs.len() as u32))
}

/// Flags every text under both methods and reports their word-set overlap and
/// mean per-text latency. `cutoff_b` is calibrated from the pooled token
/// scores so it sits at the same percentile as `cutoff_a`.
pub fn compare_explainers<S: AsRef<str>>(
    corpus: &[S],
    method_a: &dyn TokenScorer,
    method_b: &dyn TokenScorer,
    cutoff_a: f64,
) -> Result<ExplainerReport> {
    compare(corpus, method_a, method_b, cutoff_a, None)
}

/// [`compare_explainers`] with an explicit cutoff for the second method.
pub fn compare_explainers_at<S: AsRef<str>>(
    corpus: &[S],
    method_a: &dyn TokenScorer,
    method_b: &dyn TokenScorer,
    cutoff_a: f64,
    cutoff_b: f64,
) -> Result<ExplainerReport> {
    compare(corpus, method_a, method_b, cutoff_a, Some(cutoff_b))
}

fn compare<S: AsRef<str>>(
    corpus: &[S],
    method_a: &dyn TokenScorer,
    method_b: &dyn TokenScorer,
    cutoff_a: f64,
    cutoff_b: Option<f64>,
) -> Result<ExplainerReport> {
    if corpus.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let docs = corpus
        .iter()
        .map(|t| tokenize(t.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    // Timed one after the other so neither method competes for the CPU.
    let (scores_a, latency_a) = run(method_a, &docs)?;
    let (scores_b, latency_b) = run(method_b, &docs)?;

    let (cutoff_b, calibration) = match cutoff_b {
        Some(c) => (c, None),
        None => {
            let pooled_a: Vec<f64> = scores_a.iter().flatten().copied().collect();
            let pooled_b: Vec<f64> = scores_b.iter().flatten().copied().collect();
            let cal = calibrate_cutoff(&pooled_a, &pooled_b, cutoff_a)?;
            (cal.mapped_cutoff, Some(cal))
        }
    };

    let overlaps: Vec<Option<f64>> = docs
        .iter()
        .zip(scores_a.iter().zip(&scores_b))
        .map(|(doc, (a, b))| {
            let x = flagged_words(doc, &flag_tokens(a, cutoff_a));
            let y = flagged_words(doc, &flag_tokens(b, cutoff_b));
            (!(x.is_empty() && y.is_empty())).then(|| overlap(&x, &y))
        })
        .collect();
    let compared: Vec<f64> = overlaps.iter().flatten().copied().collect();
    let mean_overlap = if compared.is_empty() {
        0.0
    } else {
        compared.iter().sum::<f64>() / compared.len() as f64
    };

    Ok(ExplainerReport {
        method_a: method_a.name().to_string(),
        method_b: method_b.name().to_string(),
        cutoff_a,
        cutoff_b,
        calibration,
        texts: docs.len(),
        skipped: docs.len() - compared.len(),
        overlap_ci_halfwidth: mean_ci_halfwidth(&compared, Z_95),
        overlaps,
        mean_overlap,
        mean_latency_a: latency_a,
        mean_latency_b: latency_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::Document;

    fn lengths(doc: &Document) -> Vec<f64> {
        doc.tokens()
            .iter()
            .map(|t| t.text.len() as f64 / 10.0)
            .collect()
    }

    #[test]
    fn self_comparison_is_perfect() {
        let corpus = [
            "a verylongword here",
            "tiny words only",
            "another enormous sentence",
        ];
        let r = compare_explainers(&corpus, &lengths, &lengths, 0.55).unwrap();
        assert_eq!(r.cutoff_b, 0.5);
        assert_eq!(r.skipped, 1);
        assert_eq!(r.mean_overlap, 1.0);
        assert_eq!(r.overlap_ci_halfwidth, 0.0);
        let r = compare_explainers_at(&corpus, &lengths, &lengths, 0.55, 0.55).unwrap();
        assert_eq!(r.mean_overlap, 1.0);
        assert!(r.calibration.is_none());
    }

    #[test]
    fn rejects_bad_input() {
        let empty: [&str; 0] = [];
        assert!(matches!(
            compare_explainers(&empty, &lengths, &lengths, 0.2),
            Err(Error::EmptyDistribution)
        ));
        let short = |_: &Document| vec![0.5];
        assert!(matches!(
            compare_explainers(&["two words"], &lengths, &short, 0.2),
            Err(Error::TokenScoreLength {
                expected: 2,
                got: 1
            })
        ));
    }
}
