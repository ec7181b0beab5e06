//! Shared inputs for the criterion benchmarks under `benches/`.

use std::path::{Path, PathBuf};

use recast_core::stats::PairedSample;
use recast_core::{BackendPaths, ReferenceBackend};

pub fn fixture_paths() -> BackendPaths {
    let dir: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    BackendPaths {
        lexicon: dir.join("lexicon.tsv"),
        embeddings: dir.join("embeddings.txt"),
        corpus: dir.join("corpus.txt"),
    }
}

pub fn fixture_backend() -> ReferenceBackend {
    ReferenceBackend::load(&fixture_paths()).expect("fixture files load")
}

const NEUTRAL: &[&str] = &[
    "have", "a", "nice", "day", "the", "cat", "sat", "on", "mat", "you", "are", "my", "friend",
    "this", "idea", "is", "good", "please", "calm", "down",
];
const TOXIC: &[&str] = &["stupid", "idiot", "trash", "hate", "ugly", "worthless"];

/// Deterministic text of at most `bytes` bytes with one toxic word in
/// every `toxic_every` words.
pub fn sample_text(bytes: usize, toxic_every: usize) -> String {
    let mut out = String::new();
    for i in 0.. {
        let word = if toxic_every > 0 && i % toxic_every == toxic_every - 1 {
            TOXIC[(i / toxic_every) % TOXIC.len()]
        } else {
            NEUTRAL[(i * 7 + 3) % NEUTRAL.len()]
        };
        if out.len() + word.len() + 1 > bytes {
            break;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Five-point ratings with many ties, `n` pairs.
pub fn likert_pairs(n: usize) -> Vec<PairedSample> {
    (0..n)
        .map(|i| {
            let x = (i * 37 % 5 + 1) as f64;
            let y = ((i * 11 + i / 3) % 5 + 1) as f64;
            PairedSample::new(x, y)
        })
        .collect()
}
