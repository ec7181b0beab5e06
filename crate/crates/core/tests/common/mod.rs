#![allow(dead_code)]

use std::path::PathBuf;

use recast_core::backend::{BackendPaths, ReferenceBackend};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture_backend() -> ReferenceBackend {
    let dir = fixtures();
    ReferenceBackend::load(&BackendPaths {
        lexicon: dir.join("lexicon.tsv"),
        embeddings: dir.join("embeddings.txt"),
        corpus: dir.join("corpus.txt"),
    })
    .expect("fixture backend loads")
}
