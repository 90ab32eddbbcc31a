//! Shared fixtures for the criterion benchmarks.

use dodo_core::codebook::random_search;
use dodo_core::decoder::CorruptionStream;
use dodo_core::model::{load_params, ModelConfig, ModelParams};
use dodo_core::Codebook;

/// A random-search codebook of length `n`, a model for it and a corruption
/// stream of `trials` single-edit segments.
///
/// Uses `models/n{n}.bin` from the workspace root when present, otherwise a
/// freshly initialized default-size model (same cost, untrained quality).
pub fn decode_fixture(n: usize, trials: usize) -> (Codebook, ModelParams, CorruptionStream) {
    let cb = random_search(n, 4, 1).expect("search");
    let trained = concat!(env!("CARGO_MANIFEST_DIR"), "/../../models");
    let params = load_params(format!("{trained}/n{n}.bin")).unwrap_or_else(|_| {
        let cfg = ModelConfig { channels: 32, ..ModelConfig::for_length(n) };
        ModelParams::init(cfg, 0).expect("init")
    });
    let stream = CorruptionStream::generate(&cb, trials, 7).expect("stream");
    (cb, params, stream)
}
