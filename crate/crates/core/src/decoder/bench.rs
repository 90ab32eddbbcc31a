//! Failure counts and timings of segment correction on a seeded stream of
//! single-edit corruptions.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{brute_force_correct, SegmentDecoder};
use crate::codebook::Codebook;
use crate::edit::apply_random_edit;
use crate::error::{Error, Result};
use crate::model::io::params_hash;
use crate::model::{embed_flat, ModelParams};
use crate::rng::rng_from_seed;
use crate::seq::Sequence;

const CHUNK: usize = 8192;

/// Codewords drawn uniformly from a codebook, each hit by one random edit.
#[derive(Clone, Debug)]
pub struct CorruptionStream {
    /// Lexicographic codebook index of the transmitted codeword.
    pub truth: Vec<usize>,
    pub segments: Vec<Sequence>,
}

impl CorruptionStream {
    pub fn generate(cb: &Codebook, trials: usize, seed: u64) -> Result<Self> {
        if cb.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut rng = rng_from_seed(seed);
        let mut truth = Vec::with_capacity(trials);
        let mut segments = Vec::with_capacity(trials);
        for _ in 0..trials {
            let i = rng.gen_range(0..cb.len());
            truth.push(i);
            segments.push(apply_random_edit(&cb.sorted()[i], &mut rng));
        }
        Ok(Self { truth, segments })
    }
}

/// One row of a correction benchmark. Timing lives in the `*_ns*` fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub failures: usize,
    /// Embedding plus tree query plus Levenshtein confirmation.
    pub tree_ns_total: u64,
    /// Share of `tree_ns_total` spent embedding segments (identical for all k).
    pub embed_ns: u64,
    /// Brute-force time over the same stream, if measured.
    pub brute_ns_total: Option<u64>,
    pub brute_failures: Option<usize>,
    pub seed: u64,
    pub model_hash: String,
    pub codebook_hash: String,
}

/// Decodes one corruption stream with every `k` in `ks` (and optionally by
/// brute force). Failures count segments not mapped back to their codeword.
pub fn bench_correct(
    cb: &Codebook,
    params: &ModelParams,
    trials: usize,
    ks: &[usize],
    seed: u64,
    brute_force: bool,
) -> Result<Vec<BenchRecord>> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    if let Some(&k) = ks.iter().find(|&&k| k == 0 || k > cb.len()) {
        return Err(Error::KOutOfRange { k, size: cb.len() });
    }
    let stream = CorruptionStream::generate(cb, trials, seed)?;
    let decoder = SegmentDecoder::new(cb, params)?;
    let m = params.config.m;
    let mut failures = vec![0usize; ks.len()];
    let mut search_ns = vec![0u128; ks.len()];
    let mut embed_ns = 0u128;

    for (segs, truth) in stream.segments.chunks(CHUNK).zip(stream.truth.chunks(CHUNK)) {
        let t = Instant::now();
        let vecs = embed_flat(params, segs)?;
        embed_ns += t.elapsed().as_nanos();
        for (slot, &k) in ks.iter().enumerate() {
            let t = Instant::now();
            let mut failed = 0;
            for ((seg, v), &want) in segs.iter().zip(vecs.chunks_exact(m)).zip(truth) {
                if decoder.correct_embedded(seg, v, k)?.corrected_index() != Some(want) {
                    failed += 1;
                }
            }
            search_ns[slot] += t.elapsed().as_nanos();
            failures[slot] += failed;
        }
    }

    let (brute_ns, brute_failures) = if brute_force {
        let t = Instant::now();
        let failed = stream
            .segments
            .iter()
            .zip(&stream.truth)
            .filter(|(seg, &want)| brute_force_correct(seg, cb).corrected_index() != Some(want))
            .count();
        (Some(t.elapsed().as_nanos() as u64), Some(failed))
    } else {
        (None, None)
    };

    let model_hash = params_hash(params);
    let codebook_hash = cb.hash();
    Ok(ks
        .iter()
        .enumerate()
        .map(|(slot, &k)| BenchRecord {
            n: cb.n(),
            k,
            trials,
            failures: failures[slot],
            tree_ns_total: (embed_ns + search_ns[slot]) as u64,
            embed_ns: embed_ns as u64,
            brute_ns_total: brute_ns,
            brute_failures,
            seed,
            model_hash: model_hash.clone(),
            codebook_hash: codebook_hash.clone(),
        })
        .collect())
}
