//! Single-error segment correction: nearest codewords in embedding space,
//! confirmed by exact Levenshtein distance, plus the brute-force baseline.

pub mod bench;
pub mod kdtree;

use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::levenshtein::distance_at_most;
use crate::model::{embed, embed_flat, ModelParams};
use crate::seq::Sequence;

pub use bench::{bench_correct, BenchRecord, CorruptionStream};
pub use kdtree::{linear_knn, KdTree};

/// Why a segment could not be corrected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Failure {
    /// Length differs from `n` by more than one: outside the correction radius.
    LengthOutOfRange { len: usize, n: usize },
    /// No examined codeword lies within distance 1. `nearest` carries the
    /// closest codeword index and distance when the whole book was scanned.
    NotFound { nearest: Option<(usize, usize)> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// `index` refers to the codebook's lexicographic order.
    Corrected { index: usize, distance: usize },
    Failed(Failure),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeResult {
    pub outcome: Outcome,
    pub candidates_examined: usize,
    pub distances_computed: usize,
}

impl DecodeResult {
    pub fn corrected_index(&self) -> Option<usize> {
        match self.outcome {
            Outcome::Corrected { index, .. } => Some(index),
            Outcome::Failed(_) => None,
        }
    }

    fn failed(failure: Failure, examined: usize) -> Self {
        Self { outcome: Outcome::Failed(failure), candidates_examined: examined, distances_computed: examined }
    }
}

/// K-d tree over the embeddings of a codebook's words, in lexicographic order.
pub struct SegmentDecoder<'a> {
    codebook: &'a Codebook,
    params: &'a ModelParams,
    tree: KdTree,
}

impl<'a> SegmentDecoder<'a> {
    pub fn new(codebook: &'a Codebook, params: &'a ModelParams) -> Result<Self> {
        if codebook.is_empty() {
            return Err(Error::EmptyInput);
        }
        if params.config.q != codebook.q() {
            return Err(Error::AlphabetMismatch(codebook.q(), params.config.q));
        }
        if params.config.max_len < codebook.n() + 1 {
            return Err(Error::ConfigMismatch(format!(
                "model accepts length {} but segments reach {}",
                params.config.max_len,
                codebook.n() + 1
            )));
        }
        let flat = embed_flat(params, codebook.sorted())?;
        let tree = KdTree::from_flat(flat, params.config.m, kdtree::DEFAULT_LEAF_SIZE)?;
        Ok(Self { codebook, params, tree })
    }

    pub fn tree(&self) -> &KdTree {
        &self.tree
    }

    pub fn codebook(&self) -> &Codebook {
        self.codebook
    }

    /// Embeds the segment and checks its `k` nearest codewords in order.
    pub fn correct(&self, segment: &Sequence, k: usize) -> Result<DecodeResult> {
        if let Some(r) = self.check_length(segment) {
            return Ok(r);
        }
        let v = embed(self.params, segment)?;
        self.correct_embedded(segment, v.as_slice(), k)
    }

    /// As [`correct`](Self::correct) with a precomputed segment embedding.
    pub fn correct_embedded(&self, segment: &Sequence, v: &[f64], k: usize) -> Result<DecodeResult> {
        if let Some(r) = self.check_length(segment) {
            return Ok(r);
        }
        let neighbors = self.tree.query_knn(v, k)?;
        let words = self.codebook.sorted();
        for (examined, &(index, _)) in neighbors.iter().enumerate() {
            if let Some(distance) = distance_at_most(segment, &words[index], 1) {
                return Ok(DecodeResult {
                    outcome: Outcome::Corrected { index, distance },
                    candidates_examined: examined + 1,
                    distances_computed: examined + 1,
                });
            }
        }
        Ok(DecodeResult::failed(Failure::NotFound { nearest: None }, neighbors.len()))
    }

    fn check_length(&self, segment: &Sequence) -> Option<DecodeResult> {
        let n = self.codebook.n();
        (segment.len().abs_diff(n) > 1).then(|| DecodeResult::failed(Failure::LengthOutOfRange { len: segment.len(), n }, 0))
    }
}

/// One-shot tree decoding; builds the index on every call.
pub fn correct_segment(segment: &Sequence, cb: &Codebook, params: &ModelParams, k: usize) -> Result<DecodeResult> {
    SegmentDecoder::new(cb, params)?.correct(segment, k)
}

/// Scans the codebook in lexicographic order and stops at the first codeword
/// within distance 1. On failure the closest codeword is reported.
pub fn brute_force_correct(segment: &Sequence, cb: &Codebook) -> DecodeResult {
    let words = cb.sorted();
    for (index, w) in words.iter().enumerate() {
        if let Some(distance) = distance_at_most(segment, w, 1) {
            return DecodeResult {
                outcome: Outcome::Corrected { index, distance },
                candidates_examined: index + 1,
                distances_computed: index + 1,
            };
        }
    }
    let nearest = words
        .iter()
        .enumerate()
        .map(|(i, w)| (i, crate::levenshtein::distance(segment, w)))
        .min_by_key(|&(i, d)| (d, i));
    DecodeResult {
        outcome: Outcome::Failed(Failure::NotFound { nearest }),
        candidates_examined: words.len(),
        distances_computed: 2 * words.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::random_search;
    use crate::edit::apply_random_edit;
    use crate::levenshtein::distance;
    use crate::model::ModelConfig;
    use crate::rng::rng_from_seed;

    fn setup() -> (Codebook, ModelParams) {
        let cb = random_search(6, 4, 2).unwrap();
        let cfg = ModelConfig { layers: 2, channels: 8, m: 8, ..ModelConfig::for_length(6) };
        (cb, ModelParams::init(cfg, 1).unwrap())
    }

    #[test]
    fn unmodified_codeword() {
        let (cb, params) = setup();
        let dec = SegmentDecoder::new(&cb, &params).unwrap();
        for (i, w) in cb.sorted().iter().enumerate().step_by(5) {
            let r = dec.correct(w, 1).unwrap();
            assert_eq!(r.outcome, Outcome::Corrected { index: i, distance: 0 });
            assert_eq!(brute_force_correct(w, &cb).outcome, Outcome::Corrected { index: i, distance: 0 });
        }
    }

    #[test]
    fn full_k_always_corrects_and_agrees_with_brute_force() {
        let (cb, params) = setup();
        let dec = SegmentDecoder::new(&cb, &params).unwrap();
        let mut rng = rng_from_seed(4);
        for t in 0..300 {
            let i = t % cb.len();
            let seg = apply_random_edit(&cb.sorted()[i], &mut rng);
            let brute = brute_force_correct(&seg, &cb);
            assert_eq!(brute.corrected_index(), Some(i));
            let tree = dec.correct(&seg, cb.len()).unwrap();
            assert_eq!(tree.corrected_index(), Some(i));
            let small = dec.correct(&seg, 2).unwrap();
            if let Some(j) = small.corrected_index() {
                assert_eq!(j, i);
                assert!(distance(&seg, &cb.sorted()[j]) <= 1);
            }
        }
    }

    #[test]
    fn two_edits_away_fails() {
        let (cb, params) = setup();
        let dec = SegmentDecoder::new(&cb, &params).unwrap();
        let far = (0..4096u64)
            .map(|r| Sequence::from_rank(r, 6, 4).unwrap())
            .find(|s| cb.sorted().iter().map(|c| distance(c, s)).min() == Some(2))
            .expect("some word at distance exactly 2");
        let brute = brute_force_correct(&far, &cb);
        match brute.outcome {
            Outcome::Failed(Failure::NotFound { nearest: Some((_, 2)) }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(dec.correct(&far, cb.len()).unwrap().corrected_index().is_none());
    }

    #[test]
    fn length_out_of_range() {
        let (cb, params) = setup();
        let dec = SegmentDecoder::new(&cb, &params).unwrap();
        let short: Sequence = "0123".parse().unwrap();
        assert!(matches!(dec.correct(&short, 1).unwrap().outcome, Outcome::Failed(Failure::LengthOutOfRange { len: 4, n: 6 })));
    }
}
