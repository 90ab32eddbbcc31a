//! Greedy construction of maximal distance-3 codebooks.
//!
//! Both searches walk a fixed visiting order over `A(n)`. Picking the first
//! remaining candidate in that order and removing its radius-2 ball is the
//! same as repeatedly taking the argmax of a static priority among the
//! remaining candidates, since removals never change a priority.

use rand::seq::SliceRandom;

use super::covariance::{score_rows, CovarianceAccumulator, CovarianceModel};
use super::{Codebook, Method, Provenance};
use crate::error::Result;
use crate::model::io::params_hash;
use crate::model::{embed_flat, ModelParams};
use crate::rng::{derive_seed, rng_from_seed};
use crate::seq::Sequence;
use crate::space::{for_each_in_ball2, space_size, DEFAULT_ENUMERATION_CAP};

/// Embedding matrices larger than this are recomputed instead of stored.
const MAX_STORED_EMBEDDING_BYTES: usize = 1 << 30;
const EMBED_CHUNK: u64 = 1 << 14;

struct Bitset(Vec<u64>);

impl Bitset {
    fn new(bits: u64) -> Self {
        Self(vec![0; bits.div_ceil(64) as usize])
    }

    #[inline]
    fn get(&self, i: u64) -> bool {
        self.0[(i >> 6) as usize] >> (i & 63) & 1 == 1
    }

    #[inline]
    fn set(&mut self, i: u64) {
        self.0[(i >> 6) as usize] |= 1 << (i & 63);
    }
}

/// Greedy packing over `order` (ranks into `A(n)`). Returns the selections.
fn greedy(n: usize, q: u8, order: impl IntoIterator<Item = u64>) -> Vec<Sequence> {
    // Removed flags are indexed by packed value, which covers q = 2 as well.
    let mut removed = Bitset::new(1u64 << (2 * n));
    let mut picked = Vec::new();
    for rank in order {
        let s = Sequence::from_rank(rank, n, q).expect("rank in range");
        if removed.get(s.packed()) {
            continue;
        }
        picked.push(s);
        for_each_in_ball2(&s, |p| removed.set(p));
    }
    picked
}

/// Greedy search in a uniformly random visiting order.
pub fn random_search(n: usize, q: u8, seed: u64) -> Result<Codebook> {
    let count = space_size(n, q, DEFAULT_ENUMERATION_CAP)?;
    let mut order: Vec<u64> = (0..count).collect();
    order.shuffle(&mut rng_from_seed(seed));
    let words = greedy(n, q, order);
    Codebook::new(n, q, words, Provenance { method: Method::Rand, seed: Some(seed), model_hash: None })
}

/// Density scores of all of `A(n)`, ready to run the greedy loop.
pub struct DegsSearch {
    pub n: usize,
    pub q: u8,
    pub covariance: CovarianceModel,
    /// `u^T sigma_inv u` for every sequence, indexed by rank.
    pub scores: Vec<f64>,
    pub model_hash: String,
}

impl DegsSearch {
    /// Embeds every length-`n` sequence and scores it against the fitted
    /// covariance. `ridge = None` uses the default ridge.
    pub fn prepare(n: usize, params: &ModelParams, ridge: Option<f64>) -> Result<Self> {
        let q = params.config.q;
        let count = space_size(n, q, DEFAULT_ENUMERATION_CAP)?;
        params.check()?;
        let m = params.config.m;
        let chunk = |start: u64| -> Result<Vec<f64>> {
            let seqs: Vec<Sequence> = (start..count.min(start + EMBED_CHUNK))
                .map(|r| Sequence::from_rank(r, n, q).expect("rank in range"))
                .collect();
            embed_flat(params, &seqs)
        };
        let store = (count as usize).saturating_mul(m * 8) <= MAX_STORED_EMBEDDING_BYTES;
        let mut acc = CovarianceAccumulator::new(m);
        let mut stored = Vec::new();
        for start in (0..count).step_by(EMBED_CHUNK as usize) {
            let block = chunk(start)?;
            acc.add_rows(&block)?;
            if store {
                stored.push(block);
            }
        }
        let covariance = acc.finish(ridge)?;
        let mut scores = Vec::with_capacity(count as usize);
        if store {
            for block in &stored {
                score_rows(block, &covariance, &mut scores);
            }
        } else {
            for start in (0..count).step_by(EMBED_CHUNK as usize) {
                score_rows(&chunk(start)?, &covariance, &mut scores);
            }
        }
        Ok(Self { n, q, covariance, scores, model_hash: params_hash(params) })
    }

    /// Ranks in decreasing score order. Ties go to the lexicographically
    /// smaller sequence, or to a seeded hash order when `tie_seed` is set.
    pub fn visiting_order(&self, tie_seed: Option<u64>) -> Vec<u64> {
        let mut order: Vec<u64> = (0..self.scores.len() as u64).collect();
        let key = |r: u64| tie_seed.map_or(r, |s| derive_seed(s, r));
        order.sort_unstable_by(|&a, &b| {
            self.scores[b as usize]
                .total_cmp(&self.scores[a as usize])
                .then_with(|| key(a).cmp(&key(b)))
                .then_with(|| a.cmp(&b))
        });
        order
    }

    pub fn run(&self, tie_seed: Option<u64>) -> Result<Codebook> {
        let words = greedy(self.n, self.q, self.visiting_order(tie_seed));
        let provenance = Provenance { method: Method::Degs, seed: tie_seed, model_hash: Some(self.model_hash.clone()) };
        Codebook::new(self.n, self.q, words, provenance)
    }
}

/// Deep-embedding greedy search: repeatedly selects the remaining sequence
/// with the largest `u^T sigma^-1 u` and removes its radius-2 ball.
pub fn degs_search(n: usize, params: &ModelParams, ridge: Option<f64>, tie_seed: Option<u64>) -> Result<Codebook> {
    DegsSearch::prepare(n, params, ridge)?.run(tie_seed)
}
