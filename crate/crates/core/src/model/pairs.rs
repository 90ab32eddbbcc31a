//! Training pair generation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::edit::apply_random_edit;
use crate::levenshtein::distance;
use crate::seq::Sequence;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairCategory {
    /// One random edit of the anchor.
    OneEdit,
    /// Two random edits of the anchor.
    TwoEdits,
    /// An independent uniform sequence of the same length.
    Independent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrainingPair {
    pub s: Sequence,
    pub t: Sequence,
    pub d: usize,
}

pub(crate) fn uniform_sequence<R: Rng + ?Sized>(n: usize, q: u8, rng: &mut R) -> Sequence {
    let bits: u64 = if n == 32 { rng.gen() } else { rng.gen_range(0..1u64 << (2 * n)) };
    if q == 4 {
        Sequence::from_rank(bits, n, 4).expect("in range")
    } else {
        let v: Vec<u8> = (0..n).map(|_| rng.gen_range(0..q)).collect();
        Sequence::new(&v, q).expect("valid")
    }
}

/// Draws an anchor uniformly from `A(n)` and a partner of the given category,
/// returning the pair with its exact Levenshtein distance (never 0).
pub fn sample_training_pair<R: Rng + ?Sized>(n: usize, q: u8, category: PairCategory, rng: &mut R) -> TrainingPair {
    loop {
        let s = uniform_sequence(n, q, rng);
        let (t, d) = match category {
            PairCategory::OneEdit => (apply_random_edit(&s, rng), 1),
            PairCategory::TwoEdits => {
                let t = apply_random_edit(&apply_random_edit(&s, rng), rng);
                let d = distance(&s, &t);
                (t, d)
            }
            PairCategory::Independent => {
                let t = uniform_sequence(n, q, rng);
                let d = distance(&s, &t);
                (t, d)
            }
        };
        if d > 0 {
            return TrainingPair { s, t, d };
        }
    }
}
