//! Binary Varshamov-Tenengolts codes.

use super::{Codebook, Method, Provenance};
use crate::error::{Error, Result};
use crate::seq::Sequence;

/// `VT_0(n)`: binary words whose checksum `sum_i i * x_i` (positions from 1)
/// is divisible by `n + 1`.
pub fn vt_codebook(n: usize) -> Result<Codebook> {
    if n == 0 || n > 20 {
        return Err(Error::InvalidConfig(format!("VT length must be in 1..=20, got {n}")));
    }
    let words = (0..1u64 << n)
        .map(|r| Sequence::from_rank(r, n, 2).expect("rank in range"))
        .filter(|s| (0..n).map(|i| (i + 1) * s.get(i) as usize).sum::<usize>() % (n + 1) == 0)
        .collect();
    Codebook::new(n, 2, words, Provenance { method: Method::Vt, seed: None, model_hash: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::find_isolated;
    use crate::levenshtein::distance;

    #[test]
    fn small_lengths() {
        let words = |n| vt_codebook(n).unwrap().sorted().iter().map(|s| s.to_string()).collect::<Vec<_>>();
        assert_eq!(words(1), ["0"]);
        assert_eq!(words(3), ["000", "101"]);
        assert!(vt_codebook(0).is_err());
        assert!(!vt_codebook(3).unwrap().provenance.guarantees_distance_3());
    }

    #[test]
    fn size_bound_and_single_deletion_property() {
        for n in 1..=12 {
            let cb = vt_codebook(n).unwrap();
            assert!(cb.len() as f64 >= (1u64 << n) as f64 / (n + 1) as f64, "n={n}");
        }
        // distinct VT words never share a single-deletion result
        let cb = vt_codebook(8).unwrap();
        for (i, a) in cb.sorted().iter().enumerate() {
            for b in &cb.sorted()[i + 1..] {
                assert!(distance(a, b) >= 2);
            }
        }
    }

    #[test]
    fn isolated_words_match_scan() {
        // Radius-2 balls around VT_0(n) cover all of {0,1}^n for these lengths.
        for n in [6, 10] {
            let cb = vt_codebook(n).unwrap();
            let scan: Vec<Sequence> = (0..1u64 << n)
                .map(|r| Sequence::from_rank(r, n, 2).unwrap())
                .filter(|s| cb.sorted().iter().all(|c| distance(c, s) > 2))
                .collect();
            let found = find_isolated(&cb).unwrap();
            assert_eq!(found, scan);
            assert!(found.is_empty(), "n={n}: {} isolated", found.len());
        }
    }
}
