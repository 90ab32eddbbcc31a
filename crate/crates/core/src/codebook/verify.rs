//! Minimum-distance and maximality checks.

use std::collections::HashSet;

use super::Codebook;
use crate::error::Result;
use crate::levenshtein::distance_at_most;
use crate::seq::Sequence;
use crate::space::{enumerate_sequences, for_each_in_ball2, DEFAULT_ENUMERATION_CAP};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinDistanceReport {
    pub ok: bool,
    /// A pair closer than the required distance, with its distance.
    pub witness: Option<(Sequence, Sequence, usize)>,
}

/// Checks that every pair of codewords is at distance `>= dmin`.
///
/// For `dmin <= 3` and same-length words this probes each codeword's
/// radius-2 ball against the codeword set; otherwise it compares all pairs
/// with a banded distance bounded by `dmin - 1`.
pub fn verify_min_distance(cb: &Codebook, dmin: usize) -> MinDistanceReport {
    if dmin <= 1 {
        return MinDistanceReport { ok: true, witness: None };
    }
    let words = cb.selection_order();
    if dmin == 3 && cb.n() <= 16 {
        let set: HashSet<u64> = words.iter().map(|w| w.packed()).collect();
        for w in words {
            let mut hit = None;
            for_each_in_ball2(w, |p| {
                if hit.is_none() && p != w.packed() && set.contains(&p) {
                    hit = Some(p);
                }
            });
            if let Some(p) = hit {
                let other = *words.iter().find(|x| x.packed() == p).expect("member of set");
                let d = distance_at_most(w, &other, 2).expect("inside radius-2 ball");
                return MinDistanceReport { ok: false, witness: Some((*w, other, d)) };
            }
        }
        return MinDistanceReport { ok: true, witness: None };
    }
    verify_pairwise(words, dmin)
}

pub(crate) fn verify_pairwise(words: &[Sequence], dmin: usize) -> MinDistanceReport {
    for (i, a) in words.iter().enumerate() {
        for b in &words[i + 1..] {
            if let Some(d) = distance_at_most(a, b, dmin - 1) {
                return MinDistanceReport { ok: false, witness: Some((*a, *b, d)) };
            }
        }
    }
    MinDistanceReport { ok: true, witness: None }
}

/// Every length-`n` sequence at distance more than 2 from all codewords.
/// Empty exactly when no sequence can be added to a distance-3 codebook.
pub fn find_isolated(cb: &Codebook) -> Result<Vec<Sequence>> {
    let covered = covered_set(cb)?;
    Ok(enumerate_sequences(cb.n(), cb.q(), DEFAULT_ENUMERATION_CAP)?
        .filter(|s| !covered[s.packed() as usize])
        .collect())
}

/// Flags indexed by packed value: within distance 2 of some codeword.
pub(crate) fn covered_set(cb: &Codebook) -> Result<Vec<bool>> {
    crate::space::space_size(cb.n(), cb.q(), DEFAULT_ENUMERATION_CAP)?;
    let mut covered = vec![false; 1usize << (2 * cb.n())];
    for w in cb.selection_order() {
        for_each_in_ball2(w, |p| covered[p as usize] = true);
    }
    Ok(covered)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::{Method, Provenance};
    use crate::levenshtein::distance;

    fn book(words: &[&str]) -> Codebook {
        let seqs = words.iter().map(|w| w.parse().unwrap()).collect();
        Codebook::new(words[0].len(), 4, seqs, Provenance { method: Method::Other, seed: None, model_hash: None }).unwrap()
    }

    #[test]
    fn small_books() {
        assert!(verify_min_distance(&book(&["0123"]), 3).ok);
        let r = verify_min_distance(&book(&["0000", "0001"]), 3);
        assert!(!r.ok);
        let (a, b, d) = r.witness.unwrap();
        assert_eq!(d, 1);
        assert_eq!(distance(&a, &b), 1);
        assert!(!verify_min_distance(&book(&["0000", "0011", "3333"]), 3).ok);
        assert!(verify_min_distance(&book(&["0000", "0111", "3333"]), 3).ok);
        assert!(!verify_min_distance(&book(&["0000", "0111", "3333"]), 4).ok);
    }

    #[test]
    fn ball_probe_agrees_with_pairwise() {
        let all: Vec<Sequence> = enumerate_sequences(5, 4, DEFAULT_ENUMERATION_CAP).unwrap().collect();
        for stride in [37, 53, 101, 131, 211, 307] {
            let words: Vec<Sequence> = all.iter().step_by(stride).copied().collect();
            let cb = Codebook::new(5, 4, words.clone(), Provenance { method: Method::Other, seed: None, model_hash: None }).unwrap();
            assert_eq!(verify_min_distance(&cb, 3).ok, verify_pairwise(&words, 3).ok, "stride {stride}");
        }
    }

    #[test]
    fn isolated_after_removal() {
        let cb = crate::codebook::random_search(5, 4, 7).unwrap();
        assert!(find_isolated(&cb).unwrap().is_empty());
        let mut words = cb.selection_order().to_vec();
        let gone = words.remove(3);
        let smaller = Codebook::new(5, 4, words.clone(), cb.provenance.clone()).unwrap();
        let isolated = find_isolated(&smaller).unwrap();
        assert!(isolated.contains(&gone));
        for s in &isolated {
            assert!(words.iter().all(|w| distance(w, s) > 2));
        }
        let iso: HashSet<Sequence> = isolated.into_iter().collect();
        for s in enumerate_sequences(5, 4, DEFAULT_ENUMERATION_CAP).unwrap() {
            let near = words.iter().any(|w| distance(w, &s) <= 2);
            assert_eq!(near, !iso.contains(&s));
        }
    }
}
