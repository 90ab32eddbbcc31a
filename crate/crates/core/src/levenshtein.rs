//! Exact Levenshtein distance: full dynamic programming and a banded variant
//! that gives up as soon as the distance is known to exceed a bound.

use crate::seq::{Sequence, MAX_LEN};

/// Levenshtein distance between two sequences.
pub fn distance(s: &Sequence, t: &Sequence) -> usize {
    let (mut sb, mut tb) = ([0u8; MAX_LEN], [0u8; MAX_LEN]);
    distance_slices(s.unpack_into(&mut sb), t.unpack_into(&mut tb))
}

/// Levenshtein distance between two symbol slices of any length.
pub fn distance_slices(s: &[u8], t: &[u8]) -> usize {
    if s.is_empty() {
        return t.len();
    }
    if t.is_empty() {
        return s.len();
    }
    let mut prev: Vec<usize> = (0..=t.len()).collect();
    let mut cur = vec![0usize; t.len() + 1];
    for (i, &a) in s.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &b) in t.iter().enumerate() {
            let sub = prev[j] + usize::from(a != b);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[t.len()]
}

/// Returns the distance if it is at most `bound`, `None` otherwise.
///
/// Only the diagonal band `|i - j| <= bound` is evaluated and the scan stops
/// at the first row whose minimum already exceeds `bound`.
pub fn distance_at_most(s: &Sequence, t: &Sequence, bound: usize) -> Option<usize> {
    let (a, b) = (s.len(), t.len());
    if a.abs_diff(b) > bound {
        return None;
    }
    if bound == 0 {
        return (s == t).then_some(0);
    }
    let (mut sb, mut tb) = ([0u8; MAX_LEN], [0u8; MAX_LEN]);
    let s = s.unpack_into(&mut sb);
    let t = t.unpack_into(&mut tb);

    let big = bound + 1;
    let mut prev = [big; MAX_LEN + 2];
    let mut cur = [big; MAX_LEN + 2];
    for (j, slot) in prev.iter_mut().enumerate().take(b.min(bound) + 1) {
        *slot = j;
    }
    for i in 1..=a {
        let lo = i.saturating_sub(bound);
        let hi = b.min(i + bound);
        if lo > 0 {
            cur[lo - 1] = big;
        }
        let mut row_min = big;
        for j in lo..=hi {
            let v = if j == 0 {
                i
            } else {
                let diag = prev[j - 1] + usize::from(s[i - 1] != t[j - 1]);
                diag.min(prev[j] + 1).min(cur[j - 1] + 1)
            };
            let v = v.min(big);
            cur[j] = v;
            row_min = row_min.min(v);
        }
        if row_min > bound {
            return None;
        }
        if hi < b {
            cur[hi + 1] = big;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let d = prev[b];
    (d <= bound).then_some(d)
}
