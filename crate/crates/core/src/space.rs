//! The sequence space `A(n)` and Levenshtein balls inside it.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::levenshtein::distance_at_most;
use crate::seq::{check_alphabet, Sequence, MAX_LEN};

/// Default cap on `q^n` for exhaustive enumeration (`4^12`).
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 24;

/// Number of sequences in `A(n)`, failing if it exceeds `cap`.
pub fn space_size(n: usize, q: u8, cap: u64) -> Result<u64> {
    check_alphabet(q)?;
    if n > MAX_LEN {
        return Err(Error::LengthExceeded { len: n, max: MAX_LEN });
    }
    let count = (q as u128).pow(n as u32);
    if count > cap as u128 {
        return Err(Error::BudgetExceeded { count, cap });
    }
    Ok(count as u64)
}

/// All `q^n` sequences of length `n` in lexicographic order.
pub fn enumerate_sequences(
    n: usize,
    q: u8,
    cap: u64,
) -> Result<impl Iterator<Item = Sequence>> {
    let count = space_size(n, q, cap)?;
    Ok((0..count).map(move |r| Sequence::from_rank(r, n, q).expect("rank in range")))
}

/// Every sequence one insertion, deletion or substitution away from `s`.
/// Results may repeat.
pub fn single_edits(s: &Sequence) -> impl Iterator<Item = Sequence> + '_ {
    let n = s.len();
    let q = s.q();
    let dels = (0..n).map(move |i| s.deleted(i));
    let ins = (0..=n)
        .filter(move |_| n < MAX_LEN)
        .flat_map(move |i| (0..q).map(move |a| s.inserted(i, a)));
    let subs = (0..n).flat_map(move |i| {
        let cur = s.get(i);
        (0..q).filter(move |&a| a != cur).map(move |a| s.substituted(i, a))
    });
    dels.chain(ins).chain(subs)
}

/// The length-`n` sequences within Levenshtein distance `r` of `s`, `s`
/// included, sorted lexicographically.
///
/// Built by composing up to `r` single edits, keeping those of length `n`
/// and confirming each with an exact distance computation.
pub fn ball(s: &Sequence, r: usize, n: usize) -> Result<Vec<Sequence>> {
    if !(1..=2).contains(&r) {
        return Err(Error::InvalidConfig(format!("ball radius must be 1 or 2, got {r}")));
    }
    if s.len() + r > MAX_LEN || n > MAX_LEN {
        return Err(Error::LengthExceeded { len: s.len() + r, max: MAX_LEN });
    }
    let mut reached: HashSet<Sequence> = HashSet::from([*s]);
    let mut frontier = vec![*s];
    for _ in 0..r {
        let mut next = Vec::new();
        for x in &frontier {
            for y in single_edits(x) {
                if reached.insert(y) {
                    next.push(y);
                }
            }
        }
        frontier = next;
    }
    let mut out: Vec<Sequence> = reached
        .into_iter()
        .filter(|t| t.len() == n && distance_at_most(s, t, r).is_some())
        .collect();
    out.sort_unstable();
    Ok(out)
}

/// Calls `f` with the packed form of every same-length sequence within
/// distance 2 of `s` (including `s`). Values may repeat.
///
/// Same-length sequences at distance at most 2 are exactly those reachable by
/// at most two substitutions or by one deletion followed by one insertion, so
/// nothing else is generated.
pub fn for_each_in_ball2(s: &Sequence, mut f: impl FnMut(u64)) {
    let n = s.len();
    let q = s.q();
    f(s.packed());
    for i in 0..n {
        let ci = s.get(i);
        for a in (0..q).filter(|&a| a != ci) {
            let t = s.substituted(i, a);
            f(t.packed());
            for j in i + 1..n {
                let cj = s.get(j);
                for b in (0..q).filter(|&b| b != cj) {
                    f(t.substituted(j, b).packed());
                }
            }
        }
    }
    for i in 0..n {
        // Deleting anywhere inside a run gives the same word; take the run start.
        if i > 0 && s.get(i) == s.get(i - 1) {
            continue;
        }
        let d = s.deleted(i);
        for j in 0..n {
            for a in 0..q {
                f(d.inserted(j, a).packed());
            }
        }
    }
}
