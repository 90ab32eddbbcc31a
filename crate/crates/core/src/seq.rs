//! Packed q-ary sequences.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Longest sequence a [`Sequence`] can hold.
pub const MAX_LEN: usize = 32;

/// A word over the alphabet `{0, .., q-1}` with `q` in `{2, 4}`.
///
/// Symbols are packed two bits each, first symbol in the most significant
/// position, so for equal lengths the packed value orders exactly like the
/// lexicographic order of the symbols. The empty sequence is representable
/// because channel simulation can delete every symbol.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Sequence {
    packed: u64,
    len: u8,
    q: u8,
}

#[inline]
fn low_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

#[inline]
fn shr(x: u64, bits: u32) -> u64 {
    if bits >= 64 {
        0
    } else {
        x >> bits
    }
}

#[inline]
fn shl(x: u64, bits: u32) -> u64 {
    if bits >= 64 {
        0
    } else {
        x << bits
    }
}

pub(crate) fn check_alphabet(q: u8) -> Result<()> {
    if q == 2 || q == 4 {
        Ok(())
    } else {
        Err(Error::UnsupportedAlphabet(q))
    }
}

impl Sequence {
    /// Builds a sequence from explicit symbols.
    pub fn new(symbols: &[u8], q: u8) -> Result<Self> {
        check_alphabet(q)?;
        if symbols.len() > MAX_LEN {
            return Err(Error::LengthExceeded { len: symbols.len(), max: MAX_LEN });
        }
        let mut packed = 0u64;
        for &s in symbols {
            if s >= q {
                return Err(Error::InvalidSymbol { symbol: s, q });
            }
            packed = (packed << 2) | s as u64;
        }
        Ok(Self { packed, len: symbols.len() as u8, q })
    }

    /// The empty sequence over alphabet `q`.
    pub fn empty(q: u8) -> Self {
        Self { packed: 0, len: 0, q }
    }

    /// Builds the `rank`-th sequence of `A(n)` in lexicographic order.
    pub fn from_rank(rank: u64, n: usize, q: u8) -> Result<Self> {
        check_alphabet(q)?;
        if n > MAX_LEN {
            return Err(Error::LengthExceeded { len: n, max: MAX_LEN });
        }
        if q == 4 {
            if n < 32 && rank >> (2 * n) != 0 {
                return Err(Error::InvalidConfig(format!("rank {rank} out of range for n={n}")));
            }
            return Ok(Self { packed: rank, len: n as u8, q });
        }
        if n < 64 && rank >> n != 0 {
            return Err(Error::InvalidConfig(format!("rank {rank} out of range for n={n}")));
        }
        let mut packed = 0u64;
        for i in (0..n).rev() {
            packed = (packed << 2) | ((rank >> i) & 1);
        }
        Ok(Self { packed, len: n as u8, q })
    }

    #[allow(dead_code)]
    pub(crate) fn from_packed(packed: u64, len: usize, q: u8) -> Self {
        debug_assert!(len <= MAX_LEN);
        Self { packed: packed & low_mask(2 * len as u32), len: len as u8, q }
    }

    /// Lexicographic rank of this sequence within `A(len)`.
    pub fn rank(&self) -> u64 {
        if self.q == 4 {
            return self.packed;
        }
        (0..self.len()).fold(0u64, |acc, i| (acc << 1) | self.get(i) as u64)
    }

    /// Packed representation: two bits per symbol, first symbol highest.
    pub fn packed(&self) -> u64 {
        self.packed
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn q(&self) -> u8 {
        self.q
    }

    /// Symbol at position `i`.
    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        debug_assert!(i < self.len());
        ((self.packed >> (2 * (self.len() - 1 - i))) & 3) as u8
    }

    pub fn symbols(&self) -> Vec<u8> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }

    /// Unpacks the symbols into `buf`, returning the filled prefix.
    #[inline]
    pub fn unpack_into<'a>(&self, buf: &'a mut [u8; MAX_LEN]) -> &'a [u8] {
        let n = self.len();
        for (i, slot) in buf.iter_mut().take(n).enumerate() {
            *slot = self.get(i);
        }
        &buf[..n]
    }

    /// Sequence with position `i` removed.
    pub fn deleted(&self, i: usize) -> Self {
        debug_assert!(i < self.len());
        let n = self.len() as u32;
        let i = i as u32;
        let tail_bits = 2 * (n - 1 - i);
        let head = shr(self.packed, 2 * (n - i));
        let tail = self.packed & low_mask(tail_bits);
        Self { packed: shl(head, tail_bits) | tail, len: self.len - 1, q: self.q }
    }

    /// Sequence with `symbol` inserted before position `i` (`i == len` appends).
    pub fn inserted(&self, i: usize, symbol: u8) -> Self {
        debug_assert!(i <= self.len() && self.len() < MAX_LEN && symbol < self.q);
        let n = self.len() as u32;
        let i = i as u32;
        let tail_bits = 2 * (n - i);
        let head = shr(self.packed, tail_bits);
        let tail = self.packed & low_mask(tail_bits);
        let packed = shl((head << 2) | symbol as u64, tail_bits) | tail;
        Self { packed, len: self.len + 1, q: self.q }
    }

    /// Sequence with position `i` replaced by `symbol`.
    pub fn substituted(&self, i: usize, symbol: u8) -> Self {
        debug_assert!(i < self.len() && symbol < self.q);
        let shift = 2 * (self.len() - 1 - i);
        let packed = (self.packed & !(3u64 << shift)) | ((symbol as u64) << shift);
        Self { packed, len: self.len, q: self.q }
    }

    /// Parses a line of ASCII digits.
    pub fn parse(text: &str, q: u8) -> Result<Self> {
        let symbols = text
            .bytes()
            .map(|b| match b {
                b'0'..=b'9' => Ok(b - b'0'),
                _ => Err(Error::InvalidSymbol { symbol: b, q }),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(&symbols, q)
    }
}

impl Ord for Sequence {
    fn cmp(&self, other: &Self) -> Ordering {
        let common = self.len.min(other.len) as u32;
        let a = shr(self.packed, 2 * (self.len as u32 - common));
        let b = shr(other.packed, 2 * (other.len as u32 - common));
        a.cmp(&b).then(self.len.cmp(&other.len)).then(self.q.cmp(&other.q))
    }
}

impl PartialOrd for Sequence {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            write!(f, "{}", self.get(i))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for Sequence {
    type Err = Error;

    /// Parses a 4-ary sequence; use [`Sequence::parse`] for binary ones.
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s, 4)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> Sequence {
        text.parse().unwrap()
    }

    #[test]
    fn rejects_out_of_alphabet() {
        assert!(matches!(Sequence::new(&[0, 4], 4), Err(Error::InvalidSymbol { .. })));
        assert!(matches!(Sequence::parse("012", 2), Err(Error::InvalidSymbol { .. })));
        assert!(matches!(Sequence::new(&[0; 33], 4), Err(Error::LengthExceeded { .. })));
        assert!(Sequence::new(&[0], 3).is_err());
    }

    #[test]
    fn edits_on_packed_form() {
        let x = s("0123");
        assert_eq!(x.deleted(0), s("123"));
        assert_eq!(x.deleted(3), s("012"));
        assert_eq!(x.inserted(0, 3), s("30123"));
        assert_eq!(x.inserted(4, 2), s("01232"));
        assert_eq!(x.inserted(2, 0), s("01023"));
        assert_eq!(x.substituted(1, 3), s("0323"));
    }

    #[test]
    fn full_length_edits() {
        let long = Sequence::new(&[3; 32], 4).unwrap();
        assert_eq!(long.deleted(5).symbols(), vec![3; 31]);
        let short = Sequence::new(&[1; 31], 4).unwrap();
        let grown = short.inserted(0, 2);
        assert_eq!(grown.len(), 32);
        assert_eq!(grown.get(0), 2);
        assert_eq!(grown.get(31), 1);
    }

    #[test]
    fn ordering_is_lexicographic() {
        let mut v = vec![s("10"), s("0"), s("01"), s("003"), s("1")];
        v.sort();
        let text: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        assert_eq!(text, ["0", "003", "01", "1", "10"]);
    }

    #[test]
    fn binary_rank_round_trip() {
        for r in 0..64 {
            let x = Sequence::from_rank(r, 6, 2).unwrap();
            assert_eq!(x.rank(), r);
            assert!(x.symbols().iter().all(|&b| b < 2));
        }
        assert_eq!(Sequence::from_rank(5, 3, 2).unwrap().to_string(), "101");
    }
}
