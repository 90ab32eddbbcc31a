//! End-to-end demo: message bits to concatenated codewords, through the IDS
//! channel, then greedy re-segmentation and per-segment decoding.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::codebook::Codebook;
use crate::edit::{ids_channel_with, ChannelConfig};
use crate::error::{Error, Result};
use crate::seq::Sequence;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentReport {
    pub sent_index: usize,
    pub decoded_index: Option<usize>,
    pub window_start: usize,
    pub window_len: usize,
}

impl SegmentReport {
    pub fn ok(&self) -> bool {
        self.decoded_index == Some(self.sent_index)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelReport {
    pub bits_per_segment: usize,
    pub message_bits: usize,
    pub sent_symbols: usize,
    pub received_symbols: usize,
    pub segments: Vec<SegmentReport>,
    pub segment_failures: usize,
    pub recovered: bool,
}

fn bits_to_index(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

/// Sends `bits` over the channel and decodes them back.
///
/// Each segment carries `floor(log2 |C|)` bits (the last one zero-padded).
/// The receiver walks the stream and, for each expected segment, tries
/// windows of length `n`, `n - 1` and `n + 1`. A window is scored by its own
/// decoded distance plus that of the following length-`n` window; the lowest
/// score wins, ties preferring length `n`. `decode`
/// returns a lexicographic codebook index and its distance, or `None`.
pub fn simulate_message<R: Rng + ?Sized>(
    bits: &[bool],
    cb: &Codebook,
    channel: &ChannelConfig,
    rng: &mut R,
    decode: impl Fn(&Sequence) -> Result<Option<(usize, usize)>>,
) -> Result<ChannelReport> {
    channel.validate()?;
    if cb.len() < 2 {
        return Err(Error::InvalidConfig("codebook needs at least 2 words".into()));
    }
    if bits.is_empty() {
        return Err(Error::EmptyInput);
    }
    let b = (usize::BITS - 1 - cb.len().leading_zeros()) as usize;
    let n = cb.n();
    let sent: Vec<usize> = bits
        .chunks(b)
        .map(|chunk| {
            let mut padded = chunk.to_vec();
            padded.resize(b, false);
            bits_to_index(&padded)
        })
        .collect();
    let mut stream = Vec::with_capacity(sent.len() * n);
    for &i in &sent {
        stream.extend(cb.encode(i)?.symbols());
    }
    let received = ids_channel_with(&stream, cb.q(), channel, rng);
    let segments = decode_stream(&received, &sent, cb, decode)?;
    let segment_failures = segments.iter().filter(|s| !s.ok()).count();
    Ok(ChannelReport {
        bits_per_segment: b,
        message_bits: bits.len(),
        sent_symbols: stream.len(),
        received_symbols: received.len(),
        segments,
        segment_failures,
        recovered: segment_failures == 0,
    })
}

/// Greedy re-segmentation of a received stream expected to carry
/// `sent.len()` codewords, decoding each window.
pub fn decode_stream(
    received: &[u8],
    sent: &[usize],
    cb: &Codebook,
    decode: impl Fn(&Sequence) -> Result<Option<(usize, usize)>>,
) -> Result<Vec<SegmentReport>> {
    let n = cb.n();
    let mut segments = Vec::with_capacity(sent.len());
    let mut pos = 0;
    for (j, &want) in sent.iter().enumerate() {
        let left = received.len().saturating_sub(pos);
        let last = j + 1 == sent.len();
        let lengths: Vec<usize> = if last && left.abs_diff(n) <= 1 {
            vec![left]
        } else {
            [n, n - 1, n + 1].into_iter().filter(|&l| l >= 1 && l <= left).collect()
        };
        // best as (score, window length, index)
        let mut best: Option<(usize, usize, usize)> = None;
        for &len in &lengths {
            let window = Sequence::new(&received[pos..pos + len], cb.q())?;
            if let Some((index, d)) = decode(&window)? {
                // One symbol of look-ahead: a misplaced boundary usually
                // spoils the next window.
                let next = if last { 0 } else { next_window_cost(received, pos + len, n, j + 2 == sent.len(), cb, &decode)? };
                let key = (d + next, len.abs_diff(n));
                if best.is_none_or(|(bs, bl, _)| key < (bs, bl.abs_diff(n))) {
                    best = Some((d + next, len, index));
                }
            }
        }
        let (decoded_index, window_len) = match best {
            Some((_, len, index)) => (Some(index), len),
            None => (None, n.min(left)),
        };
        segments.push(SegmentReport { sent_index: want, decoded_index, window_start: pos, window_len });
        pos += window_len;
    }
    Ok(segments)
}

/// Distance at which the window starting at `pos` decodes (2 if it does not).
fn next_window_cost(
    received: &[u8],
    pos: usize,
    n: usize,
    is_last: bool,
    cb: &Codebook,
    decode: &impl Fn(&Sequence) -> Result<Option<(usize, usize)>>,
) -> Result<usize> {
    let left = received.len().saturating_sub(pos);
    let len = if is_last && left.abs_diff(n) <= 1 { left } else { n.min(left) };
    if len == 0 {
        return Ok(2);
    }
    let window = Sequence::new(&received[pos..pos + len], cb.q())?;
    Ok(decode(&window)?.map_or(2, |(_, d)| d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::random_search;
    use crate::decoder::{brute_force_correct, Outcome};
    use crate::rng::rng_from_seed;

    fn brute(cb: &Codebook) -> impl Fn(&Sequence) -> Result<Option<(usize, usize)>> + '_ {
        move |s| {
            Ok(match brute_force_correct(s, cb).outcome {
                Outcome::Corrected { index, distance } => Some((index, distance)),
                Outcome::Failed(_) => None,
            })
        }
    }

    fn message(len: usize, seed: u64) -> Vec<bool> {
        let mut rng = rng_from_seed(seed);
        (0..len).map(|_| rng.gen()).collect()
    }

    #[test]
    fn noiseless_channel_recovers() {
        let cb = random_search(6, 4, 3).unwrap();
        let clean = ChannelConfig { p_ins: 0.0, p_del: 0.0, p_sub: 0.0, seed: 0 };
        let bits = message(200, 1);
        let r = simulate_message(&bits, &cb, &clean, &mut rng_from_seed(0), brute(&cb)).unwrap();
        assert!(r.recovered);
        assert_eq!(r.sent_symbols, r.received_symbols);
        assert_eq!(r.segments.len(), 200usize.div_ceil(r.bits_per_segment));
    }

    #[test]
    fn one_edit_in_one_segment_recovers() {
        let cb = random_search(7, 4, 3).unwrap();
        let sent: Vec<usize> = (0..12).map(|i| (i * 37) % cb.len()).collect();
        let mut clean = Vec::new();
        for &i in &sent {
            clean.extend(cb.encode(i).unwrap().symbols());
        }
        for seg in [0, 5, 11] {
            for offset in 0..7 {
                let at = seg * 7 + offset;
                let mut ins = clean.clone();
                ins.insert(at, (clean[at] + 1) % 4);
                let mut del = clean.clone();
                del.remove(at);
                let mut sub = clean.clone();
                sub[at] = (clean[at] + 2) % 4;
                for stream in [ins, del, sub] {
                    let report = decode_stream(&stream, &sent, &cb, brute(&cb)).unwrap();
                    assert!(report.iter().all(SegmentReport::ok), "segment {seg} offset {offset}");
                }
            }
        }
    }

    #[test]
    fn reports_are_seeded() {
        let cb = random_search(6, 4, 3).unwrap();
        let noisy = ChannelConfig { p_ins: 0.0, p_del: 0.0, p_sub: 0.02, seed: 0 };
        let bits = message(300, 4);
        let a = simulate_message(&bits, &cb, &noisy, &mut rng_from_seed(9), brute(&cb)).unwrap();
        let b = simulate_message(&bits, &cb, &noisy, &mut rng_from_seed(9), brute(&cb)).unwrap();
        assert_eq!(a, b);
    }
}
