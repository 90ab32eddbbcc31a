//! Single edits and the insertion/deletion/substitution channel.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::seq::{Sequence, MAX_LEN};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditKind {
    Insertion,
    Deletion,
    Substitution,
}

/// One edit at a position. Insertions may target `position == len`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EditOp {
    pub kind: EditKind,
    pub position: usize,
    pub symbol: Option<u8>,
}

impl EditOp {
    /// Applies the edit, validating position and symbol.
    pub fn apply(&self, s: &Sequence) -> Result<Sequence> {
        let n = s.len();
        match (self.kind, self.symbol) {
            (EditKind::Deletion, None) if self.position < n => Ok(s.deleted(self.position)),
            (EditKind::Insertion, Some(a)) if self.position <= n && a < s.q() => {
                if n >= MAX_LEN {
                    return Err(Error::LengthExceeded { len: n + 1, max: MAX_LEN });
                }
                Ok(s.inserted(self.position, a))
            }
            (EditKind::Substitution, Some(a))
                if self.position < n && a < s.q() && s.get(self.position) != a =>
            {
                Ok(s.substituted(self.position, a))
            }
            _ => Err(Error::InvalidEdit(format!("{self:?} on {s}"))),
        }
    }

    /// Draws a uniformly random edit: kind uniform over the kinds that apply,
    /// then position and symbol uniform over the admissible choices.
    pub fn random<R: Rng + ?Sized>(s: &Sequence, rng: &mut R) -> Self {
        let n = s.len();
        let q = s.q();
        let mut kinds = [EditKind::Insertion; 3];
        let mut count = 0;
        if n < MAX_LEN {
            kinds[count] = EditKind::Insertion;
            count += 1;
        }
        if n > 0 {
            kinds[count] = EditKind::Deletion;
            kinds[count + 1] = EditKind::Substitution;
            count += 2;
        }
        let kind = kinds[rng.gen_range(0..count)];
        match kind {
            EditKind::Insertion => EditOp {
                kind,
                position: rng.gen_range(0..=n),
                symbol: Some(rng.gen_range(0..q)),
            },
            EditKind::Deletion => EditOp { kind, position: rng.gen_range(0..n), symbol: None },
            EditKind::Substitution => {
                let position = rng.gen_range(0..n);
                let cur = s.get(position);
                let pick = rng.gen_range(0..q - 1);
                let symbol = if pick >= cur { pick + 1 } else { pick };
                EditOp { kind, position, symbol: Some(symbol) }
            }
        }
    }
}

/// Applies one uniformly random edit; the result is at distance exactly 1.
pub fn apply_random_edit<R: Rng + ?Sized>(s: &Sequence, rng: &mut R) -> Sequence {
    EditOp::random(s, rng).apply(s).expect("random edit is admissible")
}

/// Per-position insertion, deletion and substitution probabilities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub p_ins: f64,
    pub p_del: f64,
    pub p_sub: f64,
    pub seed: u64,
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        let ps = [self.p_ins, self.p_del, self.p_sub];
        if ps.iter().any(|p| !(0.0..=1.0).contains(p)) || ps.iter().sum::<f64>() > 1.0 + 1e-12 {
            return Err(Error::InvalidConfig(format!("channel probabilities {ps:?}")));
        }
        Ok(())
    }
}

/// Passes a symbol stream through the channel using `rng`.
///
/// At each input position: with `p_ins` a random symbol is inserted before
/// the current one (which is then kept), with `p_del` the symbol is dropped,
/// with `p_sub` it is replaced by a different symbol, otherwise copied.
pub fn ids_channel_with<R: Rng + ?Sized>(input: &[u8], q: u8, cfg: &ChannelConfig, rng: &mut R) -> Vec<u8> {
    let mut out = Vec::with_capacity(input.len() + input.len() / 8 + 1);
    for &x in input {
        let u: f64 = rng.gen();
        if u < cfg.p_ins {
            out.push(rng.gen_range(0..q));
            out.push(x);
        } else if u < cfg.p_ins + cfg.p_del {
        } else if u < cfg.p_ins + cfg.p_del + cfg.p_sub {
            let pick = rng.gen_range(0..q - 1);
            out.push(if pick >= x { pick + 1 } else { pick });
        } else {
            out.push(x);
        }
    }
    out
}

/// Passes a sequence through the channel seeded by `cfg.seed`.
pub fn ids_channel(s: &Sequence, cfg: &ChannelConfig) -> Result<Sequence> {
    cfg.validate()?;
    let mut rng = rng_from_seed(cfg.seed);
    let out = ids_channel_with(&s.symbols(), s.q(), cfg, &mut rng);
    Sequence::new(&out, s.q())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levenshtein::distance;
    use crate::rng::substream;

    fn s(text: &str) -> Sequence {
        text.parse().unwrap()
    }

    #[test]
    fn explicit_edits() {
        let x = s("0123");
        let sub = EditOp { kind: EditKind::Substitution, position: 0, symbol: Some(0) };
        assert!(sub.apply(&x).is_err());
        let ins = EditOp { kind: EditKind::Insertion, position: 4, symbol: Some(1) };
        assert_eq!(ins.apply(&x).unwrap(), s("01231"));
        let del = EditOp { kind: EditKind::Deletion, position: 4, symbol: None };
        assert!(del.apply(&x).is_err());
    }

    #[test]
    fn random_edit_is_one_away() {
        let mut rng = substream(3, 0);
        for i in 0..100_000 {
            let n = 1 + i % 11;
            let v: Vec<u8> = (0..n).map(|_| rng.gen_range(0..4)).collect();
            let x = Sequence::new(&v, 4).unwrap();
            let y = apply_random_edit(&x, &mut rng);
            assert!((n - 1..=n + 1).contains(&y.len()));
            assert_eq!(distance(&x, &y), 1, "{x} -> {y}");
        }
    }

    #[test]
    fn random_edit_is_reproducible() {
        let x = s("012301230");
        let a: Vec<Sequence> = {
            let mut rng = rng_from_seed(5);
            (0..50).map(|_| apply_random_edit(&x, &mut rng)).collect()
        };
        let mut rng = rng_from_seed(5);
        let b: Vec<Sequence> = (0..50).map(|_| apply_random_edit(&x, &mut rng)).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn channel_extremes() {
        let x = s("0123012301");
        let clean = ChannelConfig { p_ins: 0.0, p_del: 0.0, p_sub: 0.0, seed: 1 };
        assert_eq!(ids_channel(&x, &clean).unwrap(), x);
        let erase = ChannelConfig { p_del: 1.0, ..clean };
        assert!(ids_channel(&x, &erase).unwrap().is_empty());
        let bad = ChannelConfig { p_ins: 0.6, p_del: 0.6, ..clean };
        assert!(ids_channel(&x, &bad).is_err());
    }

    #[test]
    fn channel_mean_length() {
        let cfg = ChannelConfig { p_ins: 0.05, p_del: 0.02, p_sub: 0.03, seed: 9 };
        let input = vec![1u8; 20];
        let mut rng = rng_from_seed(cfg.seed);
        let trials = 10_000;
        let lens: Vec<f64> = (0..trials)
            .map(|_| ids_channel_with(&input, 4, &cfg, &mut rng).len() as f64)
            .collect();
        let mean = lens.iter().sum::<f64>() / trials as f64;
        let var = lens.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
        let se = (var / trials as f64).sqrt();
        let expect = 20.0 * (1.0 + cfg.p_ins - cfg.p_del);
        assert!((mean - expect).abs() < 3.0 * se, "mean {mean} expected {expect} se {se}");
    }
}
