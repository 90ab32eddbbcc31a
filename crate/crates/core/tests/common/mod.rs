//! Reference implementations shared by the integration tests. They are kept
//! deliberately naive so they can serve as oracles for the library code.
#![allow(dead_code)]

use dodo_core::model::{
    batch_loss_value, loss_and_gradient, sample_training_pair, LossKind, ModelConfig, ModelParams, PairCategory,
    TrainingPair,
};
use dodo_core::rng::rng_from_seed;
use dodo_core::Sequence;
use rand::Rng;

/// Textbook recursion on the first symbols.
pub fn naive_distance(a: &[u8], b: &[u8]) -> usize {
    match (a.split_first(), b.split_first()) {
        (None, _) => b.len(),
        (_, None) => a.len(),
        (Some((x, ra)), Some((y, rb))) => {
            if x == y {
                return naive_distance(ra, rb);
            }
            1 + naive_distance(ra, b).min(naive_distance(a, rb)).min(naive_distance(ra, rb))
        }
    }
}

/// Full Wagner-Fischer table.
pub fn table_distance(a: &[u8], b: &[u8]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

pub fn random_symbols(rng: &mut impl Rng, len: usize, q: u8) -> Vec<u8> {
    (0..len).map(|_| rng.gen_range(0..q)).collect()
}

pub fn seq(symbols: &[u8], q: u8) -> Sequence {
    Sequence::new(symbols, q).unwrap()
}

/// Every length-`n` sequence within distance `r` of `s`, by scanning `q^n`.
pub fn scan_ball(s: &[u8], r: usize, n: usize, q: u8) -> Vec<Vec<u8>> {
    let total = (q as u64).pow(n as u32);
    let mut out = Vec::new();
    for rank in 0..total {
        let mut t = vec![0u8; n];
        let mut x = rank;
        for slot in t.iter_mut().rev() {
            *slot = (x % q as u64) as u8;
            x /= q as u64;
        }
        if table_distance(s, &t) <= r {
            out.push(t);
        }
    }
    out
}

pub fn tiny_config() -> ModelConfig {
    ModelConfig { q: 4, m: 4, layers: 2, channels: 4, kernel: 3, max_len: 7 }
}

fn gradient_batch(seed: u64) -> Vec<TrainingPair> {
    let mut rng = rng_from_seed(seed);
    let mut pairs = Vec::new();
    for cat in [PairCategory::OneEdit, PairCategory::TwoEdits, PairCategory::Independent] {
        for _ in 0..3 {
            pairs.push(sample_training_pair(5, 4, cat, &mut rng));
        }
    }
    pairs
}

/// Per-tensor comparison of backprop against central differences.
pub struct TensorCheck {
    pub name: String,
    pub backprop_norm: f64,
    pub fd_norm: f64,
    pub relative_error: f64,
}

impl TensorCheck {
    /// A constant shift before batch normalization has zero true gradient;
    /// such tensors pass when both sides are round-off.
    pub fn passes(&self, tol: f64) -> bool {
        if self.name == "proj.bias" {
            self.backprop_norm < 1e-12 && self.fd_norm < 1e-7
        } else {
            self.relative_error < tol
        }
    }
}

pub fn gradient_check(kind: LossKind, seed: u64) -> Vec<TensorCheck> {
    let params = ModelParams::init(tiny_config(), seed).unwrap();
    let pairs = gradient_batch(seed + 100);
    let (_, grad) = loss_and_gradient(&params, &pairs, kind).unwrap();
    let h = 1e-6;
    let mut out = Vec::new();
    for (name, range) in params.layout().tensors() {
        let (mut num, mut fd_sq, mut bp_sq) = (0.0, 0.0, 0.0);
        for i in range {
            let mut plus = params.clone();
            plus.theta[i] += h;
            let mut minus = params.clone();
            minus.theta[i] -= h;
            let fd = (batch_loss_value(&plus, &pairs, kind).unwrap() - batch_loss_value(&minus, &pairs, kind).unwrap())
                / (2.0 * h);
            num += (fd - grad[i]).powi(2);
            fd_sq += fd * fd;
            bp_sq += grad[i] * grad[i];
        }
        let (fd_norm, backprop_norm) = (fd_sq.sqrt(), bp_sq.sqrt());
        let relative_error = num.sqrt() / fd_norm.max(backprop_norm).max(1e-12);
        out.push(TensorCheck { name, backprop_norm, fd_norm, relative_error });
    }
    out
}
