//! Forward and backward passes.
//!
//! A batch of variable-length sequences is packed into one row-major buffer
//! per layer: `pad` zero rows, sample 0, `pad` zero rows, sample 1, ... The
//! zero rows double as the same-padding of both neighbours, so every
//! convolution over the whole batch is a single matrix product whose left
//! operand is an overlapping strided view of the buffer.

use serde::{Deserialize, Serialize};

use super::gemm::gemm;
use super::{ModelConfig, ModelParams, BN_EPS};
use crate::error::{Error, Result};
use crate::seq::Sequence;

/// Embedding of one sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector(pub Vec<f64>);

impl EmbeddingVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Batch normalization source: batch statistics or running statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

/// Squared Euclidean distance between two embeddings.
pub fn sq_euclidean(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: v.dim() });
    }
    Ok(sq_dist(&u.0, &v.0))
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Row bookkeeping for a packed batch.
#[derive(Clone, Debug)]
pub(crate) struct Packing {
    pub pad: usize,
    pub rows: usize,
    pub starts: Vec<usize>,
    pub lens: Vec<usize>,
}

impl Packing {
    fn new(seqs: &[Sequence], cfg: &ModelConfig) -> Result<Self> {
        let pad = cfg.kernel / 2;
        let mut rows = pad;
        let mut starts = Vec::with_capacity(seqs.len());
        let mut lens = Vec::with_capacity(seqs.len());
        for s in seqs {
            if s.q() != cfg.q {
                return Err(Error::AlphabetMismatch(s.q(), cfg.q));
            }
            if s.is_empty() {
                return Err(Error::EmptyInput);
            }
            if s.len() > cfg.max_len {
                return Err(Error::LengthExceeded { len: s.len(), max: cfg.max_len });
            }
            starts.push(rows);
            lens.push(s.len());
            rows += s.len() + pad;
        }
        Ok(Self { pad, rows, starts, lens })
    }

    /// Zeroes every row that does not belong to a sample.
    fn clear_gaps(&self, buf: &mut [f64], width: usize) {
        let mut cursor = 0;
        for (&start, &len) in self.starts.iter().zip(&self.lens) {
            buf[cursor * width..start * width].fill(0.0);
            cursor = start + len;
        }
        buf[cursor * width..self.rows * width].fill(0.0);
    }
}

/// Intermediate values kept for backpropagation.
pub(crate) struct Forward {
    pub packing: Packing,
    /// `acts[0]` is the one-hot input, `acts[l + 1]` the ReLU output of layer `l`.
    pub acts: Vec<Vec<f64>>,
    pub pooled: Vec<f64>,
    /// Batch-normalized output, `batch x m`.
    pub out: Vec<f64>,
    /// Per-dimension `1 / sqrt(var + eps)` of the batch (train mode).
    pub inv_std: Vec<f64>,
    pub batch_mean: Vec<f64>,
    pub batch_var: Vec<f64>,
}

fn one_hot(seqs: &[Sequence], packing: &Packing, q: usize) -> Vec<f64> {
    let mut x = vec![0.0; packing.rows * q];
    for (s, &start) in seqs.iter().zip(&packing.starts) {
        for i in 0..s.len() {
            x[(start + i) * q + s.get(i) as usize] = 1.0;
        }
    }
    x
}

/// One convolution layer plus ReLU over the packed buffer.
fn conv_relu(
    x: &[f64],
    cin: usize,
    weight: &[f64],
    bias: &[f64],
    cout: usize,
    kernel: usize,
    packing: &Packing,
    out: &mut Vec<f64>,
) {
    let rows = packing.rows;
    let pad = packing.pad;
    out.clear();
    out.resize(rows * cout, 0.0);
    let centers = rows - 2 * pad;
    gemm(
        centers,
        kernel * cin,
        cout,
        1.0,
        x,
        (cin, 1),
        weight,
        (1, kernel * cin),
        0.0,
        &mut out[pad * cout..],
        (cout, 1),
    );
    for (&start, &len) in packing.starts.iter().zip(&packing.lens) {
        for row in out[start * cout..(start + len) * cout].chunks_exact_mut(cout) {
            for (v, b) in row.iter_mut().zip(bias) {
                *v = (*v + b).max(0.0);
            }
        }
    }
    packing.clear_gaps(out, cout);
}

pub(crate) fn forward(params: &ModelParams, seqs: &[Sequence], mode: Mode, keep: bool) -> Result<Forward> {
    params.check()?;
    let cfg = &params.config;
    if mode == Mode::Train && seqs.len() < 2 {
        return Err(Error::InvalidConfig("train-mode batch normalization needs at least 2 inputs".into()));
    }
    let packing = Packing::new(seqs, cfg)?;
    let layout = params.layout();
    let c = cfg.channels;
    let batch = seqs.len();

    let mut acts = Vec::with_capacity(if keep { cfg.layers + 1 } else { 0 });
    let mut x = one_hot(seqs, &packing, cfg.q as usize);
    let mut y = Vec::new();
    for l in 0..cfg.layers {
        conv_relu(
            &x,
            cfg.layer_inputs(l),
            &params.theta[layout.conv_weight[l].clone()],
            &params.theta[layout.conv_bias[l].clone()],
            c,
            cfg.kernel,
            &packing,
            &mut y,
        );
        if keep {
            acts.push(std::mem::take(&mut x));
        }
        std::mem::swap(&mut x, &mut y);
    }

    let mut pooled = vec![0.0; batch * c];
    for (i, (&start, &len)) in packing.starts.iter().zip(&packing.lens).enumerate() {
        let dst = &mut pooled[i * c..(i + 1) * c];
        for row in x[start * c..(start + len) * c].chunks_exact(c) {
            for (d, v) in dst.iter_mut().zip(row) {
                *d += v;
            }
        }
        let scale = 1.0 / len as f64;
        dst.iter_mut().for_each(|d| *d *= scale);
    }
    if keep {
        acts.push(x);
    }

    let m = cfg.m;
    let mut z = vec![0.0; batch * m];
    gemm(batch, c, m, 1.0, &pooled, (c, 1), &params.theta[layout.proj_weight.clone()], (1, c), 0.0, &mut z, (m, 1));
    let proj_bias = &params.theta[layout.proj_bias.clone()];
    for row in z.chunks_exact_mut(m) {
        for (v, b) in row.iter_mut().zip(proj_bias) {
            *v += b;
        }
    }

    let (mean, var) = match mode {
        Mode::Train => {
            let mut mean = vec![0.0; m];
            for row in z.chunks_exact(m) {
                mean.iter_mut().zip(row).for_each(|(a, v)| *a += v);
            }
            mean.iter_mut().for_each(|a| *a /= batch as f64);
            let mut var = vec![0.0; m];
            for row in z.chunks_exact(m) {
                for ((a, v), mu) in var.iter_mut().zip(row).zip(&mean) {
                    *a += (v - mu) * (v - mu);
                }
            }
            var.iter_mut().for_each(|a| *a /= batch as f64);
            (mean, var)
        }
        Mode::Infer => (params.running_mean.clone(), params.running_var.clone()),
    };
    let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + BN_EPS).sqrt()).collect();
    for row in z.chunks_exact_mut(m) {
        for ((v, mu), s) in row.iter_mut().zip(&mean).zip(&inv_std) {
            *v = (*v - mu) * s;
        }
    }

    Ok(Forward { packing, acts, pooled, out: z, inv_std, batch_mean: mean, batch_var: var })
}

/// Accumulates into `grad` the gradient of a scalar whose derivative with
/// respect to the train-mode outputs is `d_out` (`batch x m`).
pub(crate) fn backward(params: &ModelParams, fwd: &Forward, d_out: &[f64], grad: &mut [f64]) {
    let cfg = &params.config;
    let layout = params.layout();
    let m = cfg.m;
    let c = cfg.channels;
    let batch = fwd.packing.lens.len();
    let k = cfg.kernel;
    let pad = fwd.packing.pad;
    let rows = fwd.packing.rows;
    debug_assert_eq!(d_out.len(), batch * m);
    debug_assert_eq!(fwd.acts.len(), cfg.layers + 1);

    // Batch normalization with batch statistics.
    let mut mean_dy = vec![0.0; m];
    let mut mean_dy_xhat = vec![0.0; m];
    for (dy, xh) in d_out.chunks_exact(m).zip(fwd.out.chunks_exact(m)) {
        for j in 0..m {
            mean_dy[j] += dy[j];
            mean_dy_xhat[j] += dy[j] * xh[j];
        }
    }
    let inv_b = 1.0 / batch as f64;
    mean_dy.iter_mut().for_each(|v| *v *= inv_b);
    mean_dy_xhat.iter_mut().for_each(|v| *v *= inv_b);
    let mut dz = vec![0.0; batch * m];
    for ((dzr, dy), xh) in dz.chunks_exact_mut(m).zip(d_out.chunks_exact(m)).zip(fwd.out.chunks_exact(m)) {
        for j in 0..m {
            dzr[j] = fwd.inv_std[j] * (dy[j] - mean_dy[j] - xh[j] * mean_dy_xhat[j]);
        }
    }

    // Projection.
    let proj_w = &params.theta[layout.proj_weight.clone()];
    gemm(m, batch, c, 1.0, &dz, (1, m), &fwd.pooled, (c, 1), 1.0, &mut grad[layout.proj_weight.clone()], (c, 1));
    {
        let gb = &mut grad[layout.proj_bias.clone()];
        for row in dz.chunks_exact(m) {
            gb.iter_mut().zip(row).for_each(|(g, v)| *g += v);
        }
    }
    let mut dpooled = vec![0.0; batch * c];
    gemm(batch, m, c, 1.0, &dz, (m, 1), proj_w, (c, 1), 0.0, &mut dpooled, (c, 1));

    // Mean pooling.
    let mut dact = vec![0.0; rows * c];
    for (i, (&start, &len)) in fwd.packing.starts.iter().zip(&fwd.packing.lens).enumerate() {
        let scale = 1.0 / len as f64;
        let src = &dpooled[i * c..(i + 1) * c];
        for row in dact[start * c..(start + len) * c].chunks_exact_mut(c) {
            row.iter_mut().zip(src).for_each(|(d, s)| *d = s * scale);
        }
    }

    let centers = rows - 2 * pad;
    for l in (0..cfg.layers).rev() {
        let out = &fwd.acts[l + 1];
        for (d, &a) in dact.iter_mut().zip(out) {
            if a <= 0.0 {
                *d = 0.0;
            }
        }
        let x = &fwd.acts[l];
        let cin = cfg.layer_inputs(l);
        gemm(
            c,
            centers,
            k * cin,
            1.0,
            &dact[pad * c..],
            (1, c),
            x,
            (cin, 1),
            1.0,
            &mut grad[layout.conv_weight[l].clone()],
            (k * cin, 1),
        );
        {
            let gb = &mut grad[layout.conv_bias[l].clone()];
            for row in dact.chunks_exact(c) {
                gb.iter_mut().zip(row).for_each(|(g, v)| *g += v);
            }
        }
        if l == 0 {
            break;
        }
        let w = &params.theta[layout.conv_weight[l].clone()];
        let mut dx = vec![0.0; rows * cin];
        for tap in 0..k {
            gemm(
                centers,
                c,
                cin,
                1.0,
                &dact[pad * c..],
                (c, 1),
                &w[tap * cin..],
                (k * cin, 1),
                1.0,
                &mut dx[tap * cin..],
                (cin, 1),
            );
        }
        dact = dx;
    }
}

/// Embeds a batch. Train mode normalizes with the batch's own statistics and
/// needs at least two inputs; infer mode is per-sequence and deterministic.
pub fn embed_batch(params: &ModelParams, seqs: &[Sequence], mode: Mode) -> Result<Vec<EmbeddingVector>> {
    let fwd = forward(params, seqs, mode, false)?;
    Ok(fwd.out.chunks_exact(params.config.m).map(|r| EmbeddingVector(r.to_vec())).collect())
}

/// Embeds one sequence in infer mode.
pub fn embed(params: &ModelParams, s: &Sequence) -> Result<EmbeddingVector> {
    Ok(embed_batch(params, std::slice::from_ref(s), Mode::Infer)?.remove(0))
}

/// Infer-mode embeddings written into one flat `len x m` buffer, processed in
/// chunks to bound memory.
pub fn embed_flat(params: &ModelParams, seqs: &[Sequence]) -> Result<Vec<f64>> {
    const CHUNK: usize = 2048;
    let mut out = Vec::with_capacity(seqs.len() * params.config.m);
    for chunk in seqs.chunks(CHUNK) {
        out.extend(forward(params, chunk, Mode::Infer, false)?.out);
    }
    Ok(out)
}
