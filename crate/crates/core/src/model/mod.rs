//! Siamese sequence embedding network.
//!
//! One-hot input, a stack of same-padded 1D convolutions with ReLU, mean
//! pooling over positions, an affine projection to `m` dimensions and a final
//! batch normalization without learned affine parameters. Squared Euclidean
//! distance between outputs is trained to approximate the Levenshtein
//! distance truncated at 2.

pub(crate) mod gemm;
pub mod io;
pub mod loss;
pub mod network;
pub mod pairs;
pub mod train;

use std::ops::Range;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

pub use io::{load_params, save_params};
pub use loss::{pnll_loss, revised_loss, LossKind};
pub use network::{embed, embed_batch, embed_flat, sq_euclidean, EmbeddingVector, Mode};
pub use pairs::{sample_training_pair, PairCategory, TrainingPair};
pub use train::{batch_loss_value, evaluate, loss_and_gradient, train, train_from, EvalReport, TrainConfig, TrainOutcome};

/// Epsilon added to the variance inside batch normalization.
pub const BN_EPS: f64 = 1e-12;

/// Architecture hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Alphabet size (number of one-hot input channels).
    pub q: u8,
    /// Embedding dimension.
    pub m: usize,
    /// Number of convolution layers.
    pub layers: usize,
    /// Channels per convolution layer.
    pub channels: usize,
    /// Odd kernel width.
    pub kernel: usize,
    /// Longest input accepted.
    pub max_len: usize,
}

impl ModelConfig {
    /// Ten layers of 64 channels, kernel 3, 64-dimensional output, for
    /// codewords of length `n` (inputs up to `n + 2`).
    pub fn for_length(n: usize) -> Self {
        Self { q: 4, m: 64, layers: 10, channels: 64, kernel: 3, max_len: n + 2 }
    }

    pub fn validate(&self) -> Result<()> {
        crate::seq::check_alphabet(self.q)?;
        if self.layers == 0 || self.m == 0 || self.channels == 0 {
            return Err(Error::InvalidConfig("layers, channels and m must be positive".into()));
        }
        if self.kernel.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!("kernel {} must be odd", self.kernel)));
        }
        if self.max_len == 0 || self.max_len > crate::seq::MAX_LEN {
            return Err(Error::InvalidConfig(format!("max_len {} out of range", self.max_len)));
        }
        Ok(())
    }

    pub(crate) fn layer_inputs(&self, layer: usize) -> usize {
        if layer == 0 {
            self.q as usize
        } else {
            self.channels
        }
    }

    pub fn layout(&self) -> ParamLayout {
        let mut offset = 0;
        let mut take = |len: usize| {
            let r = offset..offset + len;
            offset += len;
            r
        };
        let mut conv_weight = Vec::with_capacity(self.layers);
        let mut conv_bias = Vec::with_capacity(self.layers);
        for l in 0..self.layers {
            conv_weight.push(take(self.channels * self.kernel * self.layer_inputs(l)));
            conv_bias.push(take(self.channels));
        }
        let proj_weight = take(self.m * self.channels);
        let proj_bias = take(self.m);
        ParamLayout { conv_weight, conv_bias, proj_weight, proj_bias, total: offset }
    }
}

/// Offsets of each trainable tensor inside the flat parameter vector.
///
/// Order: for each conv layer its weight `[out][tap][in]` then bias `[out]`;
/// then projection weight `[m][channels]` and bias `[m]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamLayout {
    pub conv_weight: Vec<Range<usize>>,
    pub conv_bias: Vec<Range<usize>>,
    pub proj_weight: Range<usize>,
    pub proj_bias: Range<usize>,
    pub total: usize,
}

impl ParamLayout {
    /// Named tensors in storage order.
    pub fn tensors(&self) -> Vec<(String, Range<usize>)> {
        let mut out = Vec::new();
        for (l, (w, b)) in self.conv_weight.iter().zip(&self.conv_bias).enumerate() {
            out.push((format!("conv{l}.weight"), w.clone()));
            out.push((format!("conv{l}.bias"), b.clone()));
        }
        out.push(("proj.weight".into(), self.proj_weight.clone()));
        out.push(("proj.bias".into(), self.proj_bias.clone()));
        out
    }
}

/// Learned weights plus batch-norm running statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub config: ModelConfig,
    /// Trainable parameters, laid out as described by [`ParamLayout`].
    pub theta: Vec<f64>,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    /// Optimizer steps taken so far.
    pub step: u64,
}

impl ModelParams {
    /// He-normal convolution weights, scaled-normal projection, zero biases.
    pub fn init(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let layout = config.layout();
        let mut rng = rng_from_seed(seed);
        let mut theta = vec![0.0; layout.total];
        for (l, range) in layout.conv_weight.iter().enumerate() {
            let fan_in = (config.kernel * config.layer_inputs(l)) as f64;
            let normal = Normal::new(0.0, (2.0 / fan_in).sqrt()).expect("valid std");
            for w in &mut theta[range.clone()] {
                *w = normal.sample(&mut rng);
            }
        }
        let normal = Normal::new(0.0, (1.0 / config.channels as f64).sqrt()).expect("valid std");
        for w in &mut theta[layout.proj_weight.clone()] {
            *w = normal.sample(&mut rng);
        }
        Ok(Self {
            config,
            theta,
            running_mean: vec![0.0; config.m],
            running_var: vec![1.0; config.m],
            step: 0,
        })
    }

    /// Parameters with no weights; every forward pass rejects them.
    pub fn uninitialized(config: ModelConfig) -> Self {
        Self { config, theta: Vec::new(), running_mean: Vec::new(), running_var: Vec::new(), step: 0 }
    }

    pub fn layout(&self) -> ParamLayout {
        self.config.layout()
    }

    /// Checks shapes and the finiteness / positivity invariants.
    pub fn check(&self) -> Result<()> {
        let layout = self.layout();
        if self.theta.len() != layout.total
            || self.running_mean.len() != self.config.m
            || self.running_var.len() != self.config.m
        {
            return Err(Error::Uninitialized);
        }
        if self.theta.iter().chain(&self.running_mean).any(|x| !x.is_finite())
            || self.running_var.iter().any(|v| !(v.is_finite() && *v > 0.0))
        {
            return Err(Error::ModelFormat("non-finite or non-positive statistics".into()));
        }
        Ok(())
    }
}
