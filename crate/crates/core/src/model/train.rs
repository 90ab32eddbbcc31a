//! Siamese training with adaptive-moment optimization.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::loss::LossKind;
use super::network::{backward, embed_flat, forward, sq_dist, Mode};
use super::pairs::{sample_training_pair, PairCategory, TrainingPair};
use super::{ModelConfig, ModelParams};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

/// Training protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Codeword length the anchors are drawn at.
    pub n: usize,
    /// Pairs per batch at one edit.
    pub one_edit: usize,
    /// Pairs per batch at two edits.
    pub two_edits: usize,
    /// Pairs per batch of independent sequences.
    pub independent: usize,
    pub steps: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    /// Cosine-anneal the learning rate to `final_lr_fraction * learning_rate`.
    pub cosine_decay: bool,
    pub final_lr_fraction: f64,
    /// Weight of the new batch statistics in the running averages.
    pub bn_momentum: f64,
    pub loss: LossKind,
    pub seed: u64,
}

impl TrainConfig {
    /// 256 pairs per batch split 40/40/20, learning rate 1e-3, 50k steps.
    pub fn for_length(n: usize) -> Self {
        Self {
            n,
            one_edit: 102,
            two_edits: 102,
            independent: 52,
            steps: 50_000,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            cosine_decay: false,
            final_lr_fraction: 0.05,
            bn_momentum: 0.1,
            loss: LossKind::Revised,
            seed: 0,
        }
    }

    pub fn batch_size(&self) -> usize {
        self.one_edit + self.two_edits + self.independent
    }

    pub fn validate(&self, model: &ModelConfig) -> Result<()> {
        model.validate()?;
        if self.batch_size() < 2 {
            return Err(Error::InvalidConfig("batch size must be at least 2".into()));
        }
        if self.steps == 0 {
            return Err(Error::InvalidConfig("step count must be at least 1".into()));
        }
        if self.n < 3 || self.n + 2 > model.max_len {
            return Err(Error::InvalidConfig(format!(
                "n = {} needs 3 <= n and n + 2 <= max_len = {}",
                self.n, model.max_len
            )));
        }
        if !(self.learning_rate > 0.0 && (0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2)) {
            return Err(Error::InvalidConfig("optimizer coefficients out of range".into()));
        }
        if !(0.0..=1.0).contains(&self.bn_momentum) {
            return Err(Error::InvalidConfig("bn_momentum must lie in [0, 1]".into()));
        }
        Ok(())
    }

    fn learning_rate_at(&self, step: u64) -> f64 {
        if !self.cosine_decay {
            return self.learning_rate;
        }
        let progress = step as f64 / self.steps as f64;
        let floor = self.final_lr_fraction;
        self.learning_rate * (floor + (1.0 - floor) * 0.5 * (1.0 + (std::f64::consts::PI * progress).cos()))
    }
}

/// Result of a training run.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub params: ModelParams,
    /// Mean batch loss of every step.
    pub losses: Vec<f64>,
}

/// Batch-norm statistics observed in a train-mode pass.
pub(crate) struct BatchStats {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    pub count: usize,
}

fn batch_loss(
    params: &ModelParams,
    pairs: &[TrainingPair],
    kind: LossKind,
    with_grad: bool,
) -> Result<(f64, Vec<f64>, BatchStats)> {
    if pairs.len() < 2 {
        return Err(Error::InvalidConfig("a batch needs at least 2 pairs".into()));
    }
    let b = pairs.len();
    let m = params.config.m;
    let seqs: Vec<_> = pairs.iter().map(|p| p.s).chain(pairs.iter().map(|p| p.t)).collect();
    let fwd = forward(params, &seqs, Mode::Train, with_grad)?;
    let (us, vs) = fwd.out.split_at(b * m);
    let mut loss = 0.0;
    let mut d_out = vec![0.0; 2 * b * m];
    let (du_all, dv_all) = d_out.split_at_mut(b * m);
    for (i, p) in pairs.iter().enumerate() {
        let u = &us[i * m..(i + 1) * m];
        let v = &vs[i * m..(i + 1) * m];
        let d_hat = sq_dist(u, v);
        loss += kind.value(p.d, d_hat);
        let g = kind.grad(p.d, d_hat) / b as f64;
        if g != 0.0 {
            for j in 0..m {
                let diff = 2.0 * g * (u[j] - v[j]);
                du_all[i * m + j] = diff;
                dv_all[i * m + j] = -diff;
            }
        }
    }
    loss /= b as f64;
    let mut grad = Vec::new();
    if with_grad {
        grad = vec![0.0; params.theta.len()];
        backward(params, &fwd, &d_out, &mut grad);
    }
    let stats = BatchStats { mean: fwd.batch_mean, var: fwd.batch_var, count: 2 * b };
    Ok((loss, grad, stats))
}

/// Mean loss over the batch and its gradient with respect to every trainable
/// parameter. Both Siamese branches share the weights and one batch-norm pass.
pub fn loss_and_gradient(params: &ModelParams, pairs: &[TrainingPair], kind: LossKind) -> Result<(f64, Vec<f64>)> {
    let (loss, grad, _) = batch_loss(params, pairs, kind, true)?;
    if !loss.is_finite() {
        return Err(Error::Divergence { step: params.step, loss });
    }
    Ok((loss, grad))
}

/// Mean loss only (no backward pass).
pub fn batch_loss_value(params: &ModelParams, pairs: &[TrainingPair], kind: LossKind) -> Result<f64> {
    Ok(batch_loss(params, pairs, kind, false)?.0)
}

pub(crate) fn sample_batch<R: Rng + ?Sized>(cfg: &TrainConfig, q: u8, rng: &mut R) -> Vec<TrainingPair> {
    let mut pairs = Vec::with_capacity(cfg.batch_size());
    for (count, cat) in [
        (cfg.one_edit, PairCategory::OneEdit),
        (cfg.two_edits, PairCategory::TwoEdits),
        (cfg.independent, PairCategory::Independent),
    ] {
        for _ in 0..count {
            pairs.push(sample_training_pair(cfg.n, q, cat, rng));
        }
    }
    pairs
}

/// Trains from a fresh initialization; see [`train_from`].
pub fn train(
    train_cfg: &TrainConfig,
    model_cfg: &ModelConfig,
    progress: impl FnMut(u64, f64),
) -> Result<TrainOutcome> {
    train_cfg.validate(model_cfg)?;
    let params = ModelParams::init(*model_cfg, derive_seed(train_cfg.seed, 0))?;
    train_from(params, train_cfg, progress)
}

/// Runs `train_cfg.steps` optimizer steps starting from `params`.
///
/// Deterministic given the seed. `progress` receives each step index and its
/// batch loss. A non-finite loss aborts with [`Error::Divergence`].
pub fn train_from(
    mut params: ModelParams,
    train_cfg: &TrainConfig,
    mut progress: impl FnMut(u64, f64),
) -> Result<TrainOutcome> {
    train_cfg.validate(&params.config)?;
    params.check()?;
    let mut rng = rng_from_seed(derive_seed(train_cfg.seed, 1));
    let n_params = params.theta.len();
    let mut first = vec![0.0; n_params];
    let mut second = vec![0.0; n_params];
    let mut losses = Vec::with_capacity(train_cfg.steps as usize);
    let q = params.config.q;

    for step in 0..train_cfg.steps {
        let pairs = sample_batch(train_cfg, q, &mut rng);
        let (loss, grad, stats) = batch_loss(&params, &pairs, train_cfg.loss, true)?;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Divergence { step: params.step, loss });
        }
        let t = (step + 1) as i32;
        let lr = train_cfg.learning_rate_at(step);
        let c1 = 1.0 - train_cfg.beta1.powi(t);
        let c2 = 1.0 - train_cfg.beta2.powi(t);
        for (((w, g), m1), m2) in params.theta.iter_mut().zip(&grad).zip(&mut first).zip(&mut second) {
            *m1 = train_cfg.beta1 * *m1 + (1.0 - train_cfg.beta1) * g;
            *m2 = train_cfg.beta2 * *m2 + (1.0 - train_cfg.beta2) * g * g;
            *w -= lr * (*m1 / c1) / ((*m2 / c2).sqrt() + train_cfg.adam_eps);
        }
        let mom = train_cfg.bn_momentum;
        let unbias = stats.count as f64 / (stats.count - 1) as f64;
        for j in 0..params.config.m {
            params.running_mean[j] = (1.0 - mom) * params.running_mean[j] + mom * stats.mean[j];
            params.running_var[j] = (1.0 - mom) * params.running_var[j] + mom * stats.var[j] * unbias;
        }
        params.step += 1;
        losses.push(loss);
        progress(step, loss);
    }
    Ok(TrainOutcome { params, losses })
}

/// Held-out quality of a trained model on fresh pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub pairs: usize,
    /// Mean `|d_hat - 1|` over one-edit pairs.
    pub mean_abs_err_d1: f64,
    /// Fraction of pairs with true distance >= 2 predicted at >= 2.
    pub frac_far_at_least_2: f64,
    /// Fraction of distance-1 pairs predicted below 2.
    pub frac_near_below_2: f64,
}

/// Evaluates infer-mode predictions on `pairs` fresh pairs per category.
pub fn evaluate(params: &ModelParams, n: usize, pairs: usize, seed: u64) -> Result<EvalReport> {
    let mut rng = rng_from_seed(seed);
    let q = params.config.q;
    let m = params.config.m;
    let mut sample = Vec::with_capacity(3 * pairs);
    for cat in [PairCategory::OneEdit, PairCategory::TwoEdits, PairCategory::Independent] {
        for _ in 0..pairs {
            sample.push(sample_training_pair(n, q, cat, &mut rng));
        }
    }
    let seqs: Vec<_> = sample.iter().map(|p| p.s).chain(sample.iter().map(|p| p.t)).collect();
    let emb = embed_flat(params, &seqs)?;
    let (us, vs) = emb.split_at(sample.len() * m);
    let (mut err1, mut n1, mut below2, mut far_ok, mut n_far) = (0.0, 0usize, 0usize, 0usize, 0usize);
    for (i, p) in sample.iter().enumerate() {
        let d_hat = sq_dist(&us[i * m..(i + 1) * m], &vs[i * m..(i + 1) * m]);
        if p.d == 1 {
            err1 += (d_hat - 1.0).abs();
            n1 += 1;
            below2 += usize::from(d_hat < 2.0);
        } else {
            n_far += 1;
            far_ok += usize::from(d_hat >= 2.0);
        }
    }
    Ok(EvalReport {
        n,
        pairs: sample.len(),
        mean_abs_err_d1: err1 / n1.max(1) as f64,
        frac_far_at_least_2: far_ok as f64 / n_far.max(1) as f64,
        frac_near_below_2: below2 as f64 / n1.max(1) as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_model() -> ModelConfig {
        ModelConfig { q: 4, m: 4, layers: 2, channels: 4, kernel: 3, max_len: 7 }
    }

    fn tiny_train(steps: u64) -> TrainConfig {
        TrainConfig { one_edit: 8, two_edits: 8, independent: 4, steps, seed: 5, ..TrainConfig::for_length(5) }
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = tiny_train(1);
        cfg.one_edit = 1;
        cfg.two_edits = 0;
        cfg.independent = 0;
        assert!(train(&cfg, &tiny_model(), |_, _| {}).is_err());
        assert!(train(&tiny_train(0), &tiny_model(), |_, _| {}).is_err());
        let short = ModelConfig { max_len: 6, ..tiny_model() };
        assert!(train(&tiny_train(1), &short, |_, _| {}).is_err());
    }

    #[test]
    fn far_pairs_past_two_give_zero_gradient() {
        let mut p = ModelParams::init(tiny_model(), 3).unwrap();
        // Scale the projection so embeddings spread far apart.
        let r = p.layout().proj_weight;
        p.theta[r].iter_mut().for_each(|w| *w *= 10.0);
        let mut rng = rng_from_seed(3);
        let pairs: Vec<TrainingPair> = (0..6)
            .map(|_| sample_training_pair(5, 4, PairCategory::Independent, &mut rng))
            .map(|mut x| {
                x.d = x.d.max(2);
                x
            })
            .collect();
        let seqs: Vec<_> = pairs.iter().map(|x| x.s).chain(pairs.iter().map(|x| x.t)).collect();
        let out = forward(&p, &seqs, Mode::Train, false).unwrap().out;
        let m = 4;
        let all_far = (0..6).all(|i| sq_dist(&out[i * m..(i + 1) * m], &out[(i + 6) * m..(i + 7) * m]) >= 2.0);
        if all_far {
            let (loss, grad) = loss_and_gradient(&p, &pairs, LossKind::Revised).unwrap();
            assert_eq!(loss, 0.0);
            assert!(grad.iter().all(|&g| g == 0.0));
        }
    }

    #[test]
    fn training_is_deterministic() {
        let a = train(&tiny_train(20), &tiny_model(), |_, _| {}).unwrap();
        let b = train(&tiny_train(20), &tiny_model(), |_, _| {}).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.losses, b.losses);
        assert_eq!(a.params.step, 20);
    }

    #[test]
    fn cosine_schedule_ends_at_floor() {
        let cfg = TrainConfig { cosine_decay: true, steps: 100, ..TrainConfig::for_length(7) };
        assert!((cfg.learning_rate_at(0) - 1e-3).abs() < 1e-12);
        assert!((cfg.learning_rate_at(100) - 5e-5).abs() < 1e-12);
    }
}
