//! Poisson negative log-likelihood losses on predicted distances.

use serde::{Deserialize, Serialize};

/// Lower clamp applied to the predicted distance before the logarithm.
pub const D_HAT_FLOOR: f64 = 1e-8;

/// Which objective drives training.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    /// Exact fit at distance 1, hinge-like push past 2 for distance >= 2.
    #[default]
    Revised,
    /// Plain Poisson NLL on the untruncated distance.
    Pnll,
}

/// `d_hat - d * ln(d_hat)`.
pub fn pnll_loss(d: f64, d_hat: f64) -> f64 {
    let x = d_hat.max(D_HAT_FLOOR);
    x - d * x.ln()
}

fn pnll_grad(d: f64, d_hat: f64) -> f64 {
    if d_hat < D_HAT_FLOOR {
        1.0
    } else {
        1.0 - d / d_hat
    }
}

/// Distance-1 pairs use the plain loss against 1; pairs at distance 2 or more
/// are only penalized while `d_hat < 2`, against a target of 2.
pub fn revised_loss(d: usize, d_hat: f64) -> f64 {
    match d {
        0 | 1 => pnll_loss(d as f64, d_hat),
        _ if d_hat < 2.0 => pnll_loss(2.0, d_hat),
        _ => 0.0,
    }
}

fn revised_grad(d: usize, d_hat: f64) -> f64 {
    match d {
        0 | 1 => pnll_grad(d as f64, d_hat),
        _ if d_hat < 2.0 => pnll_grad(2.0, d_hat),
        _ => 0.0,
    }
}

impl LossKind {
    pub fn value(self, d: usize, d_hat: f64) -> f64 {
        match self {
            LossKind::Revised => revised_loss(d, d_hat),
            LossKind::Pnll => pnll_loss(d as f64, d_hat),
        }
    }

    /// Derivative with respect to `d_hat`.
    pub fn grad(self, d: usize, d_hat: f64) -> f64 {
        match self {
            LossKind::Revised => revised_grad(d, d_hat),
            LossKind::Pnll => pnll_grad(d as f64, d_hat),
        }
    }
}
