use serde::{Deserialize, Serialize};

use super::graph::Graph;
use super::tensor::{Real, Tensor};
use crate::{Error, Result};

/// Probabilities are clamped to `[BCE_CLAMP, 1 - BCE_CLAMP]` before the log.
pub const BCE_CLAMP: f64 = 1e-7;

/// Weights of the BCE + Dice objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LossConfig {
    pub bce_weight: f64,
    pub dice_weight: f64,
    /// Added to both numerator and denominator of the Dice ratio.
    pub dice_epsilon: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            bce_weight: 1.0,
            dice_weight: 1.0,
            dice_epsilon: 1e-6,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.bce_weight >= 0.0
            && self.dice_weight >= 0.0
            && self.bce_weight + self.dice_weight > 0.0
            && self.dice_epsilon >= 0.0
            && self.bce_weight.is_finite()
            && self.dice_weight.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "loss weights must be >= 0 with a positive sum, got bce={} dice={}",
                self.bce_weight, self.dice_weight
            )))
        }
    }
}

fn eval<T: Real>(o: &Tensor<T>, build: impl FnOnce(&mut Graph<T>, super::Var) -> Result<super::Var>) -> Result<T> {
    let mut g = Graph::new();
    let ov = g.leaf(o.clone());
    let loss = build(&mut g, ov)?;
    Ok(g.value(loss).item())
}

/// Mean binary cross-entropy, evaluated outside any training graph.
pub fn bce_loss<T: Real>(o: &Tensor<T>, g: &Tensor<T>) -> Result<T> {
    eval(o, |graph, ov| graph.bce_loss(ov, g))
}

pub fn dice_loss<T: Real>(o: &Tensor<T>, g: &Tensor<T>, eps: T) -> Result<T> {
    eval(o, |graph, ov| graph.dice_loss(ov, g, eps))
}

pub fn combined_loss<T: Real>(o: &Tensor<T>, g: &Tensor<T>, cfg: &LossConfig) -> Result<T> {
    eval(o, |graph, ov| graph.combined_loss(ov, g, cfg))
}
