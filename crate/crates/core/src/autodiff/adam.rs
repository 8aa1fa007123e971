use serde::{Deserialize, Serialize};

use super::tensor::{Real, Tensor};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Seeds parameter initialization and the per-epoch shuffle.
    pub seed: u64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            seed: 0,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let ok =
            self.lr > 0.0 && (0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2) && self.eps > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid Adam settings {self:?}")))
        }
    }
}

/// First and second moment estimates plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub m: Vec<Tensor<T>>,
    pub v: Vec<Tensor<T>>,
    pub t: u64,
}

impl<T: Real> AdamState<T> {
    pub fn new(params: &[Tensor<T>]) -> Self {
        Self {
            m: params.iter().map(|p| Tensor::zeros(p.shape())).collect(),
            v: params.iter().map(|p| Tensor::zeros(p.shape())).collect(),
            t: 0,
        }
    }
}

/// One bias-corrected Adam update, in place.
pub fn adam_step<T: Real>(
    params: &mut [Tensor<T>],
    grads: &[Tensor<T>],
    state: &mut AdamState<T>,
    cfg: &AdamConfig,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::Shape(format!(
            "adam: {} params, {} grads, {} moments",
            params.len(),
            grads.len(),
            state.m.len()
        )));
    }
    state.t += 1;
    let t = state.t as i32;
    let b1 = T::lit(cfg.beta1);
    let b2 = T::lit(cfg.beta2);
    let c1 = T::lit(1.0 - cfg.beta1.powi(t));
    let c2 = T::lit(1.0 - cfg.beta2.powi(t));
    let lr = T::lit(cfg.lr);
    let eps = T::lit(cfg.eps);
    for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
        if p.shape() != g.shape() {
            return Err(Error::Shape(format!(
                "adam: param {i} is {:?}, grad is {:?}",
                p.shape(),
                g.shape()
            )));
        }
        let m = state.m[i].data_mut();
        let v = state.v[i].data_mut();
        for (((p, &g), m), v) in p.data_mut().iter_mut().zip(g.data()).zip(m).zip(v) {
            *m = b1 * *m + (T::one() - b1) * g;
            *v = b2 * *v + (T::one() - b2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p = *p - lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> Vec<Tensor<f64>> {
        vec![
            Tensor::from_vec(&[3], vec![0.5, -1.0, 2.0]).unwrap(),
            Tensor::from_vec(&[1], vec![0.1]).unwrap(),
        ]
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = params();
        let before = p.clone();
        let grads: Vec<_> = p.iter().map(|t| Tensor::zeros(t.shape())).collect();
        let mut st = AdamState::new(&p);
        for _ in 0..5 {
            adam_step(&mut p, &grads, &mut st, &AdamConfig::default()).unwrap();
        }
        assert_eq!(p, before);
    }

    #[test]
    fn constant_gradient_moves_by_lr() {
        let cfg = AdamConfig::default();
        let mut p = params();
        let grads = vec![
            Tensor::from_vec(&[3], vec![0.3, -2.0, 5.0]).unwrap(),
            Tensor::from_vec(&[1], vec![-0.01]).unwrap(),
        ];
        let mut st = AdamState::new(&p);
        let mut last = p.clone();
        for _ in 0..200 {
            adam_step(&mut p, &grads, &mut st, &cfg).unwrap();
            for (now, (prev, g)) in p.iter().zip(last.iter().zip(&grads)) {
                for ((a, b), g) in now.data().iter().zip(prev.data()).zip(g.data()) {
                    let step = b - a;
                    assert!((step - cfg.lr * g.signum()).abs() < 1e-6 * cfg.lr + 1e-9);
                }
            }
            last = p.clone();
        }
    }

    #[test]
    fn deterministic() {
        let grads = vec![
            Tensor::from_vec(&[3], vec![0.3, -2.0, 5.0]).unwrap(),
            Tensor::from_vec(&[1], vec![-0.01]).unwrap(),
        ];
        let run = || {
            let mut p = params();
            let mut st = AdamState::new(&p);
            for _ in 0..10 {
                adam_step(&mut p, &grads, &mut st, &AdamConfig::default()).unwrap();
            }
            p
        };
        assert_eq!(run(), run());
    }
}
