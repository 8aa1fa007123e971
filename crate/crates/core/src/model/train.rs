use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::network::{record, Network};
use crate::autodiff::{adam_step, AdamConfig, AdamState, LossConfig, Real, Tensor};
use crate::sim::frame_seed;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            batch_size: 8,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("train: batch_size must be >= 1".into()));
        }
        Ok(())
    }
}

/// One `(stacked input, binary label)` training pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    pub input: Tensor<T>,
    pub label: Tensor<T>,
}

/// Everything besides the parameters needed to continue a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainState<T> {
    pub adam: AdamState<T>,
    /// Epochs completed.
    pub epoch: usize,
    /// Mean training loss of each completed epoch.
    pub loss_curve: Vec<f64>,
}

impl<T: Real> TrainState<T> {
    pub fn new<N: Network<T>>(net: &N) -> Self {
        Self {
            adam: AdamState::new(net.params()),
            epoch: 0,
            loss_curve: Vec::new(),
        }
    }
}

/// Loss and parameter gradients for a single sample.
pub fn sample_gradient<T: Real, N: Network<T>>(
    net: &N,
    sample: &Sample<T>,
    loss: &LossConfig,
) -> Result<(f64, Vec<Tensor<T>>)> {
    let (mut g, params, _, out) = record(net, &sample.input)?;
    let l = g.combined_loss(out, &sample.label, loss)?;
    let value = g.value(l).item().to_f64().unwrap_or(f64::NAN);
    let grads = g.backward(l)?;
    let grads = params
        .iter()
        .zip(net.params())
        .map(|(&v, p)| grads.get_or_zeros(v, p.shape()))
        .collect();
    Ok((value, grads))
}

/// Epoch-`epoch` visiting order; depends only on `(seed, epoch, n)`.
pub fn epoch_order(seed: u64, epoch: usize, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(frame_seed(seed, epoch as u64)));
    order
}

/// Run one epoch of minibatch Adam and append its mean loss to `state`.
/// The visiting order is seeded by `adam.seed` and the epoch number.
///
/// Per-sample gradients are computed in parallel and summed in batch order,
/// so the result does not depend on the thread count.
pub fn train_epoch<T: Real, N: Network<T>>(
    net: &mut N,
    data: &[Sample<T>],
    state: &mut TrainState<T>,
    loss: &LossConfig,
    adam: &AdamConfig,
    cfg: &TrainConfig,
) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Data("training set is empty".into()));
    }
    let order = epoch_order(adam.seed, state.epoch, data.len());
    let mut total = 0.0;
    for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
        let results: Vec<Result<(f64, Vec<Tensor<T>>)>> = batch
            .par_iter()
            .map(|&i| sample_gradient(&*net, &data[i], loss))
            .collect();
        let mut sum: Option<Vec<Tensor<T>>> = None;
        for r in results {
            let (l, grads) = r.map_err(|e| batch_error(state.epoch, b, e))?;
            if !l.is_finite() {
                return Err(Error::Numeric(format!("epoch {} batch {b}: loss is {l}", state.epoch)));
            }
            total += l;
            match &mut sum {
                None => sum = Some(grads),
                Some(acc) => acc.iter_mut().zip(&grads).for_each(|(a, g)| a.add_assign(g)),
            }
        }
        let mut grads = sum.expect("batches are nonempty");
        let inv = T::lit(1.0 / batch.len() as f64);
        grads.iter_mut().for_each(|g| g.scale(inv));
        adam_step(net.params_mut(), &grads, &mut state.adam, adam)?;
        if net.params().iter().any(|p| !p.is_finite()) {
            return Err(Error::Numeric(format!(
                "epoch {} batch {b}: parameters became non-finite",
                state.epoch
            )));
        }
    }
    let mean = total / data.len() as f64;
    state.epoch += 1;
    state.loss_curve.push(mean);
    Ok(mean)
}

fn batch_error(epoch: usize, batch: usize, e: Error) -> Error {
    match e {
        Error::Numeric(m) => Error::Numeric(format!("epoch {epoch} batch {batch}: {m}")),
        other => other,
    }
}

/// Train from scratch for `cfg.epochs`; returns the per-epoch mean loss.
pub fn train<T: Real, N: Network<T>>(
    net: &mut N,
    data: &[Sample<T>],
    loss: &LossConfig,
    adam: &AdamConfig,
    cfg: &TrainConfig,
) -> Result<Vec<f64>> {
    loss.validate()?;
    adam.validate()?;
    cfg.validate()?;
    let mut state = TrainState::new(&*net);
    for _ in 0..cfg.epochs {
        train_epoch(net, data, &mut state, loss, adam, cfg)?;
    }
    Ok(state.loss_curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{UNet, UNetConfig};
    use rand::Rng;

    fn micro_config() -> UNetConfig {
        UNetConfig {
            levels: 2,
            encoder_filters: vec![4, 8],
            history: 1,
            n_range: 8,
            n_az_in: 4,
            az_upsample_factor: 2,
        }
    }

    /// Labels are a fixed function of the input so the set is learnable.
    fn micro_data(n: usize, seed: u64) -> Vec<Sample<f32>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let input: Vec<f32> = (0..2 * 8 * 4)
                    .map(|_| {
                        if rng.gen_bool(0.2) {
                            rng.gen_range(0.5..1.0)
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let cur = &input[32..];
                let label: Vec<f32> = (0..8 * 8)
                    .map(|i| if cur[(i / 8) * 4 + (i % 8) / 2] > 0.0 { 1.0 } else { 0.0 })
                    .collect();
                Sample {
                    input: Tensor::from_vec(&[2, 8, 4], input).unwrap(),
                    label: Tensor::from_vec(&[1, 8, 8], label).unwrap(),
                }
            })
            .collect()
    }

    #[test]
    fn overfits_micro_set() {
        let data = micro_data(16, 3);
        let mut net = UNet::<f32>::new(micro_config(), 11).unwrap();
        let adam = AdamConfig {
            lr: 1e-2,
            seed: 1,
            ..AdamConfig::default()
        };
        let cfg = TrainConfig {
            epochs: 20,
            batch_size: 4,
        };
        let curve = train(&mut net, &data, &LossConfig::default(), &adam, &cfg).unwrap();
        assert_eq!(curve.len(), 20);
        assert!(curve[19] < 0.25 * curve[0], "{curve:?}");
    }

    #[test]
    fn replay_is_identical_and_resume_matches() {
        let data = micro_data(6, 4);
        let loss = LossConfig::default();
        let adam = AdamConfig {
            seed: 9,
            ..AdamConfig::default()
        };
        let cfg = TrainConfig {
            epochs: 4,
            batch_size: 4,
        };
        let mut a = UNet::<f32>::new(micro_config(), 1).unwrap();
        let ca = train(&mut a, &data, &loss, &adam, &cfg).unwrap();
        let mut b = UNet::<f32>::new(micro_config(), 1).unwrap();
        let cb = train(&mut b, &data, &loss, &adam, &cfg).unwrap();
        assert_eq!(ca, cb);
        assert_eq!(a, b);

        let mut c = UNet::<f32>::new(micro_config(), 1).unwrap();
        let mut state = TrainState::new(&c);
        for _ in 0..2 {
            train_epoch(&mut c, &data, &mut state, &loss, &adam, &cfg).unwrap();
        }
        let mut resumed = c.clone();
        let mut resumed_state = state.clone();
        for _ in 0..2 {
            train_epoch(&mut resumed, &data, &mut resumed_state, &loss, &adam, &cfg).unwrap();
        }
        assert_eq!(resumed_state.loss_curve, ca);
        assert_eq!(resumed, a);
    }

    #[test]
    fn nan_input_reports_batch() {
        let mut data = micro_data(4, 5);
        data[2].input.data_mut()[0] = f32::NAN;
        let mut net = UNet::<f32>::new(micro_config(), 0).unwrap();
        let cfg = TrainConfig {
            epochs: 1,
            batch_size: 1,
        };
        let err = train(&mut net, &data, &LossConfig::default(), &AdamConfig::default(), &cfg).unwrap_err();
        match err {
            Error::Numeric(m) => assert!(m.contains("batch"), "{m}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn shuffle_depends_on_epoch() {
        assert_eq!(epoch_order(1, 0, 10), epoch_order(1, 0, 10));
        assert_ne!(epoch_order(1, 0, 10), epoch_order(1, 1, 10));
        let mut o = epoch_order(3, 2, 10);
        o.sort();
        assert_eq!(o, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn rejects_empty_set() {
        let mut net = UNet::<f32>::new(micro_config(), 0).unwrap();
        assert!(train(
            &mut net,
            &[],
            &LossConfig::default(),
            &AdamConfig::default(),
            &TrainConfig::default()
        )
        .is_err());
    }
}
