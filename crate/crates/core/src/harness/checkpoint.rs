use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::format::{kind, read_block, Block};
use crate::autodiff::{AdamConfig, AdamState, LossConfig, Tensor};
use crate::model::{Network, TrainConfig, TrainState, UNet, UNetConfig};
use crate::sim::SimConfig;
use crate::{Error, Result};

/// JSON header of a checkpoint file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub unet: UNetConfig,
    pub sim: SimConfig,
    pub loss: LossConfig,
    pub adam: AdamConfig,
    pub train: TrainConfig,
    pub epoch: usize,
    pub adam_step: u64,
    pub loss_curve: Vec<f64>,
    pub n_tensors: usize,
}

/// Trained parameters plus the optimizer state needed to resume.
///
/// On disk: a `META` block of JSON, then one `PARAM` block per tensor, then
/// the Adam first and second moments in the same order.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub meta: CheckpointMeta,
    pub net: UNet<f32>,
    pub state: TrainState<f32>,
}

impl Checkpoint {
    pub fn new(
        net: UNet<f32>,
        state: TrainState<f32>,
        sim: &SimConfig,
        loss: &LossConfig,
        adam: &AdamConfig,
        train: &TrainConfig,
    ) -> Self {
        let meta = CheckpointMeta {
            unet: net.config().clone(),
            sim: sim.clone(),
            loss: *loss,
            adam: *adam,
            train: train.clone(),
            epoch: state.epoch,
            adam_step: state.adam.t,
            loss_curve: state.loss_curve.clone(),
            n_tensors: net.params().len(),
        };
        Self { meta, net, state }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let json = serde_json::to_vec(&self.meta)?;
        let mut blocks = vec![Block::u8(kind::META, &[json.len()], json)];
        let tensors = |k: u32, ts: &[Tensor<f32>]| -> Vec<Block> {
            ts.iter().map(|t| Block::f32(k, t.shape(), t.data().to_vec())).collect()
        };
        blocks.extend(tensors(kind::PARAM, self.net.params()));
        blocks.extend(tensors(kind::ADAM_M, &self.state.adam.m));
        blocks.extend(tensors(kind::ADAM_V, &self.state.adam.v));
        for b in &blocks {
            b.write_to(&mut w).map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);
        let ctx = |e: Error| Error::Data(format!("{}: {e}", path.display()));
        let meta_bytes = read_block(&mut r)
            .and_then(|b| b.expect_kind(kind::META)?.clone().into_u8())
            .map_err(ctx)?;
        let meta: CheckpointMeta = serde_json::from_slice(&meta_bytes).map_err(|e| ctx(Error::Json(e)))?;
        let mut read_group = |k: u32| -> Result<Vec<Tensor<f32>>> {
            (0..meta.n_tensors)
                .map(|_| {
                    let b = read_block(&mut r)?;
                    b.expect_kind(k)?;
                    let dims = b.dims();
                    Tensor::from_vec(&dims, b.into_f32()?)
                })
                .collect::<Result<_>>()
                .map_err(ctx)
        };
        let params = read_group(kind::PARAM)?;
        let m = read_group(kind::ADAM_M)?;
        let v = read_group(kind::ADAM_V)?;
        let net = UNet::from_params(meta.unet.clone(), params)?;
        let state = TrainState {
            adam: AdamState {
                m,
                v,
                t: meta.adam_step,
            },
            epoch: meta.epoch,
            loss_curve: meta.loss_curve.clone(),
        };
        Ok(Self { meta, net, state })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::adam_step;

    #[test]
    fn roundtrip_is_bit_exact() {
        let cfg = UNetConfig {
            levels: 2,
            encoder_filters: vec![2, 4],
            history: 1,
            n_range: 4,
            n_az_in: 2,
            az_upsample_factor: 2,
        };
        let mut net = UNet::<f32>::new(cfg, 3).unwrap();
        let mut state = TrainState::new(&net);
        let grads: Vec<_> = net.params().iter().map(|p| p.map(|v| v * 0.37 + 1e-3)).collect();
        adam_step(net.params_mut(), &grads, &mut state.adam, &AdamConfig::default()).unwrap();
        state.epoch = 1;
        state.loss_curve = vec![0.123456789012345, 1.0 / 3.0];
        let ck = Checkpoint::new(
            net,
            state,
            &SimConfig::toy(),
            &LossConfig::default(),
            &AdamConfig::default(),
            &TrainConfig::default(),
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        ck.save(&path).unwrap();
        let back = Checkpoint::load(&path).unwrap();
        assert_eq!(back, ck);
        for (a, b) in back.net.params().iter().zip(ck.net.params()) {
            assert!(a.data().iter().zip(b.data()).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..4], b"RHD1");
    }

    #[test]
    fn missing_file_is_an_error() {
        assert!(Checkpoint::load(Path::new("/nonexistent/x.ckpt")).is_err());
    }
}
