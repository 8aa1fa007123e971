//! Asymmetric U-Net for radar-to-lidar super-resolution.
//!
//! The input is a [`FrameStack`] of normalized radar heatmaps
//! (`history + 1` channels, `n_range x n_az_in`); the output is an
//! occupancy probability image `n_range x n_az_in * az_upsample_factor`.
//! The encoder/decoder is a plain U-Net; extra azimuth-only upsampling
//! stages after the decoder widen the output.

mod config;
mod network;
mod saliency;
mod stack;
mod train;

pub use config::{conv_specs, ConvSpec, UNetConfig};
pub use network::{predict, Network, PointwiseLinear, UNet};
pub use saliency::{input_gradient, saliency, saliency_fd_check};
pub use stack::FrameStack;
pub use train::{epoch_order, sample_gradient, train, train_epoch, Sample, TrainConfig, TrainState};
