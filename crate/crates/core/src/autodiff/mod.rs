//! Minimal reverse-mode automatic differentiation over dense tensors.
//!
//! A [`Graph`] records operations as they are evaluated; [`Graph::backward`]
//! then walks the tape once in reverse. The op set is exactly what the
//! asymmetric U-Net needs (same-padded conv, ReLU, max-pool, nearest
//! upsampling, channel concat, sigmoid) plus the BCE and Dice losses.
//! Everything is generic over [`Real`] so the same code trains in `f32` and
//! is verified against central differences in `f64` by [`grad_check`].

mod adam;
mod gradcheck;
mod graph;
mod kernels;
mod loss;
mod tensor;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use gradcheck::{grad_check, grad_check_projected, relative_error, Coords, GradCheckReport};
pub use graph::{Grads, Graph, Var};
pub use loss::{bce_loss, combined_loss, dice_loss, LossConfig, BCE_CLAMP};
pub use tensor::{Real, Tensor};
