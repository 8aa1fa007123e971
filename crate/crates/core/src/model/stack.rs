use std::collections::VecDeque;

use crate::autodiff::{Real, Tensor};
use crate::dsp::PolarImage;
use crate::{Error, Result};

/// The last `history + 1` radar frames, oldest first. Missing history at the
/// start of a sequence reads as zero channels in front of the real ones.
#[derive(Debug, Clone)]
pub struct FrameStack {
    history: usize,
    n_range: usize,
    n_azimuth: usize,
    frames: VecDeque<PolarImage>,
}

impl FrameStack {
    pub fn new(history: usize, n_range: usize, n_azimuth: usize) -> Self {
        Self {
            history,
            n_range,
            n_azimuth,
            frames: VecDeque::with_capacity(history + 1),
        }
    }

    pub fn channels(&self) -> usize {
        self.history + 1
    }

    /// Frames pushed so far, capped at `history + 1`.
    pub fn filled(&self) -> usize {
        self.frames.len()
    }

    /// Append the current frame, dropping the oldest when full.
    pub fn push(&mut self, frame: PolarImage) -> Result<()> {
        if frame.shape() != (self.n_range, self.n_azimuth) {
            return Err(Error::Shape(format!(
                "frame stack holds {}x{} frames, got {:?}",
                self.n_range,
                self.n_azimuth,
                frame.shape()
            )));
        }
        if self.frames.len() == self.channels() {
            self.frames.pop_front();
        }
        self.frames.push_back(frame);
        Ok(())
    }

    /// `[history + 1, n_range, n_azimuth]`; channel `history` is the current frame.
    pub fn to_tensor<T: Real>(&self) -> Tensor<T> {
        let plane = self.n_range * self.n_azimuth;
        let mut data = vec![T::zero(); self.channels() * plane];
        let offset = self.channels() - self.frames.len();
        for (i, f) in self.frames.iter().enumerate() {
            let dst = &mut data[(offset + i) * plane..(offset + i + 1) * plane];
            for (d, &s) in dst.iter_mut().zip(&f.data) {
                *d = T::lit(s as f64);
            }
        }
        Tensor::from_vec(&[self.channels(), self.n_range, self.n_azimuth], data)
            .expect("stack tensor length matches shape")
    }
}
