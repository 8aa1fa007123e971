use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// What the values of a [`PolarImage`] mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageKind {
    /// Linear magnitude, >= 0.
    Magnitude,
    /// Normalized intensity in [0, 1].
    Normalized,
    /// Per-pixel occupancy probability in [0, 1].
    Probability,
    /// Occupancy in {0, 1}.
    Binary,
}

/// How azimuth columns map to bearing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AzimuthGrid {
    /// FFT beamspace: column `b` of `n` has `sin(theta) = 2 (b - n/2) / n`.
    Beamspace,
    /// Bin centers uniform in angle over -90..+90 degrees.
    Uniform,
}

/// Range-azimuth grid. Rows are range (increasing), columns are azimuth
/// from -90 to +90 degrees; storage is row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarImage {
    pub n_range: usize,
    pub n_azimuth: usize,
    pub data: Vec<f32>,
    pub max_range: f64,
    pub kind: ImageKind,
    pub grid: AzimuthGrid,
}

impl PolarImage {
    pub fn zeros(n_range: usize, n_azimuth: usize, max_range: f64, kind: ImageKind, grid: AzimuthGrid) -> Self {
        Self {
            n_range,
            n_azimuth,
            data: vec![0.0; n_range * n_azimuth],
            max_range,
            kind,
            grid,
        }
    }

    pub fn from_data(
        n_range: usize,
        n_azimuth: usize,
        data: Vec<f32>,
        max_range: f64,
        kind: ImageKind,
        grid: AzimuthGrid,
    ) -> Result<Self> {
        let img = Self {
            n_range,
            n_azimuth,
            data,
            max_range,
            kind,
            grid,
        };
        img.validate()?;
        Ok(img)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.data[row * self.n_azimuth + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: f32) {
        self.data[row * self.n_azimuth + col] = v;
    }

    pub fn count_nonzero(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0.0).count()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_range, self.n_azimuth)
    }

    /// Range of the center of `row`, meters.
    pub fn range_of(&self, row: usize) -> f64 {
        (row as f64 + 0.5) * self.max_range / self.n_range as f64
    }

    /// Bearing of `col` in radians, positive to the right.
    pub fn azimuth_of(&self, col: usize) -> f64 {
        let n = self.n_azimuth as f64;
        match self.grid {
            AzimuthGrid::Beamspace => (2.0 * (col as f64 - n / 2.0) / n).clamp(-1.0, 1.0).asin(),
            AzimuthGrid::Uniform => -std::f64::consts::FRAC_PI_2 + (col as f64 + 0.5) * std::f64::consts::PI / n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.data.len() != self.n_range * self.n_azimuth {
            return Err(Error::Shape(format!(
                "image data has {} values, expected {}x{}",
                self.data.len(),
                self.n_range,
                self.n_azimuth
            )));
        }
        let in_range = |v: f32| match self.kind {
            ImageKind::Magnitude => v >= 0.0,
            ImageKind::Normalized | ImageKind::Probability => (0.0..=1.0).contains(&v),
            ImageKind::Binary => v == 0.0 || v == 1.0,
        };
        if let Some(bad) = self.data.iter().position(|&v| !v.is_finite() || !in_range(v)) {
            return Err(Error::Data(format!(
                "pixel {bad} = {} is invalid for {:?} image",
                self.data[bad], self.kind
            )));
        }
        Ok(())
    }
}
