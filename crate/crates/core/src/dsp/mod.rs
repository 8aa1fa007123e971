//! Range-azimuth processing, normalization, and the CA-CFAR baseline.

mod cfar;
mod fft;
mod image;
mod normalize;

pub use cfar::{ca_cfar, CfarConfig};
pub use fft::{azimuth_fft, hann, range_fft, RangeProfiles};
pub use image::{AzimuthGrid, ImageKind, PolarImage};
pub use normalize::{log_normalize, low_threshold, DEFAULT_KEEP_FRACTION};

use crate::sim::{ArraySnapshot, SimConfig};
use crate::Result;

/// Range FFT followed by azimuth FFT: the radar magnitude heatmap.
pub fn heatmap(snap: &ArraySnapshot, cfg: &SimConfig) -> Result<PolarImage> {
    let profiles = range_fft(snap, cfg.n_range_bins)?;
    azimuth_fft(&profiles, cfg.n_radar_az_bins, cfg.max_range)
}

/// Heatmap to network input: log-normalize then keep the brightest pixels.
pub fn network_input(magnitude: &PolarImage, keep_fraction: f64) -> Result<PolarImage> {
    low_threshold(&log_normalize(magnitude)?, keep_fraction)
}
