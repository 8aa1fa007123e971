use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::image::{AzimuthGrid, ImageKind, PolarImage};
use crate::sim::ArraySnapshot;
use crate::{Error, Result};

/// Range-compressed samples, row-major `[n_antennas][n_range_bins]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeProfiles {
    pub data: Vec<Complex64>,
    pub n_antennas: usize,
    pub n_range_bins: usize,
}

impl RangeProfiles {
    pub fn antenna(&self, k: usize) -> &[Complex64] {
        &self.data[k * self.n_range_bins..(k + 1) * self.n_range_bins]
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Periodic Hann window of length `n`.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// Hann-windowed FFT along fast time, keeping the first `n_range_bins`
/// positive-frequency bins.
pub fn range_fft(snap: &ArraySnapshot, n_range_bins: usize) -> Result<RangeProfiles> {
    let n = snap.n_fast_time;
    if n_range_bins > n / 2 {
        return Err(Error::Config(format!(
            "n_range_bins {n_range_bins} exceeds n_fast_time / 2 = {}",
            n / 2
        )));
    }
    let window = hann(n);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut data = Vec::with_capacity(snap.n_antennas * n_range_bins);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..snap.n_antennas {
        for ((b, s), w) in buf.iter_mut().zip(snap.antenna(k)).zip(&window) {
            *b = s * w;
        }
        fft.process(&mut buf);
        data.extend_from_slice(&buf[..n_range_bins]);
    }
    Ok(RangeProfiles {
        data,
        n_antennas: snap.n_antennas,
        n_range_bins,
    })
}

/// Zero-padded FFT across antennas for every range bin, shifted so column 0
/// is -90 degrees. Columns are uniform in `sin(theta)`.
pub fn azimuth_fft(profiles: &RangeProfiles, n_az_bins: usize, max_range: f64) -> Result<PolarImage> {
    if !n_az_bins.is_power_of_two() || n_az_bins < profiles.n_antennas {
        return Err(Error::Config(format!(
            "n_az_bins {n_az_bins} must be a power of two >= {} antennas",
            profiles.n_antennas
        )));
    }
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n_az_bins);
    let mut img = PolarImage::zeros(
        profiles.n_range_bins,
        n_az_bins,
        max_range,
        ImageKind::Magnitude,
        AzimuthGrid::Beamspace,
    );
    let half = n_az_bins / 2;
    let mut buf = vec![Complex64::new(0.0, 0.0); n_az_bins];
    for r in 0..profiles.n_range_bins {
        buf.fill(Complex64::new(0.0, 0.0));
        for (k, b) in buf.iter_mut().enumerate().take(profiles.n_antennas) {
            *b = profiles.data[k * profiles.n_range_bins + r];
        }
        fft.process(&mut buf);
        for (b, v) in buf.iter().enumerate() {
            img.set(r, (b + half) % n_az_bins, v.norm() as f32);
        }
    }
    Ok(img)
}
