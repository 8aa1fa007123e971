use super::image::{ImageKind, PolarImage};
use crate::{Error, Result};

/// Fraction of nonzero pixels kept by [`low_threshold`] unless configured
/// otherwise. At the default scale (256 x 64, CFAR window 2 + 8) survivors
/// outnumber CA-CFAR(8 dB) detections on the same frame about fifteen to one
/// at the median over the calibration set.
pub const DEFAULT_KEEP_FRACTION: f64 = 0.25;

const LEVELS: f32 = 255.0;

/// `log10(1 + v)`, min-max scaled per image to [0, 1], quantized to 8 bits.
/// A constant image maps to all zeros.
pub fn log_normalize(img: &PolarImage) -> Result<PolarImage> {
    if img.kind != ImageKind::Magnitude {
        return Err(Error::Data(format!(
            "log_normalize expects a magnitude image, got {:?}",
            img.kind
        )));
    }
    let logs: Vec<f64> = img
        .data
        .iter()
        .map(|&v| (v as f64).ln_1p() / std::f64::consts::LN_10)
        .collect();
    let (lo, hi) = logs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    let mut out = img.clone();
    out.kind = ImageKind::Normalized;
    if hi.is_nan() || lo.is_nan() || hi <= lo {
        out.data.fill(0.0);
        return Ok(out);
    }
    for (o, v) in out.data.iter_mut().zip(&logs) {
        let scaled = ((v - lo) / (hi - lo)) as f32;
        *o = (scaled * LEVELS).round() / LEVELS;
    }
    Ok(out)
}

/// Keep the brightest `keep_fraction` of the nonzero pixels and zero the
/// rest. Survivors keep their intensity; ties at the cut all survive.
pub fn low_threshold(img: &PolarImage, keep_fraction: f64) -> Result<PolarImage> {
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(Error::Config(format!(
            "keep_fraction must be in (0, 1], got {keep_fraction}"
        )));
    }
    let mut nonzero: Vec<f32> = img.data.iter().copied().filter(|&v| v != 0.0).collect();
    let mut out = img.clone();
    if nonzero.is_empty() {
        return Ok(out);
    }
    nonzero.sort_by(|a, b| b.total_cmp(a));
    let keep = ((keep_fraction * nonzero.len() as f64) - 1e-9).ceil().max(1.0) as usize;
    let cut = nonzero[keep.min(nonzero.len()) - 1];
    for v in &mut out.data {
        if *v < cut {
            *v = 0.0;
        }
    }
    Ok(out)
}
