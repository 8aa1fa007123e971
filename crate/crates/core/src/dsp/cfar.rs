use serde::{Deserialize, Serialize};

use super::image::{ImageKind, PolarImage};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CfarConfig {
    /// Guard cells per side, on both axes.
    pub guard_cells: usize,
    /// Training cells per side beyond the guard ring.
    pub train_cells: usize,
    pub threshold_db: f64,
}

impl Default for CfarConfig {
    fn default() -> Self {
        Self {
            guard_cells: 2,
            train_cells: 8,
            threshold_db: 8.0,
        }
    }
}

impl CfarConfig {
    pub fn with_threshold(self, threshold_db: f64) -> Self {
        Self { threshold_db, ..self }
    }

    /// Full window side length.
    pub fn window(&self) -> usize {
        2 * (self.guard_cells + self.train_cells) + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.train_cells < 1 {
            return Err(Error::Config("CFAR needs at least one training cell".into()));
        }
        if !self.threshold_db.is_finite() {
            return Err(Error::Config("CFAR threshold must be finite".into()));
        }
        Ok(())
    }
}

/// Summed-area table over `(rows + 1) x (cols + 1)`.
struct Integral {
    cols: usize,
    sums: Vec<f64>,
}

impl Integral {
    fn new(values: &[f64], rows: usize, cols: usize) -> Self {
        let w = cols + 1;
        let mut sums = vec![0.0; (rows + 1) * w];
        for r in 0..rows {
            let mut row_sum = 0.0;
            for c in 0..cols {
                row_sum += values[r * cols + c];
                sums[(r + 1) * w + c + 1] = sums[r * w + c + 1] + row_sum;
            }
        }
        Self { cols, sums }
    }

    /// Sum over rows `r0..r1` and columns `c0..c1` (half-open).
    fn sum(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> f64 {
        let w = self.cols + 1;
        self.sums[r1 * w + c1] - self.sums[r0 * w + c1] - self.sums[r1 * w + c0] + self.sums[r0 * w + c0]
    }
}

/// Two-dimensional cell-averaging CFAR on a magnitude image.
///
/// A cell is detected when its power exceeds the mean power of its training
/// ring times `10^(threshold_db / 10)`. Near the borders the window is cut at
/// the image edge and the mean uses only the training cells that remain.
pub fn ca_cfar(img: &PolarImage, cfg: &CfarConfig) -> Result<PolarImage> {
    cfg.validate()?;
    if img.kind != ImageKind::Magnitude {
        return Err(Error::Data(format!(
            "CFAR expects a magnitude image, got {:?}",
            img.kind
        )));
    }
    let (rows, cols) = img.shape();
    if rows < cfg.window() || cols < cfg.window() {
        return Err(Error::Config(format!(
            "image {rows}x{cols} is smaller than the {w}x{w} CFAR window",
            w = cfg.window()
        )));
    }
    let power: Vec<f64> = img.data.iter().map(|&m| (m as f64) * (m as f64)).collect();
    let table = Integral::new(&power, rows, cols);
    let factor = 10f64.powf(cfg.threshold_db / 10.0);
    let outer = cfg.guard_cells + cfg.train_cells;
    let inner = cfg.guard_cells;

    let mut out = PolarImage::zeros(rows, cols, img.max_range, ImageKind::Binary, img.grid);
    let span = |c: usize, half: usize, n: usize| (c.saturating_sub(half), (c + half + 1).min(n));
    for r in 0..rows {
        let (or0, or1) = span(r, outer, rows);
        let (ir0, ir1) = span(r, inner, rows);
        for c in 0..cols {
            let (oc0, oc1) = span(c, outer, cols);
            let (ic0, ic1) = span(c, inner, cols);
            let count = (or1 - or0) * (oc1 - oc0) - (ir1 - ir0) * (ic1 - ic0);
            let total = table.sum(or0, or1, oc0, oc1) - table.sum(ir0, ir1, ic0, ic1);
            let mean = total / count as f64;
            if power[r * cols + c] > mean * factor {
                out.set(r, c, 1.0);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::AzimuthGrid;
    use proptest::prelude::*;

    fn flat_with_cut(cut_power: f32) -> PolarImage {
        let n = 32;
        let mut img = PolarImage::from_data(
            n,
            n,
            vec![1.0; n * n],
            10.0,
            ImageKind::Magnitude,
            AzimuthGrid::Beamspace,
        )
        .unwrap();
        img.set(16, 16, cut_power.sqrt());
        img
    }

    #[test]
    fn strong_cell_detected() {
        // 10 > 1 * 10^0.8 = 6.31
        let out = ca_cfar(&flat_with_cut(10.0), &CfarConfig::default()).unwrap();
        assert_eq!(out.get(16, 16), 1.0);
        assert_eq!(out.count_nonzero(), 1);
    }

    #[test]
    fn weak_cell_rejected() {
        let out = ca_cfar(&flat_with_cut(5.0), &CfarConfig::default()).unwrap();
        assert_eq!(out.count_nonzero(), 0);
    }

    #[test]
    fn constant_image_has_no_detections() {
        for db in [0.5, 1.0, 4.0, 8.0] {
            let out = ca_cfar(&flat_with_cut(1.0), &CfarConfig::default().with_threshold(db)).unwrap();
            assert_eq!(out.count_nonzero(), 0);
        }
    }

    #[test]
    fn border_cells_use_truncated_window() {
        let mut img = flat_with_cut(1.0);
        img.set(0, 0, 10f32.sqrt());
        let out = ca_cfar(&img, &CfarConfig::default()).unwrap();
        assert_eq!(out.get(0, 0), 1.0);
    }

    #[test]
    fn rejects_small_images() {
        let img = PolarImage::zeros(8, 8, 10.0, ImageKind::Magnitude, AzimuthGrid::Beamspace);
        assert!(ca_cfar(&img, &CfarConfig::default()).is_err());
    }

    proptest! {
        #[test]
        fn higher_threshold_never_adds_detections(
            data in prop::collection::vec(0.0f32..10.0, 24 * 24),
            lo in 0.0f64..8.0,
            delta in 0.0f64..4.0,
        ) {
            let img = PolarImage::from_data(24, 24, data, 10.0, ImageKind::Magnitude, AzimuthGrid::Beamspace).unwrap();
            let a = ca_cfar(&img, &CfarConfig::default().with_threshold(lo)).unwrap();
            let b = ca_cfar(&img, &CfarConfig::default().with_threshold(lo + delta)).unwrap();
            for (x, y) in a.data.iter().zip(&b.data) {
                prop_assert!(*y <= *x);
            }
        }
    }
}
