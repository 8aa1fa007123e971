use std::fmt::Write as _;
use std::path::Path;

use crate::dsp::PolarImage;
use crate::{Error, Result};

/// 8-bit grayscale raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gray {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Gray {
    /// Min-max scaled to 0..=255; a constant input maps to 0. Far range is
    /// drawn at the top.
    pub fn from_values(values: &[f64], height: usize, width: usize) -> Self {
        let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        let span = hi - lo;
        let mut pixels = vec![0u8; width * height];
        for r in 0..height {
            for c in 0..width {
                let v = values[r * width + c];
                let g = if span > 0.0 {
                    ((v - lo) / span * 255.0).round()
                } else {
                    0.0
                };
                pixels[(height - 1 - r) * width + c] = g as u8;
            }
        }
        Self { width, height, pixels }
    }

    /// Values in [0, 1] mapped linearly to 0..=255 without rescaling.
    pub fn from_unit(img: &PolarImage) -> Self {
        let (height, width) = img.shape();
        let mut g = Self {
            width,
            height,
            pixels: vec![0; width * height],
        };
        for r in 0..img.n_range {
            for c in 0..img.n_azimuth {
                let x = img.get(r, c).clamp(0.0, 1.0);
                g.pixels[(img.n_range - 1 - r) * img.n_azimuth + c] = (x * 255.0).round() as u8;
            }
        }
        g
    }

    /// Nearest-neighbour widening by an integer factor.
    pub fn widen(&self, factor: usize) -> Self {
        let width = self.width * factor;
        let pixels = self
            .pixels
            .chunks(self.width)
            .flat_map(|row| row.iter().flat_map(|&p| std::iter::repeat_n(p, factor)))
            .collect();
        Self {
            width,
            height: self.height,
            pixels,
        }
    }

    /// Side-by-side panels separated by 2-pixel mid-gray bars.
    pub fn hstack(panels: &[Gray]) -> Result<Self> {
        let height = panels.first().map_or(0, |p| p.height);
        if panels.iter().any(|p| p.height != height) {
            return Err(Error::Shape("panels differ in height".into()));
        }
        const GAP: usize = 2;
        let width = panels.iter().map(|p| p.width).sum::<usize>() + GAP * panels.len().saturating_sub(1);
        let mut pixels = Vec::with_capacity(width * height);
        for r in 0..height {
            for (i, p) in panels.iter().enumerate() {
                if i > 0 {
                    pixels.extend([128u8; GAP]);
                }
                pixels.extend_from_slice(&p.pixels[r * p.width..(r + 1) * p.width]);
            }
        }
        Ok(Self { width, height, pixels })
    }

    /// Plain (P2) PGM text, lines no longer than 70 characters.
    pub fn to_pgm(&self) -> String {
        let mut s = format!("P2\n{} {}\n255\n", self.width, self.height);
        for row in self.pixels.chunks(self.width.max(1)) {
            let mut line = String::new();
            for &p in row {
                if line.len() + 4 > 70 {
                    s.push_str(&line);
                    s.push('\n');
                    line.clear();
                }
                if !line.is_empty() {
                    line.push(' ');
                }
                let _ = write!(line, "{p}");
            }
            s.push_str(&line);
            s.push('\n');
        }
        s
    }

    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_pgm()).map_err(|e| Error::io(path, e))
    }
}

/// Parse a plain PGM produced by [`Gray::to_pgm`].
pub fn parse_pgm(text: &str) -> Result<Gray> {
    let mut tok = text.split_ascii_whitespace();
    let mut next = |what: &str| tok.next().ok_or_else(|| Error::Data(format!("pgm: missing {what}")));
    if next("magic")? != "P2" {
        return Err(Error::Data("pgm: not a plain PGM".into()));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|e| Error::Data(format!("pgm: {e}")));
    let width = num(next("width")?)?;
    let height = num(next("height")?)?;
    let _max = num(next("maxval")?)?;
    let pixels = (0..width * height)
        .map(|_| num(next("pixel")?).map(|v| v as u8))
        .collect::<Result<Vec<_>>>()?;
    Ok(Gray { width, height, pixels })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{AzimuthGrid, ImageKind};

    #[test]
    fn pgm_roundtrip_and_line_length() {
        let vals: Vec<f64> = (0..40 * 3).map(|i| i as f64).collect();
        let g = Gray::from_values(&vals, 3, 40);
        let text = g.to_pgm();
        assert!(text.starts_with("P2\n40 3\n255\n"));
        assert!(text.lines().all(|l| l.len() <= 70));
        assert_eq!(parse_pgm(&text).unwrap(), g);
        // min at bottom-left, max at top-right
        assert_eq!(g.pixels[2 * 40], 0);
        assert_eq!(g.pixels[39], 255);
    }

    #[test]
    fn constant_image_is_black() {
        let g = Gray::from_values(&[3.0; 6], 2, 3);
        assert!(g.pixels.iter().all(|&p| p == 0));
    }

    #[test]
    fn stacking_and_widening() {
        let mut img = PolarImage::zeros(2, 2, 1.0, ImageKind::Probability, AzimuthGrid::Uniform);
        img.set(0, 1, 1.0);
        let g = Gray::from_unit(&img);
        assert_eq!(g.pixels, vec![0, 0, 0, 255]);
        let w = g.widen(2);
        assert_eq!(w.width, 4);
        assert_eq!(w.pixels[4..], [0, 0, 255, 255]);
        let t = Gray::hstack(&[w.clone(), g]).unwrap();
        assert_eq!(t.width, 4 + 2 + 2);
        assert_eq!(t.pixels[4..6], [128, 128]);
    }
}
