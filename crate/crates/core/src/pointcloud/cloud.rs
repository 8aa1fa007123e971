use crate::dsp::{ImageKind, PolarImage};
use crate::{Error, Result};

/// Sensor-frame points: origin at the sensor, +y boresight, +x right.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud2D {
    pub points: Vec<[f64; 2]>,
}

impl PointCloud2D {
    pub fn new(points: Vec<[f64; 2]>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self::new(self.points.iter().map(|p| [p[0] + dx, p[1] + dy]).collect())
    }
}

/// Binary image of the pixels with `value >= tau`.
pub fn threshold_image(img: &PolarImage, tau: f64) -> Result<PolarImage> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::Config(format!("threshold tau={tau} must lie in (0, 1)")));
    }
    let data = img
        .data
        .iter()
        .map(|&v| if v as f64 >= tau { 1.0 } else { 0.0 })
        .collect();
    PolarImage::from_data(
        img.n_range,
        img.n_azimuth,
        data,
        img.max_range,
        ImageKind::Binary,
        img.grid,
    )
}

/// One point per nonzero pixel, at the pixel's range and azimuth center.
pub fn polar_to_points(img: &PolarImage) -> PointCloud2D {
    let mut points = Vec::with_capacity(img.count_nonzero());
    let az: Vec<(f64, f64)> = (0..img.n_azimuth)
        .map(|c| {
            let t = img.azimuth_of(c);
            (t.sin(), t.cos())
        })
        .collect();
    for r in 0..img.n_range {
        let rho = img.range_of(r);
        for (c, &(s, co)) in az.iter().enumerate() {
            if img.get(r, c) != 0.0 {
                points.push([rho * s, rho * co]);
            }
        }
    }
    PointCloud2D::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::AzimuthGrid;

    fn prob(values: &[f32]) -> PolarImage {
        PolarImage::from_data(
            1,
            values.len(),
            values.to_vec(),
            10.0,
            ImageKind::Probability,
            AzimuthGrid::Uniform,
        )
        .unwrap()
    }

    #[test]
    fn threshold_keeps_values_at_or_above_tau() {
        let b = threshold_image(&prob(&[0.4, 0.6, 0.5, 0.1]), 0.5).unwrap();
        assert_eq!(b.data, vec![0.0, 1.0, 1.0, 0.0]);
        assert_eq!(b.kind, ImageKind::Binary);
        let none = threshold_image(&prob(&[0.1, 0.2]), 0.5).unwrap();
        assert_eq!(none.count_nonzero(), 0);
        assert!(threshold_image(&prob(&[0.1]), 1.0).is_err());
    }

    #[test]
    fn higher_tau_keeps_subset() {
        let img = prob(&[0.1, 0.35, 0.5, 0.72, 0.9, 0.3, 0.7]);
        let hi = threshold_image(&img, 0.7).unwrap();
        let lo = threshold_image(&img, 0.3).unwrap();
        for (h, l) in hi.data.iter().zip(&lo.data) {
            assert!(*h <= *l);
        }
    }

    #[test]
    fn boresight_bin_center() {
        let mut img = PolarImage::zeros(256, 64, 10.0, ImageKind::Binary, AzimuthGrid::Beamspace);
        img.set(127, 32, 1.0);
        let pc = polar_to_points(&img);
        assert_eq!(pc.len(), 1);
        let [x, y] = pc.points[0];
        assert!(x.abs() < 1e-12);
        // (127 + 0.5) * 10 / 256
        assert!((y - 4.98046875).abs() < 1e-12);
    }

    #[test]
    fn left_edge_is_negative_x() {
        let mut img = PolarImage::zeros(4, 512, 10.0, ImageKind::Binary, AzimuthGrid::Uniform);
        img.set(3, 0, 1.0);
        let [x, y] = polar_to_points(&img).points[0];
        assert!(x < 0.0);
        assert!(y.abs() < 0.05 * x.abs());
        assert!(y >= 0.0);
    }

    #[test]
    fn empty_image_empty_cloud() {
        let img = PolarImage::zeros(8, 8, 10.0, ImageKind::Binary, AzimuthGrid::Uniform);
        assert!(polar_to_points(&img).is_empty());
    }
}
