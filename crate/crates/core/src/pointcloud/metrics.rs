use rayon::prelude::*;
use serde::Serialize;

use super::cloud::PointCloud2D;
use super::nn::nn_accel;
use crate::{Error, Result};

/// Percentiles at which CDFs are sampled.
pub const CDF_PERCENTILES: [u32; 19] = [
    5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60, 65, 70, 75, 80, 85, 90, 95,
];

fn require_nonempty(a: &PointCloud2D, b: &PointCloud2D) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Data(format!(
            "point-cloud metric needs two nonempty clouds, got {} and {} points",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Symmetric Chamfer distance: the mean of all |a| + |b| nearest-neighbour
/// distances, a to b and b to a.
pub fn chamfer(a: &PointCloud2D, b: &PointCloud2D) -> Result<f64> {
    require_nonempty(a, b)?;
    let ab = nn_accel(&a.points, &b.points);
    let ba = nn_accel(&b.points, &a.points);
    Ok((ab.iter().sum::<f64>() + ba.iter().sum::<f64>()) / (ab.len() + ba.len()) as f64)
}

/// Modified Hausdorff distance: the larger of the two directed median
/// nearest-neighbour distances.
pub fn mod_hausdorff(a: &PointCloud2D, b: &PointCloud2D) -> Result<f64> {
    require_nonempty(a, b)?;
    let mut ab = nn_accel(&a.points, &b.points);
    let mut ba = nn_accel(&b.points, &a.points);
    Ok(median(&mut ab).max(median(&mut ba)))
}

/// Median with the mean of the two middle values for even lengths. Sorts `v`.
pub fn median(v: &mut [f64]) -> f64 {
    percentile(v, 50.0)
}

/// Linearly interpolated percentile (`p` in 0..=100). Sorts `v`; NaN if empty.
pub fn percentile(v: &mut [f64], p: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let pos = p / 100.0 * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// Both metrics for one prediction/ground-truth pair, or `None` when
/// either cloud is empty.
pub fn pair_metrics(pred: &PointCloud2D, truth: &PointCloud2D) -> Option<(f64, f64)> {
    Some((chamfer(pred, truth).ok()?, mod_hausdorff(pred, truth).ok()?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    /// Per-pair values of the scored (nonempty) pairs, in input order.
    pub chamfer: Vec<f64>,
    pub mod_hausdorff: Vec<f64>,
    /// Pairs skipped because a cloud was empty.
    pub missing: usize,
    pub median_chamfer: f64,
    pub median_mod_hausdorff: f64,
    /// `(percentile, value)` at [`CDF_PERCENTILES`].
    pub cdf_chamfer: Vec<(u32, f64)>,
    pub cdf_mod_hausdorff: Vec<(u32, f64)>,
}

impl MetricsReport {
    pub fn from_pairs(pairs: &[Option<(f64, f64)>]) -> Self {
        let (chamfer, mod_hausdorff): (Vec<f64>, Vec<f64>) = pairs.iter().flatten().copied().unzip();
        let missing = pairs.len() - chamfer.len();
        let cdf = |v: &[f64]| {
            let mut s = v.to_vec();
            CDF_PERCENTILES
                .iter()
                .map(|&p| (p, percentile(&mut s, p as f64)))
                .collect::<Vec<_>>()
        };
        Self {
            median_chamfer: median(&mut chamfer.clone()),
            median_mod_hausdorff: median(&mut mod_hausdorff.clone()),
            cdf_chamfer: cdf(&chamfer),
            cdf_mod_hausdorff: cdf(&mod_hausdorff),
            chamfer,
            mod_hausdorff,
            missing,
        }
    }

    /// Score `(prediction, truth)` pairs in parallel; order is preserved.
    pub fn score(pairs: &[(PointCloud2D, PointCloud2D)]) -> Self {
        let m: Vec<_> = pairs.par_iter().map(|(p, t)| pair_metrics(p, t)).collect();
        Self::from_pairs(&m)
    }

    pub fn scored(&self) -> usize {
        self.chamfer.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointcloud::nn_brute;
    use proptest::prelude::*;

    fn pc(p: &[[f64; 2]]) -> PointCloud2D {
        PointCloud2D::new(p.to_vec())
    }

    #[test]
    fn chamfer_hand_values() {
        assert_eq!(chamfer(&pc(&[[0.0, 0.0]]), &pc(&[[3.0, 4.0]])).unwrap(), 5.0);
        // a->b: 0, 1; b->a: 0
        assert_eq!(
            chamfer(&pc(&[[0.0, 0.0], [1.0, 0.0]]), &pc(&[[0.0, 0.0]])).unwrap(),
            1.0 / 3.0
        );
    }

    #[test]
    fn mod_hausdorff_hand_value() {
        let a = pc(&[[0.0, 0.0], [2.0, 0.0], [4.0, 0.0]]);
        let b = pc(&[[0.0, 0.0]]);
        assert_eq!(mod_hausdorff(&a, &b).unwrap(), 2.0);
        assert_eq!(mod_hausdorff(&b, &a).unwrap(), 2.0);
    }

    #[test]
    fn empty_cloud_is_missing() {
        assert!(chamfer(&pc(&[]), &pc(&[[1.0, 1.0]])).is_err());
        assert!(pair_metrics(&pc(&[[1.0, 1.0]]), &pc(&[])).is_none());
        let r = MetricsReport::from_pairs(&[Some((1.0, 2.0)), None, Some((3.0, 4.0))]);
        assert_eq!(r.missing, 1);
        assert_eq!(r.scored(), 2);
        assert_eq!(r.median_chamfer, 2.0);
        assert_eq!(r.median_mod_hausdorff, 3.0);
    }

    #[test]
    fn percentile_interpolates() {
        let mut v = vec![4.0, 1.0, 3.0, 2.0];
        assert_eq!(percentile(&mut v, 0.0), 1.0);
        assert_eq!(percentile(&mut v, 100.0), 4.0);
        assert_eq!(percentile(&mut v, 50.0), 2.5);
        // position 0.25 * 3 = 0.75
        assert!((percentile(&mut v, 25.0) - 1.75).abs() < 1e-15);
    }

    #[test]
    fn cdf_is_nondecreasing() {
        let pairs: Vec<_> = (0..37)
            .map(|i| Some(((i * 7 % 11) as f64, (i * 5 % 13) as f64)))
            .collect();
        let r = MetricsReport::from_pairs(&pairs);
        assert_eq!(r.cdf_chamfer.len(), 19);
        for w in r.cdf_chamfer.windows(2).chain(r.cdf_mod_hausdorff.windows(2)) {
            assert!(w[0].1 <= w[1].1);
        }
    }

    fn cloud() -> impl Strategy<Value = PointCloud2D> {
        prop::collection::vec((-10.0f64..10.0, 0.0f64..10.0).prop_map(|(x, y)| [x, y]), 1..60)
            .prop_map(PointCloud2D::new)
    }

    proptest! {
        #[test]
        fn self_distance_is_zero(a in cloud()) {
            prop_assert_eq!(chamfer(&a, &a).unwrap(), 0.0);
            prop_assert_eq!(mod_hausdorff(&a, &a).unwrap(), 0.0);
        }

        #[test]
        fn symmetric(a in cloud(), b in cloud()) {
            prop_assert_eq!(chamfer(&a, &b).unwrap(), chamfer(&b, &a).unwrap());
            prop_assert_eq!(mod_hausdorff(&a, &b).unwrap(), mod_hausdorff(&b, &a).unwrap());
        }

        #[test]
        fn translation_invariant(a in cloud(), b in cloud(), dx in -5.0f64..5.0, dy in -5.0f64..5.0) {
            let c0 = chamfer(&a, &b).unwrap();
            let c1 = chamfer(&a.translated(dx, dy), &b.translated(dx, dy)).unwrap();
            let m0 = mod_hausdorff(&a, &b).unwrap();
            let m1 = mod_hausdorff(&a.translated(dx, dy), &b.translated(dx, dy)).unwrap();
            prop_assert!((c0 - c1).abs() < 1e-12);
            prop_assert!((m0 - m1).abs() < 1e-12);
        }

        #[test]
        fn chamfer_matches_brute_definition(a in cloud(), b in cloud()) {
            let ab = nn_brute(&a.points, &b.points);
            let ba = nn_brute(&b.points, &a.points);
            let expect = (ab.iter().sum::<f64>() + ba.iter().sum::<f64>()) / (ab.len() + ba.len()) as f64;
            prop_assert_eq!(chamfer(&a, &b).unwrap(), expect);
        }
    }
}
