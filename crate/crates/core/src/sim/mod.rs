//! Scene, trajectory and sensor simulation.
//!
//! Everything here is a pure function of its arguments and seeds: the same
//! `(scene, pose, config, seed)` always yields bit-identical lidar images and
//! radar snapshots. Smoke only gates the lidar; the radar path never reads it.

mod geometry;
mod lidar;
mod radar;
mod scene;
mod trajectory;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use geometry::{
    mirror_across_line, point_segment_distance, ray_segment_intersection, segments_intersect, wrap_angle, Vec2,
};
pub use lidar::{lidar_azimuth, lidar_scan};
pub use radar::{radar_snapshot, specular_gain, visible_reflectors, ArraySnapshot, Reflector, ReflectorSource};
pub use scene::{gen_scene, Bounds, EnvironmentKind, Scatterer, Scene, SceneFamily, Wall};
pub use trajectory::{gen_trajectory, Pose, CLEARANCE};

/// Sensor and image-grid parameters shared by the lidar and radar models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Maximum range of both sensors, meters.
    pub max_range: f64,
    pub n_range_bins: usize,
    pub n_radar_az_bins: usize,
    pub n_lidar_az_bins: usize,
    /// Half-angle of the specular acceptance cone, degrees.
    pub specular_halfangle: f64,
    pub ghost_order: usize,
    pub smoke: bool,
    pub rng_seed: u64,
    pub n_antennas: usize,
    pub n_fast_time: usize,
    /// Carrier wavelength, meters.
    pub wavelength: f64,
    /// Standard deviation of the complex noise per fast-time sample.
    pub noise_sigma: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            max_range: 10.0,
            n_range_bins: 256,
            n_radar_az_bins: 64,
            n_lidar_az_bins: 512,
            specular_halfangle: 25.0,
            ghost_order: 1,
            smoke: false,
            rng_seed: 0,
            n_antennas: 8,
            n_fast_time: 512,
            wavelength: 299_792_458.0 / 77e9,
            noise_sigma: 0.05,
        }
    }
}

impl SimConfig {
    /// Desk-scale grid: 64 range bins, 16 radar and 128 lidar azimuth bins.
    pub fn toy() -> Self {
        Self {
            n_range_bins: 64,
            n_radar_az_bins: 16,
            n_lidar_az_bins: 128,
            n_fast_time: 128,
            ..Self::default()
        }
    }

    /// Width of one range bin, meters.
    pub fn range_bin_width(&self) -> f64 {
        self.max_range / self.n_range_bins as f64
    }

    /// Lidar-to-radar azimuth ratio.
    pub fn super_resolution_factor(&self) -> usize {
        self.n_lidar_az_bins / self.n_radar_az_bins
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if !(self.max_range > 0.0 && self.max_range.is_finite()) {
            return bad("max_range must be positive");
        }
        if self.n_range_bins == 0 || self.n_radar_az_bins == 0 || self.n_lidar_az_bins == 0 {
            return bad("bin counts must be nonzero");
        }
        if !self.n_lidar_az_bins.is_multiple_of(self.n_radar_az_bins) {
            return bad("n_lidar_az_bins must be a multiple of n_radar_az_bins");
        }
        if self.n_antennas < 2 {
            return bad("n_antennas must be at least 2");
        }
        if !self.n_fast_time.is_power_of_two() {
            return bad("n_fast_time must be a power of two");
        }
        if self.n_range_bins > self.n_fast_time / 2 {
            return bad("n_range_bins must not exceed n_fast_time / 2");
        }
        if !self.n_radar_az_bins.is_power_of_two() || self.n_radar_az_bins < self.n_antennas {
            return bad("n_radar_az_bins must be a power of two no smaller than n_antennas");
        }
        if self.noise_sigma.is_nan() || self.noise_sigma < 0.0 || self.wavelength.is_nan() || self.wavelength <= 0.0 {
            return bad("noise_sigma must be >= 0 and wavelength > 0");
        }
        if !(0.0..=90.0).contains(&self.specular_halfangle) {
            return bad("specular_halfangle must be within [0, 90] degrees");
        }
        Ok(())
    }
}

/// Derive an independent per-frame seed from a trajectory seed.
pub fn frame_seed(traj_seed: u64, frame_index: u64) -> u64 {
    // splitmix64 finalizer over the combined words
    let mut z = traj_seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(frame_index.wrapping_add(1).wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_and_toy_configs_validate() {
        SimConfig::default().validate().unwrap();
        SimConfig::toy().validate().unwrap();
        assert_eq!(SimConfig::default().super_resolution_factor(), 8);
        assert_eq!(SimConfig::toy().super_resolution_factor(), 8);
    }

    #[test]
    fn rejects_non_multiple_lidar_bins() {
        let cfg = SimConfig {
            n_lidar_az_bins: 100,
            ..SimConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn frame_seeds_differ() {
        assert_ne!(frame_seed(1, 0), frame_seed(1, 1));
        assert_ne!(frame_seed(1, 0), frame_seed(2, 0));
        assert_eq!(frame_seed(5, 9), frame_seed(5, 9));
    }
}
