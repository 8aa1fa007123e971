use std::f64::consts::PI;

use super::geometry::ray_segment_intersection;
use super::scene::Scene;
use super::trajectory::Pose;
use super::SimConfig;
use crate::dsp::{AzimuthGrid, ImageKind, PolarImage};

/// Bearing of lidar column `col` out of `n` columns spanning -90..+90 degrees
/// (bin centers, uniform in angle).
pub fn lidar_azimuth(col: usize, n: usize) -> f64 {
    -PI / 2.0 + (col as f64 + 0.5) * PI / n as f64
}

/// First-hit ray cast over the forward half plane, one ray per azimuth
/// column. Point scatterers are invisible to the lidar slice; only walls
/// return.
pub fn lidar_scan(scene: &Scene, pose: &Pose, cfg: &SimConfig) -> PolarImage {
    let mut img = PolarImage::zeros(
        cfg.n_range_bins,
        cfg.n_lidar_az_bins,
        cfg.max_range,
        ImageKind::Binary,
        AzimuthGrid::Uniform,
    );
    if cfg.smoke {
        return img;
    }
    let origin = pose.position();
    let bin = cfg.range_bin_width();
    for col in 0..cfg.n_lidar_az_bins {
        let dir = pose.bearing_direction(lidar_azimuth(col, cfg.n_lidar_az_bins));
        let hit = scene
            .walls
            .iter()
            .filter_map(|w| ray_segment_intersection(origin, dir, w.p0, w.p1))
            .fold(f64::INFINITY, f64::min);
        if hit < cfg.max_range {
            let row = ((hit / bin).floor() as usize).min(cfg.n_range_bins - 1);
            img.set(row, col, 1.0);
        }
    }
    img
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{Bounds, Vec2, Wall};

    fn one_wall_scene(y: f64, half_width: f64) -> Scene {
        let mut scene = Scene::empty(Bounds {
            min: Vec2::new(-8.0, -1.0),
            max: Vec2::new(8.0, 8.0),
        });
        scene.walls.push(Wall {
            p0: Vec2::new(-half_width, y),
            p1: Vec2::new(half_width, y),
            reflectivity: 1.0,
            specular: false,
        });
        scene
    }

    #[test]
    fn empty_scene_is_blank() {
        let scene = Scene::empty(Bounds {
            min: Vec2::new(-1.0, -1.0),
            max: Vec2::new(1.0, 1.0),
        });
        let img = lidar_scan(&scene, &Pose::new(0.0, 0.0, PI / 2.0), &SimConfig::default());
        assert_eq!(img.count_nonzero(), 0);
    }

    #[test]
    fn perpendicular_wall_matches_analytic_intersection() {
        let cfg = SimConfig::default();
        let scene = one_wall_scene(5.0, 1.0);
        let pose = Pose::new(0.0, 0.0, PI / 2.0);
        let img = lidar_scan(&scene, &pose, &cfg);
        let half_span = (1.0f64 / 5.0).atan();
        let mut occupied = 0;
        for col in 0..cfg.n_lidar_az_bins {
            let theta = lidar_azimuth(col, cfg.n_lidar_az_bins);
            let column: Vec<usize> = (0..cfg.n_range_bins).filter(|&r| img.get(r, col) > 0.0).collect();
            if theta.abs() < half_span - 1e-9 {
                let rho = 5.0 / theta.cos();
                let expected = (rho / cfg.range_bin_width()).floor() as usize;
                assert_eq!(column, vec![expected]);
                occupied += 1;
            } else if theta.abs() > half_span + 1e-9 {
                assert!(column.is_empty());
            }
        }
        assert!(occupied > 0);
        // Boresight columns land on floor(5 / 10 * 256) = 128.
        assert!(img.get(128, cfg.n_lidar_az_bins / 2) > 0.0);
        assert!(img.get(128, cfg.n_lidar_az_bins / 2 - 1) > 0.0);
    }

    #[test]
    fn smoke_blanks_the_lidar() {
        let cfg = SimConfig {
            smoke: true,
            ..SimConfig::default()
        };
        let scene = one_wall_scene(5.0, 1.0);
        let img = lidar_scan(&scene, &Pose::new(0.0, 0.0, PI / 2.0), &cfg);
        assert_eq!(img.count_nonzero(), 0);
    }

    #[test]
    fn beyond_max_range_is_empty() {
        let scene = one_wall_scene(7.9, 0.5);
        let cfg = SimConfig {
            max_range: 7.5,
            ..SimConfig::default()
        };
        let img = lidar_scan(&scene, &Pose::new(0.0, 0.0, PI / 2.0), &cfg);
        assert_eq!(img.count_nonzero(), 0);
    }

    #[test]
    fn at_most_one_cell_per_column() {
        let scene = crate::sim::gen_scene(2, crate::sim::EnvironmentKind::Same);
        let poses = crate::sim::gen_trajectory(&scene, 5, 0.1, 2).unwrap();
        let cfg = SimConfig::default();
        for pose in &poses {
            let img = lidar_scan(&scene, pose, &cfg);
            for col in 0..cfg.n_lidar_az_bins {
                let n = (0..cfg.n_range_bins).filter(|&r| img.get(r, col) > 0.0).count();
                assert!(n <= 1);
            }
        }
    }
}
