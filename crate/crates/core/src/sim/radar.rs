use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::geometry::{mirror_across_line, ray_segment_intersection, Vec2};
use super::scene::Scene;
use super::trajectory::Pose;
use super::SimConfig;

/// Spacing of the point samples a wall is discretized into, meters.
pub const WALL_SAMPLE_SPACING: f64 = 0.05;
/// Amplitude of one wall sample per unit reflectivity at 1 m.
pub const WALL_SAMPLE_GAIN: f64 = 0.5;
/// Extra loss of a mirror-path ghost per unit wall reflectivity.
pub const GHOST_GAIN: f64 = 0.5;
/// Residual return of a specular surface outside its acceptance cone.
pub const SPECULAR_LEAK: f64 = 0.05;
/// Ranges are clamped to this before applying 1/r^2 spreading.
const MIN_RANGE: f64 = 0.1;

/// Raw complex samples from a uniform linear array after dechirp.
///
/// `samples` is row-major `[n_antennas][n_fast_time]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArraySnapshot {
    pub samples: Vec<Complex64>,
    pub n_antennas: usize,
    pub n_fast_time: usize,
    pub wavelength: f64,
    pub element_spacing: f64,
    pub noise_sigma: f64,
}

impl ArraySnapshot {
    pub fn zeros(n_antennas: usize, n_fast_time: usize, wavelength: f64) -> Self {
        Self {
            samples: vec![Complex64::new(0.0, 0.0); n_antennas * n_fast_time],
            n_antennas,
            n_fast_time,
            wavelength,
            element_spacing: wavelength / 2.0,
            noise_sigma: 0.0,
        }
    }

    pub fn antenna(&self, k: usize) -> &[Complex64] {
        &self.samples[k * self.n_fast_time..(k + 1) * self.n_fast_time]
    }

    /// Add the beat tone of a point reflector at `range_bins` (fractional
    /// range-bin index) and `sin_bearing`, with complex amplitude `amp`.
    pub fn add_tone(&mut self, range_bins: f64, sin_bearing: f64, amp: Complex64) {
        let n = self.n_fast_time as f64;
        let spatial = 2.0 * PI * self.element_spacing / self.wavelength * sin_bearing;
        let tone: Vec<Complex64> = (0..self.n_fast_time)
            .map(|i| amp * Complex64::cis(2.0 * PI * range_bins * i as f64 / n))
            .collect();
        for k in 0..self.n_antennas {
            let steer = Complex64::cis(spatial * k as f64);
            let row = &mut self.samples[k * self.n_fast_time..(k + 1) * self.n_fast_time];
            for (s, t) in row.iter_mut().zip(&tone) {
                *s += t * steer;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Where a radar return comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReflectorSource {
    Wall(usize),
    Scatterer(usize),
    /// Scatterer seen through a first-order mirror bounce off a specular wall.
    Ghost {
        wall: usize,
        scatterer: usize,
    },
}

/// One point return as seen by the radar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reflector {
    pub range: f64,
    /// Radians, positive to the right of boresight.
    pub bearing: f64,
    pub amplitude: f64,
    pub source: ReflectorSource,
}

/// Return strength of a specular surface at `incidence` radians off its normal.
pub fn specular_gain(incidence: f64, halfangle_deg: f64) -> f64 {
    if incidence <= halfangle_deg.to_radians() {
        1.0
    } else {
        SPECULAR_LEAK
    }
}

fn occluded(scene: &Scene, from: Vec2, to: Vec2, skip: &[usize]) -> bool {
    let d = to - from;
    scene.walls.iter().enumerate().any(|(i, w)| {
        !skip.contains(&i) && ray_segment_intersection(from, d, w.p0, w.p1).is_some_and(|t| t < 1.0 - 1e-9)
    })
}

fn in_view(pose: &Pose, p: Vec2, cfg: &SimConfig) -> Option<(f64, f64)> {
    let s = pose.to_sensor(p);
    let range = s.norm();
    if s.y <= 0.0 || range <= 1e-6 || range >= cfg.max_range {
        return None;
    }
    Some((range, s.x.atan2(s.y)))
}

fn spreading(range: f64) -> f64 {
    1.0 / range.max(MIN_RANGE).powi(2)
}

/// All point returns visible from `pose`: wall samples (with specular
/// gating), point scatterers, and first-order mirror ghosts.
pub fn visible_reflectors(scene: &Scene, pose: &Pose, cfg: &SimConfig) -> Vec<Reflector> {
    let sensor = pose.position();
    let mut out = Vec::new();

    for (wi, wall) in scene.walls.iter().enumerate() {
        let pieces = (wall.length() / WALL_SAMPLE_SPACING).ceil().max(1.0) as usize;
        let normal = (wall.p1 - wall.p0).perp().normalized();
        for j in 0..pieces {
            let q = wall.p0 + (wall.p1 - wall.p0) * ((j as f64 + 0.5) / pieces as f64);
            let Some((range, bearing)) = in_view(pose, q, cfg) else {
                continue;
            };
            if occluded(scene, sensor, q, &[wi]) {
                continue;
            }
            let mut amp = wall.reflectivity * WALL_SAMPLE_GAIN;
            if wall.specular {
                let to_sensor = (sensor - q).normalized();
                let incidence = to_sensor.dot(normal).abs().min(1.0).acos();
                amp *= specular_gain(incidence, cfg.specular_halfangle);
            }
            out.push(Reflector {
                range,
                bearing,
                amplitude: amp * spreading(range),
                source: ReflectorSource::Wall(wi),
            });
        }
    }

    for (si, sc) in scene.scatterers.iter().enumerate() {
        if let Some((range, bearing)) = in_view(pose, sc.pos, cfg) {
            if !occluded(scene, sensor, sc.pos, &[]) {
                out.push(Reflector {
                    range,
                    bearing,
                    amplitude: sc.rcs.sqrt() * spreading(range),
                    source: ReflectorSource::Scatterer(si),
                });
            }
        }
    }

    if cfg.ghost_order >= 1 {
        for (wi, wall) in scene.walls.iter().enumerate().filter(|(_, w)| w.specular) {
            let seg = wall.p1 - wall.p0;
            let sensor_side = seg.cross(sensor - wall.p0);
            for (si, sc) in scene.scatterers.iter().enumerate() {
                if seg.cross(sc.pos - wall.p0) * sensor_side <= 0.0 {
                    continue;
                }
                let image = mirror_across_line(sc.pos, wall.p0, wall.p1);
                let Some((range, bearing)) = in_view(pose, image, cfg) else {
                    continue;
                };
                let Some(t) = ray_segment_intersection(sensor, image - sensor, wall.p0, wall.p1) else {
                    continue;
                };
                if t >= 1.0 {
                    continue;
                }
                let bounce = sensor + (image - sensor) * t;
                if occluded(scene, sensor, bounce, &[wi]) || occluded(scene, bounce, sc.pos, &[wi]) {
                    continue;
                }
                out.push(Reflector {
                    range,
                    bearing,
                    amplitude: sc.rcs.sqrt() * wall.reflectivity * GHOST_GAIN * spreading(range),
                    source: ReflectorSource::Ghost {
                        wall: wi,
                        scatterer: si,
                    },
                });
            }
        }
    }
    out
}

/// Synthesize the dechirped array snapshot seen from `pose`.
///
/// Each reflector contributes `a * exp(j 2 pi f n / N) * exp(j pi k sin(theta))`
/// with `f` the fractional range bin and a carrier phase set by its two-way
/// path. Smoke has no effect here.
pub fn radar_snapshot(scene: &Scene, pose: &Pose, cfg: &SimConfig, seed: u64) -> ArraySnapshot {
    let mut snap = ArraySnapshot::zeros(cfg.n_antennas, cfg.n_fast_time, cfg.wavelength);
    snap.noise_sigma = cfg.noise_sigma;
    let bins_per_meter = cfg.n_range_bins as f64 / cfg.max_range;
    for r in visible_reflectors(scene, pose, cfg) {
        let carrier = (-4.0 * PI * r.range / cfg.wavelength).rem_euclid(2.0 * PI);
        snap.add_tone(
            r.range * bins_per_meter,
            r.bearing.sin(),
            Complex64::from_polar(r.amplitude, carrier),
        );
    }
    if cfg.noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = cfg.noise_sigma / std::f64::consts::SQRT_2;
        for s in &mut snap.samples {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *s += Complex64::new(re * scale, im * scale);
        }
    }
    snap
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{gen_scene, gen_trajectory, Bounds, EnvironmentKind, Scatterer, Wall};

    fn open_scene() -> Scene {
        Scene::empty(Bounds {
            min: Vec2::new(-8.0, -8.0),
            max: Vec2::new(8.0, 8.0),
        })
    }

    #[test]
    fn smoke_does_not_touch_radar() {
        let scene = gen_scene(1, EnvironmentKind::Same);
        let pose = gen_trajectory(&scene, 1, 0.0, 3).unwrap()[0];
        let clear = SimConfig::toy();
        let smoky = SimConfig {
            smoke: true,
            ..SimConfig::toy()
        };
        let a = radar_snapshot(&scene, &pose, &clear, 77);
        let b = radar_snapshot(&scene, &pose, &smoky, 77);
        assert_eq!(a, b);
        assert!(a.is_finite());
    }

    #[test]
    fn specular_wall_attenuates_off_cone() {
        let cfg = SimConfig::default();
        let pose = Pose::new(0.0, 0.0, PI / 2.0);
        let target = Vec2::new(0.0, 5.0);
        let amp_at = |incidence_deg: f64| {
            // A single wall sample centred on `target`, tilted by `incidence_deg`.
            let dir = Vec2::from_angle(incidence_deg.to_radians());
            let half = dir * (WALL_SAMPLE_SPACING / 2.0 * 0.99);
            let mut scene = open_scene();
            scene.walls.push(Wall {
                p0: target - half,
                p1: target + half,
                reflectivity: 1.0,
                specular: true,
            });
            let refl = visible_reflectors(&scene, &pose, &cfg);
            assert_eq!(refl.len(), 1);
            refl[0].amplitude
        };
        let normal = amp_at(0.0);
        let oblique = amp_at(60.0);
        assert!((oblique / normal - SPECULAR_LEAK).abs() < 1e-12);
        assert_eq!(amp_at(20.0), normal);
    }

    #[test]
    fn ghost_appears_behind_specular_wall() {
        let cfg = SimConfig::default();
        let pose = Pose::new(0.0, 0.0, PI / 2.0);
        let mut scene = open_scene();
        // Mirror wall along x = 2, scatterer between it and the sensor axis.
        scene.walls.push(Wall {
            p0: Vec2::new(2.0, 0.5),
            p1: Vec2::new(2.0, 7.0),
            reflectivity: 1.0,
            specular: true,
        });
        scene.scatterers.push(Scatterer {
            pos: Vec2::new(1.0, 4.0),
            rcs: 1.0,
        });
        let refl = visible_reflectors(&scene, &pose, &cfg);
        let ghost = refl
            .iter()
            .find(|r| matches!(r.source, ReflectorSource::Ghost { .. }))
            .expect("ghost");
        let image = Vec2::new(3.0, 4.0);
        assert!((ghost.range - image.norm()).abs() < 1e-12);
        assert!(ghost.bearing > 0.0);

        let no_ghosts = SimConfig { ghost_order: 0, ..cfg };
        assert!(visible_reflectors(&scene, &pose, &no_ghosts)
            .iter()
            .all(|r| !matches!(r.source, ReflectorSource::Ghost { .. })));
    }

    #[test]
    fn occluded_scatterer_is_hidden() {
        let cfg = SimConfig::default();
        let pose = Pose::new(0.0, 0.0, PI / 2.0);
        let mut scene = open_scene();
        scene.walls.push(Wall {
            p0: Vec2::new(-1.0, 2.0),
            p1: Vec2::new(1.0, 2.0),
            reflectivity: 1.0,
            specular: false,
        });
        scene.scatterers.push(Scatterer {
            pos: Vec2::new(0.0, 4.0),
            rcs: 1.0,
        });
        let refl = visible_reflectors(&scene, &pose, &cfg);
        assert!(refl.iter().all(|r| !matches!(r.source, ReflectorSource::Scatterer(_))));
    }

    #[test]
    fn snapshot_is_deterministic_per_seed() {
        let scene = gen_scene(4, EnvironmentKind::Different);
        let pose = gen_trajectory(&scene, 1, 0.0, 9).unwrap()[0];
        let cfg = SimConfig::toy();
        assert_eq!(
            radar_snapshot(&scene, &pose, &cfg, 5),
            radar_snapshot(&scene, &pose, &cfg, 5)
        );
        assert_ne!(
            radar_snapshot(&scene, &pose, &cfg, 5),
            radar_snapshot(&scene, &pose, &cfg, 6)
        );
    }
}
