use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::geometry::{point_segment_distance, segments_intersect, wrap_angle, Vec2};
use super::scene::Scene;
use crate::{Error, Result};

/// Minimum distance between the sensor and any wall, meters.
pub const CLEARANCE: f64 = 0.3;

const START_ATTEMPTS: usize = 1000;
const TURN_ATTEMPTS: usize = 16;

/// Sensor pose. The boresight points along `heading` (radians from world +x);
/// the sensor frame has +y along boresight and +x to its right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading: wrap_angle(heading),
        }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn forward(&self) -> Vec2 {
        Vec2::from_angle(self.heading)
    }

    pub fn right(&self) -> Vec2 {
        -self.forward().perp()
    }

    /// World point expressed in the sensor frame.
    pub fn to_sensor(&self, p: Vec2) -> Vec2 {
        let d = p - self.position();
        Vec2::new(d.dot(self.right()), d.dot(self.forward()))
    }

    /// World direction of a bearing (radians, positive to the right).
    pub fn bearing_direction(&self, bearing: f64) -> Vec2 {
        self.forward() * bearing.cos() + self.right() * bearing.sin()
    }
}

fn is_free(scene: &Scene, p: Vec2) -> bool {
    let b = &scene.bounds;
    if p.x < b.min.x + CLEARANCE || p.x > b.max.x - CLEARANCE || p.y < b.min.y + CLEARANCE || p.y > b.max.y - CLEARANCE
    {
        return false;
    }
    scene
        .walls
        .iter()
        .all(|w| point_segment_distance(p, w.p0, w.p1) >= CLEARANCE)
}

fn path_is_clear(scene: &Scene, a: Vec2, b: Vec2) -> bool {
    scene.walls.iter().all(|w| !segments_intersect(a, b, w.p0, w.p1))
}

/// Random walk of `n_frames` collision-free poses with at most `step` meters
/// between consecutive positions.
pub fn gen_trajectory(scene: &Scene, n_frames: usize, step: f64, seed: u64) -> Result<Vec<Pose>> {
    if n_frames == 0 {
        return Err(Error::Config("n_frames must be at least 1".into()));
    }
    if !(step >= 0.0 && step.is_finite()) {
        return Err(Error::Config("step must be finite and >= 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = scene.bounds;
    let start = (0..START_ATTEMPTS)
        .map(|_| Vec2::new(rng.gen_range(b.min.x..b.max.x), rng.gen_range(b.min.y..b.max.y)))
        .find(|&p| is_free(scene, p))
        .ok_or_else(|| Error::Sim(format!("no collision-free start pose after {START_ATTEMPTS} attempts")))?;
    let mut pose = Pose::new(
        start.x,
        start.y,
        rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
    );
    let mut poses = Vec::with_capacity(n_frames);
    poses.push(pose);
    if step == 0.0 {
        poses.resize(n_frames, pose);
        return Ok(poses);
    }

    let jitter = Normal::new(0.0, 0.15).expect("valid normal");
    for _ in 1..n_frames {
        let mut heading = pose.heading + jitter.sample(&mut rng);
        let mut next = None;
        for attempt in 0..=TURN_ATTEMPTS {
            if attempt > 0 {
                heading = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            }
            let cand = pose.position() + Vec2::from_angle(heading) * step;
            if is_free(scene, cand) && path_is_clear(scene, pose.position(), cand) {
                next = Some(Pose::new(cand.x, cand.y, heading));
                break;
            }
        }
        // Boxed in: turn in place.
        pose = next.unwrap_or(Pose::new(pose.x, pose.y, heading));
        poses.push(pose);
    }
    Ok(poses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{gen_scene, EnvironmentKind};

    #[test]
    fn single_static_pose() {
        let scene = gen_scene(3, EnvironmentKind::Same);
        let poses = gen_trajectory(&scene, 1, 0.0, 1).unwrap();
        assert_eq!(poses.len(), 1);
    }

    #[test]
    fn static_sensor_repeats_pose() {
        let scene = gen_scene(3, EnvironmentKind::Same);
        let poses = gen_trajectory(&scene, 10, 0.0, 1).unwrap();
        assert!(poses.iter().all(|p| *p == poses[0]));
    }

    #[test]
    fn steps_bounded_and_collision_free() {
        for kind in EnvironmentKind::ALL {
            let scene = gen_scene(11, kind);
            let poses = gen_trajectory(&scene, 100, 0.05, 4).unwrap();
            assert_eq!(poses.len(), 100);
            for w in poses.windows(2) {
                let d = (w[1].position() - w[0].position()).norm();
                assert!(d <= 0.05 + 1e-12, "step {d}");
            }
            for p in &poses {
                assert!(is_free(&scene, p.position()));
                assert!(p.heading > -std::f64::consts::PI && p.heading <= std::f64::consts::PI);
            }
        }
    }

    #[test]
    fn replay_is_bitwise_identical() {
        let scene = gen_scene(5, EnvironmentKind::Similar);
        let a = gen_trajectory(&scene, 100, 0.05, 42).unwrap();
        let b = gen_trajectory(&scene, 100, 0.05, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fails_without_free_space() {
        let mut scene = gen_scene(0, EnvironmentKind::Same);
        scene.bounds.max = Vec2::new(0.5, 0.5);
        assert!(gen_trajectory(&scene, 5, 0.05, 0).is_err());
    }

    #[test]
    fn sensor_frame_convention() {
        let pose = Pose::new(1.0, 1.0, std::f64::consts::FRAC_PI_2);
        // Boresight is world +y; right is world +x.
        let p = pose.to_sensor(Vec2::new(2.0, 3.0));
        assert!((p.x - 1.0).abs() < 1e-12 && (p.y - 2.0).abs() < 1e-12);
        let d = pose.bearing_direction(std::f64::consts::FRAC_PI_2);
        assert!((d.x - 1.0).abs() < 1e-12 && d.y.abs() < 1e-12);
    }
}
