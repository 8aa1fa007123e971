use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A point or direction in the world plane, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(angle: f64) -> Self {
        Self::new(angle.cos(), angle.sin())
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        Self::new(self.x / n, self.y / n)
    }

    /// Rotated by +90 degrees.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Parameter `t` along the ray `origin + t * dir` where it crosses the
/// segment `[a, b]`, if it does so with `t > 0`.
pub fn ray_segment_intersection(origin: Vec2, dir: Vec2, a: Vec2, b: Vec2) -> Option<f64> {
    let seg = b - a;
    let denom = dir.cross(seg);
    if denom.abs() < 1e-15 {
        return None;
    }
    let diff = a - origin;
    let t = diff.cross(seg) / denom;
    let u = diff.cross(dir) / denom;
    if t > 0.0 && (0.0..=1.0).contains(&u) {
        Some(t)
    } else {
        None
    }
}

/// Whether the open segments `[p0, p1]` and `[q0, q1]` cross.
pub fn segments_intersect(p0: Vec2, p1: Vec2, q0: Vec2, q1: Vec2) -> bool {
    let d = p1 - p0;
    let e = q1 - q0;
    let denom = d.cross(e);
    if denom.abs() < 1e-15 {
        return false;
    }
    let diff = q0 - p0;
    let t = diff.cross(e) / denom;
    let u = diff.cross(d) / denom;
    (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u)
}

pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let seg = b - a;
    let len2 = seg.dot(seg);
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(seg) / len2).clamp(0.0, 1.0);
    (p - (a + seg * t)).norm()
}

/// Reflection of `p` across the infinite line through `a` and `b`.
pub fn mirror_across_line(p: Vec2, a: Vec2, b: Vec2) -> Vec2 {
    let n = (b - a).perp().normalized();
    let d = (p - a).dot(n);
    p - n * (2.0 * d)
}

/// Wrap an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    if w <= -PI {
        w += 2.0 * PI;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ray_hits_perpendicular_segment() {
        let t = ray_segment_intersection(
            Vec2::new(0.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(-1.0, 5.0),
            Vec2::new(1.0, 5.0),
        );
        assert_eq!(t, Some(5.0));
        let miss = ray_segment_intersection(
            Vec2::new(0.0, 0.0),
            Vec2::new(0.0, -1.0),
            Vec2::new(-1.0, 5.0),
            Vec2::new(1.0, 5.0),
        );
        assert_eq!(miss, None);
    }

    #[test]
    fn mirror_is_involution() {
        let a = Vec2::new(1.0, 2.0);
        let b = Vec2::new(3.0, -1.0);
        let p = Vec2::new(0.3, 0.7);
        let q = mirror_across_line(mirror_across_line(p, a, b), a, b);
        assert!((p - q).norm() < 1e-12);
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
    }
}
