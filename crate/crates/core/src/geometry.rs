//! Small fixed-size linear algebra used by the scene graph and picking.
//!
//! Coordinate convention: right-handed, camera at the origin looking down
//! `-Z`, `+X` to the right and `+Y` up. Angles are in degrees at every public
//! boundary; yaw turns to the right and pitch turns up.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const RIGHT: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const UP: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const FORWARD: Vec3 = Vec3::new(0.0, 0.0, -1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn splat(v: f64) -> Self {
        Vec3::new(v, v, v)
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn length(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Vec3 {
        self * (1.0 / self.length())
    }

    pub fn min(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn max(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Unit vector pointing at the given yaw/pitch (degrees).
    pub fn from_angles(yaw_deg: f64, pitch_deg: f64) -> Vec3 {
        let (sy, cy) = yaw_deg.to_radians().sin_cos();
        let (sp, cp) = pitch_deg.to_radians().sin_cos();
        Vec3::new(sy * cp, sp, -cy * cp)
    }

    /// Inverse of [`Vec3::from_angles`] for a non-zero vector: `(yaw, pitch)` in degrees.
    pub fn to_angles(self) -> (f64, f64) {
        let horizontal = (self.x * self.x + self.z * self.z).sqrt();
        let yaw = self.x.atan2(-self.z).to_degrees();
        let pitch = self.y.atan2(horizontal).to_degrees();
        (yaw, pitch)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, axis: usize) -> &f64 {
        match axis {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("axis {axis} out of range"),
        }
    }
}

/// Row-major 3x3 rotation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3 {
    pub rows: [[f64; 3]; 3],
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3 {
        rows: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    /// Rotation about `+Y` that turns the view to the right by `yaw_deg`.
    pub fn yaw(yaw_deg: f64) -> Mat3 {
        let (s, c) = yaw_deg.to_radians().sin_cos();
        Mat3 {
            rows: [[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]],
        }
    }

    /// Rotation about `+X` that tilts the view up by `pitch_deg`.
    pub fn pitch(pitch_deg: f64) -> Mat3 {
        let (s, c) = pitch_deg.to_radians().sin_cos();
        Mat3 {
            rows: [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]],
        }
    }

    /// Orientation whose forward axis points at `(yaw, pitch)` with no roll.
    pub fn from_yaw_pitch(yaw_deg: f64, pitch_deg: f64) -> Mat3 {
        Mat3::yaw(yaw_deg) * Mat3::pitch(pitch_deg)
    }

    pub fn transpose(&self) -> Mat3 {
        let r = &self.rows;
        Mat3 {
            rows: [
                [r[0][0], r[1][0], r[2][0]],
                [r[0][1], r[1][1], r[2][1]],
                [r[0][2], r[1][2], r[2][2]],
            ],
        }
    }

    pub fn column(&self, c: usize) -> Vec3 {
        Vec3::new(self.rows[0][c], self.rows[1][c], self.rows[2][c])
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let mut rows = [[0.0; 3]; 3];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.rows[i][k] * o.rows[k][j]).sum();
            }
        }
        Mat3 { rows }
    }
}

impl Mul<Vec3> for Mat3 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        let r = &self.rows;
        Vec3::new(
            r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z,
            r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
            r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z,
        )
    }
}

/// Rigid transform: rotate, then translate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl Default for Transform {
    fn default() -> Self {
        Transform::IDENTITY
    }
}

impl Transform {
    pub const IDENTITY: Transform = Transform {
        rotation: Mat3::IDENTITY,
        translation: Vec3::ZERO,
    };

    pub fn new(rotation: Mat3, translation: Vec3) -> Self {
        Transform {
            rotation,
            translation,
        }
    }

    pub fn rotation(rotation: Mat3) -> Self {
        Transform::new(rotation, Vec3::ZERO)
    }

    pub fn apply(&self, p: Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    /// `self ∘ inner`: applies `inner` first.
    pub fn compose(&self, inner: &Transform) -> Transform {
        Transform {
            rotation: self.rotation * inner.rotation,
            translation: self.rotation * inner.translation + self.translation,
        }
    }
}

/// Axis-aligned bounding box. The empty box has `min > max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Default for Aabb {
    fn default() -> Self {
        Aabb::EMPTY
    }
}

impl Aabb {
    pub const EMPTY: Aabb = Aabb {
        min: Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
        max: Vec3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
    };

    pub fn new(min: Vec3, max: Vec3) -> Self {
        Aabb { min, max }
    }

    pub fn from_points<I: IntoIterator<Item = Vec3>>(points: I) -> Aabb {
        points.into_iter().fold(Aabb::EMPTY, |b, p| b.grow(p))
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x || self.min.y > self.max.y || self.min.z > self.max.z
    }

    pub fn grow(self, p: Vec3) -> Aabb {
        Aabb::new(self.min.min(p), self.max.max(p))
    }

    pub fn union(self, o: &Aabb) -> Aabb {
        if o.is_empty() {
            return self;
        }
        if self.is_empty() {
            return *o;
        }
        Aabb::new(self.min.min(o.min), self.max.max(o.max))
    }

    pub fn contains_point(&self, p: Vec3) -> bool {
        (0..3).all(|a| self.min[a] <= p[a] && p[a] <= self.max[a])
    }

    pub fn contains(&self, o: &Aabb) -> bool {
        o.is_empty() || (self.contains_point(o.min) && self.contains_point(o.max))
    }

    /// Closed-box overlap test; empty boxes overlap nothing.
    pub fn intersects(&self, o: &Aabb) -> bool {
        !self.is_empty()
            && !o.is_empty()
            && (0..3).all(|a| self.min[a] <= o.max[a] && o.min[a] <= self.max[a])
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Vec3, b: Vec3) -> bool {
        (a - b).length() < 1e-12
    }

    #[test]
    fn angles_match_axes() {
        assert!(close(Vec3::from_angles(0.0, 0.0), Vec3::FORWARD));
        assert!(close(Vec3::from_angles(90.0, 0.0), Vec3::RIGHT));
        assert!(close(Vec3::from_angles(0.0, 90.0), Vec3::UP));
    }

    #[test]
    fn rotation_points_forward_axis() {
        for &(y, p) in &[(0.0, 0.0), (30.0, 0.0), (-45.0, 10.0), (120.0, -35.0)] {
            let r = Mat3::from_yaw_pitch(y, p);
            assert!(close(r * Vec3::FORWARD, Vec3::from_angles(y, p)));
            let (yy, pp) = (r * Vec3::FORWARD).to_angles();
            assert!((yy - y).abs() < 1e-9 && (pp - p).abs() < 1e-9);
        }
    }

    #[test]
    fn compose_matches_sequential_application() {
        let a = Transform::new(Mat3::from_yaw_pitch(20.0, 5.0), Vec3::new(1.0, 2.0, 3.0));
        let b = Transform::new(Mat3::from_yaw_pitch(-7.0, 12.0), Vec3::new(-0.5, 0.0, 4.0));
        let p = Vec3::new(0.3, -0.2, 0.9);
        assert!(close(a.compose(&b).apply(p), a.apply(b.apply(p))));
    }

    #[test]
    fn empty_box_is_detectable() {
        assert!(Aabb::EMPTY.is_empty());
        let b = Aabb::from_points([Vec3::ZERO, Vec3::splat(1.0)]);
        assert!(!b.is_empty());
        assert_eq!(b.union(&Aabb::EMPTY), b);
        assert!(!b.intersects(&Aabb::EMPTY));
        assert!(b.contains(&Aabb::EMPTY));
    }
}
