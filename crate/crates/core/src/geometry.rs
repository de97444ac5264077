//! Vector math, the pinhole camera, screen/world mapping and ray-box tests.
//!
//! World axes: +z runs down the corridor (the avatar's direction of travel),
//! +y is up and +x is to the avatar's right. Screen points are normalized
//! with the origin at the top-left and `v` growing downward.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid camera: {0}")]
    InvalidCamera(&'static str),
    #[error("plane distance must be positive, got {0}")]
    PlaneDistance(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Checked constructor; rejects NaN and infinities.
    pub fn try_new(x: f64, y: f64, z: f64) -> Result<Self, GeometryError> {
        let v = Self::new(x, y, z);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(GeometryError::NonFinite("Vec3"))
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
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

    pub fn component(self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }

    pub fn min(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn max(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
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

/// Normalized screen coordinates, origin top-left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreenPoint {
    pub u: f64,
    pub v: f64,
}

impl ScreenPoint {
    pub const CENTER: ScreenPoint = ScreenPoint { u: 0.5, v: 0.5 };

    /// Builds a point clamped into the unit square. Non-finite input is
    /// rejected rather than clamped.
    pub fn clamped(u: f64, v: f64) -> Result<Self, GeometryError> {
        if !(u.is_finite() && v.is_finite()) {
            return Err(GeometryError::NonFinite("ScreenPoint"));
        }
        Ok(Self {
            u: u.clamp(0.0, 1.0),
            v: v.clamp(0.0, 1.0),
        })
    }

    pub fn is_inside(&self) -> bool {
        (0.0..=1.0).contains(&self.u) && (0.0..=1.0).contains(&self.v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub position: Vec3,
    forward: Vec3,
    up: Vec3,
    horizontal_fov: f64,
    aspect: f64,
}

impl Camera {
    pub fn new(
        position: Vec3,
        forward: Vec3,
        up: Vec3,
        horizontal_fov: f64,
        aspect: f64,
    ) -> Result<Self, GeometryError> {
        if !(position.is_finite() && forward.is_finite() && up.is_finite()) {
            return Err(GeometryError::NonFinite("Camera"));
        }
        if !horizontal_fov.is_finite() || horizontal_fov <= 0.0 || horizontal_fov >= std::f64::consts::PI {
            return Err(GeometryError::InvalidCamera("fov must lie in (0, pi)"));
        }
        if !aspect.is_finite() || aspect <= 0.0 {
            return Err(GeometryError::InvalidCamera("aspect must be positive"));
        }
        if forward.length() < 1e-12 || up.length() < 1e-12 {
            return Err(GeometryError::InvalidCamera("zero basis vector"));
        }
        let forward = forward.normalized();
        let up = up.normalized();
        if forward.dot(up).abs() > 1e-6 {
            return Err(GeometryError::InvalidCamera("forward and up must be orthogonal"));
        }
        Ok(Self {
            position,
            forward,
            up,
            horizontal_fov,
            aspect,
        })
    }

    /// Camera looking down +z with +y up.
    pub fn corridor(position: Vec3, horizontal_fov: f64, aspect: f64) -> Result<Self, GeometryError> {
        Self::new(position, Vec3::Z, Vec3::Y, horizontal_fov, aspect)
    }

    pub fn forward(&self) -> Vec3 {
        self.forward
    }

    pub fn up(&self) -> Vec3 {
        self.up
    }

    pub fn right(&self) -> Vec3 {
        self.up.cross(self.forward)
    }

    pub fn horizontal_fov(&self) -> f64 {
        self.horizontal_fov
    }

    pub fn aspect(&self) -> f64 {
        self.aspect
    }

    fn half_extents(&self) -> (f64, f64) {
        let half_w = (self.horizontal_fov * 0.5).tan();
        (half_w, half_w / self.aspect)
    }

    /// Maps a screen point onto the view plane `plane_distance` meters in
    /// front of the camera.
    pub fn screen_to_world(&self, s: ScreenPoint, plane_distance: f64) -> Result<Vec3, GeometryError> {
        if !(s.u.is_finite() && s.v.is_finite()) {
            return Err(GeometryError::NonFinite("ScreenPoint"));
        }
        if !plane_distance.is_finite() || plane_distance <= 0.0 {
            return Err(GeometryError::PlaneDistance(plane_distance));
        }
        let (half_w, half_h) = self.half_extents();
        let x = (2.0 * s.u - 1.0) * half_w * plane_distance;
        let y = (1.0 - 2.0 * s.v) * half_h * plane_distance;
        Ok(self.position + self.forward * plane_distance + self.right() * x + self.up * y)
    }

    /// Pinhole projection of a world point. Returns `None` for points at or
    /// behind the camera plane. The result is not clamped, so off-screen
    /// points come back with coordinates outside `[0, 1]`.
    pub fn project(&self, p: Vec3) -> Option<ScreenPoint> {
        let rel = p - self.position;
        let depth = rel.dot(self.forward);
        if depth <= 1e-12 {
            return None;
        }
        let (half_w, half_h) = self.half_extents();
        let x = rel.dot(self.right()) / depth;
        let y = rel.dot(self.up) / depth;
        Some(ScreenPoint {
            u: 0.5 * (x / half_w + 1.0),
            v: 0.5 * (1.0 - y / half_h),
        })
    }

    pub fn gaze_ray(&self, s: ScreenPoint) -> Result<Ray, GeometryError> {
        let target = self.screen_to_world(s, 1.0)?;
        Ok(Ray::new(self.position, target - self.position))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    direction: Vec3,
}

impl Ray {
    /// `direction` is normalized on construction.
    pub fn new(origin: Vec3, direction: Vec3) -> Self {
        Self {
            origin,
            direction: direction.normalized(),
        }
    }

    pub fn direction(&self) -> Vec3 {
        self.direction
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t.max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    /// Builds a box from two corners in any order.
    pub fn new(a: Vec3, b: Vec3) -> Self {
        Self {
            min: a.min(b),
            max: a.max(b),
        }
    }

    pub fn from_center(center: Vec3, half: Vec3) -> Self {
        Self::new(center - half, center + half)
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn half_extents(&self) -> Vec3 {
        (self.max - self.min) * 0.5
    }

    pub fn scaled(&self, factor: f64) -> Aabb {
        Aabb::from_center(self.center(), self.half_extents() * factor)
    }

    pub fn translated(&self, by: Vec3) -> Aabb {
        Aabb {
            min: self.min + by,
            max: self.max + by,
        }
    }

    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    pub fn contains_box(&self, other: &Aabb) -> bool {
        self.contains(other.min) && self.contains(other.max)
    }
}

/// Slab test. Returns the smallest `t >= 0` at which the ray is inside the
/// box; a ray starting inside the box reports `0`.
pub fn ray_aabb(ray: &Ray, aabb: &Aabb) -> Option<f64> {
    let mut t_enter = 0.0_f64;
    let mut t_exit = f64::INFINITY;
    for axis in 0..3 {
        let o = ray.origin.component(axis);
        let d = ray.direction.component(axis);
        let lo = aabb.min.component(axis);
        let hi = aabb.max.component(axis);
        if d == 0.0 {
            // parallel to this slab pair
            if o < lo || o > hi {
                return None;
            }
            continue;
        }
        let inv = 1.0 / d;
        let (t0, t1) = {
            let a = (lo - o) * inv;
            let b = (hi - o) * inv;
            if a <= b {
                (a, b)
            } else {
                (b, a)
            }
        };
        t_enter = t_enter.max(t0);
        t_exit = t_exit.min(t1);
        if t_enter > t_exit {
            return None;
        }
    }
    Some(t_enter)
}
