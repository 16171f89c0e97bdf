//! Vector arithmetic and the geometry helpers used by the integrator and
//! the observables: axis-angle rotation and minimum-image displacements.

use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use crate::types::Boundary;

/// 3-component double-precision vector. 2D systems use the x/y components
/// and keep z at exactly 0.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// 2D constructor; z is pinned to 0.
    pub fn xy(x: f64, y: f64) -> Self {
        Self { x, y, z: 0.0 }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Self) -> Self {
        Self {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Unit vector along `self`, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > 0.0 {
            Some(self / n)
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn component(self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }

    pub fn set_component(&mut self, axis: usize, value: f64) {
        match axis {
            0 => self.x = value,
            1 => self.y = value,
            _ => self.z = value,
        }
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl Add for Vec3 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Sub for Vec3 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

impl Div<f64> for Vec3 {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        Self::new(self.x / rhs, self.y / rhs, self.z / rhs)
    }
}

impl Neg for Vec3 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GeometryError {
    #[error("degenerate rotation axis")]
    DegenerateAxis,
}

/// Rotates unit vector `v` about `axis` by `angle` radians (right-hand rule,
/// Rodrigues formula). The axis is normalized internally.
///
/// A zero-length axis is an error unless the angle is also zero, in which
/// case the rotation is the identity.
pub fn rotate_about_axis(v: Vec3, axis: Vec3, angle: f64) -> Result<Vec3, GeometryError> {
    if angle == 0.0 {
        return Ok(v);
    }
    let k = axis.normalized().ok_or(GeometryError::DegenerateAxis)?;
    let (sin, cos) = angle.sin_cos();
    Ok(v * cos + k.cross(v) * sin + k * (k.dot(v) * (1.0 - cos)))
}

/// Displacement from `a` to `b` under the given boundary condition.
///
/// Periodic boundaries wrap each component into [-L/2, L/2], resolving the
/// tie at exactly L/2 to +L/2. Axes with non-positive box length are left
/// unwrapped (the z axis of a 2D system). Reflecting boundaries use the
/// direct difference.
pub fn minimum_image_displacement(a: Vec3, b: Vec3, box_lengths: Vec3, boundary: Boundary) -> Vec3 {
    let d = b - a;
    match boundary {
        Boundary::Reflecting => d,
        Boundary::Periodic => Vec3::new(
            wrap_component(d.x, box_lengths.x),
            wrap_component(d.y, box_lengths.y),
            wrap_component(d.z, box_lengths.z),
        ),
    }
}

fn wrap_component(d: f64, length: f64) -> f64 {
    if length <= 0.0 {
        return d;
    }
    // ceil(d/L - 1/2) maps the tie at +L/2 and -L/2 both onto +L/2
    d - length * (d / length - 0.5).ceil()
}
