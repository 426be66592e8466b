//! Points, vectors and right-handed orthonormal frames.

use crate::{Error, Result};
use alloc::format;

pub type Vec3 = [f64; 3];

pub const ORIGIN: Vec3 = [0.0, 0.0, 0.0];

#[inline]
pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: Vec3, k: f64) -> Vec3 {
    [a[0] * k, a[1] * k, a[2] * k]
}

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    libm::sqrt(dot(a, a))
}

pub fn normalize(a: Vec3) -> Option<Vec3> {
    let n = norm(a);
    if n == 0.0 || !n.is_finite() {
        None
    } else {
        Some(scale(a, 1.0 / n))
    }
}

/// A local coordinate system: origin and orthonormal basis, both expressed in
/// the coordinates of the parent (part) frame.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Frame {
    pub origin: Vec3,
    /// `basis[i]` is local axis i in parent coordinates.
    pub basis: [Vec3; 3],
}

impl Default for Frame {
    fn default() -> Self {
        Frame::identity()
    }
}

impl Frame {
    pub const fn identity() -> Frame {
        Frame { origin: ORIGIN, basis: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] }
    }

    /// Builds a frame from an origin and the local x and y axes; z = x × y.
    /// The axes are normalized; they must already be orthogonal.
    pub fn from_axes(origin: Vec3, x: Vec3, y: Vec3) -> Result<Frame> {
        let x = normalize(x).ok_or_else(|| Error::InvalidFrame(format!("degenerate x axis {x:?}")))?;
        let y = normalize(y).ok_or_else(|| Error::InvalidFrame(format!("degenerate y axis {y:?}")))?;
        if libm::fabs(dot(x, y)) > 1e-9 {
            return Err(Error::InvalidFrame(format!("axes {x:?} and {y:?} are not orthogonal")));
        }
        let frame = Frame { origin, basis: [x, y, cross(x, y)] };
        Ok(frame)
    }

    /// Returns a description of the first orthonormality or handedness
    /// violation, if any.
    pub fn check(&self) -> Option<&'static str> {
        const TOL: f64 = 1e-12;
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 } else { 0.0 };
                if libm::fabs(dot(self.basis[i], self.basis[j]) - expected) > TOL {
                    return Some("basis is not orthonormal");
                }
            }
        }
        if dot(cross(self.basis[0], self.basis[1]), self.basis[2]) < 0.0 {
            return Some("basis is left-handed");
        }
        None
    }

    pub fn vector_to_parent(&self, v: Vec3) -> Vec3 {
        let b = &self.basis;
        [
            b[0][0] * v[0] + b[1][0] * v[1] + b[2][0] * v[2],
            b[0][1] * v[0] + b[1][1] * v[1] + b[2][1] * v[2],
            b[0][2] * v[0] + b[1][2] * v[1] + b[2][2] * v[2],
        ]
    }

    pub fn vector_to_local(&self, v: Vec3) -> Vec3 {
        [dot(self.basis[0], v), dot(self.basis[1], v), dot(self.basis[2], v)]
    }

    pub fn point_to_parent(&self, p: Vec3) -> Vec3 {
        add(self.origin, self.vector_to_parent(p))
    }

    pub fn point_to_local(&self, p: Vec3) -> Vec3 {
        self.vector_to_local(sub(p, self.origin))
    }

    /// Local z axis in parent coordinates.
    pub fn normal(&self) -> Vec3 {
        self.basis[2]
    }
}
