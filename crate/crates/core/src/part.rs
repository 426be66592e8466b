//! Nominal part: typed surfaces with local frames and boundaries.

use crate::geometry::{Frame, Vec3};
use crate::torsor::SurfaceClass;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

pub const DEFAULT_CIRCLE_SAMPLES: usize = 8;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Surface {
    pub id: u32,
    pub class: SurfaceClass,
    pub frame: Frame,
    /// Boundary vertices in local coordinates.
    pub boundary: Vec<Vec3>,
    /// Nominal radius, cylinders only.
    pub radius: Option<f64>,
}

impl Surface {
    pub fn plane(id: u32, frame: Frame, boundary: Vec<Vec3>) -> Surface {
        Surface { id, class: SurfaceClass::Plane, frame, boundary, radius: None }
    }

    /// Cylinder of `radius` along local z between `z0` and `z1`; the boundary
    /// gets four vertices on each end circle.
    pub fn cylinder(id: u32, frame: Frame, radius: f64, z0: f64, z1: f64) -> Surface {
        let mut boundary = Vec::with_capacity(8);
        for z in [z0, z1] {
            boundary.extend([[radius, 0.0, z], [0.0, radius, z], [-radius, 0.0, z], [0.0, -radius, z]]);
        }
        Surface { id, class: SurfaceClass::Cylinder, frame, boundary, radius: Some(radius) }
    }

    /// Axial extent (min, max local z) of the boundary.
    pub fn axial_range(&self) -> (f64, f64) {
        self.boundary.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v[2]), hi.max(v[2])))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NominalPart {
    pub frame: Frame,
    pub surfaces: BTreeMap<u32, Surface>,
}

impl NominalPart {
    pub fn new(surfaces: impl IntoIterator<Item = Surface>) -> NominalPart {
        NominalPart { frame: Frame::identity(), surfaces: surfaces.into_iter().map(|s| (s.id, s)).collect() }
    }

    pub fn surface(&self, id: u32) -> Option<&Surface> {
        self.surfaces.get(&id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartViolation {
    pub surface: u32,
    pub message: String,
}

/// Lists every surface invariant violation; empty iff the part is valid.
pub fn validate_part(part: &NominalPart) -> Vec<PartViolation> {
    let mut out = Vec::new();
    if let Some(msg) = part.frame.check() {
        out.push(PartViolation { surface: 0, message: format!("global frame: {msg}") });
    }
    for (&key, s) in &part.surfaces {
        let mut push = |message: String| out.push(PartViolation { surface: s.id, message });
        if key != s.id {
            push(format!("stored under id {key} but declares id {}", s.id));
        }
        if let Some(msg) = s.frame.check() {
            push(format!("frame: {msg}"));
        }
        if s.boundary.len() < 3 {
            push(format!("boundary has {} vertices, at least 3 required", s.boundary.len()));
        }
        match s.class {
            SurfaceClass::Plane => {
                for (i, v) in s.boundary.iter().enumerate() {
                    if v[2].abs() > 1e-9 {
                        push(format!("vertex {i} lies at local z = {} off the plane", v[2]));
                    }
                }
            }
            SurfaceClass::Cylinder => match s.radius {
                Some(r) if r > 0.0 => {
                    for (i, v) in s.boundary.iter().enumerate() {
                        let d = libm::hypot(v[0], v[1]);
                        if (d - r).abs() > 1e-9 {
                            push(format!("vertex {i} lies at distance {d} from the axis, radius is {r}"));
                        }
                    }
                }
                _ => push(String::from("cylinder needs a positive radius")),
            },
        }
    }
    out
}

/// Points where gap functions are evaluated, in part global coordinates.
///
/// Planes yield their boundary vertices. Cylinders yield `circle_samples`
/// evenly spaced points on each end circle, starting on local +x.
pub fn sample_points(s: &Surface, circle_samples: usize) -> Vec<Vec3> {
    match s.class {
        SurfaceClass::Plane => s.boundary.iter().map(|&v| s.frame.point_to_parent(v)).collect(),
        SurfaceClass::Cylinder => {
            let r = s.radius.unwrap_or(0.0);
            let (z0, z1) = s.axial_range();
            let mut pts = Vec::with_capacity(2 * circle_samples);
            for z in [z0, z1] {
                for k in 0..circle_samples {
                    let (sin, cos) = circle_angle(k, circle_samples);
                    pts.push(s.frame.point_to_parent([r * cos, r * sin, z]));
                }
            }
            pts
        }
    }
}

/// (sin θ, cos θ) for θ = 2πk/n.
pub(crate) fn circle_angle(k: usize, n: usize) -> (f64, f64) {
    let theta = 2.0 * core::f64::consts::PI * k as f64 / n as f64;
    (libm::sin(theta), libm::cos(theta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square(id: u32, frame: Frame) -> Surface {
        Surface::plane(id, frame, alloc::vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]])
    }

    #[test]
    fn well_formed_part_is_valid() {
        let part = NominalPart::new([
            unit_square(1, Frame::identity()),
            unit_square(2, Frame::from_axes([0.0, 0.0, 5.0], [1.0, 0.0, 0.0], [0.0, -1.0, 0.0]).unwrap()),
        ]);
        assert!(validate_part(&part).is_empty());
    }

    #[test]
    fn off_plane_vertex_is_reported() {
        let mut s = unit_square(7, Frame::identity());
        s.boundary[2][2] = 0.5;
        let report = validate_part(&NominalPart::new([s]));
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].surface, 7);
    }

    #[test]
    fn short_boundary_and_bad_radius() {
        let mut s = unit_square(1, Frame::identity());
        s.boundary.truncate(2);
        let mut c = Surface::cylinder(2, Frame::identity(), 5.0, 0.0, 10.0);
        c.boundary[0] = [5.1, 0.0, 0.0];
        let report = validate_part(&NominalPart::new([s, c]));
        assert_eq!(report.len(), 2);
    }

    #[test]
    fn unit_square_samples_are_corners() {
        let pts = sample_points(&unit_square(1, Frame::identity()), DEFAULT_CIRCLE_SAMPLES);
        assert_eq!(pts, alloc::vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]]);
    }

    #[test]
    fn rotated_plane_samples() {
        // 30° about global x: local y = (0, cos30, sin30)
        let (s30, c30) = (0.5, libm::sqrt(3.0) / 2.0);
        let f = Frame::from_axes([0.0; 3], [1.0, 0.0, 0.0], [0.0, c30, s30]).unwrap();
        let pts = sample_points(&unit_square(1, f), 8);
        assert!((pts[2][1] - 0.8660254037844386).abs() < 1e-15);
        assert!((pts[2][2] - 0.5).abs() < 1e-15);
        assert_eq!(pts[1], [1.0, 0.0, 0.0]);
    }

    #[test]
    fn cylinder_default_sampling_count() {
        let c = Surface::cylinder(4, Frame::identity(), 10.0, 0.0, 40.0);
        assert_eq!(sample_points(&c, DEFAULT_CIRCLE_SAMPLES).len(), 16);
    }
}
