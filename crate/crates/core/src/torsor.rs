//! Small displacement torsors with symbolic components.
//!
//! A torsor holds a rotation vector and the translation of one reference
//! point. Moving the reference point follows the field relation
//! `u(B) = u(A) + Ω × (B − A)`.

use crate::geometry::{self, Frame, Vec3};
use crate::linexpr::{Assignment, LinExpr};
use crate::param::{Category, KindBounds, ParamKind, Registry};
use crate::{Error, Result};
use alloc::vec::Vec;

/// Frame tag of the part global frame; surface local frames use the surface id.
pub const GLOBAL_FRAME: u32 = 0;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Torsor {
    pub rotation: [LinExpr; 3],
    pub translation: [LinExpr; 3],
    /// Reference point, in the coordinates of `frame`.
    pub point: Vec3,
    pub frame: u32,
}

/// Numeric counterpart of [`Torsor`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericTorsor {
    pub rotation: Vec3,
    pub translation: Vec3,
    pub point: Vec3,
}

impl NumericTorsor {
    pub fn translation_at(&self, p: Vec3) -> Vec3 {
        geometry::add(self.translation, geometry::cross(self.rotation, geometry::sub(p, self.point)))
    }

    pub fn components(&self) -> [f64; 6] {
        let (r, t) = (self.rotation, self.translation);
        [r[0], r[1], r[2], t[0], t[1], t[2]]
    }
}

fn cross_lin(omega: &[LinExpr; 3], d: Vec3) -> [LinExpr; 3] {
    // Ω × d with d numeric
    [&omega[1] * d[2] - &omega[2] * d[1], &omega[2] * d[0] - &omega[0] * d[2], &omega[0] * d[1] - &omega[1] * d[0]]
}

fn rotate_lin(v: &[LinExpr; 3], basis: &[Vec3; 3]) -> [LinExpr; 3] {
    core::array::from_fn(|c| {
        let mut e = LinExpr::zero();
        for (i, axis) in basis.iter().enumerate() {
            e.add_scaled(&v[i], axis[c]);
        }
        e
    })
}

fn project_lin(v: &[LinExpr; 3], basis: &[Vec3; 3]) -> [LinExpr; 3] {
    core::array::from_fn(|i| {
        let mut e = LinExpr::zero();
        for (c, comp) in v.iter().enumerate() {
            e.add_scaled(comp, basis[i][c]);
        }
        e
    })
}

impl Torsor {
    pub fn zero(point: Vec3, frame: u32) -> Torsor {
        Torsor { rotation: Default::default(), translation: Default::default(), point, frame }
    }

    /// Component `i` in the order rx, ry, rz, tx, ty, tz.
    pub fn component(&self, i: usize) -> &LinExpr {
        if i < 3 {
            &self.rotation[i]
        } else {
            &self.translation[i - 3]
        }
    }

    pub fn component_mut(&mut self, i: usize) -> &mut LinExpr {
        if i < 3 {
            &mut self.rotation[i]
        } else {
            &mut self.translation[i - 3]
        }
    }

    pub fn is_zero(&self) -> bool {
        (0..6).all(|i| self.component(i).is_zero())
    }

    /// Translation of the displacement field at `p` (same frame as the torsor).
    pub fn translation_at(&self, p: Vec3) -> [LinExpr; 3] {
        let arm = cross_lin(&self.rotation, geometry::sub(p, self.point));
        core::array::from_fn(|i| &self.translation[i] + &arm[i])
    }

    pub fn transport(&self, target: Vec3) -> Torsor {
        Torsor {
            rotation: self.rotation.clone(),
            translation: self.translation_at(target),
            point: target,
            frame: self.frame,
        }
    }

    /// Component-wise sum at `self.point`; `other` is transported first when
    /// its reference point differs.
    pub fn add(&self, other: &Torsor) -> Result<Torsor> {
        if self.frame != other.frame {
            return Err(Error::FrameMismatch { left: self.frame, right: other.frame });
        }
        let moved;
        let other = if other.point == self.point {
            other
        } else {
            moved = other.transport(self.point);
            &moved
        };
        Ok(Torsor {
            rotation: core::array::from_fn(|i| &self.rotation[i] + &other.rotation[i]),
            translation: core::array::from_fn(|i| &self.translation[i] + &other.translation[i]),
            point: self.point,
            frame: self.frame,
        })
    }

    pub fn negate(&self) -> Torsor {
        Torsor {
            rotation: core::array::from_fn(|i| -&self.rotation[i]),
            translation: core::array::from_fn(|i| -&self.translation[i]),
            point: self.point,
            frame: self.frame,
        }
    }

    /// Re-expresses a torsor given in `local`'s coordinates in the parent
    /// (part global) frame.
    pub fn to_parent(&self, local: &Frame) -> Torsor {
        Torsor {
            rotation: rotate_lin(&self.rotation, &local.basis),
            translation: rotate_lin(&self.translation, &local.basis),
            point: local.point_to_parent(self.point),
            frame: GLOBAL_FRAME,
        }
    }

    /// Re-expresses a parent-frame torsor in `local`'s coordinates, tagging
    /// the result with `frame_id`.
    pub fn to_local(&self, local: &Frame, frame_id: u32) -> Torsor {
        Torsor {
            rotation: project_lin(&self.rotation, &local.basis),
            translation: project_lin(&self.translation, &local.basis),
            point: local.point_to_local(self.point),
            frame: frame_id,
        }
    }

    /// Numeric value. With `default_zero` parameters missing from the
    /// assignment count as zero, otherwise they are an error.
    pub fn evaluate(&self, assignment: &Assignment, default_zero: bool) -> Result<NumericTorsor> {
        let mut c = [0.0; 6];
        for (i, slot) in c.iter_mut().enumerate() {
            let e = self.component(i);
            *slot = if default_zero { e.evaluate_or_zero(assignment) } else { e.evaluate(assignment)? };
        }
        Ok(NumericTorsor { rotation: [c[0], c[1], c[2]], translation: [c[3], c[4], c[5]], point: self.point })
    }
}

/// Surface classes and the displacement kinds that change them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SurfaceClass {
    /// Local z is the normal.
    Plane,
    /// Local z is the axis.
    Cylinder,
}

impl SurfaceClass {
    pub fn free_kinds(self) -> &'static [ParamKind] {
        match self {
            SurfaceClass::Plane => &[ParamKind::Rx, ParamKind::Ry, ParamKind::Tz],
            SurfaceClass::Cylinder => &[ParamKind::Rx, ParamKind::Ry, ParamKind::Tx, ParamKind::Ty, ParamKind::Ra],
        }
    }

    /// Torsor components (0..6) that leave the surface unchanged.
    pub fn invariant_components(self) -> &'static [usize] {
        match self {
            SurfaceClass::Plane => &[2, 3, 4],
            SurfaceClass::Cylinder => &[2, 5],
        }
    }
}

/// Deviation of a perfect-form surface: its torsor and, for cylinders, the
/// radius deviation carried alongside.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SurfaceDeviation {
    pub class: SurfaceClass,
    pub torsor: Torsor,
    pub radius: LinExpr,
}

impl SurfaceDeviation {
    /// Zeroes the components that are invariant for the surface class.
    /// The torsor must be in the surface local frame.
    pub fn project_invariants(&mut self) {
        for &i in self.class.invariant_components() {
            *self.torsor.component_mut(i) = LinExpr::zero();
        }
    }
}

/// Registers one fresh parameter per kind in `kinds` and returns the torsor
/// they form, in the local frame `frame_id` at its origin.
pub fn torsor_with_kinds(
    kinds: &[ParamKind],
    surface: u32,
    setup: u32,
    category: Category,
    bounds: &KindBounds,
    frame_id: u32,
    registry: &mut Registry,
) -> Result<(Torsor, LinExpr)> {
    let mut torsor = Torsor::zero(geometry::ORIGIN, frame_id);
    let mut radius = LinExpr::zero();
    let mut ids = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let id = registry.register(kind, surface, setup, category, bounds.get(kind))?;
        ids.push(id);
        match kind.component() {
            Some(i) => *torsor.component_mut(i) = LinExpr::param(id),
            None => radius = LinExpr::param(id),
        }
    }
    Ok((torsor, radius))
}

/// Fresh deviation for a surface of `class`: one parameter per free kind,
/// exact zeros on the invariant kinds.
pub fn new_surface_torsor(
    class: SurfaceClass,
    surface: u32,
    setup: u32,
    category: Category,
    bounds: &KindBounds,
    registry: &mut Registry,
) -> Result<SurfaceDeviation> {
    let (torsor, radius) = torsor_with_kinds(class.free_kinds(), surface, setup, category, bounds, surface, registry)?;
    Ok(SurfaceDeviation { class, torsor, radius })
}
