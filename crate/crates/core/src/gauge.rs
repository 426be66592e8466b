//! Virtual gauges: datum features assembled on the modelled part, a
//! tolerance zone around the toleranced surface, and the gap expressions
//! measuring the surface against the zone.

use crate::geometry::{Frame, ORIGIN};
use crate::hierarchy::{apply, row_direction, solve6, RowBasis};
use crate::linexpr::LinExpr;
use crate::mmp::Mmp;
use crate::param::{Category, ParamId, ParamKind, Registry};
use crate::part::{circle_angle, NominalPart, DEFAULT_CIRCLE_SAMPLES};
use crate::process::LinearConstraint;
use crate::torsor::{SurfaceClass, Torsor, GLOBAL_FRAME};
use crate::{Error, Result};
use alloc::format;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum GaugeKind {
    /// Functional tolerance; the number tags its link parameters (`G1`).
    Functional { gauge: u32 },
    /// Manufacturing specification checked at the end of `setup`.
    Manufacturing { setup: u32 },
}

impl GaugeKind {
    fn link_category(self) -> (Category, u32) {
        match self {
            GaugeKind::Functional { gauge } => (Category::GaugeLink, gauge),
            GaugeKind::Manufacturing { setup } => (Category::ManufacturingGaugeLink, setup),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ZoneForm {
    TwoPlanes,
    CoaxialCylinder,
}

/// Location zones follow the whole datum system; orientation zones only
/// follow its rotations and may translate freely.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ZoneMobility {
    Location,
    Orientation,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VirtualGauge {
    pub kind: GaugeKind,
    /// Datum surfaces, primary first.
    pub datums: Vec<u32>,
    pub toleranced: u32,
    /// Full zone width.
    pub width: f64,
    pub zone: ZoneForm,
    pub mobility: ZoneMobility,
}

impl VirtualGauge {
    pub fn half_width(&self) -> f64 {
        0.5 * self.width
    }

    pub fn check(&self) -> Result<()> {
        if !(self.width > 0.0) {
            return Err(Error::InvalidPlan(format!(
                "zone width on surface {} must be positive, got {}",
                self.toleranced, self.width
            )));
        }
        for (i, d) in self.datums.iter().enumerate() {
            if self.datums[..i].contains(d) {
                return Err(Error::InvalidPlan(format!("datum {d} listed twice")));
            }
            if *d == self.toleranced {
                return Err(Error::InvalidPlan(format!("surface {d} cannot be its own datum")));
            }
        }
        Ok(())
    }
}

/// Gauge placed on the modelled part.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledGauge {
    /// Gauge displacement relative to the nominal part, global frame at the origin.
    pub torsor: Torsor,
    /// One per residual mobility.
    pub links: Vec<ParamId>,
    /// Assembly conditions on the links.
    pub constraints: Vec<LinearConstraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapSet {
    pub toleranced: u32,
    /// Non-negative means inside the zone.
    pub gaps: Vec<LinExpr>,
}

impl GapSet {
    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }
}

fn datum_components(class: SurfaceClass, mobility: ZoneMobility) -> &'static [usize] {
    match (class, mobility) {
        (_, ZoneMobility::Orientation) => &[0, 1],
        (SurfaceClass::Plane, ZoneMobility::Location) => &[0, 1, 5],
        (SurfaceClass::Cylinder, ZoneMobility::Location) => &[0, 1, 3, 4],
    }
}

fn surface_frame(part: &NominalPart, id: u32) -> Result<&Frame> {
    Ok(&part.surface(id).ok_or(Error::UnknownSurface(id))?.frame)
}

/// Places the gauge on `mmp`: each datum feature coincides with its datum
/// surface in the directions the hierarchy leaves it, and every remaining
/// direction becomes a fresh link parameter registered in `registry`.
pub fn assemble_gauge(
    g: &VirtualGauge,
    mmp: &Mmp,
    part: &NominalPart,
    registry: &mut Registry,
) -> Result<AssembledGauge> {
    g.check()?;
    let mut basis = RowBasis::new();
    let mut rows = Vec::with_capacity(6);
    let mut rhs = Vec::with_capacity(6);
    for &d in &g.datums {
        let dev = mmp.surface(d)?;
        let frame = surface_frame(part, d)?;
        for &k in datum_components(dev.class, g.mobility) {
            let row = row_direction(frame, k);
            if basis.try_accept(&row) {
                rows.push(row);
                rhs.push(dev.torsor.component(k).clone());
            }
        }
    }

    let primary = match g.datums.first() {
        Some(&d) => *surface_frame(part, d)?,
        None => Frame::identity(),
    };
    let (category, tag) = g.kind.link_category();
    let mut links = Vec::new();
    for k in 0..6 {
        let row = row_direction(&primary, k);
        if basis.try_accept(&row) {
            let id = registry.register(ParamKind::from_component(k), g.toleranced, tag, category, None)?;
            rows.push(row);
            rhs.push(LinExpr::param(id));
            links.push(id);
        }
    }
    let x = solve6(&rows, &rhs)
        .ok_or_else(|| Error::Unreachable(format!("gauge on surface {}: singular rows", g.toleranced)))?;
    let mut torsor = Torsor::zero(ORIGIN, GLOBAL_FRAME);
    for (i, xi) in x.into_iter().enumerate() {
        *torsor.component_mut(i) = xi;
    }
    Ok(AssembledGauge { torsor, links, constraints: Vec::new() })
}

/// Gaps between the toleranced surface and both bounding surfaces of the
/// zone, at the surface's sample points.
pub fn gap_expressions(g: &VirtualGauge, assembled: &AssembledGauge, mmp: &Mmp, part: &NominalPart) -> Result<GapSet> {
    let surface = part.surface(g.toleranced).ok_or(Error::UnknownSurface(g.toleranced))?;
    let dev = mmp.surface(g.toleranced)?;
    let x: [LinExpr; 6] = core::array::from_fn(|i| assembled.torsor.component(i).clone());
    // surface relative to the gauge, local components
    let rel: [LinExpr; 6] =
        core::array::from_fn(|k| dev.torsor.component(k) - &apply(&row_direction(&surface.frame, k), &x));
    let half = g.half_width();
    let mut gaps = Vec::new();
    let mut push_pair = |w: LinExpr| {
        let mut lo = -&w;
        lo.set_constant(lo.constant_part() + half);
        let mut hi = w;
        hi.set_constant(hi.constant_part() + half);
        gaps.push(lo);
        gaps.push(hi);
    };
    match (g.zone, surface.class) {
        (ZoneForm::TwoPlanes, SurfaceClass::Plane) => {
            for v in &surface.boundary {
                let mut w = rel[5].clone();
                w.add_scaled(&rel[0], v[1]);
                w.add_scaled(&rel[1], -v[0]);
                push_pair(w);
            }
        }
        (ZoneForm::CoaxialCylinder, SurfaceClass::Cylinder) => {
            let (z0, z1) = surface.axial_range();
            for z in [z0, z1] {
                let mut dx = rel[3].clone();
                dx.add_scaled(&rel[1], z);
                let mut dy = rel[4].clone();
                dy.add_scaled(&rel[0], -z);
                for j in 0..DEFAULT_CIRCLE_SAMPLES {
                    let (sin, cos) = circle_angle(j, DEFAULT_CIRCLE_SAMPLES);
                    let mut w = &dx * cos + &dy * sin;
                    w += &dev.radius;
                    push_pair(w);
                }
            }
        }
        (zone, class) => {
            return Err(Error::Unsupported(format!("zone {zone:?} around a {class:?} (surface {})", g.toleranced)))
        }
    }
    Ok(GapSet { toleranced: g.toleranced, gaps })
}
