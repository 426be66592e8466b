//! Model of the manufactured part: deviations of every produced surface
//! relative to the nominal part, built set-up by set-up.

use crate::geometry::ORIGIN;
use crate::hierarchy::{apply, row_direction, solve6, Row, RowBasis};
use crate::linexpr::LinExpr;
use crate::param::{Category, KindBounds, ParamKind, Registry};
use crate::part::{circle_angle, NominalPart, Surface};
use crate::process::{ConnectionContact, LinearConstraint, Locator, ProcessPlan, SetUp};
use crate::torsor::{new_surface_torsor, torsor_with_kinds, SurfaceDeviation, Torsor, GLOBAL_FRAME};
use crate::{Error, Result};
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

const CENTERING_DIRECTIONS: usize = 8;

/// Where a model constraint comes from; decides which constraints survive
/// when manufacturing specifications replace machine capabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ConstraintOrigin {
    /// Joint machining or holder capability of a set-up.
    Capability { setup: u32 },
    /// Part/part-holder contact of a set-up.
    Contact { setup: u32 },
}

impl ConstraintOrigin {
    pub fn setup(self) -> u32 {
        match self {
            ConstraintOrigin::Capability { setup } | ConstraintOrigin::Contact { setup } => setup,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelConstraint {
    pub constraint: LinearConstraint,
    pub origin: ConstraintOrigin,
}

/// Result of resolving one set-up's positioning hierarchy.
#[derive(Debug, Clone, PartialEq)]
pub struct Positioning {
    /// Part relative to the machine, global frame, at the part origin.
    pub torsor: Torsor,
    /// Non-penetration and clearance constraints of floating contacts.
    pub constraints: Vec<LinearConstraint>,
    /// Accepted contact rows as (surface, local component).
    pub rows: Vec<(u32, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Mmp {
    pub registry: Registry,
    /// Deviation of each produced surface in its local frame.
    pub surfaces: BTreeMap<u32, SurfaceDeviation>,
    /// Set-up producing each surface, 0 for raw surfaces.
    pub produced_in: BTreeMap<u32, u32>,
    pub positioning: BTreeMap<u32, Torsor>,
    pub constraints: Vec<ModelConstraint>,
    /// Last set-up included.
    pub through_setup: u32,
}

impl Mmp {
    /// The model as it stands at the end of `setup`. The registry is kept
    /// whole so parameter ids stay valid.
    pub fn truncated(&self, setup: u32) -> Mmp {
        let produced_in: BTreeMap<u32, u32> =
            self.produced_in.iter().filter(|(_, &s)| s <= setup).map(|(&k, &v)| (k, v)).collect();
        Mmp {
            registry: self.registry.clone(),
            surfaces: self
                .surfaces
                .iter()
                .filter(|(id, _)| produced_in.contains_key(id))
                .map(|(&k, v)| (k, v.clone()))
                .collect(),
            produced_in,
            positioning: self.positioning.range(..=setup).map(|(&k, v)| (k, v.clone())).collect(),
            constraints: self.constraints.iter().filter(|c| c.origin.setup() <= setup).cloned().collect(),
            through_setup: setup.min(self.through_setup),
        }
    }

    pub fn surface(&self, id: u32) -> Result<&SurfaceDeviation> {
        self.surfaces.get(&id).ok_or(Error::UnknownSurface(id))
    }

    /// Deviation of surface `id` in the part global frame, at its local origin.
    pub fn to_global(&self, id: u32, part: &NominalPart) -> Result<Torsor> {
        Ok(self.surface(id)?.torsor.to_parent(&part_surface(part, id)?.frame))
    }
}

fn part_surface(part: &NominalPart, id: u32) -> Result<&Surface> {
    part.surface(id).ok_or(Error::UnknownSurface(id))
}

/// `row · x` evaluated on a positioning torsor taken at the part origin.
fn torsor_vector(t: &Torsor) -> [LinExpr; 6] {
    let t = if t.point == ORIGIN { t.clone() } else { t.transport(ORIGIN) };
    core::array::from_fn(|i| t.component(i).clone())
}

/// Deviation of a surface machined with machine deviation `dm` while the
/// part sits at `positioning`: the machined surface relative to the part.
pub fn machining_deviation(surface: &Surface, dm: &SurfaceDeviation, positioning: &Torsor) -> SurfaceDeviation {
    let x = torsor_vector(positioning);
    let mut torsor = Torsor::zero(ORIGIN, surface.id);
    for k in 0..6 {
        *torsor.component_mut(k) = dm.torsor.component(k) - &apply(&row_direction(&surface.frame, k), &x);
    }
    let mut out = SurfaceDeviation { class: dm.class, torsor, radius: dm.radius.clone() };
    out.project_invariants();
    out
}

struct Contact {
    surface: u32,
    rank: u32,
    locator: Locator,
    contact: ConnectionContact,
    link_bounds: KindBounds,
    /// (component, row, e) where the contact reads row·x + e = link.
    candidates: Vec<(usize, Row, LinExpr)>,
    accepted: Vec<bool>,
}

/// Resolves the positioning hierarchy of `setup` against the deviations of
/// the surfaces it touches, registering holder and link parameters.
pub fn solve_positioning(
    setup: &SetUp,
    part: &NominalPart,
    surfaces: &BTreeMap<u32, SurfaceDeviation>,
    registry: &mut Registry,
) -> Result<Positioning> {
    let mut contacts = Vec::new();
    let mut basis = RowBasis::new();
    for c in setup.hierarchy() {
        let s = part_surface(part, c.surface)?;
        let dev = surfaces.get(&c.surface).ok_or_else(|| {
            Error::InvalidPlan(format!("set-up {} positions on surface {} before it is produced", setup.id, c.surface))
        })?;
        if dev.class != c.locator.part_class() {
            return Err(Error::InvalidPlan(format!(
                "set-up {}: locator {:?} cannot receive surface {}",
                setup.id, c.locator, c.surface
            )));
        }
        let rows = c.locator.rows();
        let kinds: Vec<ParamKind> = rows.iter().map(|&(k, _)| ParamKind::from_component(k)).collect();
        let (holder, _) =
            torsor_with_kinds(&kinds, c.surface, setup.id, Category::Holder, &c.holder_bounds, c.surface, registry)?;
        let mut candidates = Vec::with_capacity(rows.len());
        let mut accepted = Vec::with_capacity(rows.len());
        for (k, ra_coef) in rows {
            let row = row_direction(&s.frame, k);
            let mut e = dev.torsor.component(k) - holder.component(k);
            e.add_scaled(&dev.radius, ra_coef);
            accepted.push(basis.try_accept(&row));
            candidates.push((k, row, e));
        }
        if !accepted.iter().any(|&a| a) {
            return Err(Error::OverConstrained { setup: setup.id, rank: c.rank });
        }
        contacts.push(Contact {
            surface: c.surface,
            rank: c.rank,
            locator: c.locator,
            contact: c.contact,
            link_bounds: c.link_bounds,
            candidates,
            accepted,
        });
    }
    if basis.rank() < 6 {
        return Err(Error::UnderConstrained { setup: setup.id, dof: basis.rank() });
    }

    // link value of each accepted row
    let mut rows = Vec::with_capacity(6);
    let mut rhs = Vec::with_capacity(6);
    let mut accepted_rows = Vec::with_capacity(6);
    let mut links: Vec<BTreeMap<usize, LinExpr>> = Vec::with_capacity(contacts.len());
    for c in &contacts {
        let mut link = BTreeMap::new();
        for ((k, row, e), &ok) in c.candidates.iter().zip(&c.accepted) {
            if !ok {
                continue;
            }
            let l = match c.contact {
                ConnectionContact::Slipping => LinExpr::zero(),
                ConnectionContact::Floating { .. } => {
                    let kind = ParamKind::from_component(*k);
                    LinExpr::param(registry.register(
                        kind,
                        c.surface,
                        setup.id,
                        Category::Link,
                        c.link_bounds.get(kind),
                    )?)
                }
            };
            rows.push(*row);
            rhs.push(&l - e);
            accepted_rows.push((c.surface, *k));
            link.insert(*k, l);
        }
        links.push(link);
    }
    let x = solve6(&rows, &rhs)
        .ok_or_else(|| Error::Unreachable(format!("set-up {}: singular positioning rows", setup.id)))?;

    let mut constraints = Vec::new();
    for (c, mut link) in contacts.iter().zip(links) {
        let ConnectionContact::Floating { clearance } = c.contact else { continue };
        // dependent rows follow from the rest of the hierarchy
        for ((k, row, e), &ok) in c.candidates.iter().zip(&c.accepted) {
            if !ok {
                link.insert(*k, &apply(row, &x) + e);
            }
        }
        let get = |k: usize| link.get(&k).cloned().unwrap_or_default();
        let s = part_surface(part, c.surface)?;
        match c.locator {
            Locator::Planar => {
                // normals point out of material: positive normal motion penetrates
                for v in &s.boundary {
                    let mut gap = get(5);
                    gap.add_scaled(&get(0), v[1]);
                    gap.add_scaled(&get(1), -v[0]);
                    constraints.push(LinearConstraint::le(gap.clone(), 0.0));
                    constraints.push(LinearConstraint::ge(gap, -clearance));
                }
            }
            Locator::Centering { long } => {
                let (z0, z1) = s.axial_range();
                let levels: Vec<f64> = if long { alloc::vec![z0, z1] } else { alloc::vec![0.5 * (z0 + z1)] };
                for z in levels {
                    let lever = if long { z } else { 0.0 };
                    let mut dx = get(3);
                    dx.add_scaled(&get(1), lever);
                    let mut dy = get(4);
                    dy.add_scaled(&get(0), -lever);
                    for j in 0..CENTERING_DIRECTIONS {
                        let (sin, cos) = circle_angle(j, CENTERING_DIRECTIONS);
                        let radial = &dx * cos + &dy * sin;
                        constraints.push(LinearConstraint::le(radial, clearance));
                    }
                }
            }
            _ => {
                return Err(Error::Unsupported(format!(
                    "floating contact on locator {:?} (rank {})",
                    c.locator, c.rank
                )))
            }
        }
    }

    let mut torsor = Torsor::zero(ORIGIN, GLOBAL_FRAME);
    for (i, xi) in x.into_iter().enumerate() {
        *torsor.component_mut(i) = xi;
    }
    Ok(Positioning { torsor, constraints, rows: accepted_rows })
}

/// Builds the model of the manufactured part for the whole plan.
pub fn build_mmp(plan: &ProcessPlan) -> Result<Mmp> {
    let part = &plan.part;
    let mut registry = Registry::new();
    let mut surfaces = BTreeMap::new();
    let mut produced_in = BTreeMap::new();
    for r in &plan.raw {
        let s = part_surface(part, r.surface)?;
        let dev = new_surface_torsor(s.class, s.id, 0, Category::Machining, &r.bounds, &mut registry)?;
        surfaces.insert(s.id, dev);
        produced_in.insert(s.id, 0);
    }

    let mut positioning = BTreeMap::new();
    let mut constraints = Vec::new();
    let mut through_setup = 0;
    for setup in &plan.setups {
        let pos = solve_positioning(setup, part, &surfaces, &mut registry)?;
        constraints.extend(
            pos.constraints.into_iter().map(|constraint| ModelConstraint {
                constraint,
                origin: ConstraintOrigin::Contact { setup: setup.id },
            }),
        );
        for m in &setup.machining {
            let s = part_surface(part, m.surface)?;
            if produced_in.contains_key(&m.surface) {
                return Err(Error::InvalidPlan(format!("surface {} is produced twice", m.surface)));
            }
            let dm = new_surface_torsor(s.class, s.id, setup.id, Category::Machining, &m.bounds, &mut registry)?;
            surfaces.insert(s.id, machining_deviation(s, &dm, &pos.torsor));
            produced_in.insert(s.id, setup.id);
        }
        for spec in &setup.constraints {
            let constraint = spec.resolve(&registry)?;
            let touches_link = constraint.expr.params().any(|id| registry.get(id).category == Category::Link);
            let origin = if touches_link {
                ConstraintOrigin::Contact { setup: setup.id }
            } else {
                ConstraintOrigin::Capability { setup: setup.id }
            };
            constraints.push(ModelConstraint { constraint, origin });
        }
        positioning.insert(setup.id, pos.torsor);
        through_setup = setup.id;
    }
    Ok(Mmp { registry, surfaces, produced_in, positioning, constraints, through_setup })
}
