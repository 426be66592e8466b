//! Declarative process plan: set-ups, part-holder connections and machining
//! operations, plus plan validation.

use crate::hierarchy::{row_direction, RowBasis};
use crate::linexpr::{Assignment, LinExpr};
use crate::param::{ParamKind, Registry};
use crate::part::{validate_part, NominalPart};
use crate::torsor::SurfaceClass;
use crate::Result;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

pub use crate::param::KindBounds;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Sense {
    Le,
    Ge,
}

/// `expr (≤ | ≥) bound`
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinearConstraint {
    pub expr: LinExpr,
    pub sense: Sense,
    pub bound: f64,
}

impl LinearConstraint {
    pub fn le(expr: LinExpr, bound: f64) -> LinearConstraint {
        LinearConstraint { expr, sense: Sense::Le, bound }
    }

    pub fn ge(expr: LinExpr, bound: f64) -> LinearConstraint {
        LinearConstraint { expr, sense: Sense::Ge, bound }
    }

    /// Amount by which the constraint is violated (0 when satisfied);
    /// unassigned parameters count as zero.
    pub fn violation(&self, assignment: &Assignment) -> f64 {
        let v = self.expr.evaluate_or_zero(assignment);
        match self.sense {
            Sense::Le => (v - self.bound).max(0.0),
            Sense::Ge => (self.bound - v).max(0.0),
        }
    }

    /// The same constraint as `expr' ≤ 0` with the constant folded in.
    pub fn as_le_zero(&self) -> LinExpr {
        let mut e = match self.sense {
            Sense::Le => self.expr.clone(),
            Sense::Ge => -&self.expr,
        };
        let shift = match self.sense {
            Sense::Le => -self.bound,
            Sense::Ge => self.bound,
        };
        e.set_constant(e.constant_part() + shift);
        e
    }
}

/// A joint constraint written against canonical parameter names.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConstraintSpec {
    pub terms: Vec<(String, f64)>,
    pub sense: Sense,
    pub bound: f64,
}

impl ConstraintSpec {
    pub fn resolve(&self, registry: &Registry) -> Result<LinearConstraint> {
        let mut expr = LinExpr::zero();
        for (name, c) in &self.terms {
            expr.add_term(registry.require(name)?, *c);
        }
        Ok(LinearConstraint { expr, sense: self.sense, bound: self.bound })
    }
}

/// Geometry of an elementary part/part-holder connection.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Locator {
    /// Plane on plane.
    Planar,
    /// Cylinder in a bore or on a pin; a long centering also fixes the axis direction.
    Centering { long: bool },
    /// Cylinder in a vee whose bisector is the local −y direction.
    Vee { half_angle: f64, long: bool },
    /// Cylinder lying on a plane whose normal is the cylinder's local +y.
    CylinderOnPlane,
}

impl Locator {
    pub fn part_class(&self) -> SurfaceClass {
        match self {
            Locator::Planar => SurfaceClass::Plane,
            _ => SurfaceClass::Cylinder,
        }
    }

    /// Candidate contact rows in priority order: local torsor component
    /// (0..6) and the coefficient of the part radius deviation in that row.
    pub fn rows(&self) -> Vec<(usize, f64)> {
        match *self {
            Locator::Planar => alloc::vec![(0, 0.0), (1, 0.0), (5, 0.0)],
            Locator::Centering { long: true } => alloc::vec![(0, 0.0), (1, 0.0), (3, 0.0), (4, 0.0)],
            Locator::Centering { long: false } => alloc::vec![(3, 0.0), (4, 0.0)],
            Locator::Vee { half_angle, long } => {
                // a larger cylinder sits higher in the vee
                let lift = -1.0 / libm::sin(half_angle);
                if long {
                    alloc::vec![(0, 0.0), (1, 0.0), (3, 0.0), (4, lift)]
                } else {
                    alloc::vec![(3, 0.0), (4, lift)]
                }
            }
            Locator::CylinderOnPlane => alloc::vec![(0, 0.0), (4, -1.0)],
        }
    }

    /// Kinds of the part-holder surface deviation.
    pub fn holder_kinds(&self) -> &'static [ParamKind] {
        match self {
            Locator::Planar => SurfaceClass::Plane.free_kinds(),
            Locator::Centering { .. } => SurfaceClass::Cylinder.free_kinds(),
            Locator::Vee { .. } => &[ParamKind::Rx, ParamKind::Ry, ParamKind::Tx, ParamKind::Ty],
            Locator::CylinderOnPlane => &[ParamKind::Rx, ParamKind::Ty],
        }
    }

    pub fn supports_floating(&self) -> bool {
        matches!(self, Locator::Planar | Locator::Centering { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ConnectionContact {
    /// Clamped: the link is resolved deterministically to zero relative
    /// displacement in the constrained directions.
    Slipping,
    /// Free link limited by non-penetration and a maximal clearance.
    Floating { clearance: f64 },
}

/// Contact between a part-holder surface and the part surface it receives.
/// The holder surface is identified by the part surface it touches.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ElementaryConnection {
    pub surface: u32,
    /// 1 = primary.
    pub rank: u32,
    pub locator: Locator,
    pub contact: ConnectionContact,
    pub holder_bounds: KindBounds,
    pub link_bounds: KindBounds,
}

impl ElementaryConnection {
    pub fn slipping(surface: u32, rank: u32, locator: Locator, holder_bounds: KindBounds) -> Self {
        ElementaryConnection {
            surface,
            rank,
            locator,
            contact: ConnectionContact::Slipping,
            holder_bounds,
            link_bounds: KindBounds::none(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MachiningOperation {
    pub surface: u32,
    pub bounds: KindBounds,
}

/// A surface of the raw part, present before the first set-up.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RawSurface {
    pub surface: u32,
    pub bounds: KindBounds,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SetUp {
    pub id: u32,
    pub connections: Vec<ElementaryConnection>,
    pub machining: Vec<MachiningOperation>,
    /// Joint CM / CH / CHP constraints over this set-up's parameters.
    pub constraints: Vec<ConstraintSpec>,
}

impl SetUp {
    /// Connections sorted by rank.
    pub fn hierarchy(&self) -> Vec<&ElementaryConnection> {
        let mut v: Vec<_> = self.connections.iter().collect();
        v.sort_by_key(|c| c.rank);
        v
    }

    pub fn rank_of(&self, surface: u32) -> Option<u32> {
        self.connections.iter().find(|c| c.surface == surface).map(|c| c.rank)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProcessPlan {
    pub part: NominalPart,
    pub raw: Vec<RawSurface>,
    pub setups: Vec<SetUp>,
}

impl ProcessPlan {
    pub fn setup(&self, id: u32) -> Option<&SetUp> {
        self.setups.iter().find(|s| s.id == id)
    }

    /// Set-up in which `surface` is machined (0 for raw surfaces).
    pub fn producing_setup(&self, surface: u32) -> Option<u32> {
        if self.raw.iter().any(|r| r.surface == surface) {
            return Some(0);
        }
        self.setups.iter().find(|s| s.machining.iter().any(|m| m.surface == surface)).map(|s| s.id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanViolation {
    /// `None` for part-level or plan-level problems.
    pub setup: Option<u32>,
    pub message: String,
}

fn check_bounds(b: &KindBounds, what: &str, out: &mut Vec<String>) {
    for kind in ParamKind::ALL {
        if let Some((lo, hi)) = b.get(kind) {
            if !(lo <= hi) {
                out.push(format!("{what}: {kind} bounds [{lo}, {hi}] are reversed"));
            }
        }
    }
}

/// Number of degrees of freedom each connection of a set-up fixes, in rank
/// order, using the nominal geometry.
pub(crate) fn dof_per_connection(setup: &SetUp, part: &NominalPart) -> Option<Vec<(u32, usize)>> {
    let mut basis = RowBasis::new();
    let mut out = Vec::new();
    for c in setup.hierarchy() {
        let surface = part.surface(c.surface)?;
        let mut n = 0;
        for (component, _) in c.locator.rows() {
            if basis.try_accept(&row_direction(&surface.frame, component)) {
                n += 1;
            }
        }
        out.push((c.rank, n));
    }
    Some(out)
}

/// Checks surface precedence, 6-dof coverage per set-up and constraint
/// well-formedness. Empty iff the plan is valid.
pub fn validate_plan(plan: &ProcessPlan) -> Vec<PlanViolation> {
    let mut out: Vec<PlanViolation> = validate_part(&plan.part)
        .into_iter()
        .map(|v| PlanViolation { setup: None, message: format!("surface {}: {}", v.surface, v.message) })
        .collect();
    let part = &plan.part;

    let mut produced: BTreeSet<u32> = BTreeSet::new();
    let mut machined_in: BTreeMap<u32, u32> = BTreeMap::new();
    let mut plan_msgs = Vec::new();
    for r in &plan.raw {
        if part.surface(r.surface).is_none() {
            plan_msgs.push(format!("raw surface {} is not declared in the part", r.surface));
        }
        if !produced.insert(r.surface) {
            plan_msgs.push(format!("raw surface {} declared twice", r.surface));
        }
        check_bounds(&r.bounds, &format!("raw surface {}", r.surface), &mut plan_msgs);
    }
    out.extend(plan_msgs.drain(..).map(|message| PlanViolation { setup: None, message }));

    let mut last_id = 0;
    for setup in &plan.setups {
        let mut msgs = Vec::new();
        if setup.id <= last_id {
            msgs.push(format!("set-up ids must be increasing and ≥ 1 (found {} after {last_id})", setup.id));
        }
        last_id = last_id.max(setup.id);

        let mut ranks: Vec<u32> = setup.connections.iter().map(|c| c.rank).collect();
        ranks.sort_unstable();
        if ranks.iter().enumerate().any(|(i, &r)| r != i as u32 + 1) {
            msgs.push(format!("connection ranks {ranks:?} do not form the hierarchy 1..{}", ranks.len()));
        }
        let mut geometry_ok = true;
        for c in &setup.connections {
            match part.surface(c.surface) {
                None => {
                    msgs.push(format!("connection references undeclared surface {}", c.surface));
                    geometry_ok = false;
                }
                Some(s) if s.class != c.locator.part_class() => {
                    msgs.push(format!(
                        "locator {:?} cannot receive surface {} of class {:?}",
                        c.locator, c.surface, s.class
                    ));
                }
                Some(_) => {}
            }
            if !produced.contains(&c.surface) {
                msgs.push(format!(
                    "positions on surface {} which is neither raw nor machined in an earlier set-up",
                    c.surface
                ));
            }
            if let ConnectionContact::Floating { clearance } = c.contact {
                if !c.locator.supports_floating() {
                    msgs.push(format!("floating contact is not supported for locator {:?}", c.locator));
                }
                if !(clearance >= 0.0) {
                    msgs.push(format!("floating contact on surface {} has negative clearance", c.surface));
                }
            }
            if let Locator::Vee { half_angle, .. } = c.locator {
                if !(half_angle > 0.0 && half_angle < core::f64::consts::FRAC_PI_2) {
                    msgs.push(format!("vee half angle {half_angle} outside (0, π/2)"));
                }
            }
            check_bounds(&c.holder_bounds, &format!("holder of surface {}", c.surface), &mut msgs);
            check_bounds(&c.link_bounds, &format!("link of surface {}", c.surface), &mut msgs);
        }
        if geometry_ok {
            if let Some(per) = dof_per_connection(setup, part) {
                let total: usize = per.iter().map(|(_, n)| n).sum();
                for (rank, n) in &per {
                    if *n == 0 {
                        msgs.push(format!("connection of rank {rank} constrains no remaining degree of freedom"));
                    }
                }
                if total != 6 {
                    msgs.push(format!("positioning constrains {total} of 6 degrees of freedom"));
                }
            }
        }

        let mut here = BTreeSet::new();
        for m in &setup.machining {
            if part.surface(m.surface).is_none() {
                msgs.push(format!("machines undeclared surface {}", m.surface));
            }
            if !here.insert(m.surface) {
                msgs.push(format!("surface {} machined twice in the same set-up", m.surface));
            }
            if let Some(prev) = machined_in.insert(m.surface, setup.id) {
                msgs.push(format!("surface {} already machined in set-up {prev}", m.surface));
            } else if plan.raw.iter().any(|r| r.surface == m.surface) {
                msgs.push(format!("surface {} is declared raw and cannot be machined", m.surface));
            }
            check_bounds(&m.bounds, &format!("machining of surface {}", m.surface), &mut msgs);
        }
        for spec in &setup.constraints {
            if spec.terms.is_empty() {
                msgs.push(String::from("constraint has no terms"));
            }
        }
        produced.extend(here);
        out.extend(msgs.into_iter().map(|message| PlanViolation { setup: Some(setup.id), message }));
    }

    if out.is_empty() {
        // names can only be checked once the registry can be built
        match crate::mmp::build_mmp(plan) {
            Ok(_) => {}
            Err(e) => out.push(PlanViolation { setup: None, message: format!("{e}") }),
        }
    }
    out
}

/// Registers every DM / DH / LHP parameter of the plan under its canonical name.
pub fn registry_of(plan: &ProcessPlan) -> Result<Registry> {
    Ok(crate::mmp::build_mmp(plan)?.registry)
}
