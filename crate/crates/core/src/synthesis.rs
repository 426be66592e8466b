//! From influence coefficients to per-set-up manufacturing specifications:
//! proposal, verification against the functional tolerance, sizing and
//! redundancy checks.

use crate::gauge::{assemble_gauge, gap_expressions, GaugeKind, VirtualGauge, ZoneForm, ZoneMobility};
use crate::mmp::{ConstraintOrigin, Mmp};
use crate::optimizer::{
    worst_case, Influence, OptimizationProblem, SolverKind, SolverOptions, Status, WorstCaseResult,
};
use crate::param::{parse_name, Category, ParamKind, Role};
use crate::part::NominalPart;
use crate::process::{LinearConstraint, ProcessPlan};
use crate::torsor::SurfaceClass;
use crate::{Error, Result};
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

const REDUNDANCY_EPS: f64 = 1e-9;
const SIZING_PRECISION: f64 = 1e-4;
const SIZING_STEPS: usize = 60;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InfluenceRow {
    pub setup: u32,
    pub surface: u32,
    pub name: String,
    pub kind: ParamKind,
    pub role: Role,
    /// 0 for non-influential parameters.
    pub coefficient: f64,
}

/// Influence coefficients grouped by set-up then surface.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InfluenceTable {
    pub rows: Vec<InfluenceRow>,
}

impl InfluenceTable {
    pub fn new(problem: &OptimizationProblem, influences: &[Influence]) -> InfluenceTable {
        let mut rows: Vec<InfluenceRow> = influences
            .iter()
            .filter_map(|inf| {
                let p = problem.registry.get(inf.param);
                let role = parse_name(&p.name)?.role();
                (role != Role::Gauge).then(|| InfluenceRow {
                    setup: p.setup,
                    surface: p.surface,
                    name: p.name.clone(),
                    kind: p.kind,
                    role,
                    coefficient: inf.coefficient,
                })
            })
            .collect();
        rows.sort_by(|a, b| (a.setup, a.surface).cmp(&(b.setup, b.surface)));
        InfluenceTable { rows }
    }

    pub fn influential(&self) -> impl Iterator<Item = &InfluenceRow> {
        self.rows.iter().filter(|r| r.coefficient != 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SpecType {
    Orientation,
    Location,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SurfaceInfluence {
    pub surface: u32,
    /// Hierarchy rank for positioning surfaces.
    pub rank: Option<u32>,
    pub translation: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SetupClassification {
    pub setup: u32,
    /// Ordered by rank.
    pub positioning: Vec<SurfaceInfluence>,
    pub machined: Vec<SurfaceInfluence>,
}

/// Groups influential parameters per set-up into positioning and machined
/// surfaces, recording whether any translation-type parameter is involved.
/// Raw surfaces (set-up 0) are not classified.
pub fn classify_parameters(table: &InfluenceTable, plan: &ProcessPlan) -> Vec<SetupClassification> {
    let mut per: BTreeMap<u32, (BTreeMap<u32, bool>, BTreeMap<u32, bool>)> = BTreeMap::new();
    for row in table.influential() {
        if row.setup == 0 {
            continue;
        }
        let entry = per.entry(row.setup).or_default();
        let map = if row.role == Role::Positioning { &mut entry.0 } else { &mut entry.1 };
        *map.entry(row.surface).or_default() |= !row.kind.is_rotation();
    }
    per.into_iter()
        .map(|(setup, (pos, mach))| {
            let rank = |s: u32| plan.setup(setup).and_then(|su| su.rank_of(s));
            let mut positioning: Vec<SurfaceInfluence> = pos
                .into_iter()
                .map(|(surface, translation)| SurfaceInfluence { surface, rank: rank(surface), translation })
                .collect();
            positioning.sort_by_key(|s| (s.rank.unwrap_or(u32::MAX), s.surface));
            let machined = mach
                .into_iter()
                .map(|(surface, translation)| SurfaceInfluence { surface, rank: None, translation })
                .collect();
            SetupClassification { setup, positioning, machined }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpecProposal {
    pub setup: u32,
    /// Primary first.
    pub datums: Vec<u32>,
    pub toleranced: u32,
    pub spec_type: SpecType,
    /// Full zone width once chosen.
    pub value: Option<f64>,
    pub active: bool,
}

impl SpecProposal {
    pub fn gauge(&self, part: &NominalPart) -> Result<VirtualGauge> {
        let value = self.value.ok_or_else(|| {
            Error::InvalidPlan(format!(
                "specification on surface {} (set-up {}) has no value",
                self.toleranced, self.setup
            ))
        })?;
        let surface = part.surface(self.toleranced).ok_or(Error::UnknownSurface(self.toleranced))?;
        Ok(VirtualGauge {
            kind: GaugeKind::Manufacturing { setup: self.setup },
            datums: self.datums.clone(),
            toleranced: self.toleranced,
            width: value,
            zone: match surface.class {
                SurfaceClass::Plane => ZoneForm::TwoPlanes,
                SurfaceClass::Cylinder => ZoneForm::CoaxialCylinder,
            },
            mobility: match self.spec_type {
                SpecType::Location => ZoneMobility::Location,
                SpecType::Orientation => ZoneMobility::Orientation,
            },
        })
    }
}

/// One datum system per set-up made of its influential positioning
/// surfaces, and one specification per influential machined surface:
/// location when a translation is involved, orientation otherwise.
/// Returns the proposals and warnings.
pub fn propose_specs(classification: &[SetupClassification]) -> (Vec<SpecProposal>, Vec<String>) {
    let mut proposals = Vec::new();
    let mut warnings = Vec::new();
    for c in classification {
        let datums: Vec<u32> = c.positioning.iter().map(|s| s.surface).collect();
        for m in &c.machined {
            if datums.is_empty() {
                warnings.push(format!(
                    "set-up {}: surface {} is influential but no positioning surface is; specification has no datum",
                    c.setup, m.surface
                ));
            }
            proposals.push(SpecProposal {
                setup: c.setup,
                datums: datums.clone(),
                toleranced: m.surface,
                spec_type: if m.translation { SpecType::Location } else { SpecType::Orientation },
                value: None,
                active: true,
            });
        }
    }
    (proposals, warnings)
}

/// Worst case of the functional tolerance when machine capabilities are
/// replaced by the manufacturing specifications: each active proposal is a
/// manufacturing gauge on the part as it stands after its set-up, and its
/// gaps must be non-negative. Raw-surface bounds and contact conditions
/// still apply.
pub fn constrained_problem(
    mmp: &Mmp,
    part: &NominalPart,
    functional: &VirtualGauge,
    proposals: &[SpecProposal],
) -> Result<OptimizationProblem> {
    let mut registry = mmp.registry.clone();
    let assembled = assemble_gauge(functional, mmp, part, &mut registry)?;
    let gaps = gap_expressions(functional, &assembled, mmp, part)?;
    let mut outer_constraints: Vec<LinearConstraint> = mmp
        .constraints
        .iter()
        .filter(|c| matches!(c.origin, ConstraintOrigin::Contact { .. }))
        .map(|c| c.constraint.clone())
        .collect();
    for p in proposals.iter().filter(|p| p.active) {
        let gauge = p.gauge(part)?;
        let stage = mmp.truncated(p.setup);
        let mg = assemble_gauge(&gauge, &stage, part, &mut registry)?;
        outer_constraints.extend(mg.constraints.iter().cloned());
        for g in gap_expressions(&gauge, &mg, &stage, part)?.gaps {
            outer_constraints.push(LinearConstraint::ge(g, 0.0));
        }
    }
    let outer = registry
        .iter()
        .filter(|p| p.category != Category::GaugeLink)
        .map(|p| {
            let keep = p.setup == 0 || p.category == Category::Link;
            (p.id, if keep { p.bounds } else { None })
        })
        .collect();
    Ok(OptimizationProblem {
        registry,
        outer,
        outer_constraints,
        inner: assembled.links,
        inner_constraints: assembled.constraints,
        gaps: gaps.gaps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "SCREAMING_SNAKE_CASE"))]
pub enum Completeness {
    Complete,
    Incomplete,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub completeness: Completeness,
    /// Bounded and worst case ≥ 0.
    pub conform: bool,
    pub result: WorstCaseResult,
}

/// Everything a verification needs besides the proposals.
#[derive(Debug, Clone, Copy)]
pub struct Context<'a> {
    pub plan: &'a ProcessPlan,
    pub mmp: &'a Mmp,
    pub functional: &'a VirtualGauge,
    pub solver: SolverKind,
    pub options: &'a SolverOptions,
}

pub fn verify_specs(ctx: &Context<'_>, proposals: &[SpecProposal]) -> Result<Verification> {
    let problem = constrained_problem(ctx.mmp, &ctx.plan.part, ctx.functional, proposals)?;
    let result = worst_case(&problem, ctx.solver, ctx.options)?;
    let completeness = match result.status {
        Status::Bounded => Completeness::Complete,
        Status::Divergent | Status::Infeasible => Completeness::Incomplete,
    };
    let conform = result.status == Status::Bounded && result.value >= 0.0;
    Ok(Verification { completeness, conform, result })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sizing {
    /// Factor applied to every input value.
    pub alpha: f64,
    pub proposals: Vec<SpecProposal>,
    /// Worst case at the returned values.
    pub worst: f64,
}

fn scaled(proposals: &[SpecProposal], alpha: f64) -> Vec<SpecProposal> {
    proposals.iter().map(|p| SpecProposal { value: p.value.map(|v| v * alpha), ..p.clone() }).collect()
}

/// Largest uniform factor on the proposal values (used as weights) keeping
/// the worst case non-negative; bisection to relative precision 1e-4 then
/// one secant step on the bracketing segment.
pub fn size_tolerances(ctx: &Context<'_>, proposals: &[SpecProposal]) -> Result<Sizing> {
    if let Some(p) = proposals.iter().find(|p| p.active && !p.value.is_some_and(|v| v > 0.0)) {
        return Err(Error::InvalidPlan(format!("specification on surface {} needs a positive weight", p.toleranced)));
    }
    let eval = |alpha: f64| -> Result<f64> {
        let v = verify_specs(ctx, &scaled(proposals, alpha))?;
        Ok(match v.result.status {
            Status::Bounded => v.result.value,
            _ => f64::NEG_INFINITY,
        })
    };
    let first = verify_specs(ctx, proposals)?;
    if first.completeness == Completeness::Incomplete {
        return Err(Error::InvalidPlan(String::from(
            "specification set is incomplete; no scale bounds the functional worst case",
        )));
    }
    let (mut lo, mut hi, mut f_lo, mut f_hi);
    let f1 = first.result.value;
    if f1 >= 0.0 {
        (lo, f_lo) = (1.0, f1);
        hi = 2.0;
        f_hi = eval(hi)?;
        let mut steps = 0;
        while f_hi >= 0.0 {
            (lo, f_lo) = (hi, f_hi);
            hi *= 2.0;
            f_hi = eval(hi)?;
            steps += 1;
            if steps > SIZING_STEPS {
                return Err(Error::InvalidPlan(String::from("functional tolerance holds for any specification value")));
            }
        }
    } else {
        (hi, f_hi) = (1.0, f1);
        lo = 0.5;
        f_lo = eval(lo)?;
        let mut steps = 0;
        while f_lo < 0.0 {
            (hi, f_hi) = (lo, f_lo);
            lo *= 0.5;
            f_lo = eval(lo)?;
            steps += 1;
            if steps > SIZING_STEPS {
                return Err(Error::Unreachable(String::from("no positive specification value meets it")));
            }
        }
    }
    while (hi - lo) > SIZING_PRECISION * hi {
        let mid = 0.5 * (lo + hi);
        let f = eval(mid)?;
        if f >= 0.0 {
            (lo, f_lo) = (mid, f);
        } else {
            (hi, f_hi) = (mid, f);
        }
    }
    if f_hi.is_finite() && f_lo > f_hi {
        let secant = lo + f_lo * (hi - lo) / (f_lo - f_hi);
        // round-off can leave the exact root marginally negative
        for candidate in [secant, secant * (1.0 - 1e-9)] {
            if candidate > lo && candidate < hi {
                let f = eval(candidate)?;
                if f >= 0.0 {
                    (lo, f_lo) = (candidate, f);
                    break;
                }
            }
        }
    }
    Ok(Sizing { alpha: lo, proposals: scaled(proposals, lo), worst: f_lo })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RedundancyFlag {
    pub setup: u32,
    pub toleranced: u32,
    pub unnecessary: bool,
    pub status_without: Status,
    /// Worst case without this specification (−∞ when divergent).
    pub value_without: f64,
}

/// Re-solves without each active proposal in turn; a proposal is
/// unnecessary when the result stays bounded and unchanged.
pub fn detect_redundant(ctx: &Context<'_>, proposals: &[SpecProposal]) -> Result<Vec<RedundancyFlag>> {
    if proposals.is_empty() {
        return Ok(Vec::new());
    }
    let base = verify_specs(ctx, proposals)?;
    let mut flags = Vec::new();
    for (i, p) in proposals.iter().enumerate().filter(|(_, p)| p.active) {
        let mut without = proposals.to_vec();
        without[i].active = false;
        let v = verify_specs(ctx, &without)?;
        let unnecessary = v.result.status == Status::Bounded
            && base.result.status == Status::Bounded
            && (v.result.value - base.result.value).abs() < REDUNDANCY_EPS;
        flags.push(RedundancyFlag {
            setup: p.setup,
            toleranced: p.toleranced,
            unnecessary,
            status_without: v.result.status,
            value_without: v.result.value,
        });
    }
    Ok(flags)
}
