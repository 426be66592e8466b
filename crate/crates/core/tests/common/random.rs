//! Random worst-case problems built directly on a registry.

use mmptol_core::param::Category;
use mmptol_core::{LinExpr, LinearConstraint, OptimizationProblem, ParamId, ParamKind, Registry};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.0.next_u64() % n as u64) as usize
    }
}

#[derive(Clone, Copy)]
pub struct Shape {
    pub outer: usize,
    pub links: usize,
    pub extra_gaps: usize,
    /// Add one random coupling row to the outer box.
    pub coupled: bool,
}

pub const LINK_RANGE: f64 = 1.5;

/// Gaps `c + a·x + b·y`; every link appears with both signs so the inner
/// problem is bounded, and links are boxed to ±1.5 by assembly rows.
pub fn problem(rng: &mut Rng, shape: Shape) -> OptimizationProblem {
    let mut registry = Registry::new();
    let mut outer = Vec::new();
    for i in 0..shape.outer {
        let r = rng.range(0.1, 1.0);
        let lo = -r * rng.range(0.2, 1.0);
        let id = registry.register(ParamKind::Tz, i as u32 + 1, 1, Category::Machining, Some((lo, r))).unwrap();
        outer.push((id, Some((lo, r))));
    }
    let links: Vec<ParamId> = (0..shape.links)
        .map(|i| registry.register(ParamKind::Tx, i as u32 + 1, 1, Category::GaugeLink, None).unwrap())
        .collect();
    let gap = |rng: &mut Rng, link: Option<(usize, f64)>| {
        let mut e = LinExpr::constant(rng.range(0.5, 2.0));
        for (id, _) in &outer {
            if rng.unit() < 0.7 {
                e.add_term(*id, rng.range(-2.0, 2.0));
            }
        }
        for (j, &y) in links.iter().enumerate() {
            let c = match link {
                Some((i, s)) if i == j => s * rng.range(0.5, 1.5),
                _ if rng.unit() < 0.3 => rng.range(-0.5, 0.5),
                _ => 0.0,
            };
            e.add_term(y, c);
        }
        e
    };
    let mut gaps = Vec::new();
    for i in 0..shape.links {
        gaps.push(gap(rng, Some((i, 1.0))));
        gaps.push(gap(rng, Some((i, -1.0))));
    }
    for _ in 0..shape.extra_gaps {
        gaps.push(gap(rng, None));
    }
    let mut inner_constraints = Vec::new();
    for &y in &links {
        inner_constraints.push(LinearConstraint::le(LinExpr::param(y), LINK_RANGE));
        inner_constraints.push(LinearConstraint::ge(LinExpr::param(y), -LINK_RANGE));
    }
    let mut outer_constraints = Vec::new();
    if shape.coupled && shape.outer >= 2 {
        let mut e = LinExpr::zero();
        for (id, _) in &outer {
            e.add_term(*id, rng.range(0.2, 1.0));
        }
        // cuts off part of the box but keeps the origin feasible
        outer_constraints.push(LinearConstraint::le(e, rng.range(0.1, 0.5)));
    }
    OptimizationProblem { registry, outer, outer_constraints, inner: links, inner_constraints, gaps }
}
