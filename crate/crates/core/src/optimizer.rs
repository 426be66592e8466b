//! Nested worst-case search: the outer minimum over defect parameters of the
//! inner maximum over gauge links of the smallest gap.
//!
//! For a fixed outer point the inner value is a linear program. As a
//! function of the outer point it is the minimum of finitely many affine
//! pieces (one per vertex of the inner dual polytope), hence concave, and
//! its minimum over a polytope sits at a vertex.

use crate::gauge::{assemble_gauge, gap_expressions, VirtualGauge};
use crate::linexpr::{Assignment, LinExpr};
use crate::lp::{self, LinearProgram, LpOutcome, Objective, Relation};
use crate::mmp::Mmp;
use crate::param::{Category, ParamId, Registry};
use crate::part::NominalPart;
use crate::process::LinearConstraint;
use crate::{Error, Result};
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Largest corner enumeration allowed.
pub const ENUMERATION_LIMIT: usize = 20;
const MAX_DUAL_SUBSETS: usize = 2_000_000;
const COEFFICIENT_FLOOR: f64 = 1e-12;
const IMPROVE_EPS: f64 = 1e-12;
pub const FD_STEP: f64 = 1e-7;
const FD_AGREEMENT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationProblem {
    pub registry: Registry,
    /// Outer parameters and their intervals (`None` = unbounded).
    pub outer: Vec<(ParamId, Option<(f64, f64)>)>,
    pub outer_constraints: Vec<LinearConstraint>,
    pub inner: Vec<ParamId>,
    /// Assembly conditions; may involve outer parameters.
    pub inner_constraints: Vec<LinearConstraint>,
    /// The objective is the smallest of these.
    pub gaps: Vec<LinExpr>,
}

impl OptimizationProblem {
    /// Worst-case analysis of a functional tolerance on the full model:
    /// every machining, holder and link parameter is outer with its declared
    /// interval and all model constraints apply.
    pub fn functional(mmp: &Mmp, part: &NominalPart, gauge: &VirtualGauge) -> Result<OptimizationProblem> {
        let mut registry = mmp.registry.clone();
        let assembled = assemble_gauge(gauge, mmp, part, &mut registry)?;
        let gaps = gap_expressions(gauge, &assembled, mmp, part)?;
        let outer = registry
            .iter()
            .filter(|p| matches!(p.category, Category::Machining | Category::Holder | Category::Link))
            .map(|p| (p.id, p.bounds))
            .collect();
        Ok(OptimizationProblem {
            registry,
            outer,
            outer_constraints: mmp.constraints.iter().map(|c| c.constraint.clone()).collect(),
            inner: assembled.links,
            inner_constraints: assembled.constraints,
            gaps: gaps.gaps,
        })
    }

    /// Same problem with the functional zone widened by `delta` (full width).
    pub fn widened(&self, delta: f64) -> OptimizationProblem {
        let mut p = self.clone();
        for g in &mut p.gaps {
            g.set_constant(g.constant_part() + 0.5 * delta);
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "SCREAMING_SNAKE_CASE"))]
pub enum Status {
    Bounded,
    /// The outer set is unbounded in a direction along which the value decreases.
    Divergent,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorstCaseResult {
    /// Smallest gap at the worst case; −∞ when divergent.
    pub value: f64,
    pub outer: Assignment,
    pub inner: Assignment,
    pub status: Status,
    /// False when an iterative descent hit its iteration cap.
    pub converged: bool,
    /// Outer direction certifying divergence.
    pub ray: Option<Assignment>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub seed: u64,
    pub starts: usize,
    pub max_iterations: usize,
    /// Influence magnitudes below this are reported as 0.
    pub threshold: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { seed: 0, starts: 16, max_iterations: 500, threshold: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Influence {
    pub param: ParamId,
    pub name: String,
    /// Magnitude of the directional derivative; 0 when below threshold.
    pub coefficient: f64,
    /// Gradient read from the inner LP duals.
    pub dual: f64,
    /// Forward and backward differences disagreed.
    pub degenerate: bool,
}

/// `c + a·x + b·y`
#[derive(Debug, Clone, PartialEq)]
struct Affine {
    c: f64,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Affine {
    fn outer_value(&self, x: &[f64]) -> f64 {
        self.c + dot(&self.a, x)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// Dense form of a problem restricted to the outer parameters that can
/// influence the objective.
#[derive(Debug, Clone)]
pub(crate) struct Dense {
    outer_ids: Vec<ParamId>,
    inner_ids: Vec<ParamId>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    gaps: Vec<Affine>,
    /// `b·y ≤ c + a·x` stored as (c, a, b).
    inner_rows: Vec<Affine>,
    /// `a·x ≤ c` stored as (c, a).
    outer_rows: Vec<(f64, Vec<f64>)>,
}

/// Splits `expr` into outer and inner coefficients; other parameters are an error.
fn split(
    expr: &LinExpr,
    outer: &BTreeMap<ParamId, usize>,
    inner: &BTreeMap<ParamId, usize>,
    registry: &Registry,
) -> Result<Affine> {
    let scale = expr.terms().fold(1.0f64, |m, (_, c)| m.max(c.abs()));
    let floor = COEFFICIENT_FLOOR * scale;
    let mut a = vec![0.0; outer.len()];
    let mut b = vec![0.0; inner.len()];
    for (id, c) in expr.terms() {
        if c.abs() <= floor {
            continue;
        }
        if let Some(&i) = outer.get(&id) {
            a[i] += c;
        } else if let Some(&i) = inner.get(&id) {
            b[i] += c;
        } else {
            let name = if id.index() < registry.len() {
                String::from(registry.name(id))
            } else {
                alloc::format!("#{}", id.index())
            };
            return Err(Error::UnknownParameter(name));
        }
    }
    Ok(Affine { c: expr.constant_part(), a, b })
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    let mut j = i;
    while parent[j] != r {
        let next = parent[j];
        parent[j] = r;
        j = next;
    }
    r
}

impl Dense {
    pub(crate) fn compile(p: &OptimizationProblem) -> Result<Dense> {
        let all_outer: BTreeMap<ParamId, usize> = p.outer.iter().enumerate().map(|(i, (id, _))| (*id, i)).collect();
        let inner: BTreeMap<ParamId, usize> = p.inner.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        let gaps: Vec<Affine> =
            p.gaps.iter().map(|g| split(g, &all_outer, &inner, &p.registry)).collect::<Result<_>>()?;
        let inner_rows: Vec<Affine> = p
            .inner_constraints
            .iter()
            .map(|c| {
                let e = split(&c.as_le_zero(), &all_outer, &inner, &p.registry)?;
                Ok(Affine { c: -e.c, a: e.a.iter().map(|v| -v).collect(), b: e.b })
            })
            .collect::<Result<_>>()?;
        let outer_rows: Vec<(f64, Vec<f64>)> = p
            .outer_constraints
            .iter()
            .map(|c| {
                let e = split(&c.as_le_zero(), &all_outer, &inner, &p.registry)?;
                if e.b.iter().any(|&v| v != 0.0) {
                    return Err(Error::InvalidPlan(String::from("outer constraint involves a gauge link")));
                }
                Ok((-e.c, e.a))
            })
            .collect::<Result<_>>()?;

        // outer parameters reachable from the objective through outer rows
        let n = p.outer.len();
        let mut parent: Vec<usize> = (0..n).collect();
        for (_, a) in &outer_rows {
            let mut first = None;
            for (i, &v) in a.iter().enumerate() {
                if v != 0.0 {
                    match first {
                        None => first = Some(i),
                        Some(f) => {
                            let (ra, rb) = (find(&mut parent, f), find(&mut parent, i));
                            parent[ra] = rb;
                        }
                    }
                }
            }
        }
        let mut live_roots = BTreeSet::new();
        for e in gaps.iter().chain(&inner_rows) {
            for (i, &v) in e.a.iter().enumerate() {
                if v != 0.0 {
                    live_roots.insert(find(&mut parent, i));
                }
            }
        }
        let keep: Vec<usize> = (0..n).filter(|&i| live_roots.contains(&find(&mut parent, i))).collect();
        let restrict = |a: &[f64]| keep.iter().map(|&i| a[i]).collect::<Vec<f64>>();
        Ok(Dense {
            outer_ids: keep.iter().map(|&i| p.outer[i].0).collect(),
            inner_ids: p.inner.clone(),
            lo: keep.iter().map(|&i| p.outer[i].1.map_or(f64::NEG_INFINITY, |b| b.0)).collect(),
            hi: keep.iter().map(|&i| p.outer[i].1.map_or(f64::INFINITY, |b| b.1)).collect(),
            gaps: gaps.iter().map(|g| Affine { c: g.c, a: restrict(&g.a), b: g.b.clone() }).collect(),
            inner_rows: inner_rows.iter().map(|r| Affine { c: r.c, a: restrict(&r.a), b: r.b.clone() }).collect(),
            outer_rows: outer_rows
                .iter()
                .filter(|(_, a)| keep.iter().any(|&i| a[i] != 0.0))
                .map(|(c, a)| (*c, restrict(a)))
                .collect(),
        })
    }

    fn n(&self) -> usize {
        self.outer_ids.len()
    }

    fn k(&self) -> usize {
        self.inner_ids.len()
    }

    fn is_box(&self) -> bool {
        self.outer_rows.is_empty() && self.lo.iter().chain(&self.hi).all(|v| v.is_finite())
    }

    fn assignment(&self, x: &[f64]) -> Assignment {
        self.outer_ids.iter().copied().zip(x.iter().copied()).collect()
    }
}

/// Inner optimum at one outer point, with the dual weights of the gaps
/// (`lambda`) and of the assembly rows (`mu`).
#[derive(Debug, Clone)]
pub(crate) struct InnerSolution {
    value: f64,
    y: Vec<f64>,
    lambda: Vec<f64>,
    mu: Vec<f64>,
}

impl InnerSolution {
    /// The affine piece of the inner value selected by these duals.
    fn piece(&self, d: &Dense) -> (f64, Vec<f64>) {
        let mut c = 0.0;
        let mut a = vec![0.0; d.n()];
        for (w, g) in self.lambda.iter().zip(&d.gaps).chain(self.mu.iter().zip(&d.inner_rows)) {
            if *w == 0.0 {
                continue;
            }
            c += w * g.c;
            for (ai, gi) in a.iter_mut().zip(&g.a) {
                *ai += w * gi;
            }
        }
        (c, a)
    }
}

/// `None` when the assembly rows cannot be met at `x`.
pub(crate) fn inner_solve(d: &Dense, x: &[f64]) -> Result<Option<InnerSolution>> {
    let k = d.k();
    if k == 0 {
        if d.inner_rows.iter().any(|r| r.outer_value(x) < -1e-9) {
            return Ok(None);
        }
        let mut best: Option<(usize, f64)> = None;
        for (j, g) in d.gaps.iter().enumerate() {
            let v = g.outer_value(x);
            if best.map_or(true, |(_, b)| v < b) {
                best = Some((j, v));
            }
        }
        let Some((j, value)) = best else { return Err(Error::InnerUnbounded) };
        let mut lambda = vec![0.0; d.gaps.len()];
        lambda[j] = 1.0;
        return Ok(Some(InnerSolution { value, y: Vec::new(), lambda, mu: vec![0.0; d.inner_rows.len()] }));
    }
    // variables (s, y); maximize s
    let mut cost = vec![0.0; k + 1];
    cost[0] = 1.0;
    let mut lp = LinearProgram::new(Objective::Maximize, cost);
    for g in &d.gaps {
        let mut row = vec![1.0];
        row.extend(g.b.iter().map(|v| -v));
        lp.push(row, Relation::Le, g.outer_value(x));
    }
    for r in &d.inner_rows {
        let mut row = vec![0.0];
        row.extend_from_slice(&r.b);
        lp.push(row, Relation::Le, r.outer_value(x));
    }
    match lp::solve(&lp) {
        LpOutcome::Optimal { x: sol, value, duals } => {
            let m = d.gaps.len();
            Ok(Some(InnerSolution {
                value,
                y: sol[1..].to_vec(),
                lambda: duals[..m].iter().map(|v| v.max(0.0)).collect(),
                mu: duals[m..].iter().map(|v| v.max(0.0)).collect(),
            }))
        }
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded { .. } => Err(Error::InnerUnbounded),
    }
}

/// Maximum over the gauge links of the smallest gap, at the outer point
/// `outer` (missing parameters read as 0). Returns `None` when the gauge
/// cannot be assembled.
pub fn inner_max_min(outer: &Assignment, problem: &OptimizationProblem) -> Result<Option<(f64, Assignment)>> {
    let d = Dense::compile(problem)?;
    let x: Vec<f64> = d.outer_ids.iter().map(|id| outer.get(id).copied().unwrap_or(0.0)).collect();
    Ok(inner_solve(&d, &x)?.map(|s| (s.value, d.inner_ids.iter().copied().zip(s.y).collect())))
}

fn outer_lp(d: &Dense, cost: &[f64]) -> LpOutcome {
    let mut lp = LinearProgram::new(Objective::Minimize, cost.to_vec());
    lp.bounds =
        d.lo.iter().zip(&d.hi).map(|(&l, &h)| (l.is_finite().then_some(l), h.is_finite().then_some(h))).collect();
    for (c, a) in &d.outer_rows {
        lp.push(a.clone(), Relation::Le, *c);
    }
    lp::solve(&lp)
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (p, q) in a.iter().zip(b) {
        match p.total_cmp(q) {
            Ordering::Less => return true,
            Ordering::Greater => return false,
            Ordering::Equal => {}
        }
    }
    false
}

/// Running minimum with ties broken by the lexicographically smallest point.
#[derive(Default)]
struct Best {
    inner: Option<(f64, Vec<f64>)>,
}

impl Best {
    fn offer(&mut self, value: f64, x: &[f64]) {
        let replace = match &self.inner {
            None => true,
            Some((v, bx)) => {
                let tie = IMPROVE_EPS * v.abs().max(1.0);
                value < v - tie || (value <= v + tie && lex_less(x, bx))
            }
        };
        if replace {
            self.inner = Some((value, x.to_vec()));
        }
    }
}

fn infeasible(d: &Dense) -> WorstCaseResult {
    WorstCaseResult {
        value: f64::NAN,
        outer: d.assignment(&vec![0.0; d.n()]),
        inner: Assignment::new(),
        status: Status::Infeasible,
        converged: true,
        ray: None,
    }
}

fn divergent(d: &Dense, point: &[f64], ray: &[f64]) -> WorstCaseResult {
    WorstCaseResult {
        value: f64::NEG_INFINITY,
        outer: d.assignment(point),
        inner: Assignment::new(),
        status: Status::Divergent,
        converged: true,
        ray: Some(d.assignment(ray)),
    }
}

fn result_at(d: &Dense, x: &[f64], converged: bool) -> Result<WorstCaseResult> {
    Ok(match inner_solve(d, x)? {
        Some(s) => WorstCaseResult {
            value: s.value,
            outer: d.assignment(x),
            inner: d.inner_ids.iter().copied().zip(s.y).collect(),
            status: Status::Bounded,
            converged,
            ray: None,
        },
        None => WorstCaseResult { outer: d.assignment(x), converged, ..infeasible(d) },
    })
}

/// Inner value, +∞ where the gauge cannot be assembled.
fn inner_value(d: &Dense, x: &[f64]) -> Result<f64> {
    Ok(inner_solve(d, x)?.map_or(f64::INFINITY, |s| s.value))
}

fn piece_corner(d: &Dense, a: &[f64], keep: Option<&[f64]>) -> Vec<f64> {
    (0..d.n())
        .map(|i| {
            if a[i] > 0.0 {
                d.lo[i]
            } else if a[i] < 0.0 {
                d.hi[i]
            } else {
                keep.map_or(d.lo[i], |x| x[i])
            }
        })
        .collect()
}

fn outer_feasible(d: &Dense) -> bool {
    d.is_box() || !matches!(outer_lp(d, &vec![0.0; d.n()]), LpOutcome::Infeasible)
}

/// k-subsets of 0..n in lexicographic order.
fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn binomial(n: usize, k: usize) -> usize {
    let mut r: usize = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

/// Solves `M z = e₀` for the chosen columns; `None` unless the columns are
/// independent, the system consistent and `z > 0`.
fn basic_weights(columns: &[Vec<f64>], rows: usize) -> Option<Vec<f64>> {
    let s = columns.len();
    let mut m: Vec<Vec<f64>> = (0..rows)
        .map(|r| {
            let mut row: Vec<f64> = columns.iter().map(|c| c[r]).collect();
            row.push(if r == 0 { 1.0 } else { 0.0 });
            row
        })
        .collect();
    let mut pivot_row = 0;
    for col in 0..s {
        let (best, mag) =
            (pivot_row..rows)
                .map(|r| (r, m[r][col].abs()))
                .fold((pivot_row, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
        if best >= rows || mag < 1e-10 {
            return None;
        }
        m.swap(pivot_row, best);
        let p = m[pivot_row][col];
        for r in 0..rows {
            if r != pivot_row {
                let f = m[r][col] / p;
                if f != 0.0 {
                    for c in col..=s {
                        m[r][c] -= f * m[pivot_row][c];
                    }
                }
            }
        }
        pivot_row += 1;
    }
    if (s..rows).any(|r| m[r][s].abs() > 1e-9) {
        return None;
    }
    let z: Vec<f64> = (0..s).map(|i| m[i][s] / m[i][i]).collect();
    z.iter().all(|&v| v > 1e-12).then_some(z)
}

/// Affine pieces of the inner value: one per vertex of the dual polytope
/// `{λ, μ ≥ 0 : Σλ = 1, Σ λ_j b_j = Σ μ_i d_i}`.
fn dual_pieces(d: &Dense) -> Result<Vec<(f64, Vec<f64>)>> {
    let k = d.k();
    let rows = 1 + k;
    let mut columns: Vec<(Vec<f64>, &Affine)> = Vec::new();
    for g in &d.gaps {
        let mut col = vec![1.0];
        col.extend_from_slice(&g.b);
        columns.push((col, g));
    }
    for r in &d.inner_rows {
        let mut col = vec![0.0];
        col.extend(r.b.iter().map(|v| -v));
        columns.push((col, r));
    }
    let total = columns.len();
    let count = (1..=rows.min(total)).fold(0usize, |acc, s| acc.saturating_add(binomial(total, s)));
    if count > MAX_DUAL_SUBSETS {
        return Err(Error::DimensionGuard { dimension: total, limit: MAX_DUAL_SUBSETS });
    }
    let mut pieces: Vec<(f64, Vec<f64>)> = Vec::new();
    for s in 1..=rows.min(total) {
        for_each_subset(total, s, |subset| {
            let cols: Vec<Vec<f64>> = subset.iter().map(|&i| columns[i].0.clone()).collect();
            if let Some(z) = basic_weights(&cols, rows) {
                let mut c = 0.0;
                let mut a = vec![0.0; d.n()];
                for (&i, w) in subset.iter().zip(&z) {
                    let src = columns[i].1;
                    c += w * src.c;
                    for (ai, v) in a.iter_mut().zip(&src.a) {
                        *ai += w * v;
                    }
                }
                if !pieces.iter().any(|(pc, pa)| *pc == c && *pa == a) {
                    pieces.push((c, a));
                }
            }
        });
    }
    Ok(pieces)
}

/// Minimizes each piece over the outer set; the overall minimum of the
/// inner value is the smallest of these.
fn sweep_pieces(d: &Dense, pieces: &[(f64, Vec<f64>)], best: &mut Best) -> Result<Option<WorstCaseResult>> {
    for (_, a) in pieces {
        let x = if d.is_box() {
            piece_corner(d, a, None)
        } else {
            match outer_lp(d, a) {
                LpOutcome::Optimal { x, .. } => x,
                LpOutcome::Unbounded { point, ray } => return Ok(Some(divergent(d, &point, &ray))),
                LpOutcome::Infeasible => return Ok(Some(infeasible(d))),
            }
        };
        best.offer(inner_value(d, &x)?, &x);
    }
    Ok(None)
}

fn gap_pieces(d: &Dense) -> Vec<(f64, Vec<f64>)> {
    d.gaps.iter().map(|g| (g.c, g.a.clone())).collect()
}

fn dense_enumerate(d: &Dense) -> Result<WorstCaseResult> {
    if d.n() == 0 {
        return result_at(d, &[], true);
    }
    if !outer_feasible(d) {
        return Ok(infeasible(d));
    }
    let mut best = Best::default();
    if d.k() == 0 && d.inner_rows.is_empty() {
        // every corner's value is attained by some gap at its own worst corner
        if let Some(r) = sweep_pieces(d, &gap_pieces(d), &mut best)? {
            return Ok(r);
        }
    } else if d.is_box() {
        if d.n() > ENUMERATION_LIMIT {
            return Err(Error::DimensionGuard { dimension: d.n(), limit: ENUMERATION_LIMIT });
        }
        let mut x = d.lo.clone();
        for mask in 0u64..(1u64 << d.n()) {
            for (i, xi) in x.iter_mut().enumerate() {
                *xi = if mask >> i & 1 == 1 { d.hi[i] } else { d.lo[i] };
            }
            best.offer(inner_value(d, &x)?, &x);
        }
    } else if let Some(r) = sweep_pieces(d, &dual_pieces(d)?, &mut best)? {
        return Ok(r);
    }
    let (_, x) = best.inner.ok_or_else(|| Error::Unreachable(String::from("no candidate vertex")))?;
    result_at(d, &x, true)
}

/// Exhaustive worst case: all corners of a box, otherwise every affine piece
/// of the inner value minimized over the outer polytope.
pub fn worst_case_enumerate(problem: &OptimizationProblem) -> Result<WorstCaseResult> {
    dense_enumerate(&Dense::compile(problem)?)
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn dense_iterative(d: &Dense, opts: &SolverOptions) -> Result<WorstCaseResult> {
    if d.n() == 0 {
        return result_at(d, &[], true);
    }
    if !outer_feasible(d) {
        return Ok(infeasible(d));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best = Best::default();
    let mut converged = true;
    let boxed = d.is_box();
    for _ in 0..opts.starts.max(1) {
        let mut x: Vec<f64> = if boxed {
            (0..d.n()).map(|i| if rng.next_u32() & 1 == 1 { d.hi[i] } else { d.lo[i] }).collect()
        } else {
            let cost: Vec<f64> = (0..d.n()).map(|_| 2.0 * uniform(&mut rng) - 1.0).collect();
            match outer_lp(d, &cost) {
                LpOutcome::Optimal { x, .. } => x,
                LpOutcome::Unbounded { point, .. } => point,
                LpOutcome::Infeasible => return Ok(infeasible(d)),
            }
        };
        let mut value = inner_value(d, &x)?;
        let mut settled = false;
        for _ in 0..opts.max_iterations {
            let Some(sol) = inner_solve(d, &x)? else { break };
            let (_, slope) = sol.piece(d);
            // jump to the minimizer of the current affine piece
            let candidate = if boxed {
                piece_corner(d, &slope, Some(&x))
            } else {
                match outer_lp(d, &slope) {
                    LpOutcome::Optimal { x, .. } => x,
                    LpOutcome::Unbounded { point, ray } => return Ok(divergent(d, &point, &ray)),
                    LpOutcome::Infeasible => return Ok(infeasible(d)),
                }
            };
            let v = inner_value(d, &candidate)?;
            if v < value - IMPROVE_EPS {
                x = candidate;
                value = v;
                continue;
            }
            if boxed {
                // best single-coordinate flip
                let mut step: Option<(f64, usize)> = None;
                for i in 0..d.n() {
                    let old = x[i];
                    x[i] = if old == d.lo[i] { d.hi[i] } else { d.lo[i] };
                    let v = inner_value(d, &x)?;
                    x[i] = old;
                    if v < value - IMPROVE_EPS && step.map_or(true, |(b, _)| v < b) {
                        step = Some((v, i));
                    }
                }
                if let Some((v, i)) = step {
                    x[i] = if x[i] == d.lo[i] { d.hi[i] } else { d.lo[i] };
                    value = v;
                    continue;
                }
            }
            settled = true;
            break;
        }
        converged &= settled;
        best.offer(value, &x);
    }
    if d.k() == 0 && d.inner_rows.is_empty() {
        if let Some(r) = sweep_pieces(d, &gap_pieces(d), &mut best)? {
            return Ok(r);
        }
    }
    let (_, x) = best.inner.ok_or_else(|| Error::Unreachable(String::from("no start")))?;
    result_at(d, &x, converged)
}

/// Multi-start descent over vertices driven by the inner duals; the best of
/// `opts.starts` seeded starts.
pub fn worst_case_iterative(problem: &OptimizationProblem, opts: &SolverOptions) -> Result<WorstCaseResult> {
    dense_iterative(&Dense::compile(problem)?, opts)
}

/// Sensitivity of the inner value to each outer parameter at the worst
/// point of `result`, by finite differences, with the dual gradient
/// alongside.
pub fn influence_coefficients(
    problem: &OptimizationProblem,
    result: &WorstCaseResult,
    opts: &SolverOptions,
) -> Result<Vec<Influence>> {
    let d = Dense::compile(problem)?;
    let x: Vec<f64> = d.outer_ids.iter().map(|id| result.outer.get(id).copied().unwrap_or(0.0)).collect();
    let sol = inner_solve(&d, &x)?
        .ok_or_else(|| Error::InvalidPlan(String::from("gauge cannot be assembled at the worst point")))?;
    let (_, dual) = sol.piece(&d);
    let g0 = sol.value;
    let mut computed: BTreeMap<ParamId, (f64, f64, bool)> = BTreeMap::new();
    for i in 0..d.n() {
        let present = d.gaps.iter().chain(&d.inner_rows).any(|g| g.a[i] != 0.0);
        if !present {
            computed.insert(d.outer_ids[i], (0.0, 0.0, false));
            continue;
        }
        let mut xs = x.clone();
        xs[i] = x[i] + FD_STEP;
        let forward = (inner_value(&d, &xs)? - g0) / FD_STEP;
        xs[i] = x[i] - FD_STEP;
        let backward = (g0 - inner_value(&d, &xs)?) / FD_STEP;
        let degenerate = (forward - backward).abs() > FD_AGREEMENT;
        let slope = if degenerate {
            if forward.abs() >= backward.abs() {
                forward
            } else {
                backward
            }
        } else {
            0.5 * (forward + backward)
        };
        computed.insert(d.outer_ids[i], (slope, dual[i], degenerate));
    }
    Ok(problem
        .outer
        .iter()
        .map(|&(id, _)| {
            let (slope, dual, degenerate) = computed.get(&id).copied().unwrap_or((0.0, 0.0, false));
            let magnitude = slope.abs();
            Influence {
                param: id,
                name: String::from(problem.registry.name(id)),
                coefficient: if magnitude < opts.threshold { 0.0 } else { magnitude },
                dual,
                degenerate,
            }
        })
        .collect())
}

/// Which outer search to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SolverKind {
    #[default]
    Enumerate,
    Iterative,
}

pub fn worst_case(problem: &OptimizationProblem, kind: SolverKind, opts: &SolverOptions) -> Result<WorstCaseResult> {
    match kind {
        SolverKind::Enumerate => worst_case_enumerate(problem),
        SolverKind::Iterative => worst_case_iterative(problem, opts),
    }
}
