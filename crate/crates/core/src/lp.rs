//! Dense two-phase simplex with Bland's rule.
//!
//! Problems are small (tens of variables and rows) so the tableau is kept
//! whole. Every row gets a phase-one artificial; those columns are kept to
//! read `B⁻¹` off the final tableau for the duals.

use crate::process::Sense;
use alloc::vec;
use alloc::vec::Vec;

const PIVOT_EPS: f64 = 1e-9;
const FEAS_EPS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Minimize,
    Maximize,
}

/// Row relation; `Eq` is only used by internal callers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl From<Sense> for Relation {
    fn from(s: Sense) -> Relation {
        match s {
            Sense::Le => Relation::Le,
            Sense::Ge => Relation::Ge,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coefficients: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Objective,
    pub cost: Vec<f64>,
    pub rows: Vec<Row>,
    /// Per-variable (lower, upper); `None` is infinite.
    pub bounds: Vec<(Option<f64>, Option<f64>)>,
}

impl LinearProgram {
    pub fn new(objective: Objective, cost: Vec<f64>) -> LinearProgram {
        let n = cost.len();
        LinearProgram { objective, cost, rows: Vec::new(), bounds: vec![(None, None); n] }
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn push(&mut self, coefficients: Vec<f64>, relation: Relation, rhs: f64) {
        debug_assert_eq!(coefficients.len(), self.cost.len());
        self.rows.push(Row { coefficients, relation, rhs });
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal {
        x: Vec<f64>,
        value: f64,
        /// ∂value/∂rhs for each row, in the program's own objective sense.
        duals: Vec<f64>,
    },
    Infeasible,
    /// A feasible point and a direction along which the objective improves
    /// without limit.
    Unbounded {
        point: Vec<f64>,
        ray: Vec<f64>,
    },
}

impl LpOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }
}

/// Interchangeable LP back end.
pub trait LpSolver {
    fn solve(&self, lp: &LinearProgram) -> LpOutcome;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Simplex;

impl LpSolver for Simplex {
    fn solve(&self, lp: &LinearProgram) -> LpOutcome {
        solve(lp)
    }
}

/// How an original variable maps onto non-negative tableau columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// x = lo + c
    Shifted { col: usize, lo: f64 },
    /// x = hi − c
    Mirrored { col: usize, hi: f64 },
    /// x = c⁺ − c⁻
    Split { pos: usize, neg: usize },
}

struct Tableau {
    m: usize,
    width: usize,
    a: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * self.width + c]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.a[r * w + c];
        for j in 0..w {
            self.a[r * w + j] /= p;
        }
        self.rhs[r] /= p;
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.a[i * w + c];
            if f == 0.0 {
                continue;
            }
            for j in 0..w {
                self.a[i * w + j] -= f * self.a[r * w + j];
            }
            self.rhs[i] -= f * self.rhs[r];
        }
        self.basis[r] = c;
    }

    fn reduced_costs(&self, cost: &[f64], allowed: usize) -> Vec<f64> {
        let mut d: Vec<f64> = cost[..allowed].to_vec();
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb == 0.0 {
                continue;
            }
            for (j, dj) in d.iter_mut().enumerate() {
                *dj -= cb * self.at(r, j);
            }
        }
        d
    }

    /// Minimizes `cost` over columns `< allowed`. Returns the entering
    /// column of an unbounded direction, if any.
    fn run(&mut self, cost: &[f64], allowed: usize) -> Option<usize> {
        loop {
            let d = self.reduced_costs(cost, allowed);
            let scale = cost.iter().fold(1.0f64, |s, c| s.max(c.abs()));
            let Some(enter) = (0..allowed).find(|&j| d[j] < -PIVOT_EPS * scale && !self.basis.contains(&j)) else {
                return None;
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let arc = self.at(r, enter);
                if arc > PIVOT_EPS {
                    let ratio = self.rhs[r] / arc;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - 1e-12 || (ratio <= lratio + 1e-12 && self.basis[r] < self.basis[lr]) {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            match leave {
                None => return Some(enter),
                Some((r, _)) => self.pivot(r, enter),
            }
        }
    }

    fn column_values(&self, ncols: usize) -> Vec<f64> {
        let mut v = vec![0.0; ncols];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < ncols {
                v[b] = self.rhs[r];
            }
        }
        v
    }
}

fn recover(maps: &[VarMap], cols: &[f64], homogeneous: bool) -> Vec<f64> {
    maps.iter()
        .map(|m| match *m {
            VarMap::Shifted { col, lo } => cols[col] + if homogeneous { 0.0 } else { lo },
            VarMap::Mirrored { col, hi } => (if homogeneous { 0.0 } else { hi }) - cols[col],
            VarMap::Split { pos, neg } => cols[pos] - cols[neg],
        })
        .collect()
}

pub fn solve(lp: &LinearProgram) -> LpOutcome {
    let n = lp.num_vars();
    let sign = match lp.objective {
        Objective::Minimize => 1.0,
        Objective::Maximize => -1.0,
    };

    // structural columns
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0;
    let mut extra_rows: Vec<(usize, f64)> = Vec::new();
    for &(lo, hi) in &lp.bounds {
        match (lo, hi) {
            (Some(lo), hi) => {
                maps.push(VarMap::Shifted { col: ncols, lo });
                if let Some(hi) = hi {
                    extra_rows.push((ncols, hi - lo));
                }
                ncols += 1;
            }
            (None, Some(hi)) => {
                maps.push(VarMap::Mirrored { col: ncols, hi });
                ncols += 1;
            }
            (None, None) => {
                maps.push(VarMap::Split { pos: ncols, neg: ncols + 1 });
                ncols += 2;
            }
        }
    }
    if extra_rows.iter().any(|&(_, w)| w < -FEAS_EPS) {
        return LpOutcome::Infeasible;
    }

    // rows over structural columns, constant moved to the rhs
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::with_capacity(lp.rows.len() + extra_rows.len());
    for row in &lp.rows {
        let mut coef = vec![0.0; ncols];
        let mut rhs = row.rhs;
        for (j, &a) in row.coefficients.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            match maps[j] {
                VarMap::Shifted { col, lo } => {
                    coef[col] += a;
                    rhs -= a * lo;
                }
                VarMap::Mirrored { col, hi } => {
                    coef[col] -= a;
                    rhs -= a * hi;
                }
                VarMap::Split { pos, neg } => {
                    coef[pos] += a;
                    coef[neg] -= a;
                }
            }
        }
        rows.push((coef, row.relation, rhs));
    }
    for &(col, w) in &extra_rows {
        let mut coef = vec![0.0; ncols];
        coef[col] = 1.0;
        rows.push((coef, Relation::Le, w.max(0.0)));
    }
    let mut cost = vec![0.0; ncols];
    for (j, &c) in lp.cost.iter().enumerate() {
        let c = sign * c;
        match maps[j] {
            VarMap::Shifted { col, .. } => cost[col] += c,
            VarMap::Mirrored { col, .. } => cost[col] -= c,
            VarMap::Split { pos, neg } => {
                cost[pos] += c;
                cost[neg] -= c;
            }
        }
    }

    // slacks, then one artificial per row
    let m = rows.len();
    let nslack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let art0 = ncols + nslack;
    let width = art0 + m;
    let mut a = vec![0.0; m * width];
    let mut rhs = vec![0.0; m];
    let mut flip = vec![1.0; m];
    let mut s = ncols;
    for (r, (coef, rel, b)) in rows.iter().enumerate() {
        let f = if *b < 0.0 { -1.0 } else { 1.0 };
        flip[r] = f;
        for j in 0..ncols {
            a[r * width + j] = f * coef[j];
        }
        match rel {
            Relation::Le => {
                a[r * width + s] = f;
                s += 1;
            }
            Relation::Ge => {
                a[r * width + s] = -f;
                s += 1;
            }
            Relation::Eq => {}
        }
        a[r * width + art0 + r] = 1.0;
        rhs[r] = f * b;
    }
    let mut t = Tableau { m, width, a, rhs, basis: (art0..art0 + m).collect() };

    // phase one
    let mut phase1 = vec![0.0; width];
    for c in phase1.iter_mut().skip(art0) {
        *c = 1.0;
    }
    t.run(&phase1, art0);
    let infeas: f64 = t.basis.iter().zip(&t.rhs).filter(|(b, _)| **b >= art0).map(|(_, v)| *v).sum();
    let scale = rows.iter().fold(1.0f64, |s, r| s.max(r.2.abs()));
    if infeas > FEAS_EPS * scale {
        return LpOutcome::Infeasible;
    }
    for r in 0..m {
        if t.basis[r] >= art0 {
            if let Some(c) = (0..art0).find(|&c| t.at(r, c).abs() > PIVOT_EPS && !t.basis.contains(&c)) {
                t.pivot(r, c);
            }
        }
    }

    // phase two
    let mut full_cost = vec![0.0; width];
    full_cost[..ncols].copy_from_slice(&cost);
    if let Some(enter) = t.run(&full_cost, art0) {
        let cols = t.column_values(ncols);
        let point = recover(&maps, &cols, false);
        let mut dir = vec![0.0; width];
        dir[enter] = 1.0;
        for r in 0..m {
            dir[t.basis[r]] -= t.at(r, enter);
        }
        let ray = recover(&maps, &dir[..ncols], true);
        return LpOutcome::Unbounded { point, ray };
    }
    let cols = t.column_values(ncols);
    let x = recover(&maps, &cols, false);
    let value = lp.cost.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>();

    // y = c_B B⁻¹, B⁻¹ sits in the artificial columns
    let duals = (0..lp.rows.len())
        .map(|i| {
            let mut y = 0.0;
            for r in 0..m {
                y += full_cost[t.basis[r]] * t.at(r, art0 + i);
            }
            sign * flip[i] * y
        })
        .collect();
    LpOutcome::Optimal { x, value, duals }
}
