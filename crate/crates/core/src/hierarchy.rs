//! Row selection and the 6×6 solve shared by part positioning and gauge
//! assembly.
//!
//! A rigid displacement is the 6-vector x = (Ω, t) taken at the part origin.
//! Component `k` of that displacement, moved to a local frame and expressed
//! in its basis, is the dot product of x with [`row_direction`].

use crate::geometry::{self, Frame};
use crate::linexpr::LinExpr;
use alloc::vec::Vec;

pub(crate) type Row = [f64; 6];

const INDEPENDENCE_TOL: f64 = 1e-9;

pub(crate) fn row_direction(frame: &Frame, component: usize) -> Row {
    let mut row = [0.0; 6];
    if component < 3 {
        row[..3].copy_from_slice(&frame.basis[component]);
    } else {
        let e = frame.basis[component - 3];
        // e·(t + Ω × O) = e·t + Ω·(O × e)
        let lever = geometry::cross(frame.origin, e);
        row[..3].copy_from_slice(&lever);
        row[3..].copy_from_slice(&e);
    }
    row
}

fn dot6(a: &Row, b: &Row) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Incremental Gram-Schmidt basis of accepted rows.
#[derive(Debug, Default, Clone)]
pub(crate) struct RowBasis {
    orthonormal: Vec<Row>,
}

impl RowBasis {
    pub fn new() -> RowBasis {
        RowBasis::default()
    }

    pub fn rank(&self) -> usize {
        self.orthonormal.len()
    }

    /// Accepts `row` if it is independent of the rows accepted so far.
    pub fn try_accept(&mut self, row: &Row) -> bool {
        let scale = libm::sqrt(dot6(row, row));
        if scale == 0.0 || self.orthonormal.len() == 6 {
            return false;
        }
        let mut r = *row;
        // two passes keep the basis orthogonal to working precision
        for _ in 0..2 {
            for q in &self.orthonormal {
                let c = dot6(&r, q);
                for i in 0..6 {
                    r[i] -= c * q[i];
                }
            }
        }
        let n = libm::sqrt(dot6(&r, &r));
        if n <= INDEPENDENCE_TOL * scale {
            return false;
        }
        for v in r.iter_mut() {
            *v /= n;
        }
        self.orthonormal.push(r);
        true
    }
}

/// Solves `rows · x = rhs` for a non-singular 6×6 system with symbolic
/// right-hand side, by Gaussian elimination with partial pivoting.
pub(crate) fn solve6(rows: &[Row], rhs: &[LinExpr]) -> Option<[LinExpr; 6]> {
    if rows.len() != 6 || rhs.len() != 6 {
        return None;
    }
    let mut a: Vec<Row> = rows.to_vec();
    let mut b: Vec<LinExpr> = rhs.to_vec();
    for col in 0..6 {
        let pivot = (col..6).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..6 {
            let f = a[r][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for c in col..6 {
                a[r][c] -= f * a[col][c];
            }
            let pivot_rhs = b[col].clone();
            b[r].add_scaled(&pivot_rhs, -f);
        }
    }
    let mut x: [LinExpr; 6] = Default::default();
    for r in (0..6).rev() {
        let mut acc = b[r].clone();
        for c in r + 1..6 {
            acc.add_scaled(&x[c], -a[r][c]);
        }
        x[r] = acc.scaled(1.0 / a[r][r]);
    }
    Some(x)
}

/// Evaluates `row · x` symbolically.
pub(crate) fn apply(row: &Row, x: &[LinExpr; 6]) -> LinExpr {
    let mut e = LinExpr::zero();
    for i in 0..6 {
        e.add_scaled(&x[i], row[i]);
    }
    e
}
