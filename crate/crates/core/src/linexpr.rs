//! Sparse affine forms over registered defect parameters.

use crate::param::ParamId;
use crate::{Error, Result};
use alloc::collections::BTreeMap;
use alloc::format;
use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// Values for defect parameters.
pub type Assignment = BTreeMap<ParamId, f64>;

/// `constant + Σ coefficient·parameter`. Exact zero coefficients are never stored.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinExpr {
    terms: BTreeMap<ParamId, f64>,
    constant: f64,
}

impl LinExpr {
    pub fn zero() -> LinExpr {
        LinExpr::default()
    }

    pub fn constant(c: f64) -> LinExpr {
        LinExpr { terms: BTreeMap::new(), constant: c }
    }

    pub fn param(id: ParamId) -> LinExpr {
        LinExpr::term(id, 1.0)
    }

    pub fn term(id: ParamId, coefficient: f64) -> LinExpr {
        let mut e = LinExpr::zero();
        e.add_term(id, coefficient);
        e
    }

    pub fn constant_part(&self) -> f64 {
        self.constant
    }

    pub fn set_constant(&mut self, c: f64) {
        self.constant = c;
    }

    pub fn coefficient(&self, id: ParamId) -> f64 {
        self.terms.get(&id).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (ParamId, f64)> + '_ {
        self.terms.iter().map(|(&id, &c)| (id, c))
    }

    pub fn params(&self) -> impl Iterator<Item = ParamId> + '_ {
        self.terms.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.constant == 0.0
    }

    pub fn add_term(&mut self, id: ParamId, coefficient: f64) {
        if coefficient == 0.0 {
            return;
        }
        let entry = self.terms.entry(id).or_insert(0.0);
        *entry += coefficient;
        if *entry == 0.0 {
            self.terms.remove(&id);
        }
    }

    /// `self += k·other`
    pub fn add_scaled(&mut self, other: &LinExpr, k: f64) {
        if k == 0.0 {
            return;
        }
        for (&id, &c) in &other.terms {
            self.add_term(id, c * k);
        }
        self.constant += other.constant * k;
    }

    pub fn scaled(&self, k: f64) -> LinExpr {
        let mut out = LinExpr::zero();
        out.add_scaled(self, k);
        out
    }

    pub fn evaluate(&self, assignment: &Assignment) -> Result<f64> {
        let mut value = self.constant;
        for (id, &c) in &self.terms {
            let v = assignment.get(id).ok_or_else(|| Error::MissingValue(format!("#{}", id.index())))?;
            value += c * v;
        }
        Ok(value)
    }

    /// Missing parameters count as zero.
    pub fn evaluate_or_zero(&self, assignment: &Assignment) -> f64 {
        self.terms.iter().fold(self.constant, |acc, (id, &c)| acc + c * assignment.get(id).copied().unwrap_or(0.0))
    }

    /// Evaluates against a dense vector indexed by `ParamId::index`; ids past
    /// the end count as zero.
    pub fn evaluate_dense(&self, values: &[f64]) -> f64 {
        self.terms.iter().fold(self.constant, |acc, (id, &c)| acc + c * values.get(id.index()).copied().unwrap_or(0.0))
    }
}

impl From<f64> for LinExpr {
    fn from(c: f64) -> Self {
        LinExpr::constant(c)
    }
}

impl From<ParamId> for LinExpr {
    fn from(id: ParamId) -> Self {
        LinExpr::param(id)
    }
}

impl AddAssign<&LinExpr> for LinExpr {
    fn add_assign(&mut self, rhs: &LinExpr) {
        self.add_scaled(rhs, 1.0);
    }
}

impl SubAssign<&LinExpr> for LinExpr {
    fn sub_assign(&mut self, rhs: &LinExpr) {
        self.add_scaled(rhs, -1.0);
    }
}

impl Add for &LinExpr {
    type Output = LinExpr;
    fn add(self, rhs: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &LinExpr {
    type Output = LinExpr;
    fn sub(self, rhs: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        self += &rhs;
        self
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(mut self, rhs: LinExpr) -> LinExpr {
        self -= &rhs;
        self
    }
}

impl Neg for &LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        // negation is exact, so coefficients stay non-zero
        LinExpr { terms: self.terms.iter().map(|(&id, &c)| (id, -c)).collect(), constant: -self.constant }
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        -&self
    }
}

impl Mul<f64> for &LinExpr {
    type Output = LinExpr;
    fn mul(self, k: f64) -> LinExpr {
        self.scaled(k)
    }
}

impl Mul<f64> for LinExpr {
    type Output = LinExpr;
    fn mul(self, k: f64) -> LinExpr {
        self.scaled(k)
    }
}
