use alloc::string::String;
use core::fmt;

/// Everything that can go wrong while building or solving a tolerance model.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    DuplicateParameter(String),
    UnknownParameter(String),
    InvalidBounds { name: String, lower: f64, upper: f64 },
    BoundedGaugeLink(String),
    MissingValue(String),
    FrameMismatch { left: u32, right: u32 },
    UnknownSurface(u32),
    InvalidFrame(String),
    InvalidPlan(String),
    UnderConstrained { setup: u32, dof: usize },
    OverConstrained { setup: u32, rank: u32 },
    Unsupported(String),
    DimensionGuard { dimension: usize, limit: usize },
    InnerUnbounded,
    Unreachable(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DuplicateParameter(n) => write!(f, "parameter `{n}` is already registered"),
            Error::UnknownParameter(n) => write!(f, "unknown parameter `{n}`"),
            Error::InvalidBounds { name, lower, upper } => {
                write!(f, "parameter `{name}` has lower bound {lower} above upper bound {upper}")
            }
            Error::BoundedGaugeLink(n) => {
                write!(f, "gauge link parameter `{n}` cannot carry bounds")
            }
            Error::MissingValue(n) => write!(f, "assignment has no value for `{n}`"),
            Error::FrameMismatch { left, right } => {
                write!(f, "torsors expressed in different frames ({left} vs {right})")
            }
            Error::UnknownSurface(id) => write!(f, "surface {id} is not declared"),
            Error::InvalidFrame(msg) => write!(f, "invalid frame: {msg}"),
            Error::InvalidPlan(msg) => write!(f, "invalid process plan: {msg}"),
            Error::UnderConstrained { setup, dof } => {
                write!(f, "set-up {setup}: positioning hierarchy constrains only {dof} of 6 degrees of freedom")
            }
            Error::OverConstrained { setup, rank } => {
                write!(f, "set-up {setup}: connection of rank {rank} constrains no remaining degree of freedom")
            }
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
            Error::DimensionGuard { dimension, limit } => {
                write!(f, "outer dimension {dimension} exceeds the enumeration limit of {limit}")
            }
            Error::InnerUnbounded => {
                write!(f, "inner gauge problem is unbounded; gauge mobilities are not limited")
            }
            Error::Unreachable(msg) => write!(f, "functional tolerance unreachable: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
