//! Defect parameters, their canonical names and the registry that owns them.
//!
//! Canonical names encode the surface and set-up the parameter belongs to:
//!
//! | category | example   | meaning                                             |
//! |----------|-----------|-----------------------------------------------------|
//! | DM       | `rx_6`    | machining deviation of surface 6                    |
//! | DH       | `rx_3S3`  | part-holder surface touching surface 3, set-up 3    |
//! | LHP      | `lrx_3S3` | link between that holder surface and surface 3      |
//! | LGP      | `gtz_6G1` | mobility of functional gauge 1 tolerancing surface 6|
//! | LMGP     | `mtz_6S3` | mobility of the manufacturing gauge on 6, set-up 3  |
//!
//! Raw (never machined) surfaces use the DM form with set-up 0.

use crate::{Error, Result};
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParamId(u32);

impl ParamId {
    pub const fn new(index: u32) -> ParamId {
        ParamId(index)
    }

    pub const fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ParamKind {
    Rx,
    Ry,
    Rz,
    Tx,
    Ty,
    Tz,
    Ra,
}

impl ParamKind {
    pub const ALL: [ParamKind; 7] =
        [ParamKind::Rx, ParamKind::Ry, ParamKind::Rz, ParamKind::Tx, ParamKind::Ty, ParamKind::Tz, ParamKind::Ra];

    pub fn as_str(self) -> &'static str {
        match self {
            ParamKind::Rx => "rx",
            ParamKind::Ry => "ry",
            ParamKind::Rz => "rz",
            ParamKind::Tx => "tx",
            ParamKind::Ty => "ty",
            ParamKind::Tz => "tz",
            ParamKind::Ra => "ra",
        }
    }

    pub fn parse(s: &str) -> Option<ParamKind> {
        ParamKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    pub fn is_rotation(self) -> bool {
        matches!(self, ParamKind::Rx | ParamKind::Ry | ParamKind::Rz)
    }

    /// Index into a torsor's six components (rotations 0..3, translations
    /// 3..6); `None` for the radius.
    pub fn component(self) -> Option<usize> {
        match self {
            ParamKind::Rx => Some(0),
            ParamKind::Ry => Some(1),
            ParamKind::Rz => Some(2),
            ParamKind::Tx => Some(3),
            ParamKind::Ty => Some(4),
            ParamKind::Tz => Some(5),
            ParamKind::Ra => None,
        }
    }

    pub fn from_component(i: usize) -> ParamKind {
        [ParamKind::Rx, ParamKind::Ry, ParamKind::Rz, ParamKind::Tx, ParamKind::Ty, ParamKind::Tz][i]
    }

    pub(crate) fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ParamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which part of the model a parameter describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Category {
    /// DM: machined (or raw) surface relative to the machine.
    Machining,
    /// DH: part-holder surface relative to the machine.
    Holder,
    /// LHP: part surface relative to the part-holder surface.
    Link,
    /// LGP: functional gauge mobility.
    GaugeLink,
    /// LMGP: manufacturing gauge mobility.
    ManufacturingGaugeLink,
}

impl Category {
    pub fn short(self) -> &'static str {
        match self {
            Category::Machining => "DM",
            Category::Holder => "DH",
            Category::Link => "LHP",
            Category::GaugeLink => "LGP",
            Category::ManufacturingGaugeLink => "LMGP",
        }
    }
}

/// How a parameter relates to its set-up, as read from its name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Role {
    Machined,
    Positioning,
    Gauge,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DefectParameter {
    pub id: ParamId,
    pub name: String,
    pub kind: ParamKind,
    pub surface: u32,
    /// Set-up for DM/DH/LHP/LMGP, gauge number for LGP, 0 for raw surfaces.
    pub setup: u32,
    pub category: Category,
    pub bounds: Option<(f64, f64)>,
}

/// Decomposition of a canonical parameter name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParsedName {
    pub kind: ParamKind,
    pub surface: u32,
    /// Present for every form except DM names, whose set-up lives in the registry.
    pub setup: Option<u32>,
    pub category: Category,
}

impl ParsedName {
    pub fn role(&self) -> Role {
        match self.category {
            Category::Machining => Role::Machined,
            Category::Holder | Category::Link => Role::Positioning,
            Category::GaugeLink | Category::ManufacturingGaugeLink => Role::Gauge,
        }
    }
}

pub fn canonical_name(kind: ParamKind, surface: u32, setup: u32, category: Category) -> String {
    match category {
        Category::Machining => format!("{kind}_{surface}"),
        Category::Holder => format!("{kind}_{surface}S{setup}"),
        Category::Link => format!("l{kind}_{surface}S{setup}"),
        Category::GaugeLink => format!("g{kind}_{surface}G{setup}"),
        Category::ManufacturingGaugeLink => format!("m{kind}_{surface}S{setup}"),
    }
}

pub fn parse_name(name: &str) -> Option<ParsedName> {
    let (head, tail) = name.split_once('_')?;
    let (prefix, kind) = match head.len() {
        2 => ("", head),
        3 => head.split_at(1),
        _ => return None,
    };
    let kind = ParamKind::parse(kind)?;
    let split = tail.find(|c: char| !c.is_ascii_digit()).unwrap_or(tail.len());
    let (surface, rest) = tail.split_at(split);
    let surface: u32 = parse_digits(surface)?;
    let (marker, setup) = match rest.len() {
        0 => (None, None),
        _ => {
            let (m, digits) = rest.split_at(1);
            (Some(m), Some(parse_digits(digits)?))
        }
    };
    let category = match (prefix, marker) {
        ("", None) => Category::Machining,
        ("", Some("S")) => Category::Holder,
        ("l", Some("S")) => Category::Link,
        ("g", Some("G")) => Category::GaugeLink,
        ("m", Some("S")) => Category::ManufacturingGaugeLink,
        _ => return None,
    };
    Some(ParsedName { kind, surface, setup, category })
}

fn parse_digits(s: &str) -> Option<u32> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Owns every defect parameter of a model; ids are dense indices.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Registry {
    params: Vec<DefectParameter>,
    by_name: BTreeMap<String, ParamId>,
}

impl Registry {
    pub fn new() -> Registry {
        Registry::default()
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &DefectParameter> {
        self.params.iter()
    }

    pub fn get(&self, id: ParamId) -> &DefectParameter {
        &self.params[id.index()]
    }

    pub fn lookup(&self, name: &str) -> Option<ParamId> {
        self.by_name.get(name).copied()
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.params[id.index()].name
    }

    /// Registers a parameter under its canonical name.
    pub fn register(
        &mut self,
        kind: ParamKind,
        surface: u32,
        setup: u32,
        category: Category,
        bounds: Option<(f64, f64)>,
    ) -> Result<ParamId> {
        let name = canonical_name(kind, surface, setup, category);
        if let Some((lower, upper)) = bounds {
            if !(lower <= upper) {
                return Err(Error::InvalidBounds { name, lower, upper });
            }
        }
        if bounds.is_some() && matches!(category, Category::GaugeLink | Category::ManufacturingGaugeLink) {
            return Err(Error::BoundedGaugeLink(name));
        }
        if self.by_name.contains_key(&name) {
            return Err(Error::DuplicateParameter(name));
        }
        let id = ParamId(self.params.len() as u32);
        self.by_name.insert(name.clone(), id);
        self.params.push(DefectParameter { id, name, kind, surface, setup, category, bounds });
        Ok(id)
    }

    pub fn set_bounds(&mut self, id: ParamId, bounds: Option<(f64, f64)>) {
        self.params[id.index()].bounds = bounds;
    }

    pub fn ids_in(&self, category: Category) -> impl Iterator<Item = ParamId> + '_ {
        self.params.iter().filter(move |p| p.category == category).map(|p| p.id)
    }

    /// Resolves `name` or reports it as unknown.
    pub fn require(&self, name: &str) -> Result<ParamId> {
        self.lookup(name).ok_or_else(|| Error::UnknownParameter(name.to_string()))
    }
}


/// Optional closed interval per parameter kind, used when fresh parameters
/// are created for a surface template.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KindBounds {
    slots: [Option<(f64, f64)>; 7],
}

impl KindBounds {
    pub fn none() -> KindBounds {
        KindBounds::default()
    }

    /// Same symmetric interval ±`rotation` on every rotation kind and
    /// ±`translation` on every translation kind and the radius.
    pub fn symmetric(rotation: f64, translation: f64) -> KindBounds {
        let mut b = KindBounds::default();
        for kind in ParamKind::ALL {
            let h = if kind.is_rotation() { rotation } else { translation };
            b.set(kind, Some((-h, h)));
        }
        b
    }

    pub fn with(mut self, kind: ParamKind, bounds: (f64, f64)) -> KindBounds {
        self.set(kind, Some(bounds));
        self
    }

    pub fn set(&mut self, kind: ParamKind, bounds: Option<(f64, f64)>) {
        self.slots[kind.slot()] = bounds;
    }

    pub fn get(&self, kind: ParamKind) -> Option<(f64, f64)> {
        self.slots[kind.slot()]
    }
}
