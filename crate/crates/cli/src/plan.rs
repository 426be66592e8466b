//! Plan file: JSON document describing the part, the process and the
//! gauges. Errors carry the line of the offending value.

use crate::locate::LineIndex;
use mmptol_core::param::parse_name;
use mmptol_core::{
    validate_plan, ConnectionContact, ConstraintSpec, ElementaryConnection, Frame, GaugeKind, KindBounds, Locator,
    MachiningOperation, NominalPart, ParamKind, ProcessPlan, RawSurface, Sense, SetUp, SpecProposal, SpecType, Surface,
    SurfaceClass, VirtualGauge, ZoneForm, ZoneMobility,
};
use serde::Deserialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Parse,
    Schema,
    Reference,
    Plan,
}

impl ErrorKind {
    fn label(self) -> &'static str {
        match self {
            ErrorKind::Parse => "parse error",
            ErrorKind::Schema => "schema violation",
            ErrorKind::Reference => "cross-reference error",
            ErrorKind::Plan => "invalid plan",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanError {
    pub kind: ErrorKind,
    pub line: Option<usize>,
    pub path: Option<String>,
    pub message: String,
}

impl fmt::Display for PlanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        write!(f, "{}: {}", self.kind.label(), self.message)?;
        if let Some(path) = &self.path {
            write!(f, " (at {path})")?;
        }
        Ok(())
    }
}

// ---- file layout ----

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    #[serde(default)]
    units: Option<Units>,
    nominal_part: PartFile,
    process: ProcessFile,
    functional_gauge: GaugeFile,
    #[serde(default)]
    manufacturing_specs: Option<Vec<SpecFile>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Units {
    length: String,
    angle: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartFile {
    surfaces: Vec<SurfaceFile>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum SurfaceFile {
    Plane {
        id: u32,
        origin: [f64; 3],
        x_axis: [f64; 3],
        y_axis: [f64; 3],
        /// Polygon in the local xy plane.
        boundary: Vec<[f64; 2]>,
    },
    Cylinder {
        id: u32,
        origin: [f64; 3],
        x_axis: [f64; 3],
        y_axis: [f64; 3],
        radius: f64,
        /// Axial extent along local z.
        extent: [f64; 2],
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundsFile {
    rotation: Option<f64>,
    translation: Option<f64>,
    rx: Option<[f64; 2]>,
    ry: Option<[f64; 2]>,
    rz: Option<[f64; 2]>,
    tx: Option<[f64; 2]>,
    ty: Option<[f64; 2]>,
    tz: Option<[f64; 2]>,
    ra: Option<[f64; 2]>,
}

impl BoundsFile {
    fn to_kind_bounds(&self) -> KindBounds {
        let mut b = KindBounds::none();
        for kind in ParamKind::ALL {
            let half = if kind.is_rotation() { self.rotation } else { self.translation };
            if let Some(h) = half {
                b.set(kind, Some((-h, h)));
            }
        }
        let explicit = [
            (ParamKind::Rx, self.rx),
            (ParamKind::Ry, self.ry),
            (ParamKind::Rz, self.rz),
            (ParamKind::Tx, self.tx),
            (ParamKind::Ty, self.ty),
            (ParamKind::Tz, self.tz),
            (ParamKind::Ra, self.ra),
        ];
        for (kind, v) in explicit {
            if let Some([lo, hi]) = v {
                b.set(kind, Some((lo, hi)));
            }
        }
        b
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProcessFile {
    raw_surfaces: Vec<RawFile>,
    setups: Vec<SetupFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    surface: u32,
    #[serde(default)]
    bounds: BoundsFile,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SetupFile {
    id: u32,
    holder: Vec<ConnectionFile>,
    machining: Vec<MachiningFile>,
    #[serde(default)]
    constraints: Vec<ConstraintFile>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum LocatorFile {
    Planar,
    Centering {
        #[serde(default)]
        long: bool,
    },
    Vee {
        half_angle: f64,
        #[serde(default)]
        long: bool,
    },
    CylinderOnPlane,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum ContactFile {
    Slipping,
    Floating { clearance: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConnectionFile {
    surface: u32,
    rank: u32,
    locator: LocatorFile,
    #[serde(default = "slipping")]
    contact: ContactFile,
    #[serde(default)]
    holder_bounds: BoundsFile,
    #[serde(default)]
    link_bounds: BoundsFile,
}

fn slipping() -> ContactFile {
    ContactFile::Slipping
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MachiningFile {
    surface: u32,
    #[serde(default)]
    bounds: BoundsFile,
}

#[derive(Debug, Deserialize)]
enum SenseFile {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintFile {
    terms: BTreeMap<String, f64>,
    sense: SenseFile,
    bound: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum SpecTypeFile {
    Location,
    Orientation,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GaugeFile {
    #[serde(default = "one")]
    id: u32,
    datums: Vec<u32>,
    toleranced: u32,
    width: f64,
    #[serde(rename = "type")]
    spec_type: SpecTypeFile,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    setup: u32,
    datums: Vec<u32>,
    toleranced: u32,
    #[serde(rename = "type")]
    spec_type: SpecTypeFile,
    #[serde(default)]
    value: Option<f64>,
}

// ---- loaded document ----

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub plan: ProcessPlan,
    pub functional: VirtualGauge,
    /// `None` when the file has no manufacturing_specs section.
    pub specs: Option<Vec<SpecProposal>>,
}

/// Parses, cross-checks and validates a plan file. Every error found in
/// the last stage reached is returned.
pub fn load(text: &str) -> Result<Document, Vec<PlanError>> {
    let file: PlanFile = serde_json::from_str(text).map_err(|e| {
        let kind = match e.classify() {
            serde_json::error::Category::Data => ErrorKind::Schema,
            _ => ErrorKind::Parse,
        };
        let message = strip_position(&e.to_string());
        vec![PlanError { kind, line: Some(e.line()).filter(|&l| l > 0), path: None, message }]
    })?;
    let index = LineIndex::new(text);
    let mut errors = Errors { index: &index, list: Vec::new() };
    let doc = convert(&file, &mut errors);
    if !errors.list.is_empty() {
        return Err(errors.list);
    }
    let doc = doc.expect("no errors implies a document");
    let violations = validate_plan(&doc.plan);
    if !violations.is_empty() {
        return Err(violations
            .into_iter()
            .map(|v| {
                let path = match v.setup.and_then(|id| doc.plan.setups.iter().position(|s| s.id == id)) {
                    Some(i) => format!("process.setups[{i}]"),
                    None => String::from("nominal_part"),
                };
                errors.error(ErrorKind::Plan, &path, v.message)
            })
            .collect());
    }
    Ok(doc)
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

struct Errors<'a> {
    index: &'a LineIndex,
    list: Vec<PlanError>,
}

impl Errors<'_> {
    fn error(&self, kind: ErrorKind, path: &str, message: String) -> PlanError {
        PlanError { kind, line: self.index.line_of(path), path: Some(path.to_string()), message }
    }

    fn push(&mut self, kind: ErrorKind, path: &str, message: String) {
        let e = self.error(kind, path, message);
        self.list.push(e);
    }

    fn check_surface(&mut self, declared: &BTreeMap<u32, SurfaceClass>, id: u32, path: &str) {
        if !declared.contains_key(&id) {
            self.push(ErrorKind::Reference, path, format!("surface {id} is not declared in nominal_part"));
        }
    }
}

fn frame(origin: [f64; 3], x: [f64; 3], y: [f64; 3], path: &str, errors: &mut Errors) -> Option<Frame> {
    match Frame::from_axes(origin, x, y) {
        Ok(f) => Some(f),
        Err(e) => {
            errors.push(ErrorKind::Schema, path, e.to_string());
            None
        }
    }
}

fn convert(file: &PlanFile, errors: &mut Errors) -> Option<Document> {
    if let Some(u) = &file.units {
        if u.length != "mm" {
            errors.push(ErrorKind::Schema, "units.length", format!("length unit must be \"mm\", got \"{}\"", u.length));
        }
        if u.angle != "rad" {
            errors.push(ErrorKind::Schema, "units.angle", format!("angle unit must be \"rad\", got \"{}\"", u.angle));
        }
    }

    let mut surfaces = Vec::new();
    let mut declared = BTreeMap::new();
    for (i, s) in file.nominal_part.surfaces.iter().enumerate() {
        let path = format!("nominal_part.surfaces[{i}]");
        let surface = match *s {
            SurfaceFile::Plane { id, origin, x_axis, y_axis, ref boundary } => {
                frame(origin, x_axis, y_axis, &path, errors)
                    .map(|f| Surface::plane(id, f, boundary.iter().map(|&[x, y]| [x, y, 0.0]).collect()))
            }
            SurfaceFile::Cylinder { id, origin, x_axis, y_axis, radius, extent } => {
                frame(origin, x_axis, y_axis, &path, errors)
                    .map(|f| Surface::cylinder(id, f, radius, extent[0], extent[1]))
            }
        };
        if let Some(surface) = surface {
            if declared.insert(surface.id, surface.class).is_some() {
                errors.push(
                    ErrorKind::Reference,
                    &format!("{path}.id"),
                    format!("surface {} declared twice", surface.id),
                );
            }
            surfaces.push(surface);
        }
    }

    let mut raw = Vec::new();
    for (i, r) in file.process.raw_surfaces.iter().enumerate() {
        errors.check_surface(&declared, r.surface, &format!("process.raw_surfaces[{i}].surface"));
        raw.push(RawSurface { surface: r.surface, bounds: r.bounds.to_kind_bounds() });
    }

    let mut setups = Vec::new();
    for (i, s) in file.process.setups.iter().enumerate() {
        let base = format!("process.setups[{i}]");
        let mut connections = Vec::new();
        for (j, c) in s.holder.iter().enumerate() {
            errors.check_surface(&declared, c.surface, &format!("{base}.holder[{j}].surface"));
            connections.push(ElementaryConnection {
                surface: c.surface,
                rank: c.rank,
                locator: match c.locator {
                    LocatorFile::Planar => Locator::Planar,
                    LocatorFile::Centering { long } => Locator::Centering { long },
                    LocatorFile::Vee { half_angle, long } => Locator::Vee { half_angle, long },
                    LocatorFile::CylinderOnPlane => Locator::CylinderOnPlane,
                },
                contact: match c.contact {
                    ContactFile::Slipping => ConnectionContact::Slipping,
                    ContactFile::Floating { clearance } => ConnectionContact::Floating { clearance },
                },
                holder_bounds: c.holder_bounds.to_kind_bounds(),
                link_bounds: c.link_bounds.to_kind_bounds(),
            });
        }
        let mut machining = Vec::new();
        for (j, m) in s.machining.iter().enumerate() {
            errors.check_surface(&declared, m.surface, &format!("{base}.machining[{j}].surface"));
            machining.push(MachiningOperation { surface: m.surface, bounds: m.bounds.to_kind_bounds() });
        }
        let mut constraints = Vec::new();
        for (j, c) in s.constraints.iter().enumerate() {
            for name in c.terms.keys() {
                let path = format!("{base}.constraints[{j}].terms.{name}");
                match parse_name(name) {
                    None => errors.push(ErrorKind::Schema, &path, format!("`{name}` is not a parameter name")),
                    Some(p) => errors.check_surface(&declared, p.surface, &path),
                }
            }
            constraints.push(ConstraintSpec {
                terms: c.terms.iter().map(|(n, v)| (n.clone(), *v)).collect(),
                sense: match c.sense {
                    SenseFile::Le => Sense::Le,
                    SenseFile::Ge => Sense::Ge,
                },
                bound: c.bound,
            });
        }
        setups.push(SetUp { id: s.id, connections, machining, constraints });
    }

    let g = &file.functional_gauge;
    for (j, &d) in g.datums.iter().enumerate() {
        errors.check_surface(&declared, d, &format!("functional_gauge.datums[{j}]"));
    }
    errors.check_surface(&declared, g.toleranced, "functional_gauge.toleranced");
    if !(g.width > 0.0) {
        errors.push(ErrorKind::Schema, "functional_gauge.width", format!("width must be positive, got {}", g.width));
    }
    let zone = |id: u32| match declared.get(&id) {
        Some(SurfaceClass::Cylinder) => ZoneForm::CoaxialCylinder,
        _ => ZoneForm::TwoPlanes,
    };
    let functional = VirtualGauge {
        kind: GaugeKind::Functional { gauge: g.id },
        datums: g.datums.clone(),
        toleranced: g.toleranced,
        width: g.width,
        zone: zone(g.toleranced),
        mobility: match g.spec_type {
            SpecTypeFile::Location => ZoneMobility::Location,
            SpecTypeFile::Orientation => ZoneMobility::Orientation,
        },
    };

    let setup_ids: BTreeSet<u32> = file.process.setups.iter().map(|s| s.id).collect();
    let specs = file.manufacturing_specs.as_ref().map(|list| {
        list.iter()
            .enumerate()
            .map(|(i, s)| {
                let base = format!("manufacturing_specs[{i}]");
                if !setup_ids.contains(&s.setup) {
                    errors.push(
                        ErrorKind::Reference,
                        &format!("{base}.setup"),
                        format!("set-up {} is not declared", s.setup),
                    );
                }
                for (j, &d) in s.datums.iter().enumerate() {
                    errors.check_surface(&declared, d, &format!("{base}.datums[{j}]"));
                }
                errors.check_surface(&declared, s.toleranced, &format!("{base}.toleranced"));
                if let Some(v) = s.value {
                    if !(v > 0.0) {
                        errors.push(
                            ErrorKind::Schema,
                            &format!("{base}.value"),
                            format!("value must be positive, got {v}"),
                        );
                    }
                }
                SpecProposal {
                    setup: s.setup,
                    datums: s.datums.clone(),
                    toleranced: s.toleranced,
                    spec_type: match s.spec_type {
                        SpecTypeFile::Location => SpecType::Location,
                        SpecTypeFile::Orientation => SpecType::Orientation,
                    },
                    value: s.value,
                    active: true,
                }
            })
            .collect()
    });

    let plan = ProcessPlan { part: NominalPart::new(surfaces), raw, setups };
    Some(Document { plan, functional, specs })
}
