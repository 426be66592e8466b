//! Tolerance analysis and synthesis for machining process plans.
//!
//! Part deviations are small displacement torsors whose components are
//! linear forms in named defect parameters. A process plan (set-ups,
//! part-holders, positioning hierarchies, machining operations) is compiled
//! into a model of the manufactured part, functional and manufacturing
//! tolerances are expressed as virtual gauges producing linear gap
//! expressions, and the worst case is found by a nested min-max over linear
//! programs.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod error;
pub mod gauge;
pub mod geometry;
pub mod linexpr;
pub mod lp;
pub mod mmp;
pub mod optimizer;
pub mod param;
pub mod part;
pub mod process;
pub mod synthesis;
pub mod torsor;

mod hierarchy;

pub use error::Error;
pub use gauge::{
    assemble_gauge, gap_expressions, AssembledGauge, GapSet, GaugeKind, VirtualGauge, ZoneForm, ZoneMobility,
};
pub use geometry::{Frame, Vec3};
pub use linexpr::{Assignment, LinExpr};
pub use mmp::{build_mmp, machining_deviation, solve_positioning, ConstraintOrigin, Mmp, ModelConstraint, Positioning};
pub use optimizer::{
    influence_coefficients, inner_max_min, worst_case, worst_case_enumerate, worst_case_iterative, Influence,
    OptimizationProblem, SolverKind, SolverOptions, Status, WorstCaseResult,
};
pub use param::{Category, DefectParameter, KindBounds, ParamId, ParamKind, Registry, Role};
pub use part::{sample_points, validate_part, NominalPart, Surface};
pub use process::{
    registry_of, validate_plan, ConnectionContact, ConstraintSpec, ElementaryConnection, LinearConstraint, Locator,
    MachiningOperation, ProcessPlan, RawSurface, Sense, SetUp,
};
pub use synthesis::{
    classify_parameters, constrained_problem, detect_redundant, propose_specs, size_tolerances, verify_specs,
    Completeness, Context, InfluenceRow, InfluenceTable, RedundancyFlag, SetupClassification, Sizing, SpecProposal,
    SpecType, SurfaceInfluence, Verification,
};
pub use torsor::{new_surface_torsor, NumericTorsor, SurfaceClass, SurfaceDeviation, Torsor};

pub type Result<T, E = Error> = core::result::Result<T, E>;
