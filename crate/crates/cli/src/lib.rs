//! Command-line front end: plan files in, reports out.

pub mod locate;
pub mod plan;
pub mod report;

use clap::{Parser, Subcommand, ValueEnum};
use mmptol_core::optimizer::FD_STEP;
use mmptol_core::param::{parse_name, Role};
use mmptol_core::{
    build_mmp, classify_parameters, detect_redundant, influence_coefficients, propose_specs, size_tolerances,
    verify_specs, worst_case, Assignment, Completeness, Context, Error, InfluenceTable, Mmp, OptimizationProblem,
    Registry, SolverKind, SolverOptions, SpecProposal, SpecType, Status, WorstCaseResult, ZoneMobility,
};
use plan::{Document, PlanError};
use report::{
    Analysis, GaugeSummary, InfluenceEntry, Metadata, ParamValue, RedundancyEntry, Report, SizingReport, Spec,
    VerificationReport,
};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "mmptol", version, about = "Worst-case tolerance analysis and synthesis for machining process plans")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for the iterative solver's multi-start.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Solver::Enumerate)]
    pub solver: Solver,
    /// Number of random starts of the iterative solver.
    #[arg(long, global = true, default_value_t = 16)]
    pub starts: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Worst case of the functional tolerance over the process capabilities.
    Analyze { plan: PathBuf },
    /// Influence coefficient of every defect parameter.
    Influence { plan: PathBuf },
    /// Propose manufacturing specifications per set-up.
    Synthesize { plan: PathBuf },
    /// Check the file's manufacturing specifications against the functional tolerance.
    Verify { plan: PathBuf },
    /// Scale specification values to the largest conform set.
    Size { plan: PathBuf },
    /// Flag specifications whose removal changes nothing.
    Redundancy { plan: PathBuf },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Analyze { .. } => "analyze",
            Command::Influence { .. } => "influence",
            Command::Synthesize { .. } => "synthesize",
            Command::Verify { .. } => "verify",
            Command::Size { .. } => "size",
            Command::Redundancy { .. } => "redundancy",
        }
    }

    fn plan(&self) -> &PathBuf {
        match self {
            Command::Analyze { plan }
            | Command::Influence { plan }
            | Command::Synthesize { plan }
            | Command::Verify { plan }
            | Command::Size { plan }
            | Command::Redundancy { plan } => plan,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Solver {
    Enumerate,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Exit code and report of a successful run.
pub struct Outcome {
    pub code: i32,
    pub report: Report,
}

/// Anything that maps to exit code 2.
#[derive(Debug)]
pub enum Failure {
    Io(String),
    Plan(Vec<PlanError>),
    Input(String),
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Io(m) | Failure::Input(m) => f.write_str(m),
            Failure::Plan(list) => {
                for (i, e) in list.iter().enumerate() {
                    if i > 0 {
                        writeln!(f)?;
                    }
                    write!(f, "{e}")?;
                }
                Ok(())
            }
        }
    }
}

fn core_error(e: Error) -> Failure {
    Failure::Input(e.to_string())
}

struct Session {
    doc: Document,
    mmp: Mmp,
    options: SolverOptions,
    solver: SolverKind,
}

impl Session {
    fn ctx(&self) -> Context<'_> {
        Context {
            plan: &self.doc.plan,
            mmp: &self.mmp,
            functional: &self.doc.functional,
            solver: self.solver,
            options: &self.options,
        }
    }
}

fn status_name(s: Status) -> String {
    match s {
        Status::Bounded => "BOUNDED",
        Status::Divergent => "DIVERGENT",
        Status::Infeasible => "INFEASIBLE",
    }
    .to_string()
}

fn param_values(registry: &Registry, a: &Assignment) -> Vec<ParamValue> {
    a.iter()
        .filter(|(_, v)| **v != 0.0)
        .map(|(&id, &value)| {
            let p = registry.get(id);
            ParamValue { name: p.name.clone(), value, degrees: p.kind.is_rotation().then(|| value.to_degrees()) }
        })
        .collect()
}

fn analysis(problem: &OptimizationProblem, r: &WorstCaseResult) -> Analysis {
    let ray = r.ray.as_ref().map(|ray| param_values(&problem.registry, ray)).unwrap_or_default();
    let explanation = match r.status {
        Status::Bounded => None,
        Status::Divergent => {
            let names: Vec<&str> = ray.iter().map(|p| p.name.as_str()).collect();
            Some(format!(
                "DIVERGENT: the functional margin decreases without bound; nothing limits {}",
                names.join(", ")
            ))
        }
        Status::Infeasible => Some(String::from("INFEASIBLE: the constraints admit no manufactured part")),
    };
    Analysis {
        status: status_name(r.status),
        value: (r.status == Status::Bounded).then_some(r.value),
        conform: r.status == Status::Bounded && r.value >= 0.0,
        converged: r.converged,
        worst_point: if r.status == Status::Bounded { param_values(&problem.registry, &r.outer) } else { Vec::new() },
        ray,
        explanation,
    }
}

fn spec_out(p: &SpecProposal) -> Spec {
    Spec {
        setup: p.setup,
        datums: p.datums.clone(),
        toleranced: p.toleranced,
        spec_type: match p.spec_type {
            SpecType::Location => "location",
            SpecType::Orientation => "orientation",
        }
        .to_string(),
        value: p.value,
    }
}

fn file_specs(session: &Session, need_values: bool) -> Result<Vec<SpecProposal>, Failure> {
    let specs = session
        .doc
        .specs
        .clone()
        .ok_or_else(|| Failure::Input(String::from("plan has no manufacturing_specs section")))?;
    if need_values {
        if let Some(s) = specs.iter().find(|s| s.value.is_none()) {
            return Err(Failure::Input(format!(
                "manufacturing spec on surface {} (set-up {}) has no value",
                s.toleranced, s.setup
            )));
        }
    }
    Ok(specs)
}

/// Influence coefficients of the functional worst case, in table order.
fn influence(
    session: &Session,
    problem: &OptimizationProblem,
    r: &WorstCaseResult,
) -> Result<(Vec<InfluenceEntry>, InfluenceTable), Failure> {
    let list = influence_coefficients(problem, r, &session.options).map_err(core_error)?;
    let table = InfluenceTable::new(problem, &list);
    let mut rows: Vec<(InfluenceEntry, mmptol_core::ParamKind)> = list
        .iter()
        .filter_map(|inf| {
            let p = problem.registry.get(inf.param);
            let role = parse_name(&p.name)?.role();
            let role = match role {
                Role::Gauge => return None,
                Role::Positioning => "positioning",
                Role::Machined if p.setup == 0 => "raw",
                Role::Machined => "machined",
            };
            Some((
                InfluenceEntry {
                    setup: p.setup,
                    surface: p.surface,
                    parameter: p.name.clone(),
                    role: role.to_string(),
                    coefficient: inf.coefficient,
                    dual: inf.dual,
                    degenerate: inf.degenerate,
                },
                p.kind,
            ))
        })
        .collect();
    rows.sort_by(|(a, ka), (b, kb)| {
        (a.setup, a.role == "machined", a.surface, *ka).cmp(&(b.setup, b.role == "machined", b.surface, *kb))
    });
    Ok((rows.into_iter().map(|(e, _)| e).collect(), table))
}

pub fn execute(cli: &Cli) -> Result<Outcome, Failure> {
    let path = cli.command.plan();
    let text =
        std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    let doc = plan::load(&text).map_err(Failure::Plan)?;
    let mmp = build_mmp(&doc.plan).map_err(core_error)?;
    let options = SolverOptions { seed: cli.seed, starts: cli.starts.max(1), ..SolverOptions::default() };
    let solver = match cli.solver {
        Solver::Enumerate => SolverKind::Enumerate,
        Solver::Iterative => SolverKind::Iterative,
    };
    let g = &doc.functional;
    let metadata = Metadata {
        tool: String::from("mmptol"),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: cli.command.name().to_string(),
        plan: path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
        seed: options.seed,
        solver: format!("{:?}", cli.solver).to_lowercase(),
        starts: options.starts,
        max_iterations: options.max_iterations,
        threshold: options.threshold,
        fd_step: FD_STEP,
        functional: GaugeSummary {
            toleranced: g.toleranced,
            datums: g.datums.clone(),
            spec_type: match g.mobility {
                ZoneMobility::Location => "location",
                ZoneMobility::Orientation => "orientation",
            }
            .to_string(),
            width: g.width,
        },
    };
    let session = Session { doc, mmp, options, solver };
    let mut report = Report {
        metadata,
        analysis: None,
        influence: None,
        proposals: None,
        warnings: Vec::new(),
        verification: None,
        sizing: None,
        redundancy: None,
    };
    let part = &session.doc.plan.part;

    let code = match cli.command {
        Command::Analyze { .. } | Command::Influence { .. } | Command::Synthesize { .. } => {
            let problem =
                OptimizationProblem::functional(&session.mmp, part, &session.doc.functional).map_err(core_error)?;
            let r = worst_case(&problem, solver, &session.options).map_err(core_error)?;
            let a = analysis(&problem, &r);
            let conform = a.conform;
            report.analysis = Some(a);
            if r.status == Status::Bounded && !matches!(cli.command, Command::Analyze { .. }) {
                let (rows, table) = influence(&session, &problem, &r)?;
                report.influence = Some(rows);
                if let Command::Synthesize { .. } = cli.command {
                    let (proposals, warnings) = propose_specs(&classify_parameters(&table, &session.doc.plan));
                    report.proposals = Some(proposals.iter().map(spec_out).collect());
                    report.warnings = warnings;
                }
            }
            if conform {
                0
            } else {
                1
            }
        }
        Command::Verify { .. } => {
            let specs = file_specs(&session, true)?;
            let v = verify(&session, &specs, &mut report)?;
            if v.0 == Completeness::Complete && v.1 {
                0
            } else {
                1
            }
        }
        Command::Size { .. } => {
            let specs: Vec<SpecProposal> = match session.doc.specs.is_some() {
                true => file_specs(&session, false)?,
                false => {
                    let problem = OptimizationProblem::functional(&session.mmp, part, &session.doc.functional)
                        .map_err(core_error)?;
                    let r = worst_case(&problem, solver, &session.options).map_err(core_error)?;
                    if r.status != Status::Bounded {
                        report.analysis = Some(analysis(&problem, &r));
                        return Ok(Outcome { code: 1, report });
                    }
                    let (_, table) = influence(&session, &problem, &r)?;
                    let (proposals, warnings) = propose_specs(&classify_parameters(&table, &session.doc.plan));
                    report.warnings = warnings;
                    proposals
                }
            };
            // unset values weigh 1
            let weighted: Vec<SpecProposal> =
                specs.into_iter().map(|s| SpecProposal { value: Some(s.value.unwrap_or(1.0)), ..s }).collect();
            report.proposals = Some(weighted.iter().map(spec_out).collect());
            let (completeness, _) = verify(&session, &weighted, &mut report)?;
            if completeness == Completeness::Incomplete {
                1
            } else {
                match size_tolerances(&session.ctx(), &weighted) {
                    Ok(s) => {
                        report.sizing = Some(SizingReport {
                            alpha: s.alpha,
                            worst: s.worst,
                            specs: s.proposals.iter().map(spec_out).collect(),
                        });
                        0
                    }
                    Err(e @ (Error::Unreachable(_) | Error::InvalidPlan(_))) => {
                        report.warnings.push(e.to_string());
                        1
                    }
                    Err(e) => return Err(core_error(e)),
                }
            }
        }
        Command::Redundancy { .. } => {
            let specs = file_specs(&session, true)?;
            let (completeness, _) = verify(&session, &specs, &mut report)?;
            let flags = detect_redundant(&session.ctx(), &specs).map_err(core_error)?;
            report.redundancy = Some(
                flags
                    .iter()
                    .map(|f| RedundancyEntry {
                        setup: f.setup,
                        toleranced: f.toleranced,
                        unnecessary: f.unnecessary,
                        status_without: status_name(f.status_without),
                        value_without: (f.status_without == Status::Bounded).then_some(f.value_without),
                    })
                    .collect(),
            );
            if completeness == Completeness::Complete {
                0
            } else {
                1
            }
        }
    };
    Ok(Outcome { code, report })
}

fn verify(session: &Session, specs: &[SpecProposal], report: &mut Report) -> Result<(Completeness, bool), Failure> {
    let problem =
        mmptol_core::constrained_problem(&session.mmp, &session.doc.plan.part, &session.doc.functional, specs)
            .map_err(core_error)?;
    let v = verify_specs(&session.ctx(), specs).map_err(core_error)?;
    report.verification = Some(VerificationReport {
        completeness: match v.completeness {
            Completeness::Complete => "COMPLETE",
            Completeness::Incomplete => "INCOMPLETE",
        }
        .to_string(),
        analysis: analysis(&problem, &v.result),
    });
    Ok((v.completeness, v.conform))
}

/// Runs the CLI and writes the report; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(outcome) => {
            let body = match cli.format {
                Format::Text => outcome.report.to_text(),
                Format::Json => outcome.report.to_json(),
            };
            match &cli.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, body) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return 2;
                    }
                }
                None => print!("{body}"),
            }
            outcome.code
        }
        Err(f) => {
            let name = cli.command.plan().display();
            for line in f.to_string().lines() {
                eprintln!("error: {name}: {line}");
            }
            2
        }
    }
}
