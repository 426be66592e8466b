//! Machine-readable report and its text rendering. Non-finite values are
//! stored as `null` so the JSON form re-parses to the same report.

use serde::{Deserialize, Serialize};
use std::fmt::Write;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub metadata: Metadata,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub analysis: Option<Analysis>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub influence: Option<Vec<InfluenceEntry>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub proposals: Option<Vec<Spec>>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub verification: Option<VerificationReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sizing: Option<SizingReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub redundancy: Option<Vec<RedundancyEntry>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub plan: String,
    pub seed: u64,
    pub solver: String,
    pub starts: usize,
    pub max_iterations: usize,
    /// Influence threshold below which a coefficient is reported blank.
    pub threshold: f64,
    pub fd_step: f64,
    pub functional: GaugeSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeSummary {
    pub toleranced: u32,
    pub datums: Vec<u32>,
    #[serde(rename = "type")]
    pub spec_type: String,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamValue {
    pub name: String,
    /// Radians for rotations, mm otherwise.
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub degrees: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub status: String,
    /// Worst-case functional margin; `None` unless bounded.
    pub value: Option<f64>,
    pub conform: bool,
    pub converged: bool,
    pub worst_point: Vec<ParamValue>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub ray: Vec<ParamValue>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub explanation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceEntry {
    pub setup: u32,
    pub surface: u32,
    pub parameter: String,
    pub role: String,
    pub coefficient: f64,
    pub dual: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spec {
    pub setup: u32,
    pub datums: Vec<u32>,
    pub toleranced: u32,
    #[serde(rename = "type")]
    pub spec_type: String,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub completeness: String,
    pub analysis: Analysis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizingReport {
    pub alpha: f64,
    pub worst: f64,
    pub specs: Vec<Spec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedundancyEntry {
    pub setup: u32,
    pub toleranced: u32,
    pub unnecessary: bool,
    pub status_without: String,
    pub value_without: Option<f64>,
}

fn datum_frame(datums: &[u32]) -> String {
    if datums.is_empty() {
        return String::from("(no datum)");
    }
    let mut s = String::from("|");
    for d in datums {
        let _ = write!(s, "{d}|");
    }
    s
}

fn value_or_status(v: Option<f64>, status: &str) -> String {
    match v {
        Some(v) => format!("{v:.6} mm"),
        None => status.to_string(),
    }
}

fn params(out: &mut String, title: &str, list: &[ParamValue]) {
    if list.is_empty() {
        return;
    }
    let _ = writeln!(out, "  {title}:");
    for p in list {
        match p.degrees {
            Some(d) => {
                let _ = writeln!(out, "    {:<10} {:>12.6e} rad  ({:.6}°)", p.name, p.value, d);
            }
            None => {
                let _ = writeln!(out, "    {:<10} {:>12.6e} mm", p.name, p.value);
            }
        }
    }
}

fn analysis(out: &mut String, title: &str, a: &Analysis) {
    let verdict = if a.conform { "CONFORM" } else { "NON-CONFORM" };
    let _ = writeln!(out, "{title}: {}  [{}] {verdict}", value_or_status(a.value, &a.status), a.status);
    if !a.converged {
        let _ = writeln!(out, "  (iterative search hit the iteration limit)");
    }
    if let Some(e) = &a.explanation {
        let _ = writeln!(out, "  {e}");
    }
    params(out, "worst point", &a.worst_point);
    params(out, "divergence direction", &a.ray);
}

fn spec_line(s: &Spec) -> String {
    let value = match s.value {
        Some(v) => format!("{v:.6} mm"),
        None => String::from("(value unset)"),
    };
    format!("set-up {}: {} of {} wrt {}  {value}", s.setup, s.spec_type, s.toleranced, datum_frame(&s.datums))
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let m = &self.metadata;
        let mut out = String::new();
        let _ = writeln!(out, "{} {} ({} solver, seed {}, {} starts)", m.tool, m.command, m.solver, m.seed, m.starts);
        let g = &m.functional;
        let _ = writeln!(
            out,
            "functional tolerance: {} of {} wrt {}, t = {} mm",
            g.spec_type,
            g.toleranced,
            datum_frame(&g.datums),
            g.width
        );
        if let Some(a) = &self.analysis {
            // the table below says more than the worst point
            let brief = Analysis { worst_point: Vec::new(), ..a.clone() };
            analysis(&mut out, "worst case", if self.influence.is_some() { &brief } else { a });
        }
        if let Some(rows) = &self.influence {
            let _ = writeln!(out, "influence coefficients (blank = non-influential):");
            let mut current = None;
            for r in rows {
                if current != Some((r.setup, r.surface)) {
                    if current.map(|c| c.0) != Some(r.setup) {
                        let _ = writeln!(out, "  set-up {}", r.setup);
                    }
                    let _ = writeln!(out, "    surface {} ({})", r.surface, r.role);
                    current = Some((r.setup, r.surface));
                }
                if r.coefficient == 0.0 {
                    let _ = writeln!(out, "      {}", r.parameter);
                } else {
                    let flag = if r.degenerate { "  *" } else { "" };
                    let _ = writeln!(out, "      {:<10} {:>8.2}{flag}", r.parameter, r.coefficient);
                }
            }
            if rows.iter().any(|r| r.degenerate && r.coefficient != 0.0) {
                let _ = writeln!(out, "  * degenerate vertex, larger one-sided value");
            }
        }
        if let Some(list) = &self.proposals {
            let _ = writeln!(out, "proposed specifications:");
            if list.is_empty() {
                let _ = writeln!(out, "  (none)");
            }
            for s in list {
                let _ = writeln!(out, "  {}", spec_line(s));
            }
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        if let Some(v) = &self.verification {
            let _ = writeln!(out, "specification set: {}", v.completeness);
            analysis(&mut out, "constrained worst case", &v.analysis);
        }
        if let Some(s) = &self.sizing {
            let _ = writeln!(out, "sizing: alpha = {:.6}, worst case at sized values = {:.3e} mm", s.alpha, s.worst);
            for spec in &s.specs {
                let _ = writeln!(out, "  {}", spec_line(spec));
            }
        }
        if let Some(list) = &self.redundancy {
            let _ = writeln!(out, "redundancy:");
            if list.is_empty() {
                let _ = writeln!(out, "  (no specifications)");
            }
            for r in list {
                let verdict = if r.unnecessary { "UNNECESSARY" } else { "required" };
                let _ = writeln!(
                    out,
                    "  set-up {} surface {}: {verdict} (without it: {})",
                    r.setup,
                    r.toleranced,
                    value_or_status(r.value_without, &r.status_without)
                );
            }
        }
        out
    }
}
