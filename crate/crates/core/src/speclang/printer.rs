use std::fmt::Write;

use crate::estimand::{EstimandSpec, Population, Strategy, Summary};
use crate::potential_outcomes::Assessment;

fn quoted(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

fn strategy(s: &Strategy) -> String {
    match s {
        Strategy::TreatmentPolicy => "treatment_policy".into(),
        Strategy::Hypothetical => "hypothetical".into(),
        Strategy::WhileOnTreatment => "while_on_treatment".into(),
        Strategy::Composite { worst } => format!("composite(worst={worst})"),
        Strategy::PrincipalStratum(p) => format!("principal_stratum({})", p.long_name()),
        Strategy::Confounder => "confounder".into(),
    }
}

/// Canonical text of one estimand: fixed field order, ICE clauses in kind
/// order, two-space indent, LF line endings.
pub fn print_spec(spec: &EstimandSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "estimand {} {{", quoted(&spec.name));
    let _ = writeln!(out, "  treatment: {} vs {}", spec.treatment.0, spec.treatment.1);
    let at = match spec.endpoint.at {
        Assessment::T1 => "t1",
        Assessment::T2 => "t2",
    };
    let _ = writeln!(out, "  endpoint: {}@{at}", spec.endpoint.name);
    let population = match spec.population {
        Population::All => "all".to_string(),
        Population::Stratum(s) => format!("stratum({})", s.long_name()),
        Population::AnalysisSet(s) => s.as_str().to_string(),
    };
    let _ = writeln!(out, "  population: {population}");
    let summary = match spec.summary {
        Summary::MeanDifference => "mean_difference",
    };
    let _ = writeln!(out, "  summary: {summary}");
    for (kind, s) in &spec.ice_policies {
        let _ = writeln!(out, "  ice {kind}: {}", strategy(s));
    }
    out.push_str("}\n");
    out
}

/// Estimands separated by blank lines.
pub fn print_specs(specs: &[EstimandSpec]) -> String {
    specs.iter().map(print_spec).collect::<Vec<_>>().join("\n")
}
