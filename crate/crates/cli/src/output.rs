//! CSV rendering of experiment rows.

use std::fmt::Write as _;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::experiments::ResultRow;

pub const HEADER: &str = "experiment,space,function,lambda,measured,bound,slack,evaluations,runtime_ms,seed";

/// Fixed-width scientific notation, so equal values print identically.
pub fn number(v: f64) -> String {
    format!("{v:.16e}")
}

/// Resolved configuration as `#` comments, the header, then one line per row.
pub fn render(cfg: &ExperimentConfig, rows: &[ResultRow]) -> Result<String, CliError> {
    let mut out = String::new();
    for line in cfg.resolved_lines() {
        writeln!(out, "# {line}").unwrap();
    }
    writeln!(out, "{HEADER}").unwrap();
    for r in rows {
        for (name, v) in [("lambda", r.lambda), ("measured", r.measured), ("bound", r.bound), ("slack", r.slack)] {
            if !v.is_finite() {
                return Err(CliError::Runtime(format!(
                    "{} {}: non-finite {name} ({v})",
                    r.experiment, r.function
                )));
            }
        }
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.experiment,
            r.space,
            r.function,
            number(r.lambda),
            number(r.measured),
            number(r.bound),
            number(r.slack),
            r.evaluations,
            r.runtime_ms,
            r.seed
        )
        .unwrap();
    }
    Ok(out)
}

/// Parsed data line of a rendered file.
pub fn parse_row(line: &str) -> Option<Vec<String>> {
    if line.starts_with('#') || line == HEADER || line.is_empty() {
        return None;
    }
    Some(line.split(',').map(str::to_string).collect())
}
