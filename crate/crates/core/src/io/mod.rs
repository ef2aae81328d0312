//! Instance and report files.

pub mod cbf;
pub mod json;

use std::path::Path;

use crate::error::{PdcsError, Result};
use crate::model::ConicProgram;
use crate::solver::SolveReport;

pub use cbf::{read_cbf_str, read_cbf_subset};
pub use json::{instance_from_json, instance_to_json};

/// Reads a `.json` instance or a `.cbf` file, chosen by extension.
pub fn read_instance(path: &Path) -> Result<ConicProgram<f64>> {
    match path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()) {
        Some(e) if e == "cbf" => read_cbf_subset(path),
        Some(e) if e == "json" => instance_from_json(&std::fs::read_to_string(path)?),
        _ => Err(PdcsError::Unsupported(format!(
            "cannot tell the format of {} (expected .json or .cbf)",
            path.display()
        ))),
    }
}

pub fn write_instance(path: &Path, program: &ConicProgram<f64>) -> Result<()> {
    std::fs::write(path, instance_to_json(program)?)?;
    Ok(())
}

pub fn report_to_json(report: &SolveReport<f64>) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)
        .map_err(|e| PdcsError::Parse { context: "report".into(), message: e.to_string() })?;
    s.push('\n');
    Ok(s)
}

pub fn report_from_json(text: &str) -> Result<SolveReport<f64>> {
    serde_json::from_str(text).map_err(|e| PdcsError::Parse {
        context: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })
}
