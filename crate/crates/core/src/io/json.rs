//! JSON instance files.
//!
//! ```json
//! {"n1": 1, "n2": 0, "m": 1, "c": [1.0], "h": [0.0], "l": [0.0], "u": ["inf"],
//!  "primal_cones": [], "dual_cones": [{"kind": "non_neg", "dim": 1}],
//!  "G": {"rows": [0], "cols": [0], "vals": [1.0]}}
//! ```
//! Infinite bounds are written as the strings `"inf"` and `"-inf"`. Matrix entries are stored
//! row by row, so writing a parsed canonical file reproduces it byte for byte.

use serde::{Deserialize, Serialize};

use crate::error::{PdcsError, Result};
use crate::linalg::SparseMatrix;
use crate::model::{Cone, ConicProgram};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Bound {
    Finite(f64),
    Named(BoundName),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
enum BoundName {
    #[serde(rename = "inf")]
    Inf,
    #[serde(rename = "-inf")]
    NegInf,
}

impl From<f64> for Bound {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            Bound::Named(BoundName::Inf)
        } else if v == f64::NEG_INFINITY {
            Bound::Named(BoundName::NegInf)
        } else {
            Bound::Finite(v)
        }
    }
}

impl From<Bound> for f64 {
    fn from(b: Bound) -> f64 {
        match b {
            Bound::Finite(v) => v,
            Bound::Named(BoundName::Inf) => f64::INFINITY,
            Bound::Named(BoundName::NegInf) => f64::NEG_INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Triplets {
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    n1: usize,
    n2: usize,
    m: usize,
    c: Vec<f64>,
    h: Vec<f64>,
    l: Vec<Bound>,
    u: Vec<Bound>,
    primal_cones: Vec<Cone>,
    dual_cones: Vec<Cone>,
    #[serde(rename = "G")]
    g: Triplets,
}

fn parse_err(context: &str, message: impl Into<String>) -> PdcsError {
    PdcsError::Parse { context: context.to_string(), message: message.into() }
}

pub fn instance_to_json(program: &ConicProgram<f64>) -> Result<String> {
    let (mut rows, mut cols, mut vals) = (vec![], vec![], vec![]);
    for (i, j, v) in program.g.triplets() {
        rows.push(i);
        cols.push(j);
        vals.push(v);
    }
    let file = InstanceFile {
        n1: program.n1(),
        n2: program.n2(),
        m: program.m(),
        c: program.c.clone(),
        h: program.h.clone(),
        l: program.l.iter().map(|&v| v.into()).collect(),
        u: program.u.iter().map(|&v| v.into()).collect(),
        primal_cones: program.primal_cones.clone(),
        dual_cones: program.dual_cones.clone(),
        g: Triplets { rows, cols, vals },
    };
    let mut s = serde_json::to_string_pretty(&file).map_err(|e| parse_err("instance", e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Parses and validates an instance.
pub fn instance_from_json(text: &str) -> Result<ConicProgram<f64>> {
    let file: InstanceFile = serde_json::from_str(text)
        .map_err(|e| parse_err(&format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    let n = file.n1 + file.n2;
    let check = |name: &str, got: usize, want: usize| {
        if got == want {
            Ok(())
        } else {
            Err(parse_err(name, format!("expected {want} entries, found {got}")))
        }
    };
    check("c", file.c.len(), n)?;
    check("h", file.h.len(), file.m)?;
    check("l", file.l.len(), file.n1)?;
    check("u", file.u.len(), file.n1)?;
    let g = &file.g;
    if let Some(k) = g.rows.iter().position(|&r| r >= file.m) {
        return Err(parse_err("G.rows", format!("entry {k} is out of range")));
    }
    if let Some(k) = g.cols.iter().position(|&c| c >= n) {
        return Err(parse_err("G.cols", format!("entry {k} is out of range")));
    }
    let program = ConicProgram {
        c: file.c,
        g: SparseMatrix::from_triplets(file.m, n, &g.rows, &g.cols, &g.vals)
            .map_err(|e| parse_err("G", e.to_string()))?,
        h: file.h,
        l: file.l.into_iter().map(f64::from).collect(),
        u: file.u.into_iter().map(f64::from).collect(),
        primal_cones: file.primal_cones,
        dual_cones: file.dual_cones,
    };
    let issues = program.validate();
    if !issues.is_empty() {
        return Err(PdcsError::InvalidProgram(issues));
    }
    if program.n2() != file.n2 {
        return Err(parse_err("n2", "does not match the primal cone dimensions"));
    }
    Ok(program)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp() -> ConicProgram<f64> {
        ConicProgram {
            c: vec![1.0],
            g: SparseMatrix::identity(1),
            h: vec![0.1],
            l: vec![0.0],
            u: vec![f64::INFINITY],
            primal_cones: vec![],
            dual_cones: vec![Cone::nonneg(1)],
        }
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let a = instance_to_json(&lp()).unwrap();
        let p = instance_from_json(&a).unwrap();
        assert_eq!(p, lp());
        assert_eq!(instance_to_json(&p).unwrap(), a);
        assert!(a.contains("\"inf\""));
        assert!(a.contains("0.1"));
    }

    #[test]
    fn unknown_cone_kind_is_named() {
        let text = instance_to_json(&lp()).unwrap().replace("non_neg", "psd");
        let err = instance_from_json(&text).unwrap_err().to_string();
        assert!(err.contains("psd"), "{err}");
    }

    #[test]
    fn length_and_range_errors() {
        let text = instance_to_json(&lp()).unwrap();
        let bad = text.replace("\"c\": [\n    1.0\n  ]", "\"c\": []");
        assert!(matches!(instance_from_json(&bad), Err(PdcsError::Parse { .. })));
        let bad = text.replace("\"rows\": [\n      0\n    ]", "\"rows\": [\n      3\n    ]");
        assert!(matches!(instance_from_json(&bad), Err(PdcsError::Parse { .. })));
        let bad = text.replace("\"l\": [\n    0.0\n  ]", "\"l\": [\n    5.0\n  ]").replace("\"inf\"", "1.0");
        assert!(matches!(instance_from_json(&bad), Err(PdcsError::InvalidProgram(_))));
    }
}
