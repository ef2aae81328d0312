//! Benchmark runner: solve a set of instances, tabulate, and summarize with the shifted
//! geometric mean of solve times.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{PdcsError, Result};
use crate::io::read_instance;
use crate::model::ConicProgram;
use crate::solver::{solve, SolverParams};
use crate::termination::{sgm, Status};

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub params: SolverParams<f64>,
    /// Per-instance limit in seconds; unsolved instances are charged this much.
    pub time_limit: f64,
    pub shift: f64,
    /// Solve instances concurrently. Timings then interfere, so no SGM is reported.
    pub parallel: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub name: String,
    pub status: String,
    pub seconds: f64,
    pub iterations: u64,
    pub spmv_count: u64,
    pub err_p: f64,
    pub err_d: f64,
    pub err_gap: f64,
}

impl BenchRow {
    pub fn solved(&self) -> bool {
        self.status == Status::Optimal.as_str()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSummary {
    pub rows: Vec<BenchRow>,
    pub shift: f64,
    pub time_limit: f64,
    pub sgm: Option<f64>,
}

/// Times fed to the SGM: the measured time when solved, the limit otherwise.
pub fn charged_times(rows: &[BenchRow], time_limit: f64) -> Vec<f64> {
    rows.iter().map(|r| if r.solved() { r.seconds.min(time_limit) } else { time_limit }).collect()
}

/// Every `.json` and `.cbf` file in `dir`, sorted by file name, with read failures kept.
pub fn load_dir(dir: &Path) -> Result<Vec<(String, Result<ConicProgram<f64>>)>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| e.eq_ignore_ascii_case("json") || e.eq_ignore_ascii_case("cbf"))
        })
        .collect();
    paths.sort();
    Ok(paths
        .into_iter()
        .map(|p| {
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            (name, read_instance(&p))
        })
        .collect())
}

fn run_one(name: &str, program: &Result<ConicProgram<f64>>, opts: &BenchOptions) -> BenchRow {
    let failed = |status: &str| BenchRow {
        name: name.to_string(),
        status: status.to_string(),
        seconds: opts.time_limit,
        iterations: 0,
        spmv_count: 0,
        err_p: f64::NAN,
        err_d: f64::NAN,
        err_gap: f64::NAN,
    };
    let Ok(program) = program else {
        return failed("READ_ERROR");
    };
    let params = SolverParams {
        time_limit: Some(opts.time_limit),
        keep_solution: false,
        ..opts.params.clone()
    };
    match solve(program, &params) {
        Ok(r) => BenchRow {
            name: name.to_string(),
            status: r.status.as_str().to_string(),
            seconds: r.wall_seconds,
            iterations: r.iterations,
            spmv_count: r.spmv_count,
            err_p: r.err_p,
            err_d: r.err_d,
            err_gap: r.err_gap,
        },
        Err(_) => failed("SOLVER_ERROR"),
    }
}

pub fn run_bench(
    instances: &[(String, Result<ConicProgram<f64>>)],
    opts: &BenchOptions,
) -> Result<BenchSummary> {
    if instances.is_empty() {
        return Err(PdcsError::InvalidParams("no instances to benchmark".into()));
    }
    if !(opts.time_limit > 0.0 && opts.shift >= 0.0) {
        return Err(PdcsError::InvalidParams("time limit must be positive and shift nonnegative".into()));
    }
    let rows: Vec<BenchRow> = if opts.parallel {
        instances.par_iter().map(|(n, p)| run_one(n, p, opts)).collect()
    } else {
        instances.iter().map(|(n, p)| run_one(n, p, opts)).collect()
    };
    let sgm = if opts.parallel {
        None
    } else {
        Some(sgm(&charged_times(&rows, opts.time_limit), opts.shift, opts.time_limit)?)
    };
    Ok(BenchSummary { rows, shift: opts.shift, time_limit: opts.time_limit, sgm })
}

/// Writes the rows and, when present, a footer row `SGM(shift)` whose `seconds` is the SGM.
pub fn write_csv<W: Write>(summary: &BenchSummary, out: W) -> Result<()> {
    let io = |e: csv::Error| PdcsError::Io(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    for row in &summary.rows {
        w.serialize(row).map_err(io)?;
    }
    if let Some(s) = summary.sgm {
        let label = format!("SGM({})", summary.shift);
        let secs = format!("{s}");
        w.write_record([label.as_str(), "", secs.as_str(), "", "", "", "", ""]).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
