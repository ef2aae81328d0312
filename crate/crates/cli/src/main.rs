use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use pdcs::bench::{load_dir, run_bench, write_csv, BenchOptions};
use pdcs::generators::{gen_fisher, gen_lasso, gen_mpo, FisherSpec, LassoSpec, MpoSpec};
use pdcs::io::{read_instance, report_to_json, write_instance};
use pdcs::scaling::ScalingOptions;
use pdcs::{solve_with_observer, SolverParamsF64, Status};

#[derive(Parser)]
#[command(name = "pdcs", version, about = "First-order solver for conic programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance (.json or .cbf).
    Solve(SolveArgs),
    /// Write a synthetic instance.
    Generate {
        #[command(subcommand)]
        family: Family,
    },
    /// Solve every instance in a directory and write a CSV table.
    Bench(BenchArgs),
}

#[derive(clap::Args)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    max_iters: Option<u64>,
    /// Fixed-step PDHG without scaling, restarts or reflection.
    #[arg(long)]
    vanilla_pdhg: bool,
    #[arg(long)]
    no_scaling: bool,
    #[arg(long, default_value_t = 10)]
    ruiz_iters: usize,
    #[arg(long, default_value_t = 40)]
    check_interval: u64,
    /// Report file (JSON).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print progress lines to stderr.
    #[arg(long)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Family {
    /// Linear Fisher market with log utilities.
    Fisher {
        #[arg(long)]
        seed: u64,
        /// Buyers.
        #[arg(long)]
        m: usize,
        /// Goods.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.2)]
        sparsity: f64,
        #[arg(long)]
        out: PathBuf,
    },
    Lasso {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1e-4)]
        sparsity: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Multi-period portfolio optimization.
    Mpo {
        #[arg(long)]
        seed: u64,
        /// Periods.
        #[arg(long = "T")]
        periods: usize,
        /// Assets.
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(clap::Args)]
struct BenchArgs {
    #[arg(long)]
    dir: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Per-instance limit in seconds.
    #[arg(long, default_value_t = 3600.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 10.0)]
    sgm_shift: f64,
    #[arg(long)]
    out: PathBuf,
    /// Solve concurrently; the SGM footer is omitted.
    #[arg(long)]
    parallel: bool,
}

fn main() -> ExitCode {
    // usage errors exit 1; code 2 is reserved for limit statuses
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Generate { family } => run_generate(family).map(|_| ExitCode::SUCCESS),
        Command::Bench(args) => run_bench_cmd(args).map(|_| ExitCode::SUCCESS),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run_solve(args: SolveArgs) -> Result<ExitCode> {
    let program = read_instance(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let mut params = SolverParamsF64 {
        tol: args.tol,
        time_limit: args.time_limit,
        vanilla: args.vanilla_pdhg,
        check_interval: args.check_interval,
        scaling: if args.no_scaling {
            ScalingOptions::none()
        } else {
            ScalingOptions { ruiz_iters: args.ruiz_iters, ..ScalingOptions::default() }
        },
        ..Default::default()
    };
    if let Some(k) = args.max_iters {
        params.max_iters = k;
    }
    if args.verbose {
        eprintln!("iter\terr_p\terr_d\terr_gap\teta\tomega\tbeta\trestarts");
    }
    let verbose = args.verbose;
    let report = solve_with_observer(&program, &params, |p| {
        if verbose {
            eprintln!("{}", p.to_line());
        }
    })?;
    println!(
        "status {}  iterations {}  restarts {}  spmv {}  seconds {:.3}",
        report.status, report.iterations, report.restarts, report.spmv_count, report.wall_seconds
    );
    println!(
        "primal {:.10e}  dual {:.10e}  err_p {:.3e}  err_d {:.3e}  err_gap {:.3e}",
        report.primal_obj, report.dual_obj, report.err_p, report.err_d, report.err_gap
    );
    if let Some(msg) = &report.message {
        println!("{msg}");
    }
    if let Some(path) = &args.out {
        std::fs::write(path, report_to_json(&report)?).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(match report.status {
        Status::Optimal => ExitCode::SUCCESS,
        Status::NumericalError => ExitCode::from(3),
        Status::IterationLimit | Status::TimeLimit | Status::Unsolved => ExitCode::from(2),
    })
}

fn run_generate(family: Family) -> Result<()> {
    let (generated, out) = match family {
        Family::Fisher { seed, m, n, sparsity, out } => {
            (gen_fisher(&FisherSpec { sparsity, ..FisherSpec::new(m, n, seed) })?, out)
        }
        Family::Lasso { seed, m, n, sparsity, out } => {
            (gen_lasso(&LassoSpec { sparsity, ..LassoSpec::new(m, n, seed) })?, out)
        }
        Family::Mpo { seed, periods, n, out } => (gen_mpo(&MpoSpec::new(periods, n, seed))?, out),
    };
    write_instance(&out, &generated.program).with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}

fn run_bench_cmd(args: BenchArgs) -> Result<()> {
    let instances = load_dir(&args.dir).with_context(|| format!("listing {}", args.dir.display()))?;
    let opts = BenchOptions {
        params: SolverParamsF64 { tol: args.tol, keep_solution: false, ..Default::default() },
        time_limit: args.time_limit,
        shift: args.sgm_shift,
        parallel: args.parallel,
    };
    let summary = run_bench(&instances, &opts)?;
    let file = File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_csv(&summary, BufWriter::new(file))?;
    let solved = summary.rows.iter().filter(|r| r.solved()).count();
    match summary.sgm {
        Some(s) => println!("solved {solved}/{}  SGM({}) {s:.4}", summary.rows.len(), summary.shift),
        None => println!("solved {solved}/{}", summary.rows.len()),
    }
    Ok(())
}
