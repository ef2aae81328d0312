//! The restarted, reflected-Halpern adaptive PDHG loop and the fixed-step baseline.

pub mod pdhg;
pub mod restart;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{PdcsError, Result};
use crate::model::ConicProgram;
use crate::scalar::{norm_inf, Scalar};
use crate::scaling::{cone_scaling_slices, scale_program, ScalingInfo, ScalingOptions};
use crate::termination::{classify, ResidualEvaluator, Residuals, Status};

pub use pdhg::{adaptive_step, coupling, one_pdhg, Iterate, LineSearch, PdhgOperator, StepOutcome, Trial};
pub use restart::{
    primal_weight_update, reflected_halpern, reflection_parameter, restart_candidate,
    should_restart, Candidate, ReflectionController, RestartEpoch, RestartRule,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverParams<T> {
    pub tol: T,
    pub max_iters: u64,
    /// Seconds; `None` means no limit.
    pub time_limit: Option<f64>,
    /// Initial step size; defaults to `1/max|G̃ᵢⱼ|` (or `0.9/‖G‖₂` in vanilla mode).
    pub eta0: Option<T>,
    /// Initial primal weight; defaults to `‖c‖∞/‖h‖∞` of the unscaled data, clipped to `[1e-4, 1e4]`.
    pub omega0: Option<T>,
    pub reflection_beta_max: T,
    pub reflection_window: usize,
    pub restart: RestartRule<T>,
    pub line_search: LineSearch<T>,
    /// Smoothing of the primal weight update.
    pub primal_weight_theta: T,
    pub check_interval: u64,
    pub scaling: ScalingOptions,
    /// Fixed-step PDHG with no scaling, restarts, reflection or weight updates.
    pub vanilla: bool,
    /// Attach the returned point to the report.
    pub keep_solution: bool,
}

impl<T: Scalar> Default for SolverParams<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-6),
            max_iters: 1_000_000,
            time_limit: None,
            eta0: None,
            omega0: None,
            reflection_beta_max: T::one(),
            reflection_window: 40,
            restart: RestartRule::default(),
            line_search: LineSearch::default(),
            primal_weight_theta: T::lit(0.5),
            check_interval: 40,
            scaling: ScalingOptions::default(),
            vanilla: false,
            keep_solution: true,
        }
    }
}

impl<T: Scalar> SolverParams<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(PdcsError::InvalidParams(m.to_string()));
        let r = &self.restart;
        let ls = &self.line_search;
        if !(self.tol > T::zero()) {
            return bad("tol must be positive");
        }
        if !(T::zero() < r.beta_sufficient
            && r.beta_sufficient < r.beta_necessary
            && r.beta_necessary < T::one())
        {
            return bad("restart thresholds must satisfy 0 < sufficient < necessary < 1");
        }
        if !(r.artificial_fraction > T::zero()) {
            return bad("artificial restart fraction must be positive");
        }
        if self.check_interval == 0 {
            return bad("check_interval must be at least 1");
        }
        if !(self.reflection_beta_max >= T::zero() && self.reflection_beta_max <= T::one()) {
            return bad("reflection_beta_max must lie in [0, 1]");
        }
        if !(ls.shrink > T::zero() && ls.shrink < T::one() && ls.growth >= T::one()) {
            return bad("line search needs 0 < shrink < 1 <= growth");
        }
        if !(self.primal_weight_theta >= T::zero() && self.primal_weight_theta <= T::one()) {
            return bad("primal_weight_theta must lie in [0, 1]");
        }
        if let Some(e) = self.eta0 {
            if !(e > T::zero() && e.is_finite()) {
                return bad("eta0 must be positive and finite");
            }
        }
        if let Some(w) = self.omega0 {
            if !(w > T::zero() && w.is_finite()) {
                return bad("omega0 must be positive and finite");
            }
        }
        if let Some(t) = self.time_limit {
            if !(t > 0.0) {
                return bad("time_limit must be positive");
            }
        }
        Ok(())
    }
}

/// Snapshot published at every residual check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Progress<T> {
    pub iteration: u64,
    pub err_p: T,
    pub err_d: T,
    pub err_gap: T,
    pub eta: T,
    pub omega: T,
    pub beta: T,
    pub restarts: u64,
}

impl<T: Scalar> Progress<T> {
    /// Tab-separated progress line.
    pub fn to_line(&self) -> String {
        format!(
            "{}\t{:.6e}\t{:.6e}\t{:.6e}\t{:.6e}\t{:.6e}\t{}\t{}",
            self.iteration,
            self.err_p.to_f64_lossy(),
            self.err_d.to_f64_lossy(),
            self.err_gap.to_f64_lossy(),
            self.eta.to_f64_lossy(),
            self.omega.to_f64_lossy(),
            self.beta.to_f64_lossy(),
            self.restarts
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport<T> {
    pub status: Status,
    pub primal_obj: T,
    pub dual_obj: T,
    pub err_p: T,
    pub err_d: T,
    pub err_gap: T,
    pub iterations: u64,
    pub restarts: u64,
    /// All products with `G` or `Gᵀ`, residual checks included.
    pub spmv_count: u64,
    /// Products taken by the iteration itself (steps, trials, anchor refreshes).
    pub iteration_spmv: u64,
    /// Products taken by residual evaluation on the original program.
    pub residual_spmv: u64,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    pub projection_count: u64,
    pub wall_seconds: f64,
    /// Maximum residual of each restart anchor, in order, starting with the initial point.
    pub anchor_errors: Vec<T>,
    /// Maximum residual of the last anchor (the point the plain algorithm would return).
    pub last_anchor_error: T,
    /// Why the run stopped early, when it did.
    pub message: Option<String>,
    pub params: SolverParams<T>,
    pub best_x: Option<Vec<T>>,
    pub best_y: Option<Vec<T>>,
}

impl<T: Scalar> SolveReport<T> {
    pub fn residuals(&self) -> Residuals<T> {
        Residuals {
            err_p: self.err_p,
            err_d: self.err_d,
            err_gap: self.err_gap,
            primal_obj: self.primal_obj,
            dual_obj: self.dual_obj,
        }
    }

    pub fn max_error(&self) -> T {
        self.residuals().max_error()
    }
}

/// Best point seen so far, on the original scale.
struct Best<T> {
    res: Residuals<T>,
    x: Vec<T>,
    y: Vec<T>,
}

/// Residuals on the original program for points of the scaled one.
struct Checker<'a, T> {
    eval: ResidualEvaluator<'a, T>,
    program: &'a ConicProgram<T>,
    info: &'a ScalingInfo<T>,
    products: u64,
    best: Option<Best<T>>,
}

impl<'a, T: Scalar> Checker<'a, T> {
    fn new(program: &'a ConicProgram<T>, info: &'a ScalingInfo<T>) -> Result<Self> {
        Ok(Self { eval: ResidualEvaluator::new(program)?, program, info, products: 0, best: None })
    }

    fn check(&mut self, x_scaled: &[T], y_scaled: &[T]) -> Result<Residuals<T>> {
        let (x, y) = self.info.unscale_point(x_scaled, y_scaled);
        let gx = self.program.g.spmv(&x)?;
        let gty = self.program.g.spmv_t(&y)?;
        self.products += 2;
        let res = self.eval.evaluate(&x, &y, &gx, &gty)?;
        let err = res.max_error();
        let better = match &self.best {
            None => !err.is_nan(),
            Some(b) => err < b.res.max_error(),
        };
        if better || self.best.is_none() {
            self.best = Some(Best { res, x, y });
        }
        Ok(res)
    }
}

struct Clock {
    start: Instant,
    limit: Option<f64>,
}

impl Clock {
    fn expired(&self) -> bool {
        self.limit.is_some_and(|l| self.start.elapsed().as_secs_f64() >= l)
    }
}

pub fn solve<T: Scalar>(program: &ConicProgram<T>, params: &SolverParams<T>) -> Result<SolveReport<T>> {
    solve_with_observer(program, params, |_| {})
}

/// Runs the solver, calling `observer` at every residual check.
pub fn solve_with_observer<T: Scalar, F: FnMut(&Progress<T>)>(
    program: &ConicProgram<T>,
    params: &SolverParams<T>,
    observer: F,
) -> Result<SolveReport<T>> {
    params.validate()?;
    let issues = program.validate();
    if !issues.is_empty() {
        return Err(PdcsError::InvalidProgram(issues));
    }
    let clock = Clock { start: Instant::now(), limit: params.time_limit };
    if params.vanilla {
        run_vanilla(program, params, observer, clock)
    } else {
        run_pdcs(program, params, observer, clock)
    }
}

/// `P_{[l,u]}(0)` for the box part, zero on the cone part.
fn initial_x<T: Scalar>(p: &ConicProgram<T>) -> Vec<T> {
    let mut x = vec![T::zero(); p.n()];
    for ((xi, &lo), &hi) in x.iter_mut().zip(&p.l).zip(&p.u) {
        *xi = T::zero().max(lo).min(hi);
    }
    x
}

fn default_omega<T: Scalar>(p: &ConicProgram<T>) -> T {
    let (c, h) = (norm_inf(&p.c), norm_inf(&p.h));
    if c > T::zero() && h > T::zero() {
        (c / h).max(T::lit(1e-4)).min(T::lit(1e4))
    } else {
        T::one()
    }
}

struct Counters {
    iterations: u64,
    restarts: u64,
    accepted: u64,
    rejected: u64,
}

#[allow(clippy::too_many_arguments)]
fn finish<T: Scalar>(
    status: Status,
    message: Option<String>,
    checker: Checker<'_, T>,
    op_products: u64,
    projections: u64,
    counters: &Counters,
    anchor_errors: Vec<T>,
    params: &SolverParams<T>,
    clock: &Clock,
) -> SolveReport<T> {
    let best = checker.best.expect("initial point is always checked");
    let last_anchor_error = anchor_errors.last().copied().unwrap_or_else(T::nan);
    SolveReport {
        status,
        primal_obj: best.res.primal_obj,
        dual_obj: best.res.dual_obj,
        err_p: best.res.err_p,
        err_d: best.res.err_d,
        err_gap: best.res.err_gap,
        iterations: counters.iterations,
        restarts: counters.restarts,
        spmv_count: op_products + checker.products,
        iteration_spmv: op_products,
        residual_spmv: checker.products,
        accepted_steps: counters.accepted,
        rejected_steps: counters.rejected,
        projection_count: projections,
        wall_seconds: clock.start.elapsed().as_secs_f64(),
        anchor_errors,
        last_anchor_error,
        message,
        params: params.clone(),
        best_x: params.keep_solution.then_some(best.x),
        best_y: params.keep_solution.then_some(best.y),
    }
}

fn run_pdcs<T: Scalar, F: FnMut(&Progress<T>)>(
    original: &ConicProgram<T>,
    params: &SolverParams<T>,
    mut observer: F,
    clock: Clock,
) -> Result<SolveReport<T>> {
    let (scaled, info) = scale_program(original, &params.scaling)?;
    let slices = cone_scaling_slices(&info, &scaled)?;
    let mut op = PdhgOperator::new(&scaled, &slices)?;
    let mut checker = Checker::new(original, &info)?;
    let mut counters = Counters { iterations: 0, restarts: 0, accepted: 0, rejected: 0 };

    let max_entry = scaled.g.norms().row_inf.iter().fold(T::zero(), |m, &v| m.max(v));
    let eta0 = params.eta0.unwrap_or(if max_entry > T::zero() { T::one() / max_entry } else { T::one() });
    let mut eta = eta0;
    // balance taken from the data as given, before equilibration
    let mut omega = params.omega0.unwrap_or_else(|| default_omega(original));
    let mut reflection = ReflectionController::new(params.reflection_beta_max, params.reflection_window);

    let mut z = op.refresh(initial_x(&scaled), vec![T::zero(); scaled.m()], T::zero());
    let first = checker.check(&z.x, &z.y)?;
    let mut anchor_errors = vec![first.max_error()];
    let mut epoch = RestartEpoch::new(z.clone(), first.max_error());

    let mut status = if classify(&first, params.tol) == Status::Optimal { Some(Status::Optimal) } else { None };
    let mut message = None;

    while status.is_none() {
        if counters.iterations >= params.max_iters {
            status = Some(Status::IterationLimit);
            break;
        }
        if clock.expired() {
            status = Some(Status::TimeLimit);
            break;
        }
        let step = match op.adaptive_step(&z, omega, eta, eta0, &params.line_search) {
            Ok(s) => s,
            Err(PdcsError::Numerical(msg)) => {
                status = Some(Status::NumericalError);
                message = Some(msg);
                break;
            }
            Err(e) => return Err(e),
        };
        counters.accepted += 1;
        counters.rejected += step.rejections as u64;
        eta = step.eta_next;
        let z_hat = step.z_hat;

        let fixed_point = z_hat.dist_sq_omega(&z, omega).sqrt();
        let beta = reflection.push(fixed_point);
        let next = reflected_halpern(&z_hat, &z, &epoch.anchor, beta, epoch.k);
        epoch.update_average(&z_hat, step.eta);
        epoch.k += 1;
        counters.iterations += 1;
        z = next;

        if counters.iterations % params.check_interval != 0 {
            continue;
        }
        let avg = epoch.average().expect("at least one step taken");
        let cur_res = checker.check(&z_hat.x, &z_hat.y)?;
        let avg_res = checker.check(&avg.x, &avg.y)?;
        let (cand, cand_res) = match restart_candidate(&cur_res, &avg_res) {
            Candidate::Current => (z_hat, cur_res),
            Candidate::Average => (avg, avg_res),
        };
        let best = checker.best.as_ref().expect("checked").res;
        observer(&Progress {
            iteration: counters.iterations,
            err_p: best.err_p,
            err_d: best.err_d,
            err_gap: best.err_gap,
            eta,
            omega,
            beta,
            restarts: counters.restarts,
        });
        if classify(&best, params.tol) == Status::Optimal {
            status = Some(Status::Optimal);
            break;
        }
        let cand_err = cand_res.max_error();
        if cand_err.is_nan() {
            status = Some(Status::NumericalError);
            message = Some("NaN in residuals".into());
            break;
        }
        // an artificial restart may not move the anchor to a worse point
        if should_restart(&epoch, cand_err, counters.iterations, &params.restart)
            && cand_err <= epoch.anchor_error
        {
            let anchor = op.refresh(cand.x, cand.y, T::zero());
            omega = primal_weight_update(&anchor, &epoch.anchor, omega, params.primal_weight_theta);
            anchor_errors.push(cand_err);
            epoch = RestartEpoch::new(anchor.clone(), cand_err);
            z = anchor;
            reflection.reset();
            counters.restarts += 1;
        } else {
            epoch.last_error = Some(cand_err);
        }
    }

    let op_products = op.spmv_count() + op.spmv_t_count();
    let projections = op.projection_count();
    Ok(finish(
        status.expect("loop exits with a status"),
        message,
        checker,
        op_products,
        projections,
        &counters,
        anchor_errors,
        params,
        &clock,
    ))
}

fn run_vanilla<T: Scalar, F: FnMut(&Progress<T>)>(
    program: &ConicProgram<T>,
    params: &SolverParams<T>,
    mut observer: F,
    clock: Clock,
) -> Result<SolveReport<T>> {
    let info = ScalingInfo::identity(program.m(), program.n());
    let slices = cone_scaling_slices(&info, program)?;
    let mut op = PdhgOperator::new(program, &slices)?;
    let mut checker = Checker::new(program, &info)?;
    let mut counters = Counters { iterations: 0, restarts: 0, accepted: 0, rejected: 0 };

    let norm = program.g.estimate_spectral_norm(200, T::lit(1e-6));
    let step = params
        .eta0
        .unwrap_or(if norm > T::zero() { T::lit(0.9) / norm } else { T::one() });

    let mut z = op.refresh(initial_x(program), vec![T::zero(); program.m()], T::zero());
    let first = checker.check(&z.x, &z.y)?;
    let anchor_errors = vec![first.max_error()];
    let mut status = if classify(&first, params.tol) == Status::Optimal { Some(Status::Optimal) } else { None };
    let mut message = None;

    while status.is_none() {
        if counters.iterations >= params.max_iters {
            status = Some(Status::IterationLimit);
            break;
        }
        if clock.expired() {
            status = Some(Status::TimeLimit);
            break;
        }
        z = op.one_pdhg(&z, step, step)?;
        counters.iterations += 1;
        counters.accepted += 1;
        if counters.iterations % params.check_interval != 0 {
            continue;
        }
        let res = checker.check(&z.x, &z.y)?;
        observer(&Progress {
            iteration: counters.iterations,
            err_p: res.err_p,
            err_d: res.err_d,
            err_gap: res.err_gap,
            eta: step,
            omega: T::one(),
            beta: T::zero(),
            restarts: 0,
        });
        if res.max_error().is_nan() {
            status = Some(Status::NumericalError);
            message = Some("NaN in residuals".into());
        } else if classify(&res, params.tol) == Status::Optimal {
            status = Some(Status::Optimal);
        }
    }

    let op_products = op.spmv_count() + op.spmv_t_count();
    let projections = op.projection_count();
    Ok(finish(
        status.expect("loop exits with a status"),
        message,
        checker,
        op_products,
        projections,
        &counters,
        anchor_errors,
        params,
        &clock,
    ))
}
