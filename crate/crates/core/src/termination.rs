//! Relative KKT residuals, termination status, and the shifted geometric mean.

use serde::{Deserialize, Serialize};

use crate::cones::{project_lambda_set, ProductProjector};
use crate::error::{check_len, PdcsError, Result};
use crate::model::ConicProgram;
use crate::scalar::{norm_inf, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals<T> {
    pub err_p: T,
    pub err_d: T,
    pub err_gap: T,
    pub primal_obj: T,
    pub dual_obj: T,
}

impl<T: Scalar> Residuals<T> {
    /// Largest of the three relative errors.
    pub fn max_error(&self) -> T {
        self.err_p.max(self.err_d).max(self.err_gap)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Optimal,
    IterationLimit,
    TimeLimit,
    NumericalError,
    /// Residuals above tolerance and no limit reached yet.
    Unsolved,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "OPTIMAL",
            Status::IterationLimit => "ITERATION_LIMIT",
            Status::TimeLimit => "TIME_LIMIT",
            Status::NumericalError => "NUMERICAL_ERROR",
            Status::Unsolved => "UNSOLVED",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `yᵀh + Σ l_i·max(λ1_i, 0) − Σ u_i·max(−λ1_i, 0)` evaluated at the projection of `λ1` onto `Λ`,
/// so infinite bounds never contribute. The sign violation itself is charged to `err_d`.
pub fn dual_objective<T: Scalar>(program: &ConicProgram<T>, y: &[T], lambda1: &[T]) -> T {
    let mut obj = crate::scalar::dot(y, &program.h);
    let proj = project_lambda_set(lambda1, &program.l, &program.u);
    for ((&lam, &lo), &hi) in proj.iter().zip(&program.l).zip(&program.u) {
        if lam > T::zero() {
            obj += lo * lam;
        } else if lam < T::zero() {
            obj += hi * lam;
        }
    }
    obj
}

/// Relative residuals of `(x, y)` on `program`. Costs one product with `G` and one with `Gᵀ`.
pub fn compute_residuals<T: Scalar>(
    program: &ConicProgram<T>,
    x: &[T],
    y: &[T],
) -> Result<Residuals<T>> {
    check_len("residual x", program.n(), x.len())?;
    check_len("residual y", program.m(), y.len())?;
    let gx = program.g.spmv(x)?;
    let gty = program.g.spmv_t(y)?;
    let eval = ResidualEvaluator::new(program)?;
    eval.evaluate(x, y, &gx, &gty)
}

/// Reusable residual evaluation with the projectors built once.
#[derive(Debug, Clone)]
pub struct ResidualEvaluator<'a, T> {
    program: &'a ConicProgram<T>,
    constraint_proj: ProductProjector<T>,
    primal_dual_proj: ProductProjector<T>,
    h_inf: T,
    c_inf: T,
}

impl<'a, T: Scalar> ResidualEvaluator<'a, T> {
    pub fn new(program: &'a ConicProgram<T>) -> Result<Self> {
        Ok(Self {
            program,
            constraint_proj: ProductProjector::new(&program.dual_cones, None, false)?,
            primal_dual_proj: ProductProjector::new(&program.primal_cones, None, true)?,
            h_inf: norm_inf(&program.h),
            c_inf: norm_inf(&program.c),
        })
    }

    /// Residuals given precomputed `Gx` and `Gᵀy`.
    pub fn evaluate(&self, x: &[T], y: &[T], gx: &[T], gty: &[T]) -> Result<Residuals<T>> {
        let p = self.program;
        let n1 = p.n1();
        let one = T::one();

        let slack: Vec<T> = gx.iter().zip(&p.h).map(|(&a, &b)| a - b).collect();
        let mut proj = slack.clone();
        self.constraint_proj.project_in_place(&mut proj)?;
        let num_p = slack
            .iter()
            .zip(&proj)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()));
        let den_p = one + self.h_inf.max(norm_inf(gx)).max(norm_inf(&proj));
        let err_p = num_p / den_p;

        let (lambda1, lambda2) = p.dual_slack_from_gty(gty);
        let l1p = project_lambda_set(&lambda1, &p.l, &p.u);
        let mut num_d = lambda1
            .iter()
            .zip(&l1p)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()));
        let mut l2p = lambda2.clone();
        self.primal_dual_proj.project_in_place(&mut l2p)?;
        num_d = lambda2
            .iter()
            .zip(&l2p)
            .fold(num_d, |m, (&a, &b)| m.max((a - b).abs()));
        let den_d = one + self.c_inf.max(norm_inf(gty));
        let err_d = num_d / den_d;

        let primal_obj = p.objective(x);
        let dual_obj = dual_objective(p, y, &lambda1[..n1]);
        let err_gap = (primal_obj - dual_obj).abs() / (one + primal_obj.abs().max(dual_obj.abs()));
        Ok(Residuals { err_p, err_d, err_gap, primal_obj, dual_obj })
    }
}

/// `Optimal` iff every residual is at most `tol`.
pub fn classify<T: Scalar>(res: &Residuals<T>, tol: T) -> Status {
    if res.err_p <= tol && res.err_d <= tol && res.err_gap <= tol {
        Status::Optimal
    } else {
        Status::Unsolved
    }
}

/// Shifted geometric mean `(∏(t_i + k))^{1/N} − k`, with each time capped at `time_cap`.
pub fn sgm(times: &[f64], k: f64, time_cap: f64) -> Result<f64> {
    if times.is_empty() {
        return Err(PdcsError::InvalidParams("shifted geometric mean of an empty list".into()));
    }
    let shifted: Vec<f64> = times
        .iter()
        .map(|&t| if t.is_finite() { t.min(time_cap) } else { time_cap } + k)
        .collect();
    // logs taken relative to the largest term keep constant lists exact
    let top = shifted.iter().cloned().fold(f64::MIN, f64::max);
    if top <= 0.0 {
        return Ok(0.0);
    }
    let mean_log = shifted.iter().map(|&s| (s / top).ln()).sum::<f64>() / shifted.len() as f64;
    Ok(top * mean_log.exp() - k)
}
