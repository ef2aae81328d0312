//! The PDHG map with cached matrix products and the adaptive step-size line search.

use serde::{Deserialize, Serialize};

use crate::cones::project_box_in_place;
use crate::error::{check_len, PdcsError, Result};
use crate::linalg::CountingOperator;
use crate::model::ConicProgram;
use crate::scaling::ConeScalingSlices;
use crate::scalar::{dot, Scalar};

/// Primal-dual point with `Gx` and `Gᵀy` cached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iterate<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub gx: Vec<T>,
    pub gty: Vec<T>,
    /// Step size that produced this point (zero for points not produced by a step).
    pub eta: T,
}

impl<T: Scalar> Iterate<T> {
    /// `‖(x, y)‖²_ω = ω‖x‖² + ‖y‖²/ω` of the difference `self − other`.
    pub fn dist_sq_omega(&self, other: &Self, omega: T) -> T {
        let dx: T = self.x.iter().zip(&other.x).map(|(&a, &b)| (a - b) * (a - b)).sum();
        let dy: T = self.y.iter().zip(&other.y).map(|(&a, &b)| (a - b) * (a - b)).sum();
        omega * dx + dy / omega
    }
}

/// Outcome of a PDHG trial before its `Gᵀŷ` product is formed.
#[derive(Debug, Clone)]
pub struct Trial<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub gx: Vec<T>,
}

/// Result of one adaptive step.
#[derive(Debug, Clone)]
pub struct StepOutcome<T> {
    pub z_hat: Iterate<T>,
    /// Step size that was accepted.
    pub eta: T,
    /// Proposal for the next step.
    pub eta_next: T,
    pub rejections: usize,
}

/// Line-search settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSearch<T> {
    pub shrink: T,
    pub growth: T,
    pub max_rejects: usize,
    /// Failure threshold relative to the initial step size.
    pub min_ratio: T,
}

impl<T: Scalar> Default for LineSearch<T> {
    fn default() -> Self {
        Self { shrink: T::lit(0.5), growth: T::lit(1.05), max_rejects: 60, min_ratio: T::lit(1e-12) }
    }
}

/// PDHG operator for one (scaled) program; counts every product with `G` and `Gᵀ`.
pub struct PdhgOperator<'a, T> {
    program: &'a ConicProgram<T>,
    slices: &'a ConeScalingSlices<T>,
    op: CountingOperator<'a, T>,
    projections: u64,
}

impl<'a, T: Scalar> PdhgOperator<'a, T> {
    pub fn new(program: &'a ConicProgram<T>, slices: &'a ConeScalingSlices<T>) -> Result<Self> {
        check_len("primal cone slices", program.n2(), slices.primal.dim())?;
        check_len("dual cone slices", program.m(), slices.dual.dim())?;
        Ok(Self { program, slices, op: CountingOperator::new(&program.g), projections: 0 })
    }

    pub fn program(&self) -> &'a ConicProgram<T> {
        self.program
    }

    pub fn spmv_count(&self) -> u64 {
        self.op.spmv_count()
    }

    pub fn spmv_t_count(&self) -> u64 {
        self.op.spmv_t_count()
    }

    pub fn projection_count(&self) -> u64 {
        self.projections
    }

    /// Builds an iterate with freshly computed caches (one product each way).
    pub fn refresh(&mut self, x: Vec<T>, y: Vec<T>, eta: T) -> Iterate<T> {
        let mut gx = vec![T::zero(); self.program.m()];
        let mut gty = vec![T::zero(); self.program.n()];
        self.op.apply(&x, &mut gx);
        self.op.apply_t(&y, &mut gty);
        Iterate { x, y, gx, gty, eta }
    }

    /// Projects `x` onto `[l, u] × K_p` (scaled) in place.
    pub fn project_primal(&mut self, x: &mut [T]) -> Result<()> {
        let p = self.program;
        let n1 = p.n1();
        project_box_in_place(&mut x[..n1], &p.l, &p.u);
        self.slices.primal.project_in_place(&mut x[n1..])?;
        self.projections += 1;
        Ok(())
    }

    pub fn project_dual(&mut self, y: &mut [T]) -> Result<()> {
        self.slices.dual.project_in_place(y)?;
        self.projections += 1;
        Ok(())
    }

    /// `x̂` and `ŷ` of one PDHG step, with `Gx̂`; costs one product with `G`.
    pub fn trial(&mut self, z: &Iterate<T>, tau: T, sigma: T) -> Result<Trial<T>> {
        let p = self.program;
        let mut x: Vec<T> = z
            .x
            .iter()
            .zip(&p.c)
            .zip(&z.gty)
            .map(|((&x, &c), &g)| x - tau * (c - g))
            .collect();
        self.project_primal(&mut x)?;
        let mut gx = vec![T::zero(); p.m()];
        self.op.apply(&x, &mut gx);
        let two = T::lit(2.0);
        let mut y: Vec<T> = z
            .y
            .iter()
            .zip(&p.h)
            .zip(gx.iter().zip(&z.gx))
            .map(|((&y, &h), (&gxh, &gx0))| y + sigma * (h - (two * gxh - gx0)))
            .collect();
        self.project_dual(&mut y)?;
        Ok(Trial { x, y, gx })
    }

    /// Adds the `Gᵀŷ` cache to an accepted trial.
    pub fn complete(&mut self, trial: Trial<T>, eta: T) -> Iterate<T> {
        let mut gty = vec![T::zero(); self.program.n()];
        self.op.apply_t(&trial.y, &mut gty);
        Iterate { x: trial.x, y: trial.y, gx: trial.gx, gty, eta }
    }

    pub fn one_pdhg(&mut self, z: &Iterate<T>, tau: T, sigma: T) -> Result<Iterate<T>> {
        let t = self.trial(z, tau, sigma)?;
        Ok(self.complete(t, z.eta))
    }

    /// Largest step the acceptance test allows for the move `z → (x̂, ŷ)`; infinite when the
    /// coupling term vanishes.
    pub fn step_bound(z: &Iterate<T>, trial: &Trial<T>, omega: T) -> T {
        let dx2: T = trial.x.iter().zip(&z.x).map(|(&a, &b)| (a - b) * (a - b)).sum();
        let dy2: T = trial.y.iter().zip(&z.y).map(|(&a, &b)| (a - b) * (a - b)).sum();
        let coupling: T = trial
            .y
            .iter()
            .zip(&z.y)
            .zip(trial.gx.iter().zip(&z.gx))
            .map(|((&ya, &yb), (&ga, &gb))| (ya - yb) * (ga - gb))
            .sum::<T>()
            .abs();
        if coupling == T::zero() {
            return T::infinity();
        }
        (omega * dx2 + dy2 / omega) / (T::lit(2.0) * coupling)
    }

    /// Line search: try `η`, shrink on rejection, accept once `η` is within the step bound.
    pub fn adaptive_step(
        &mut self,
        z: &Iterate<T>,
        omega: T,
        eta: T,
        eta0: T,
        ls: &LineSearch<T>,
    ) -> Result<StepOutcome<T>> {
        let mut eta = eta;
        let mut rejections = 0;
        loop {
            if !(eta >= ls.min_ratio * eta0) || !eta.is_finite() {
                return Err(PdcsError::Numerical(format!(
                    "step size {} fell below {} times the initial step",
                    eta.to_f64_lossy(),
                    ls.min_ratio.to_f64_lossy()
                )));
            }
            let trial = self.trial(z, eta / omega, eta * omega)?;
            let bound = Self::step_bound(z, &trial, omega);
            if bound.is_nan() {
                return Err(PdcsError::Numerical("NaN in step-size test".into()));
            }
            if eta <= bound {
                let eta_next = (ls.growth * eta).min(bound);
                let z_hat = self.complete(trial, eta);
                return Ok(StepOutcome { z_hat, eta, eta_next, rejections });
            }
            rejections += 1;
            if rejections > ls.max_rejects {
                return Err(PdcsError::Numerical(format!(
                    "line search rejected {rejections} step sizes"
                )));
            }
            eta = eta * ls.shrink;
        }
    }
}

/// One PDHG step on a scaled program; see [`PdhgOperator::one_pdhg`].
pub fn one_pdhg<T: Scalar>(
    z: &Iterate<T>,
    tau: T,
    sigma: T,
    program: &ConicProgram<T>,
    slices: &ConeScalingSlices<T>,
) -> Result<Iterate<T>> {
    if !(tau > T::zero() && sigma > T::zero()) {
        return Err(PdcsError::InvalidParams("step sizes must be positive".into()));
    }
    PdhgOperator::new(program, slices)?.one_pdhg(z, tau, sigma)
}

/// Adaptive step on a scaled program with default line-search settings.
pub fn adaptive_step<T: Scalar>(
    z: &Iterate<T>,
    omega: T,
    eta: T,
    program: &ConicProgram<T>,
    slices: &ConeScalingSlices<T>,
) -> Result<StepOutcome<T>> {
    if !(omega > T::zero() && eta > T::zero()) {
        return Err(PdcsError::InvalidParams("eta and omega must be positive".into()));
    }
    PdhgOperator::new(program, slices)?.adaptive_step(z, omega, eta, eta, &LineSearch::default())
}

/// `⟨Δy, GΔx⟩` helper used by tests and diagnostics.
pub fn coupling<T: Scalar>(z: &Iterate<T>, w: &Iterate<T>) -> T {
    let dy: Vec<T> = w.y.iter().zip(&z.y).map(|(&a, &b)| a - b).collect();
    let dgx: Vec<T> = w.gx.iter().zip(&z.gx).map(|(&a, &b)| a - b).collect();
    dot(&dy, &dgx)
}
