//! Reflection control, Halpern averaging, restart epochs and the primal weight.

use serde::{Deserialize, Serialize};

use super::pdhg::Iterate;
use crate::scalar::Scalar;
use crate::termination::Residuals;

/// Halves β whenever the fixed-point residual grows across a full window.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionController<T> {
    beta_max: T,
    beta: T,
    window: usize,
    history: Vec<T>,
}

impl<T: Scalar> ReflectionController<T> {
    pub fn new(beta_max: T, window: usize) -> Self {
        Self { beta_max, beta: beta_max, window: window.max(2), history: Vec::new() }
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn push(&mut self, residual: T) -> T {
        self.history.push(residual);
        if self.history.len() >= self.window {
            if self.history[self.history.len() - 1] > self.history[0] {
                self.beta = self.beta / T::lit(2.0);
            }
            self.history.clear();
        }
        self.beta
    }

    pub fn reset(&mut self) {
        self.beta = self.beta_max;
        self.history.clear();
    }
}

/// β after replaying a residual history through a fresh controller.
pub fn reflection_parameter<T: Scalar>(history: &[T], beta_max: T, window: usize) -> T {
    let mut c = ReflectionController::new(beta_max, window);
    for &r in history {
        c.push(r);
    }
    c.beta()
}

fn combine<T: Scalar>(a: &[T], b: &[T], c: &[T], wa: T, wb: T, wc: T) -> Vec<T> {
    a.iter()
        .zip(b)
        .zip(c)
        .map(|((&a, &b), &c)| wa * a + wb * b + wc * c)
        .collect()
}

/// `((k+1)/(k+2))·((1+β)ẑ − βz) + anchor/(k+2)`, caches combined by linearity.
pub fn reflected_halpern<T: Scalar>(
    z_hat: &Iterate<T>,
    z: &Iterate<T>,
    anchor: &Iterate<T>,
    beta: T,
    k: u64,
) -> Iterate<T> {
    let kf = T::from_u64(k).unwrap_or_else(T::max_value);
    let two = T::lit(2.0);
    let w = (kf + T::one()) / (kf + two);
    let wa = T::one() / (kf + two);
    let wh = w * (T::one() + beta);
    let wz = -w * beta;
    Iterate {
        x: combine(&z_hat.x, &z.x, &anchor.x, wh, wz, wa),
        y: combine(&z_hat.y, &z.y, &anchor.y, wh, wz, wa),
        gx: combine(&z_hat.gx, &z.gx, &anchor.gx, wh, wz, wa),
        gty: combine(&z_hat.gty, &z.gty, &anchor.gty, wh, wz, wa),
        eta: z_hat.eta,
    }
}

/// State of one restart epoch: anchor, step-weighted running sums, and error bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartEpoch<T> {
    pub anchor: Iterate<T>,
    pub anchor_error: T,
    pub k: u64,
    x_sum: Vec<T>,
    y_sum: Vec<T>,
    gx_sum: Vec<T>,
    gty_sum: Vec<T>,
    pub weight: T,
    /// Candidate error at the previous check inside this epoch.
    pub last_error: Option<T>,
}

impl<T: Scalar> RestartEpoch<T> {
    pub fn new(anchor: Iterate<T>, anchor_error: T) -> Self {
        let (n, m) = (anchor.x.len(), anchor.y.len());
        Self {
            anchor,
            anchor_error,
            k: 0,
            x_sum: vec![T::zero(); n],
            y_sum: vec![T::zero(); m],
            gx_sum: vec![T::zero(); m],
            gty_sum: vec![T::zero(); n],
            weight: T::zero(),
            last_error: None,
        }
    }

    /// Adds `eta·z` to the running sums.
    pub fn update_average(&mut self, z: &Iterate<T>, eta: T) {
        let acc = |s: &mut Vec<T>, v: &[T]| s.iter_mut().zip(v).for_each(|(a, &b)| *a += eta * b);
        acc(&mut self.x_sum, &z.x);
        acc(&mut self.y_sum, &z.y);
        acc(&mut self.gx_sum, &z.gx);
        acc(&mut self.gty_sum, &z.gty);
        self.weight += eta;
    }

    /// `Σηᵢzᵢ / Σηᵢ`, or `None` before the first update.
    pub fn average(&self) -> Option<Iterate<T>> {
        if self.weight <= T::zero() {
            return None;
        }
        let w = self.weight;
        let div = |s: &[T]| s.iter().map(|&v| v / w).collect::<Vec<T>>();
        Some(Iterate {
            x: div(&self.x_sum),
            y: div(&self.y_sum),
            gx: div(&self.gx_sum),
            gty: div(&self.gty_sum),
            eta: T::zero(),
        })
    }
}

/// Which point a restart would use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Candidate {
    Current,
    Average,
}

/// Smaller maximum residual wins; ties go to the average.
pub fn restart_candidate<T: Scalar>(current: &Residuals<T>, average: &Residuals<T>) -> Candidate {
    if current.max_error() < average.max_error() {
        Candidate::Current
    } else {
        Candidate::Average
    }
}

/// Thresholds for the restart test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestartRule<T> {
    pub beta_sufficient: T,
    pub beta_necessary: T,
    pub artificial_fraction: T,
}

impl<T: Scalar> Default for RestartRule<T> {
    fn default() -> Self {
        Self {
            beta_sufficient: T::lit(0.2),
            beta_necessary: T::lit(0.8),
            artificial_fraction: T::lit(0.36),
        }
    }
}

/// Sufficient decay, necessary decay with a stall, or an epoch that has run too long.
pub fn should_restart<T: Scalar>(
    epoch: &RestartEpoch<T>,
    candidate_error: T,
    total_iterations: u64,
    rule: &RestartRule<T>,
) -> bool {
    let a = epoch.anchor_error;
    if candidate_error <= rule.beta_sufficient * a {
        return true;
    }
    let stalled = epoch.last_error.is_some_and(|prev| candidate_error > prev);
    if candidate_error <= rule.beta_necessary * a && stalled {
        return true;
    }
    let k = T::from_u64(epoch.k).unwrap_or_else(T::max_value);
    let total = T::from_u64(total_iterations).unwrap_or_else(T::max_value);
    epoch.k > 0 && k >= rule.artificial_fraction * total
}

/// Geometric smoothing of `ω` towards `‖Δy‖/‖Δx‖` between consecutive anchors.
pub fn primal_weight_update<T: Scalar>(
    new_anchor: &Iterate<T>,
    old_anchor: &Iterate<T>,
    omega: T,
    theta: T,
) -> T {
    let dx = diff_norm(&new_anchor.x, &old_anchor.x);
    let dy = diff_norm(&new_anchor.y, &old_anchor.y);
    let guard = T::lit(1e-10);
    if dx > guard && dy > guard {
        (theta * (dy / dx).ln() + (T::one() - theta) * omega.ln()).exp()
    } else {
        omega
    }
}

fn diff_norm<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>().sqrt()
}
