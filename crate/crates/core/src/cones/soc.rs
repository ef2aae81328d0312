//! Second-order cone projections, plain and diagonally rescaled.

use crate::error::{PdcsError, Result};
use crate::scalar::Scalar;

/// Which branch of the rescaled projection produced the answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SocCase {
    /// `-v` lies in the dual cone; projection is the apex.
    Polar,
    /// Already inside the cone.
    Inside,
    /// Head coordinate exactly zero; closed form.
    ZeroHead,
    /// Boundary point found by bisection on the multiplier.
    Root,
}

/// Projects `(v[0], v[1..])` onto `{(t, x) : ‖x‖ ≤ t}` in place.
pub fn project_soc_in_place<T: Scalar>(v: &mut [T]) {
    let Some((t, x)) = v.split_first_mut() else {
        return;
    };
    let nx = crate::scalar::norm2(x);
    if nx <= *t {
        return;
    }
    if nx <= -*t {
        *t = T::zero();
        x.iter_mut().for_each(|xi| *xi = T::zero());
        return;
    }
    let alpha = (*t + nx) / T::lit(2.0);
    let f = alpha / nx;
    *t = alpha;
    x.iter_mut().for_each(|xi| *xi *= f);
}

/// `(x, y, z) ↦ ((x+y)/√2, (x−y)/√2, z)`; its own inverse.
pub fn rotate_rsoc<T: Scalar>(v: &mut [T]) {
    if v.len() < 2 {
        return;
    }
    let h = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let (a, b) = (v[0], v[1]);
    v[0] = (a + b) * h;
    v[1] = (a - b) * h;
}

/// Projects onto `{(x, y, z) : 2xy ≥ ‖z‖², x, y ≥ 0}` in place.
pub fn project_rsoc_in_place<T: Scalar>(v: &mut [T]) {
    rotate_rsoc(v);
    project_soc_in_place(v);
    rotate_rsoc(v);
}

/// The root-finding problem behind the rescaled SOC projection.
///
/// The target set is `{(s, y) : ‖D̂⁻¹y‖ ≤ s}` where `dhat[i] = d[i+1] / d[0]`.
#[derive(Debug, Clone)]
pub struct SocProjectionProblem<'a, T> {
    pub t: T,
    pub x: &'a [T],
    pub dhat: &'a [T],
}

impl<'a, T: Scalar> SocProjectionProblem<'a, T> {
    pub fn new(t: T, x: &'a [T], dhat: &'a [T]) -> Result<Self> {
        crate::error::check_len("rescaled SOC dhat", x.len(), dhat.len())?;
        if let Some(i) = dhat.iter().position(|d| !(d.is_finite() && *d > T::zero())) {
            return Err(PdcsError::InvalidScaling(format!(
                "SOC scaling entry {i} is {}",
                dhat[i]
            )));
        }
        Ok(Self { t, x, dhat })
    }

    /// `‖(D̂ + 2λD̂⁻¹)⁻¹x‖`, the tail norm of the candidate at multiplier `λ`.
    pub fn tail_norm(&self, lambda: T) -> T {
        let two_l = lambda + lambda;
        self.x
            .iter()
            .zip(self.dhat)
            .map(|(&x, &d)| {
                let q = x / (d + two_l / d);
                q * q
            })
            .sum::<T>()
            .sqrt()
    }

    /// Signed form of the multiplier equation; its root in `(0, ½)` or `(½, ∞)` is the KKT multiplier.
    pub fn f(&self, lambda: T) -> T {
        let g = self.tail_norm(lambda) * (T::one() - lambda - lambda).abs();
        g - self.t.abs()
    }

    fn mu_equation(&self, mu: T) -> T {
        // λ = 1/(2μ) folded in so the t < 0 branch lives on the bounded interval (0, 1)
        let n = self
            .x
            .iter()
            .zip(self.dhat)
            .map(|(&x, &d)| {
                let q = x / (mu * d + T::one() / d);
                q * q
            })
            .sum::<T>()
            .sqrt();
        n * (T::one() - mu) - self.t.abs()
    }

    /// Case dispatch and bisection. Writes `(s, y)` into `out` (length `1 + n`).
    pub fn solve_into(&self, out: &mut [T]) -> Result<SocCase> {
        crate::error::check_len("rescaled SOC output", self.x.len() + 1, out.len())?;
        let t = self.t;
        let (mut ndx, mut ndix) = (T::zero(), T::zero());
        for (&x, &d) in self.x.iter().zip(self.dhat) {
            ndx += (d * x) * (d * x);
            ndix += (x / d) * (x / d);
        }
        let (ndx, ndix) = (ndx.sqrt(), ndix.sqrt());
        if t <= T::zero() && ndx <= -t {
            out.iter_mut().for_each(|o| *o = T::zero());
            return Ok(SocCase::Polar);
        }
        if ndix <= t {
            out[0] = t;
            out[1..].copy_from_slice(self.x);
            return Ok(SocCase::Inside);
        }
        let case = if t == T::zero() {
            for ((o, &x), &d) in out[1..].iter_mut().zip(self.x).zip(self.dhat) {
                let d2 = d * d;
                *o = x * d2 / (d2 + T::one());
            }
            SocCase::ZeroHead
        } else if t > T::zero() {
            let lam = bisect(|l| self.f(l), T::zero(), T::lit(0.5))?;
            let two_l = lam + lam;
            for ((o, &x), &d) in out[1..].iter_mut().zip(self.x).zip(self.dhat) {
                let d2 = d * d;
                *o = x * d2 / (d2 + two_l);
            }
            SocCase::Root
        } else {
            let mu = bisect(|m| self.mu_equation(m), T::zero(), T::one())?;
            for ((o, &x), &d) in out[1..].iter_mut().zip(self.x).zip(self.dhat) {
                let md2 = mu * d * d;
                *o = x * md2 / (md2 + T::one());
            }
            SocCase::Root
        };
        // put the head exactly on the boundary defined by the computed tail
        out[0] = out[1..]
            .iter()
            .zip(self.dhat)
            .map(|(&y, &d)| (y / d) * (y / d))
            .sum::<T>()
            .sqrt();
        Ok(case)
    }

    /// KKT multiplier for the returned point, recovered from the head equation.
    pub fn multiplier(&self, s: T) -> T {
        if s == T::zero() {
            return T::zero();
        }
        (T::one() - self.t / s) / T::lit(2.0)
    }
}

/// Bisection for a function positive at `lo` and negative at `hi`.
pub(crate) fn bisect<T: Scalar>(f: impl Fn(T) -> T, mut lo: T, mut hi: T) -> Result<T> {
    let tol = T::bisect_rel_tol();
    for _ in 0..crate::cones::BISECTION_MAX_ITERS {
        let mid = (lo + hi) / T::lit(2.0);
        if hi - lo <= tol * (T::one() + mid.abs()) || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let v = f(mid);
        if v.is_nan() {
            return Err(PdcsError::RootFinding(format!(
                "NaN residual at {}",
                mid.to_f64_lossy()
            )));
        }
        if v > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / T::lit(2.0))
}

/// Projection onto the rescaled cone `{(s, y) : ‖D̂⁻¹y‖ ≤ s}`.
pub fn project_rescaled_soc<T: Scalar>(t: T, x: &[T], dhat: &[T]) -> Result<(T, Vec<T>)> {
    let p = SocProjectionProblem::new(t, x, dhat)?;
    let mut out = vec![T::zero(); x.len() + 1];
    p.solve_into(&mut out)?;
    let s = out[0];
    out.remove(0);
    Ok((s, out))
}

/// In-place variant on a full block `v = (t, x)`; `scratch` must have `v.len()` entries.
pub fn project_rescaled_soc_in_place<T: Scalar>(
    v: &mut [T],
    dhat: &[T],
    scratch: &mut [T],
) -> Result<SocCase> {
    let case = {
        let p = SocProjectionProblem::new(v[0], &v[1..], dhat)?;
        p.solve_into(scratch)?
    };
    v.copy_from_slice(scratch);
    Ok(case)
}
