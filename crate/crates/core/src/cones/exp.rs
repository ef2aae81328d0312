//! Exponential cone membership and projections onto `D·K_exp` and `D·K_exp*`.
//!
//! `K_exp = cl{(r, s, t) : s > 0, t ≥ s·exp(r/s)}`.

use crate::error::{PdcsError, Result};
use crate::scalar::Scalar;

const EXPANSION_CAP: usize = 200;

/// Branch taken by [`project_rescaled_exp`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExpCase {
    /// Input already in `D·K_exp`.
    InCone,
    /// Input in the polar cone `−D⁻¹K_exp*`; projection is zero.
    InPolar,
    /// `r0 ≤ 0` and `s0 ≤ 0`.
    NonPositive,
    /// Interior root of the scalar equation.
    Root,
}

pub fn in_exp<T: Scalar>(v: [T; 3], tol: T) -> bool {
    let [r, s, t] = v;
    if s > T::zero() && t >= s * (r / s).exp() - tol {
        return true;
    }
    s.abs() <= tol && t >= -tol && r <= tol
}

pub fn in_exp_dual<T: Scalar>(v: [T; 3], tol: T) -> bool {
    let [r, s, t] = v;
    let e = T::lit(std::f64::consts::E);
    if r < T::zero() && e * t >= -r * (s / r).exp() - tol {
        return true;
    }
    r.abs() <= tol && s >= -tol && t >= -tol
}

/// Decomposition `v0 = v_p + v_d` with `v_p ∈ D·K_exp`, `v_d ∈ −D⁻¹K_exp*`, `⟨v_p, v_d⟩ = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpDecomposition<T> {
    pub vp: [T; 3],
    pub vd: [T; 3],
    pub case: ExpCase,
    /// Root of the scalar equation when `case == Root`.
    pub rho: Option<T>,
}

/// Scalar root-finding problem for the interior case.
#[derive(Debug, Clone, Copy)]
pub struct ExpProjectionProblem<T> {
    pub v0: [T; 3],
    pub d: [T; 3],
}

/// Endpoints of the search interval; `None` marks an infinite end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpBracket<T> {
    pub lo: Option<T>,
    pub hi: Option<T>,
    /// `true` when `h` is positive at the low end (the `a3` side).
    pub positive_at_lo: bool,
}

impl<T: Scalar> ExpProjectionProblem<T> {
    pub fn new(v0: [T; 3], d: [T; 3]) -> Result<Self> {
        if let Some(i) = d.iter().position(|x| !(x.is_finite() && *x > T::zero())) {
            return Err(PdcsError::InvalidScaling(format!(
                "exponential cone scaling entry {i} is {}",
                d[i]
            )));
        }
        Ok(Self { v0, d })
    }

    fn tau(&self) -> T {
        self.d[1] / self.d[0]
    }

    fn denom(&self, rho: T) -> T {
        let tau = self.tau();
        rho * rho - rho + tau * tau
    }

    pub fn sp(&self, rho: T) -> T {
        let [r0, s0, _] = self.v0;
        let num = s0 * self.tau() - r0 + r0 * rho;
        num / (self.d[0] * self.denom(rho))
    }

    pub fn rd(&self, rho: T) -> T {
        let [r0, s0, _] = self.v0;
        let num = self.tau() * r0 - rho * s0;
        self.d[1] * num / self.denom(rho)
    }

    pub fn h(&self, rho: T) -> T {
        let dt = self.d[2];
        dt * rho.exp() * self.sp(rho) - (-rho).exp() * self.rd(rho) / dt - self.v0[2]
    }

    pub fn a3(&self) -> T {
        let [r0, s0, _] = self.v0;
        r0 * self.d[1] / (s0 * self.d[0])
    }

    pub fn a4(&self) -> T {
        let [r0, s0, _] = self.v0;
        T::one() - s0 * self.d[1] / (r0 * self.d[0])
    }

    /// Search interval for `r0 > 0` or `s0 > 0`. `h` is positive at `a3` and negative at `a4`.
    pub fn bracket(&self) -> ExpBracket<T> {
        let [r0, s0, _] = self.v0;
        let z = T::zero();
        if r0 > z && s0 > z {
            let (a3, a4) = (self.a3(), self.a4());
            if a3 <= a4 {
                ExpBracket { lo: Some(a3), hi: Some(a4), positive_at_lo: true }
            } else {
                ExpBracket { lo: Some(a4), hi: Some(a3), positive_at_lo: false }
            }
        } else if s0 > z {
            ExpBracket { lo: None, hi: Some(self.a3()), positive_at_lo: false }
        } else {
            ExpBracket { lo: Some(self.a4()), hi: None, positive_at_lo: false }
        }
    }

    /// Replaces infinite ends by doubling steps away from the finite end until `h` changes sign.
    pub fn finite_bracket(&self) -> Result<(T, T, bool)> {
        let b = self.bracket();
        match (b.lo, b.hi) {
            (Some(lo), Some(hi)) => Ok((lo, hi, b.positive_at_lo)),
            (None, Some(hi)) => {
                let mut step = T::one();
                for _ in 0..EXPANSION_CAP {
                    let lo = hi - step;
                    if self.h(lo) < T::zero() {
                        return Ok((lo, hi, false));
                    }
                    step = step + step;
                }
                Err(self.expansion_failure())
            }
            (Some(lo), None) => {
                let mut step = T::one();
                for _ in 0..EXPANSION_CAP {
                    let hi = lo + step;
                    if self.h(hi) > T::zero() {
                        return Ok((lo, hi, false));
                    }
                    step = step + step;
                }
                Err(self.expansion_failure())
            }
            (None, None) => unreachable!("bracket always has a finite end"),
        }
    }

    fn expansion_failure(&self) -> PdcsError {
        PdcsError::RootFinding(format!(
            "no sign change for exponential projection of {:?} with scaling {:?}",
            self.v0.map(|x| x.to_f64_lossy()),
            self.d.map(|x| x.to_f64_lossy())
        ))
    }

    /// Bisection on `h`; `observe` sees every midpoint evaluated.
    pub fn solve_with(&self, mut observe: impl FnMut(T)) -> Result<T> {
        let (mut lo, mut hi, pos_lo) = self.finite_bracket()?;
        let tol = T::bisect_rel_tol();
        for _ in 0..crate::cones::BISECTION_MAX_ITERS {
            let mid = (lo + hi) / T::lit(2.0);
            if hi - lo <= tol * (T::one() + mid.abs()) || mid <= lo || mid >= hi {
                return Ok(mid);
            }
            observe(mid);
            let v = self.h(mid);
            if v.is_nan() {
                return Err(PdcsError::RootFinding(format!(
                    "NaN in exponential root function at {}",
                    mid.to_f64_lossy()
                )));
            }
            if (v > T::zero()) == pos_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((lo + hi) / T::lit(2.0))
    }

    /// Boundary ray of `D·K_exp` at `ρ`, normalised so no component overflows.
    fn primal_ray(&self, rho: T) -> [T; 3] {
        let [dr, ds, dt] = self.d;
        if rho > T::zero() {
            let e = (-rho).exp();
            [dr * rho * e, ds * e, dt]
        } else {
            [dr * rho, ds, dt * rho.exp()]
        }
    }

    /// Boundary ray of `−D⁻¹K_exp*` at `ρ`, orthogonal to [`Self::primal_ray`].
    fn dual_ray(&self, rho: T) -> [T; 3] {
        let [dr, ds, dt] = self.d;
        if rho < T::zero() {
            let e = rho.exp();
            [e / dr, (T::one() - rho) * e / ds, -T::one() / dt]
        } else {
            [T::one() / dr, (T::one() - rho) / ds, -(-rho).exp() / dt]
        }
    }

    /// `v_p = s_p(ρ)·D(ρ, 1, e^ρ)`, with the coefficient taken as the component of `v0` on that ray.
    ///
    /// At the root this equals the closed form `s_p(ρ)`; the projection form stays accurate
    /// where the closed form degenerates to `0/0`.
    pub fn primal_part(&self, rho: T) -> [T; 3] {
        along(self.v0, self.primal_ray(rho))
    }

    /// `v_d = r_d(ρ)·D⁻¹(1, 1−ρ, −e^{−ρ})`, computed like [`Self::primal_part`].
    pub fn dual_part(&self, rho: T) -> [T; 3] {
        along(self.v0, self.dual_ray(rho))
    }

    pub fn decompose(&self) -> Result<ExpDecomposition<T>> {
        let [r0, s0, t0] = self.v0;
        let [dr, ds, dt] = self.d;
        let z = T::zero();
        let scaled = [r0 / dr, s0 / ds, t0 / dt];
        let tol = T::lit(1e-12) * crate::scalar::norm2(&scaled);
        if in_exp(scaled, tol) {
            return Ok(ExpDecomposition { vp: self.v0, vd: [z; 3], case: ExpCase::InCone, rho: None });
        }
        let neg = [-r0 * dr, -s0 * ds, -t0 * dt];
        let tol = T::lit(1e-12) * crate::scalar::norm2(&neg);
        if in_exp_dual(neg, tol) {
            return Ok(ExpDecomposition { vp: [z; 3], vd: self.v0, case: ExpCase::InPolar, rho: None });
        }
        if r0 <= z && s0 <= z {
            return Ok(ExpDecomposition {
                vp: [r0, z, t0.max(z)],
                vd: [z, s0, t0.min(z)],
                case: ExpCase::NonPositive,
                rho: None,
            });
        }
        let rho = self.solve_with(|_| {})?;
        Ok(ExpDecomposition {
            vp: self.primal_part(rho),
            vd: self.dual_part(rho),
            case: ExpCase::Root,
            rho: Some(rho),
        })
    }
}

fn along<T: Scalar>(v: [T; 3], a: [T; 3]) -> [T; 3] {
    let na = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
    let c = ((v[0] * a[0] + v[1] * a[1] + v[2] * a[2]) / na).max(T::zero());
    [c * a[0], c * a[1], c * a[2]]
}

/// Projection onto `D·K_exp`.
pub fn project_rescaled_exp<T: Scalar>(v0: [T; 3], d: [T; 3]) -> Result<[T; 3]> {
    Ok(ExpProjectionProblem::new(v0, d)?.decompose()?.vp)
}

/// Projection onto `D·K_exp` together with the branch taken.
pub fn project_rescaled_exp_case<T: Scalar>(v0: [T; 3], d: [T; 3]) -> Result<([T; 3], ExpCase)> {
    let dec = ExpProjectionProblem::new(v0, d)?.decompose()?;
    Ok((dec.vp, dec.case))
}

/// Projection onto `D·K_exp*`, via the primal projection onto `D⁻¹K_exp` of `−v0`.
pub fn project_rescaled_dual_exp<T: Scalar>(v0: [T; 3], d: [T; 3]) -> Result<[T; 3]> {
    let inv = d.map(|x| T::one() / x);
    let p = project_rescaled_exp(v0.map(|x| -x), inv)?;
    Ok([v0[0] + p[0], v0[1] + p[1], v0[2] + p[2]])
}
