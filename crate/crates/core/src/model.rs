//! Conic program representation and structural validation.
//!
//! The program is
//!
//! ```text
//! minimize    cᵀx
//! subject to  G x − h ∈ C₁ × … × C_k          (dual_cones lists the Cᵢ)
//!             l ≤ x[..n1] ≤ u
//!             x[n1..] ∈ K₁ × … × K_p          (primal_cones lists the Kᵢ)
//! ```
//!
//! The dual multiplier `y` lives in the dual of each constraint cone, so a
//! `Zero` constraint block is an equality row with a free multiplier.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Result};
use crate::linalg::SparseMatrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeKind {
    Zero,
    NonNeg,
    SecondOrder,
    RotatedSecondOrder,
    Exponential,
    DualExponential,
}

impl ConeKind {
    pub fn name(self) -> &'static str {
        match self {
            ConeKind::Zero => "zero",
            ConeKind::NonNeg => "non_neg",
            ConeKind::SecondOrder => "second_order",
            ConeKind::RotatedSecondOrder => "rotated_second_order",
            ConeKind::Exponential => "exponential",
            ConeKind::DualExponential => "dual_exponential",
        }
    }

    /// Kind of the dual cone, or `None` when the dual is the whole space (dual of `Zero`).
    pub fn dual(self) -> Option<ConeKind> {
        match self {
            ConeKind::Zero => None,
            ConeKind::Exponential => Some(ConeKind::DualExponential),
            ConeKind::DualExponential => Some(ConeKind::Exponential),
            k => Some(k),
        }
    }

    pub fn min_dim(self) -> usize {
        match self {
            ConeKind::Zero | ConeKind::NonNeg => 1,
            ConeKind::SecondOrder => 2,
            ConeKind::RotatedSecondOrder | ConeKind::Exponential | ConeKind::DualExponential => 3,
        }
    }
}

/// One disciplined cone block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cone {
    pub kind: ConeKind,
    pub dim: usize,
}

impl Cone {
    pub const fn new(kind: ConeKind, dim: usize) -> Self {
        Self { kind, dim }
    }
    pub const fn zero(dim: usize) -> Self {
        Self::new(ConeKind::Zero, dim)
    }
    pub const fn nonneg(dim: usize) -> Self {
        Self::new(ConeKind::NonNeg, dim)
    }
    pub const fn soc(dim: usize) -> Self {
        Self::new(ConeKind::SecondOrder, dim)
    }
    pub const fn rsoc(dim: usize) -> Self {
        Self::new(ConeKind::RotatedSecondOrder, dim)
    }
    pub const fn exp() -> Self {
        Self::new(ConeKind::Exponential, 3)
    }
    pub const fn dual_exp() -> Self {
        Self::new(ConeKind::DualExponential, 3)
    }

    pub fn is_valid(&self) -> bool {
        match self.kind {
            ConeKind::Exponential | ConeKind::DualExponential => self.dim == 3,
            k => self.dim >= k.min_dim(),
        }
    }
}

/// Coordinate ranges of consecutive cone blocks.
pub fn block_ranges(cones: &[Cone]) -> Vec<Range<usize>> {
    let mut start = 0;
    cones
        .iter()
        .map(|c| {
            let r = start..start + c.dim;
            start += c.dim;
            r
        })
        .collect()
}

pub fn total_dim(cones: &[Cone]) -> usize {
    cones.iter().map(|c| c.dim).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicProgram<T> {
    pub c: Vec<T>,
    pub g: SparseMatrix<T>,
    pub h: Vec<T>,
    /// Lower bounds of the boxed block `x[..n1]`; `-∞` means unbounded.
    pub l: Vec<T>,
    /// Upper bounds of the boxed block; `+∞` means unbounded.
    pub u: Vec<T>,
    pub primal_cones: Vec<Cone>,
    /// Constraint cones: `G x − h` must lie in their product.
    pub dual_cones: Vec<Cone>,
}

impl<T: Scalar> ConicProgram<T> {
    pub fn n1(&self) -> usize {
        self.l.len()
    }

    pub fn n2(&self) -> usize {
        total_dim(&self.primal_cones)
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn m(&self) -> usize {
        self.h.len()
    }

    /// Ranges of the primal cone blocks inside the full `x` vector.
    pub fn primal_blocks(&self) -> Vec<Range<usize>> {
        let off = self.n1();
        block_ranges(&self.primal_cones)
            .into_iter()
            .map(|r| r.start + off..r.end + off)
            .collect()
    }

    pub fn dual_blocks(&self) -> Vec<Range<usize>> {
        block_ranges(&self.dual_cones)
    }

    /// Every structural violation; empty means well-formed.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n1 = self.n1();
        let n2 = self.n2();
        let (n, m) = (self.n(), self.m());
        if self.u.len() != n1 {
            out.push(format!(
                "bound length mismatch: l has {} entries, u has {}",
                n1,
                self.u.len()
            ));
        }
        if n1 + n2 != n {
            out.push(format!(
                "primal cone dimension mismatch: n1 {} + cone dims {} != n {}",
                n1, n2, n
            ));
        }
        if total_dim(&self.dual_cones) != m {
            out.push("dual cone dimension mismatch".to_string());
        }
        if self.g.nrows() != m || self.g.ncols() != n {
            out.push(format!(
                "constraint matrix is {}x{}, expected {}x{}",
                self.g.nrows(),
                self.g.ncols(),
                m,
                n
            ));
        }
        for (i, (&lo, &hi)) in self.l.iter().zip(&self.u).enumerate() {
            if lo.is_nan() || hi.is_nan() {
                out.push(format!("NaN bound at index {i}"));
            } else if lo > hi {
                out.push(format!("bound inversion at index {i}"));
            } else if lo == T::infinity() || hi == T::neg_infinity() {
                out.push(format!("empty bound at index {i}"));
            }
        }
        for (side, cones) in [("primal", &self.primal_cones), ("dual", &self.dual_cones)] {
            for (k, cone) in cones.iter().enumerate() {
                if !cone.is_valid() {
                    out.push(format!(
                        "{side} cone {k} of kind {} has invalid dimension {}",
                        cone.kind.name(),
                        cone.dim
                    ));
                }
            }
        }
        if self.c.iter().any(|v| !v.is_finite()) {
            out.push("non-finite objective entry".to_string());
        }
        if self.h.iter().any(|v| !v.is_finite()) {
            out.push("non-finite right-hand side entry".to_string());
        }
        if self.g.values().iter().any(|v| !v.is_finite()) {
            out.push("non-finite matrix entry".to_string());
        }
        out
    }

    /// `λ = c − Gᵀy` split at `n1`.
    pub fn dual_slack(&self, y: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        check_len("dual_slack y", self.m(), y.len())?;
        let gty = self.g.spmv_t(y)?;
        Ok(self.dual_slack_from_gty(&gty))
    }

    pub(crate) fn dual_slack_from_gty(&self, gty: &[T]) -> (Vec<T>, Vec<T>) {
        let mut lambda: Vec<T> = self.c.iter().zip(gty).map(|(&c, &g)| c - g).collect();
        let lambda2 = lambda.split_off(self.n1().min(lambda.len()));
        (lambda, lambda2)
    }

    pub fn objective(&self, x: &[T]) -> T {
        crate::scalar::dot(&self.c, x)
    }
}

/// Primal-dual point on the original program, with the derived dual slack.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub lambda: Vec<T>,
    pub primal_objective: T,
    pub dual_objective: T,
}

impl<T: Scalar> Solution<T> {
    /// Builds a solution, deriving `λ` and both objectives from `(program, x, y)`.
    pub fn from_point(program: &ConicProgram<T>, x: Vec<T>, y: Vec<T>) -> Result<Self> {
        check_len("solution x", program.n(), x.len())?;
        let (l1, l2) = program.dual_slack(&y)?;
        let dual_objective = crate::termination::dual_objective(program, &y, &l1);
        let primal_objective = program.objective(&x);
        let mut lambda = l1;
        lambda.extend(l2);
        Ok(Self {
            x,
            y,
            lambda,
            primal_objective,
            dual_objective,
        })
    }

    pub fn lambda1(&self, n1: usize) -> &[T] {
        &self.lambda[..n1]
    }

    pub fn lambda2(&self, n1: usize) -> &[T] {
        &self.lambda[n1..]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_var_lp() -> ConicProgram<f64> {
        ConicProgram {
            c: vec![1.0],
            g: SparseMatrix::identity(1),
            h: vec![0.0],
            l: vec![0.0],
            u: vec![f64::INFINITY],
            primal_cones: vec![],
            dual_cones: vec![Cone::nonneg(1)],
        }
    }

    #[test]
    fn well_formed_program_is_valid() {
        assert!(one_var_lp().validate().is_empty());
    }

    #[test]
    fn bound_inversion_reported() {
        let mut p = one_var_lp();
        p.l = vec![1.0];
        p.u = vec![0.0];
        assert_eq!(p.validate(), vec!["bound inversion at index 0".to_string()]);
    }

    #[test]
    fn dual_cone_mismatch_reported() {
        let mut p = one_var_lp();
        p.dual_cones = vec![];
        assert_eq!(p.validate(), vec!["dual cone dimension mismatch".to_string()]);
    }

    #[test]
    fn bad_cone_dims_and_nonfinite() {
        let mut p = one_var_lp();
        p.c = vec![f64::NAN, 0.0, 0.0];
        p.g = SparseMatrix::zeros(1, 3);
        p.primal_cones = vec![Cone::new(ConeKind::Exponential, 2)];
        let v = p.validate();
        assert!(v.iter().any(|s| s.contains("invalid dimension 2")), "{v:?}");
        assert!(v.iter().any(|s| s.contains("non-finite objective")), "{v:?}");
    }

    #[test]
    fn validate_is_idempotent() {
        let mut p = one_var_lp();
        p.l = vec![2.0];
        p.u = vec![1.0];
        let before = p.clone();
        assert_eq!(p.validate(), p.validate());
        assert_eq!(p, before);
    }

    #[test]
    fn dual_slack_basic() {
        let p = one_var_lp();
        assert_eq!(p.dual_slack(&[0.0]).unwrap(), (vec![1.0], vec![]));
        assert_eq!(p.dual_slack(&[1.0]).unwrap(), (vec![0.0], vec![]));
        assert!(p.dual_slack(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn cone_validity() {
        assert!(Cone::soc(2).is_valid());
        assert!(!Cone::soc(1).is_valid());
        assert!(!Cone::rsoc(2).is_valid());
        assert!(Cone::rsoc(3).is_valid());
        assert!(!Cone::zero(0).is_valid());
        assert_eq!(ConeKind::Zero.dual(), None);
        assert_eq!(ConeKind::Exponential.dual(), Some(ConeKind::DualExponential));
    }

    #[test]
    fn block_layout() {
        let r = block_ranges(&[Cone::nonneg(2), Cone::exp(), Cone::soc(4)]);
        assert_eq!(r, vec![0..2, 2..5, 5..9]);
    }
}
