//! Euclidean projections onto boxes, the dual-slack set, and (rescaled) cones.

pub mod exp;
pub mod soc;

use std::ops::Range;

pub use exp::{
    in_exp, in_exp_dual, project_rescaled_dual_exp, project_rescaled_exp,
    project_rescaled_exp_case, ExpBracket, ExpCase, ExpDecomposition, ExpProjectionProblem,
};
pub use soc::{
    project_rescaled_soc, project_rescaled_soc_in_place, project_rsoc_in_place,
    project_soc_in_place, rotate_rsoc, SocCase, SocProjectionProblem,
};

use crate::error::{check_len, PdcsError, Result};
use crate::model::{block_ranges, Cone, ConeKind};
use crate::scalar::Scalar;

pub(crate) const BISECTION_MAX_ITERS: usize = 80;

/// Componentwise clamp onto `[l, u]`.
pub fn project_box<T: Scalar>(v: &[T], l: &[T], u: &[T]) -> Result<Vec<T>> {
    check_len("project_box l", v.len(), l.len())?;
    check_len("project_box u", v.len(), u.len())?;
    if let Some(i) = l.iter().zip(u).position(|(a, b)| a > b) {
        return Err(PdcsError::BoundInversion(i));
    }
    let mut out = v.to_vec();
    project_box_in_place(&mut out, l, u);
    Ok(out)
}

pub(crate) fn project_box_in_place<T: Scalar>(v: &mut [T], l: &[T], u: &[T]) {
    for ((x, &lo), &hi) in v.iter_mut().zip(l).zip(u) {
        *x = x.max(lo).min(hi);
    }
}

/// Projects `λ1` onto `Λ = Λ_1 × … × Λ_n1`, whose factors depend on which bounds are finite.
pub fn project_lambda_set<T: Scalar>(lambda1: &[T], l: &[T], u: &[T]) -> Vec<T> {
    assert!(lambda1.len() == l.len() && l.len() == u.len(), "length mismatch");
    lambda1
        .iter()
        .zip(l.iter().zip(u))
        .map(|(&lam, (&lo, &hi))| match (lo.is_finite(), hi.is_finite()) {
            (false, false) => T::zero(),
            (false, true) => lam.min(T::zero()),
            (true, false) => lam.max(T::zero()),
            (true, true) => lam,
        })
        .collect()
}

/// Projection applied to one cone block, with the diagonal scaling already folded in.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockProjector<T> {
    /// The whole space (dual of the zero cone).
    Free,
    Zero,
    NonNeg,
    /// `{(s, y) : ‖D̂⁻¹y‖ ≤ s}`; `None` means `D̂ = I`.
    Soc { dhat: Option<Vec<T>> },
    /// Rotated cone; `dhat` applies after the rotation to standard form.
    Rsoc { dhat: Option<Vec<T>> },
    Exp { d: Option<[T; 3]> },
    DualExp { d: Option<[T; 3]> },
}

impl<T: Scalar> BlockProjector<T> {
    /// Projector onto `D·K` for cone kind `K`; `scale` is the block's slice of `D`.
    pub fn for_cone(kind: ConeKind, scale: Option<&[T]>) -> Result<Self> {
        let scale = scale.filter(|s| s.iter().any(|&d| d != T::one()));
        Ok(match kind {
            ConeKind::Zero => BlockProjector::Zero,
            ConeKind::NonNeg => BlockProjector::NonNeg,
            ConeKind::SecondOrder => BlockProjector::Soc { dhat: scale.map(soc_dhat).transpose()? },
            ConeKind::RotatedSecondOrder => {
                let dhat = match scale {
                    None => None,
                    Some(s) => {
                        if s.len() < 3 {
                            return Err(PdcsError::InvalidScaling("short RSOC block".into()));
                        }
                        let (a, b) = (s[0], s[1]);
                        if (a - b).abs() > T::lit(1e-12) * a.abs().max(b.abs()) {
                            return Err(PdcsError::InvalidScaling(format!(
                                "rotated cone leading scalings differ: {a} vs {b}"
                            )));
                        }
                        Some(soc_dhat(s)?)
                    }
                };
                BlockProjector::Rsoc { dhat }
            }
            ConeKind::Exponential => BlockProjector::Exp { d: scale.map(triple).transpose()? },
            ConeKind::DualExponential => {
                BlockProjector::DualExp { d: scale.map(triple).transpose()? }
            }
        })
    }

    /// Projector onto `D·K*`.
    pub fn for_dual_cone(kind: ConeKind, scale: Option<&[T]>) -> Result<Self> {
        match kind.dual() {
            None => Ok(BlockProjector::Free),
            Some(k) => Self::for_cone(k, scale),
        }
    }

    pub fn project_in_place(&self, v: &mut [T]) -> Result<()> {
        match self {
            BlockProjector::Free => {}
            BlockProjector::Zero => v.iter_mut().for_each(|x| *x = T::zero()),
            BlockProjector::NonNeg => v.iter_mut().for_each(|x| *x = x.max(T::zero())),
            BlockProjector::Soc { dhat: None } => project_soc_in_place(v),
            BlockProjector::Soc { dhat: Some(dh) } => {
                let mut scratch = vec![T::zero(); v.len()];
                project_rescaled_soc_in_place(v, dh, &mut scratch)?;
            }
            BlockProjector::Rsoc { dhat: None } => project_rsoc_in_place(v),
            BlockProjector::Rsoc { dhat: Some(dh) } => {
                let mut scratch = vec![T::zero(); v.len()];
                rotate_rsoc(v);
                project_rescaled_soc_in_place(v, dh, &mut scratch)?;
                rotate_rsoc(v);
            }
            BlockProjector::Exp { d } => {
                let p = project_rescaled_exp(as_triple(v)?, d.unwrap_or([T::one(); 3]))?;
                v.copy_from_slice(&p);
            }
            BlockProjector::DualExp { d } => {
                let p = project_rescaled_dual_exp(as_triple(v)?, d.unwrap_or([T::one(); 3]))?;
                v.copy_from_slice(&p);
            }
        }
        Ok(())
    }
}

fn soc_dhat<T: Scalar>(s: &[T]) -> Result<Vec<T>> {
    let d0 = s[0];
    if !(d0.is_finite() && d0 > T::zero()) {
        return Err(PdcsError::InvalidScaling(format!("SOC head scaling is {d0}")));
    }
    Ok(s[1..].iter().map(|&d| d / d0).collect())
}

fn triple<T: Scalar>(s: &[T]) -> Result<[T; 3]> {
    as_triple(s)
}

fn as_triple<T: Scalar>(v: &[T]) -> Result<[T; 3]> {
    check_len("exponential block", 3, v.len())?;
    Ok([v[0], v[1], v[2]])
}

/// Projector for a whole product of cone blocks laid out consecutively.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductProjector<T> {
    blocks: Vec<(Range<usize>, BlockProjector<T>)>,
    dim: usize,
}

impl<T: Scalar> ProductProjector<T> {
    /// Projector onto `D·(K_1 × … × K_p)`, or onto the dual product when `dual` is set.
    pub fn new(cones: &[Cone], scale: Option<&[T]>, dual: bool) -> Result<Self> {
        let ranges = block_ranges(cones);
        let dim = ranges.last().map_or(0, |r| r.end);
        if let Some(s) = scale {
            check_len("product projector scaling", dim, s.len())?;
        }
        let blocks = cones
            .iter()
            .zip(ranges)
            .map(|(c, r)| {
                let sl = scale.map(|s| &s[r.clone()]);
                let p = if dual {
                    BlockProjector::for_dual_cone(c.kind, sl)?
                } else {
                    BlockProjector::for_cone(c.kind, sl)?
                };
                Ok((r, p))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { blocks, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[(Range<usize>, BlockProjector<T>)] {
        &self.blocks
    }

    pub fn project_in_place(&self, v: &mut [T]) -> Result<()> {
        check_len("product projection", self.dim, v.len())?;
        for (r, p) in &self.blocks {
            p.project_in_place(&mut v[r.clone()])?;
        }
        Ok(())
    }
}

/// Projection onto the unscaled cone.
pub fn project_cone<T: Scalar>(v: &[T], cone: Cone) -> Result<Vec<T>> {
    check_len("project_cone", cone.dim, v.len())?;
    let mut out = v.to_vec();
    BlockProjector::for_cone(cone.kind, None)?.project_in_place(&mut out)?;
    Ok(out)
}

/// Projection onto the dual of the unscaled cone.
pub fn project_dual_cone<T: Scalar>(v: &[T], cone: Cone) -> Result<Vec<T>> {
    check_len("project_dual_cone", cone.dim, v.len())?;
    let mut out = v.to_vec();
    BlockProjector::for_dual_cone(cone.kind, None)?.project_in_place(&mut out)?;
    Ok(out)
}

fn in_kind<T: Scalar>(v: &[T], kind: ConeKind, tol: T) -> bool {
    match kind {
        ConeKind::Zero => v.iter().all(|x| x.abs() <= tol),
        ConeKind::NonNeg => v.iter().all(|&x| x >= -tol),
        ConeKind::SecondOrder => crate::scalar::norm2(&v[1..]) <= v[0] + tol,
        ConeKind::RotatedSecondOrder => {
            let tail: T = v[2..].iter().map(|&x| x * x).sum();
            v[0] >= -tol && v[1] >= -tol && tail <= (v[0] + v[0]) * v[1] + tol
        }
        ConeKind::Exponential => in_exp([v[0], v[1], v[2]], tol),
        ConeKind::DualExponential => in_exp_dual([v[0], v[1], v[2]], tol),
    }
}

/// Membership with additive slack `tol` on every defining inequality.
pub fn in_cone<T: Scalar>(v: &[T], cone: Cone, tol: T) -> bool {
    v.len() == cone.dim && cone.is_valid() && in_kind(v, cone.kind, tol)
}

pub fn in_dual_cone<T: Scalar>(v: &[T], cone: Cone, tol: T) -> bool {
    if v.len() != cone.dim || !cone.is_valid() {
        return false;
    }
    match cone.kind.dual() {
        None => true,
        Some(k) => in_kind(v, k, tol),
    }
}
