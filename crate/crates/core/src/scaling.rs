//! Diagonal equilibration of the constraint matrix and the matching cone bookkeeping.
//!
//! With row scaling `R` and column scaling `C` the scaled matrix is `G̃ = R⁻¹ G C⁻¹`, the scaled
//! variables are `x̃ = C x` and `ỹ = R y`, and the cones become `C·K_p` and `R·K_d`.

use serde::{Deserialize, Serialize};

use crate::cones::ProductProjector;
use crate::error::{check_len, PdcsError, Result};
use crate::model::{block_ranges, Cone, ConeKind, ConicProgram, Solution};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalingOptions {
    pub ruiz_iters: usize,
    pub pock_chambolle: bool,
    /// Force one common scale inside every exponential block.
    pub exp_uniform: bool,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        Self { ruiz_iters: 10, pock_chambolle: true, exp_uniform: false }
    }
}

impl ScalingOptions {
    pub fn none() -> Self {
        Self { ruiz_iters: 0, pock_chambolle: false, exp_uniform: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingInfo<T> {
    pub row_scale: Vec<T>,
    pub col_scale: Vec<T>,
    pub ruiz_iters: usize,
    pub pock_chambolle: bool,
    pub exp_uniform: bool,
    /// Whether any rotated cone block had its leading pair averaged.
    pub rsoc_averaged: bool,
}

impl<T: Scalar> ScalingInfo<T> {
    pub fn identity(m: usize, n: usize) -> Self {
        Self {
            row_scale: vec![T::one(); m],
            col_scale: vec![T::one(); n],
            ruiz_iters: 0,
            pock_chambolle: false,
            exp_uniform: false,
            rsoc_averaged: false,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.row_scale.iter().chain(&self.col_scale).all(|&s| s == T::one())
    }

    /// `(C x, R y)`.
    pub fn scale_point(&self, x: &[T], y: &[T]) -> (Vec<T>, Vec<T>) {
        (mul(x, &self.col_scale), mul(y, &self.row_scale))
    }

    /// `(x̃ / C, ỹ / R)`.
    pub fn unscale_point(&self, x: &[T], y: &[T]) -> (Vec<T>, Vec<T>) {
        (div(x, &self.col_scale), div(y, &self.row_scale))
    }
}

fn mul<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &s)| x * s).collect()
}

fn div<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &s)| x / s).collect()
}

/// `iters` Ruiz rounds followed by one Pock–Chambolle pass.
pub fn ruiz_scale<T: Scalar>(
    program: &ConicProgram<T>,
    iters: usize,
) -> Result<(ConicProgram<T>, ScalingInfo<T>)> {
    scale_program(program, &ScalingOptions { ruiz_iters: iters, ..Default::default() })
}

pub fn scale_program<T: Scalar>(
    program: &ConicProgram<T>,
    opts: &ScalingOptions,
) -> Result<(ConicProgram<T>, ScalingInfo<T>)> {
    let issues = program.validate();
    if !issues.is_empty() {
        return Err(PdcsError::InvalidProgram(issues));
    }
    let (m, n) = (program.m(), program.n());
    let mut info = ScalingInfo::identity(m, n);
    info.ruiz_iters = opts.ruiz_iters;
    info.pock_chambolle = opts.pock_chambolle;
    info.exp_uniform = opts.exp_uniform;
    let mut g = program.g.clone();

    let n1 = program.n1();
    let col_blocks: Vec<(Cone, std::ops::Range<usize>)> = program
        .primal_cones
        .iter()
        .copied()
        .zip(block_ranges(&program.primal_cones).into_iter().map(|r| r.start + n1..r.end + n1))
        .collect();
    let row_blocks: Vec<(Cone, std::ops::Range<usize>)> = program
        .dual_cones
        .iter()
        .copied()
        .zip(block_ranges(&program.dual_cones))
        .collect();

    let apply = |g: &mut crate::linalg::SparseMatrix<T>,
                     info: &mut ScalingInfo<T>,
                     mut r: Vec<T>,
                     mut c: Vec<T>| {
        info.rsoc_averaged |= constrain(&mut r, &row_blocks, opts.exp_uniform);
        info.rsoc_averaged |= constrain(&mut c, &col_blocks, opts.exp_uniform);
        *g = g.scaled(&r, &c);
        info.row_scale.iter_mut().zip(&r).for_each(|(s, &x)| *s *= x);
        info.col_scale.iter_mut().zip(&c).for_each(|(s, &x)| *s *= x);
    };

    for _ in 0..opts.ruiz_iters {
        let norms = g.norms();
        let r = norms.row_inf.iter().map(|&v| safe_sqrt(v)).collect();
        let c = norms.col_inf.iter().map(|&v| safe_sqrt(v)).collect();
        apply(&mut g, &mut info, r, c);
    }
    if opts.pock_chambolle {
        let (row_sums, col_sums) = g.abs_sums();
        let r = row_sums.iter().map(|&v| safe_sqrt(v)).collect();
        let c = col_sums.iter().map(|&v| safe_sqrt(v)).collect();
        apply(&mut g, &mut info, r, c);
    }

    let scaled = ConicProgram {
        c: div(&program.c, &info.col_scale),
        g,
        h: div(&program.h, &info.row_scale),
        l: mul(&program.l, &info.col_scale[..n1]),
        u: mul(&program.u, &info.col_scale[..n1]),
        primal_cones: program.primal_cones.clone(),
        dual_cones: program.dual_cones.clone(),
    };
    Ok((scaled, info))
}

fn safe_sqrt<T: Scalar>(v: T) -> T {
    if v > T::zero() && v.is_finite() {
        v.sqrt()
    } else {
        T::one()
    }
}

/// Enforces per-block structure on one round of scale factors. Returns true if an RSOC pair moved.
fn constrain<T: Scalar>(
    s: &mut [T],
    blocks: &[(Cone, std::ops::Range<usize>)],
    exp_uniform: bool,
) -> bool {
    let mut moved = false;
    for (cone, r) in blocks {
        match cone.kind {
            ConeKind::RotatedSecondOrder => {
                let (a, b) = (s[r.start], s[r.start + 1]);
                if a != b {
                    let g = (a * b).sqrt();
                    s[r.start] = g;
                    s[r.start + 1] = g;
                    moved = true;
                }
            }
            ConeKind::Exponential | ConeKind::DualExponential if exp_uniform => {
                let g = (s[r.clone()].iter().map(|v| v.ln()).sum::<T>() / T::lit(3.0)).exp();
                s[r.clone()].iter_mut().for_each(|v| *v = g);
            }
            _ => {}
        }
    }
    moved
}

/// Maps a point of the scaled program back to the original one and recomputes the objectives.
pub fn unscale_solution<T: Scalar>(
    sol: &Solution<T>,
    info: &ScalingInfo<T>,
    original: &ConicProgram<T>,
) -> Result<Solution<T>> {
    check_len("unscale x", info.col_scale.len(), sol.x.len())?;
    check_len("unscale y", info.row_scale.len(), sol.y.len())?;
    let (x, y) = info.unscale_point(&sol.x, &sol.y);
    Solution::from_point(original, x, y)
}

/// Projectors onto the scaled primal cone `C·K_p` (over `x[n1..]`) and the scaled dual cone of
/// the constraint blocks (over `y`).
#[derive(Debug, Clone, PartialEq)]
pub struct ConeScalingSlices<T> {
    pub primal: ProductProjector<T>,
    pub dual: ProductProjector<T>,
}

pub fn cone_scaling_slices<T: Scalar>(
    info: &ScalingInfo<T>,
    program: &ConicProgram<T>,
) -> Result<ConeScalingSlices<T>> {
    check_len("column scaling", program.n(), info.col_scale.len())?;
    check_len("row scaling", program.m(), info.row_scale.len())?;
    let n1 = program.n1();
    Ok(ConeScalingSlices {
        primal: ProductProjector::new(&program.primal_cones, Some(&info.col_scale[n1..]), false)?,
        dual: ProductProjector::new(&program.dual_cones, Some(&info.row_scale), true)?,
    })
}
