//! Lasso `min ‖Ax − b‖² + λ‖x‖₁` as a second-order cone program.
//!
//! With `x = x₁ − x₂`, `y = Ax − b` and `‖y‖² ≤ 2r`, the pair `(w, r)` with `w = 1` enters the
//! cone through `a = (w + r)/√2`, `b = (w − r)/√2`, so the cone block is `(a, b, y) ∈ SOC`.
//! Layout: box variables `(x₁, x₂) ≥ 0`, then the cone variables `(a, b, y)`. Rows: `w = 1`,
//! then `y − A x₁ + A x₂ = −b`. The objective `2r + λ·1ᵀ(x₁ + x₂)` equals the Lasso objective
//! at any optimum.
//!
//! Sampling order: positions of the `⌈ρmn⌉` nonzeros of `A`, their values, the entries of `x̃`,
//! then the half of `x̃` that is zeroed.

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{rng, Generated, Triplets};
use crate::error::{PdcsError, Result};
use crate::linalg::SparseMatrix;
use crate::model::{Cone, ConicProgram};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LassoSpec {
    pub m: usize,
    pub n: usize,
    pub sparsity: f64,
    pub seed: u64,
}

impl LassoSpec {
    pub fn new(m: usize, n: usize, seed: u64) -> Self {
        Self { m, n, sparsity: 1e-4, seed }
    }

    pub fn nnz(&self) -> usize {
        ((self.sparsity * (self.m * self.n) as f64).ceil() as usize).clamp(1, self.m * self.n)
    }

    pub fn num_vars(&self) -> usize {
        2 + self.m + 2 * self.n
    }

    pub fn num_rows(&self) -> usize {
        1 + self.m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoData {
    pub a: SparseMatrix<f64>,
    pub b: Vec<f64>,
    pub lambda: f64,
    pub x_true: Vec<f64>,
}

impl LassoData {
    pub fn objective(&self, x: &[f64]) -> f64 {
        let ax = self.a.spmv(x).expect("dims");
        let fit: f64 = ax.iter().zip(&self.b).map(|(p, q)| (p - q) * (p - q)).sum();
        fit + self.lambda * x.iter().map(|v| v.abs()).sum::<f64>()
    }
}

pub fn lasso_data(spec: &LassoSpec) -> Result<LassoData> {
    let LassoSpec { m, n, sparsity, seed } = *spec;
    if m == 0 || n == 0 {
        return Err(PdcsError::InvalidParams("lasso needs m, n >= 1".into()));
    }
    if !(sparsity > 0.0 && sparsity <= 1.0) {
        return Err(PdcsError::InvalidParams("lasso sparsity must lie in (0, 1]".into()));
    }
    let mut r = rng(seed);
    let mut pos = sample(&mut r, m * n, spec.nnz()).into_vec();
    pos.sort_unstable();
    let vals: Vec<f64> = pos.iter().map(|_| r.random::<f64>()).collect();
    let rows: Vec<usize> = pos.iter().map(|&k| k / n).collect();
    let cols: Vec<usize> = pos.iter().map(|&k| k % n).collect();
    let a = SparseMatrix::from_triplets(m, n, &rows, &cols, &vals)?;

    let mut x_true: Vec<f64> = (0..n).map(|_| r.sample(StandardNormal)).collect();
    for k in sample(&mut r, n, n / 2) {
        x_true[k] = 0.0;
    }
    let mut b = a.spmv(&x_true)?;
    b.iter_mut().for_each(|v| *v += 1e-6);
    let lambda = a.spmv_t(&b)?.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    Ok(LassoData { a, b, lambda, x_true })
}

pub fn gen_lasso(spec: &LassoSpec) -> Result<Generated> {
    let data = lasso_data(spec)?;
    let (m, n) = (spec.m, spec.n);
    let s2 = std::f64::consts::SQRT_2;
    // column layout
    let x1 = |j: usize| j;
    let x2 = |j: usize| n + j;
    let ca = 2 * n;
    let cb = 2 * n + 1;
    let yi = |i: usize| 2 * n + 2 + i;

    let mut c = vec![0.0; spec.num_vars()];
    c[..2 * n].iter_mut().for_each(|v| *v = data.lambda);
    c[ca] = s2;
    c[cb] = -s2;

    let mut g = Triplets::default();
    g.push(0, ca, 1.0 / s2);
    g.push(0, cb, 1.0 / s2);
    let mut h = vec![1.0];
    for i in 0..m {
        g.push(1 + i, yi(i), 1.0);
    }
    for (i, j, v) in data.a.triplets() {
        g.push(1 + i, x1(j), -v);
        g.push(1 + i, x2(j), v);
    }
    h.extend(data.b.iter().map(|v| -v));

    let program = ConicProgram {
        c,
        g: SparseMatrix::from_triplets(spec.num_rows(), spec.num_vars(), &g.rows, &g.cols, &g.vals)?,
        h,
        l: vec![0.0; 2 * n],
        u: vec![f64::INFINITY; 2 * n],
        primal_cones: vec![Cone::soc(m + 2)],
        dual_cones: vec![Cone::zero(1 + m)],
    };

    // x = 0, y = −b, r = ‖b‖²/2 on the cone boundary
    let mut x = vec![0.0; spec.num_vars()];
    let r: f64 = data.b.iter().map(|v| v * v).sum::<f64>() / 2.0;
    x[ca] = (1.0 + r) / s2;
    x[cb] = (1.0 - r) / s2;
    for i in 0..m {
        x[yi(i)] = -data.b[i];
    }
    Ok(Generated { program, feasible_x: x })
}

/// `x₁ − x₂` from a point of the generated program.
pub fn lasso_solution(spec: &LassoSpec, x: &[f64]) -> Vec<f64> {
    let n = spec.n;
    (0..n).map(|j| x[j] - x[n + j]).collect()
}
