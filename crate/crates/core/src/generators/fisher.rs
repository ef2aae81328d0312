//! Fisher market equilibrium with linear utilities as an exponential-cone program.
//!
//! Variables are stacked as `(X₁,:, …, X_m,:, (p₁, t₁), …, (p_m, t_m))`, all in the box
//! (`X ≥ 0`, `p` and `t` free). Rows: `n` market-clearing rows `Σᵢ Xᵢⱼ = bⱼ`, `m` rows
//! `Uᵢ,:·Xᵢ,: − tᵢ = 0`, then one exponential block `(pᵢ, 1, tᵢ)` per buyer.
//!
//! Sampling order: a keep/drop draw and a value draw for each `Uᵢⱼ` in row-major order, then
//! repairs for empty rows and empty columns, then `w`.

use rand::Rng;

use super::{rng, Generated, Triplets};
use crate::error::{PdcsError, Result};
use crate::linalg::SparseMatrix;
use crate::model::{Cone, ConicProgram};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherSpec {
    /// Buyers.
    pub m: usize,
    /// Goods.
    pub n: usize,
    pub sparsity: f64,
    pub seed: u64,
}

impl FisherSpec {
    pub fn new(m: usize, n: usize, seed: u64) -> Self {
        Self { m, n, sparsity: 0.2, seed }
    }

    pub fn num_vars(&self) -> usize {
        self.m * (self.n + 2)
    }

    pub fn num_rows(&self) -> usize {
        self.n + self.m + 3 * self.m
    }
}

/// Raw market data behind an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherData {
    /// Dense `m × n` utilities, row-major.
    pub utility: Vec<f64>,
    pub budget: Vec<f64>,
    pub supply: Vec<f64>,
}

pub fn fisher_data(spec: &FisherSpec) -> Result<FisherData> {
    let FisherSpec { m, n, sparsity, seed } = *spec;
    if m == 0 || n == 0 {
        return Err(PdcsError::InvalidParams("fisher needs m, n >= 1".into()));
    }
    if !(sparsity > 0.0 && sparsity <= 1.0) {
        return Err(PdcsError::InvalidParams("fisher sparsity must lie in (0, 1]".into()));
    }
    let mut r = rng(seed);
    let mut u = vec![0.0; m * n];
    for v in u.iter_mut() {
        let keep = r.random::<f64>() < sparsity;
        let val: f64 = r.random();
        if keep {
            *v = val;
        }
    }
    // a value of exactly zero counts as missing, so repairs draw from (0, 1]
    for i in 0..m {
        if u[i * n..(i + 1) * n].iter().all(|&v| v == 0.0) {
            let j = r.random_range(0..n);
            u[i * n + j] = 1.0 - r.random::<f64>();
        }
    }
    for j in 0..n {
        if (0..m).all(|i| u[i * n + j] == 0.0) {
            let i = r.random_range(0..m);
            u[i * n + j] = 1.0 - r.random::<f64>();
        }
    }
    let budget = (0..m).map(|_| r.random::<f64>()).collect();
    Ok(FisherData { utility: u, budget, supply: vec![0.25; n] })
}

pub fn gen_fisher(spec: &FisherSpec) -> Result<Generated> {
    let data = fisher_data(spec)?;
    let (m, n) = (spec.m, spec.n);
    let nv = spec.num_vars();
    let xi = |i: usize, j: usize| i * n + j;
    let pi = |i: usize| m * n + 2 * i;
    let ti = |i: usize| m * n + 2 * i + 1;

    let mut c = vec![0.0; nv];
    for i in 0..m {
        c[pi(i)] = -data.budget[i];
    }

    let mut g = Triplets::default();
    let mut h = Vec::with_capacity(spec.num_rows());
    for j in 0..n {
        for i in 0..m {
            g.push(j, xi(i, j), 1.0);
        }
        h.push(data.supply[j]);
    }
    for i in 0..m {
        let row = n + i;
        for j in 0..n {
            g.push(row, xi(i, j), data.utility[i * n + j]);
        }
        g.push(row, ti(i), -1.0);
        h.push(0.0);
    }
    let base = n + m;
    for i in 0..m {
        g.push(base + 3 * i, pi(i), 1.0);
        g.push(base + 3 * i + 2, ti(i), 1.0);
        h.extend_from_slice(&[0.0, -1.0, 0.0]);
    }

    let mut l = vec![0.0; nv];
    let u = vec![f64::INFINITY; nv];
    l[m * n..].iter_mut().for_each(|v| *v = f64::NEG_INFINITY);

    let mut dual_cones = vec![Cone::zero(n + m)];
    dual_cones.extend((0..m).map(|_| Cone::exp()));

    let program = ConicProgram {
        c,
        g: SparseMatrix::from_triplets(spec.num_rows(), nv, &g.rows, &g.cols, &g.vals)?,
        h,
        l,
        u,
        primal_cones: vec![],
        dual_cones,
    };

    // equal split of every good; pᵢ strictly below log tᵢ
    let mut x = vec![0.0; nv];
    for i in 0..m {
        let mut t = 0.0;
        for j in 0..n {
            x[xi(i, j)] = data.supply[j] / m as f64;
            t += data.utility[i * n + j] * x[xi(i, j)];
        }
        x[ti(i)] = t;
        x[pi(i)] = t.ln() - 1.0;
    }
    Ok(Generated { program, feasible_x: x })
}
