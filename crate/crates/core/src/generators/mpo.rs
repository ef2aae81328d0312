//! Multi-period portfolio selection with risk, tracking and turnover limits, as an SOCP.
//!
//! Synthetic market data stands in for price history: a rank-5 factor covariance with
//! idiosyncratic noise, scaled to daily magnitudes, and per-period perturbations of the first
//! period's loadings and returns. The benchmark `w_b` is the all-cash portfolio and the start
//! `w₀` is equal weights over the assets, so the risk budget
//! `γ₁τ = ‖Σ̂τ^{1/2}(w_{1/n} − w_b)‖` is positive.
//!
//! Period `τ` owns columns `w_{τ+1}` (`n + 1`, nonnegative, cash last) and `u_τ` (`n`, free),
//! and `5n + 6` rows in three blocks:
//! - zero: budget `1ᵀ(w_{τ+1} − w_τ) = 0` and neutrality `(w^m_τ)ᵀΣ̂τ w_{τ+1,[n]} = 0`;
//! - nonnegative: `u ≥ ±(w − w_b)`, `Σ (Σ̂^{1/2})ᵢᵢ uᵢ ≤ γ₃`, turnover `|w_{τ+1} − w_τ| ≤ γ₂`;
//! - second-order: `(γ₁τ, Σ̂τ^{1/2}(w_{τ+1} − w_b)_{[n]})`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{rng, Generated, Triplets};
use crate::error::{PdcsError, Result};
use crate::linalg::SparseMatrix;
use crate::model::{Cone, ConicProgram};

const FACTORS: usize = 5;
const DAILY: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpoSpec {
    pub periods: usize,
    pub n: usize,
    pub gamma2: f64,
    pub gamma3: f64,
    pub seed: u64,
}

impl MpoSpec {
    pub fn new(periods: usize, n: usize, seed: u64) -> Self {
        Self { periods, n, gamma2: 0.05, gamma3: 0.05, seed }
    }

    pub fn vars_per_period(&self) -> usize {
        2 * self.n + 1
    }

    pub fn rows_per_period(&self) -> usize {
        5 * self.n + 6
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpoData {
    /// `Σ̂τ` per period, dense row-major `n × n`.
    pub sigma: Vec<Vec<f64>>,
    /// `Σ̂τ^{1/2}` per period, dense row-major `n × n`.
    pub sigma_sqrt: Vec<Vec<f64>>,
    /// Predicted returns per period, length `n + 1` (cash last, zero).
    pub returns: Vec<Vec<f64>>,
    pub w0: Vec<f64>,
    pub wb: Vec<f64>,
    /// Asset values used by the neutrality row, per period, length `n`.
    pub wm: Vec<Vec<f64>>,
    pub gamma1: Vec<f64>,
    pub gamma2: f64,
    pub gamma3: f64,
}

fn mat_vec(a: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    (0..n).map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum()).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn mpo_data(spec: &MpoSpec) -> Result<MpoData> {
    let MpoSpec { periods, n, gamma2, gamma3, seed } = *spec;
    if periods == 0 || n < 2 {
        return Err(PdcsError::InvalidParams("mpo needs T >= 1 and n >= 2".into()));
    }
    if !(gamma2 > 0.0 && gamma3 > 0.0) {
        return Err(PdcsError::InvalidParams("mpo limits must be positive".into()));
    }
    let mut r = rng(seed);
    let loadings: Vec<f64> = (0..n * FACTORS).map(|_| r.sample(StandardNormal)).collect();
    let idio: Vec<f64> = (0..n).map(|_| r.random_range(0.01..0.1)).collect();
    let base_ret: Vec<f64> = (0..n).map(|_| r.random_range(-0.01..0.03)).collect();

    let w0: Vec<f64> = (0..=n).map(|i| if i < n { 1.0 / n as f64 } else { 0.0 }).collect();
    let mut wb = vec![0.0; n + 1];
    wb[n] = 1.0;
    let eq = &w0[..n];

    let mut data = MpoData {
        sigma: vec![],
        sigma_sqrt: vec![],
        returns: vec![],
        w0: w0.clone(),
        wb,
        wm: vec![],
        gamma1: vec![],
        gamma2,
        gamma3,
    };
    for tau in 0..periods {
        // the first period uses the estimates as drawn; later ones are noisy forecasts
        let noise = if tau == 0 { 0.0 } else { 0.1 };
        let f = DMatrix::from_fn(n, FACTORS, |i, k| {
            let e: f64 = r.sample(StandardNormal);
            loadings[i * FACTORS + k] * (1.0 + noise * e)
        });
        let mut s = &f * f.transpose();
        for i in 0..n {
            s[(i, i)] += idio[i];
        }
        s *= DAILY;
        let eig = SymmetricEigen::new(s.clone());
        let sq = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
        let root = &eig.eigenvectors * DMatrix::from_diagonal(&sq) * eig.eigenvectors.transpose();
        let sigma: Vec<f64> = (0..n * n).map(|k| s[(k / n, k % n)]).collect();
        // symmetrize away rounding so the root is exactly symmetric
        let sigma_sqrt: Vec<f64> =
            (0..n * n).map(|k| 0.5 * (root[(k / n, k % n)] + root[(k % n, k / n)])).collect();

        let mut ret: Vec<f64> = base_ret
            .iter()
            .map(|&v| v + noise * 0.01 * r.random_range(-1.0..1.0))
            .collect();
        ret.push(0.0);

        // asset values made Σ-orthogonal to the equal-weight portfolio
        let raw: Vec<f64> = (0..n).map(|_| r.random_range(0.5..1.5)).collect();
        let s_eq = mat_vec(&sigma, n, eq);
        let coef = crate::scalar::dot(&raw, &s_eq) / s_eq.iter().sum::<f64>();
        let wm: Vec<f64> = raw.iter().map(|v| v - coef).collect();

        let diff: Vec<f64> = (0..n).map(|i| w0[i] - data.wb[i]).collect();
        data.gamma1.push(norm(&mat_vec(&sigma_sqrt, n, &diff)));
        data.sigma.push(sigma);
        data.sigma_sqrt.push(sigma_sqrt);
        data.returns.push(ret);
        data.wm.push(wm);
    }
    Ok(data)
}

pub fn gen_mpo(spec: &MpoSpec) -> Result<Generated> {
    let data = mpo_data(spec)?;
    let n = spec.n;
    let nv = spec.vars_per_period() * spec.periods;
    let nr = spec.rows_per_period() * spec.periods;
    let wcol = |tau: usize, i: usize| tau * spec.vars_per_period() + i;
    let ucol = |tau: usize, i: usize| tau * spec.vars_per_period() + n + 1 + i;

    let mut c = vec![0.0; nv];
    let mut l = vec![0.0; nv];
    for tau in 0..spec.periods {
        for i in 0..=n {
            c[wcol(tau, i)] = -data.returns[tau][i];
        }
        for i in 0..n {
            l[ucol(tau, i)] = f64::NEG_INFINITY;
        }
    }

    let mut g = Triplets::default();
    let mut h = vec![0.0; nr];
    let mut dual_cones = Vec::with_capacity(3 * spec.periods);
    for tau in 0..spec.periods {
        let base = tau * spec.rows_per_period();
        let mut row = base;
        // w_τ enters the constant side for the first period and the matrix afterwards
        let prev = |g: &mut Triplets, h: &mut [f64], row: usize, i: usize, coef: f64| {
            if tau == 0 {
                h[row] -= coef * data.w0[i];
            } else {
                g.push(row, wcol(tau - 1, i), coef);
            }
        };

        for i in 0..=n {
            g.push(row, wcol(tau, i), 1.0);
            prev(&mut g, &mut h, row, i, -1.0);
        }
        row += 1;
        let swm = mat_vec(&data.sigma[tau], n, &data.wm[tau]);
        for i in 0..n {
            g.push(row, wcol(tau, i), swm[i]);
        }
        row += 1;
        dual_cones.push(Cone::zero(2));

        for i in 0..n {
            g.push(row, ucol(tau, i), 1.0);
            g.push(row, wcol(tau, i), -1.0);
            h[row] = -data.wb[i];
            row += 1;
        }
        for i in 0..n {
            g.push(row, ucol(tau, i), 1.0);
            g.push(row, wcol(tau, i), 1.0);
            h[row] = data.wb[i];
            row += 1;
        }
        for i in 0..n {
            g.push(row, ucol(tau, i), -data.sigma_sqrt[tau][i * n + i]);
        }
        h[row] = -data.gamma3;
        row += 1;
        for sign in [1.0, -1.0] {
            for i in 0..=n {
                g.push(row, wcol(tau, i), sign);
                prev(&mut g, &mut h, row, i, -sign);
                h[row] -= data.gamma2;
                row += 1;
            }
        }
        dual_cones.push(Cone::nonneg(4 * n + 3));

        h[row] = -data.gamma1[tau];
        row += 1;
        let root = &data.sigma_sqrt[tau];
        let target = mat_vec(root, n, &data.wb[..n]);
        for i in 0..n {
            for j in 0..n {
                g.push(row, wcol(tau, j), root[i * n + j]);
            }
            h[row] = target[i];
            row += 1;
        }
        dual_cones.push(Cone::soc(n + 1));
        debug_assert_eq!(row, base + spec.rows_per_period());
    }

    let program = ConicProgram {
        c,
        g: SparseMatrix::from_triplets(nr, nv, &g.rows, &g.cols, &g.vals)?,
        h,
        l,
        u: vec![f64::INFINITY; nv],
        primal_cones: vec![],
        dual_cones,
    };

    // hold the equal-weight portfolio throughout
    let mut x = vec![0.0; nv];
    for tau in 0..spec.periods {
        for i in 0..=n {
            x[wcol(tau, i)] = data.w0[i];
        }
        for i in 0..n {
            x[ucol(tau, i)] = (data.w0[i] - data.wb[i]).abs();
        }
    }
    Ok(Generated { program, feasible_x: x })
}

/// Largest violation of any portfolio constraint at `x`, measured in the original units.
pub fn mpo_violation(spec: &MpoSpec, data: &MpoData, x: &[f64]) -> f64 {
    let n = spec.n;
    let mut worst = 0.0f64;
    let mut prev = data.w0.clone();
    for tau in 0..spec.periods {
        let off = tau * spec.vars_per_period();
        let w = &x[off..off + n + 1];
        let u = &x[off + n + 1..off + 2 * n + 1];
        let budget: f64 = w.iter().sum::<f64>() - prev.iter().sum::<f64>();
        worst = worst.max(budget.abs());
        worst = worst.max(w.iter().fold(0.0f64, |m, &v| m.max(-v)));
        let swm = mat_vec(&data.sigma[tau], n, &data.wm[tau]);
        worst = worst.max(crate::scalar::dot(&swm, &w[..n]).abs());
        for i in 0..n {
            let d = w[i] - data.wb[i];
            worst = worst.max(d.abs() - u[i]);
        }
        let root = &data.sigma_sqrt[tau];
        let weighted: f64 = (0..n).map(|i| root[i * n + i] * u[i]).sum();
        worst = worst.max(weighted - data.gamma3);
        let diff: Vec<f64> = (0..n).map(|i| w[i] - data.wb[i]).collect();
        worst = worst.max(norm(&mat_vec(root, n, &diff)) - data.gamma1[tau]);
        for i in 0..=n {
            worst = worst.max((w[i] - prev[i]).abs() - data.gamma2);
        }
        prev = w.to_vec();
    }
    worst
}
