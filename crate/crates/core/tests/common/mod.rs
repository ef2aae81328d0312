//! Reference implementations used as test oracles. Nothing here calls into the projection or
//! solver code under test.
#![allow(dead_code)]

use nalgebra::DMatrix;
use pdcs::generators::fisher::FisherData;
use pdcs::generators::lasso::LassoData;
use pdcs::{Cone, ConicProgram, SparseMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(r: &mut ChaCha8Rng) -> f64 {
    r.sample(StandardNormal)
}

pub fn normals(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| normal(r)).collect()
}

/// `10^U[lo, hi]`.
pub fn log_uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(r.random_range(lo.log10()..=hi.log10()))
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

// ---------------------------------------------------------------------------------------------
// cones

/// Closed-form projection onto `{(t, x) : ‖x‖ ≤ t}`.
pub fn soc_closed_form(v: &[f64]) -> Vec<f64> {
    let (t, x) = (v[0], &v[1..]);
    let nx = norm(x);
    if nx <= t {
        return v.to_vec();
    }
    if nx <= -t {
        return vec![0.0; v.len()];
    }
    let a = (t + nx) / 2.0;
    let mut out = vec![a];
    out.extend(x.iter().map(|xi| a * xi / nx));
    out
}

fn rotate(v: &[f64]) -> Vec<f64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut w = v.to_vec();
    w[0] = (v[0] + v[1]) * h;
    w[1] = (v[0] - v[1]) * h;
    w
}

/// Projection onto `{(x, y, z) : 2xy ≥ ‖z‖², x, y ≥ 0}`.
pub fn rsoc_closed_form(v: &[f64]) -> Vec<f64> {
    rotate(&soc_closed_form(&rotate(v)))
}

/// Projection of `(t, x)` onto `{(s, y) : ‖D̂⁻¹y‖ ≤ s}` by direct minimization of the distance.
///
/// The projection of an outside point lies on the curve `y(λ) = D̂²(D̂² + 2λ)⁻¹x`,
/// `s(λ) = ‖D̂⁻¹y(λ)‖`, `λ ∈ [0, ∞]`, and every point of the curve is in the cone, so the distance
/// minimized over the curve is the projection distance. A log-spaced grid over `λ` brackets the
/// minimizer, which is then refined on the sign of the analytic derivative.
pub fn soc_rescaled_oracle(t: f64, x: &[f64], dhat: &[f64]) -> (f64, Vec<f64>) {
    let inside = x.iter().zip(dhat).map(|(a, d)| (a / d) * (a / d)).sum::<f64>().sqrt() <= t;
    if inside {
        return (t, x.to_vec());
    }
    let point = |lam: f64| {
        let y: Vec<f64> = x.iter().zip(dhat).map(|(a, d)| a * d * d / (d * d + 2.0 * lam)).collect();
        let s = y.iter().zip(dhat).map(|(a, d)| (a / d) * (a / d)).sum::<f64>().sqrt();
        (s, y)
    };
    let objective = |lam: f64| {
        let (s, y) = point(lam);
        (s - t) * (s - t) + dist(&y, x).powi(2)
    };
    let slope = |lam: f64| {
        let (s, y) = point(lam);
        if s == 0.0 {
            return 0.0;
        }
        let dy: Vec<f64> = y.iter().zip(dhat).map(|(a, d)| -2.0 * a / (d * d + 2.0 * lam)).collect();
        let ds = y.iter().zip(&dy).zip(dhat).map(|((a, b), d)| a * b / (d * d)).sum::<f64>() / s;
        2.0 * (s - t) * ds + 2.0 * y.iter().zip(x).zip(&dy).map(|((a, b), c)| (a - b) * c).sum::<f64>()
    };
    // λ = 0, a log grid on [1e-14, 1e14], and the apex
    let mut grid = vec![0.0];
    let steps = 2800;
    grid.extend((0..=steps).map(|k| 10f64.powf(-14.0 + 28.0 * k as f64 / steps as f64)));
    let mut best = (t * t + norm(x).powi(2), f64::INFINITY, usize::MAX);
    for (k, &lam) in grid.iter().enumerate() {
        let v = objective(lam);
        if v < best.0 {
            best = (v, lam, k);
        }
    }
    if best.2 == usize::MAX {
        return (0.0, vec![0.0; x.len()]);
    }
    let k = best.2;
    let mut lo = if k == 0 { 0.0 } else { grid[k - 1] };
    let mut hi = if k + 1 < grid.len() { grid[k + 1] } else { grid[k] * 2.0 };
    if slope(lo) < 0.0 && slope(hi) > 0.0 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if slope(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        point(0.5 * (lo + hi))
    } else {
        point(best.1)
    }
}

/// `K_exp = cl{(r, s, t) : s > 0, t ≥ s·exp(r/s)}` with additive slack.
pub fn exp_member(v: [f64; 3], tol: f64) -> bool {
    let [r, s, t] = v;
    if s > 0.0 && t >= s * (r / s).exp() - tol {
        return true;
    }
    s.abs() <= tol && r <= tol && t >= -tol
}

/// `K_exp* = cl{(u, v, w) : u < 0, e·w ≥ −u·exp(v/u)}` with additive slack.
pub fn exp_dual_member(v: [f64; 3], tol: f64) -> bool {
    let [u, s, w] = v;
    if u < 0.0 && std::f64::consts::E * w >= -u * (s / u).exp() - tol {
        return true;
    }
    u.abs() <= tol && s >= -tol && w >= -tol
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Projection onto the unscaled `K_exp` as the nearest of two boundary pieces: the smooth part
/// `{s·(ρ, 1, e^ρ) : s ≥ 0}`, searched over `ρ`, and the face `{(r, 0, t) : r ≤ 0, t ≥ 0}`.
pub fn exp_oracle(v: [f64; 3]) -> [f64; 3] {
    if exp_member(v, 0.0) {
        return v;
    }
    if exp_dual_member([-v[0], -v[1], -v[2]], 0.0) {
        return [0.0; 3];
    }
    let face = [v[0].min(0.0), 0.0, v[2].max(0.0)];
    let ray = |rho: f64| [rho, 1.0, rho.exp()];
    // maximizes ⟨v, a⟩/‖a‖; its derivative has the sign of ⟨v, a'⟩‖a‖² − ⟨v, a⟩⟨a, a'⟩
    let score = |rho: f64| {
        let a = ray(rho);
        dot3(v, a) / dot3(a, a).sqrt()
    };
    let slope = |rho: f64| {
        let a = ray(rho);
        let da = [1.0, 0.0, rho.exp()];
        dot3(v, da) * dot3(a, a) - dot3(v, a) * dot3(a, da)
    };
    // uniform on [−60, 60], geometric further left where the ray flattens towards (−1, 0, 0)
    let mut grid: Vec<f64> = (0..=24_000).map(|k| -60.0 + 120.0 * k as f64 / 24_000.0).collect();
    let mut g = -60.0;
    while g > -1e12 {
        g *= 1.002;
        grid.push(g);
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut best = (f64::NEG_INFINITY, 0);
    for (k, &rho) in grid.iter().enumerate() {
        let sc = score(rho);
        if sc > best.0 {
            best = (sc, k);
        }
    }
    let k = best.1;
    let (mut lo, mut hi) = (grid[k.saturating_sub(1)], grid[(k + 1).min(grid.len() - 1)]);
    let mut rho = grid[k];
    if slope(lo) > 0.0 && slope(hi) < 0.0 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if slope(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        rho = 0.5 * (lo + hi);
    }
    let a = ray(rho);
    let c = (dot3(v, a) / dot3(a, a)).max(0.0);
    let smooth = [c * a[0], c * a[1], c * a[2]];
    let d = |p: [f64; 3]| dist(&p, &v);
    if d(smooth) <= d(face) {
        smooth
    } else {
        face
    }
}

/// `P_{K*}(v) = v + P_K(−v)`.
pub fn exp_dual_oracle(v: [f64; 3]) -> [f64; 3] {
    let p = exp_oracle([-v[0], -v[1], -v[2]]);
    [v[0] + p[0], v[1] + p[1], v[2] + p[2]]
}

// ---------------------------------------------------------------------------------------------
// programs with known saddle points

pub struct Saddle {
    pub program: ConicProgram<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

fn unit(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v = normals(r, n);
        let nv = norm(&v);
        if nv > 1e-3 {
            return v.iter().map(|a| a / nv).collect();
        }
    }
}

/// A complementary pair `(a ∈ K, b ∈ K*)` with `⟨a, b⟩ = 0` for one block.
fn complementary_pair(r: &mut ChaCha8Rng, kind: &str, dim: usize) -> (Vec<f64>, Vec<f64>) {
    let scale = |r: &mut ChaCha8Rng| r.random_range(0.2..2.0);
    match kind {
        "zero" => (vec![0.0; dim], normals(r, dim)),
        "nonneg" => {
            let mut a = vec![0.0; dim];
            let mut b = vec![0.0; dim];
            for i in 0..dim {
                match r.random_range(0..3) {
                    0 => a[i] = scale(r),
                    1 => b[i] = scale(r),
                    _ => {}
                }
            }
            (a, b)
        }
        "soc" => {
            let u = unit(r, dim - 1);
            let (sa, sb) = match r.random_range(0..3) {
                0 => (scale(r), scale(r)),
                1 => (scale(r), 0.0),
                _ => (0.0, scale(r)),
            };
            let mut a = vec![sa];
            a.extend(u.iter().map(|v| sa * v));
            let mut b = vec![sb];
            b.extend(u.iter().map(|v| -sb * v));
            (a, b)
        }
        "exp" => {
            let rho: f64 = r.random_range(-2.0..2.0);
            let (sa, sb) = (scale(r), scale(r));
            (
                vec![sa * rho, sa, sa * rho.exp()],
                vec![-sb, sb * (rho - 1.0), sb * (-rho).exp()],
            )
        }
        _ => unreachable!(),
    }
}

/// Random program with box, SOC/exp primal blocks and zero/nonneg/SOC/exp constraint blocks,
/// built around a chosen saddle point.
pub fn saddle_instance(seed: u64) -> Saddle {
    let mut r = rng(seed);
    let n1 = r.random_range(1..4);
    let primal_kinds: Vec<(&str, usize)> = vec![("soc", r.random_range(2..5)), ("exp", 3)];
    let dual_kinds: Vec<(&str, usize)> =
        vec![("zero", r.random_range(1..3)), ("nonneg", r.random_range(1..4)), ("soc", 3), ("exp", 3)];
    let n2: usize = primal_kinds.iter().map(|k| k.1).sum();
    let m: usize = dual_kinds.iter().map(|k| k.1).sum();
    let n = n1 + n2;

    // box part: at a bound with a multiplier of the right sign, or interior with zero multiplier
    let mut l = vec![0.0; n1];
    let mut u = vec![0.0; n1];
    let mut x = vec![0.0; n];
    let mut lam = vec![0.0; n];
    for j in 0..n1 {
        let lo = r.random_range(-1.0..0.0);
        let hi = lo + r.random_range(0.5..2.0);
        match r.random_range(0..4) {
            0 => {
                (l[j], u[j]) = (lo, hi);
                x[j] = lo;
                lam[j] = r.random_range(0.1..1.0);
            }
            1 => {
                (l[j], u[j]) = (lo, hi);
                x[j] = hi;
                lam[j] = -r.random_range(0.1..1.0);
            }
            2 => {
                (l[j], u[j]) = (f64::NEG_INFINITY, f64::INFINITY);
                x[j] = normal(&mut r);
            }
            _ => {
                (l[j], u[j]) = (lo, f64::INFINITY);
                x[j] = lo + r.random_range(0.1..1.0);
            }
        }
    }
    let mut off = n1;
    for &(k, d) in &primal_kinds {
        let (a, b) = complementary_pair(&mut r, k, d);
        x[off..off + d].copy_from_slice(&a);
        lam[off..off + d].copy_from_slice(&b);
        off += d;
    }
    let mut slack = vec![0.0; m];
    let mut y = vec![0.0; m];
    let mut off = 0;
    for &(k, d) in &dual_kinds {
        let (a, b) = complementary_pair(&mut r, k, d);
        slack[off..off + d].copy_from_slice(&a);
        y[off..off + d].copy_from_slice(&b);
        off += d;
    }

    let dense: Vec<f64> = (0..m * n)
        .map(|_| if r.random::<f64>() < 0.6 { normal(&mut r) } else { 0.0 })
        .collect();
    let g = SparseMatrix::from_dense(m, n, &dense).unwrap();
    let gx = g.spmv(&x).unwrap();
    let gty = g.spmv_t(&y).unwrap();
    let h: Vec<f64> = gx.iter().zip(&slack).map(|(a, b)| a - b).collect();
    let c: Vec<f64> = gty.iter().zip(&lam).map(|(a, b)| a + b).collect();
    let cones = |ks: &[(&str, usize)]| -> Vec<Cone> {
        ks.iter()
            .map(|&(k, d)| match k {
                "zero" => Cone::zero(d),
                "nonneg" => Cone::nonneg(d),
                "soc" => Cone::soc(d),
                _ => Cone::exp(),
            })
            .collect()
    };
    let program = ConicProgram {
        c,
        g,
        h,
        l,
        u,
        primal_cones: cones(&primal_kinds),
        dual_cones: cones(&dual_kinds),
    };
    assert!(program.validate().is_empty());
    Saddle { program, x, y }
}

/// Small random program with mixed cones, not necessarily feasible.
pub fn random_program(seed: u64) -> ConicProgram<f64> {
    let s = saddle_instance(seed);
    let mut p = s.program;
    let mut r = rng(seed ^ 0x5eed);
    p.h.iter_mut().for_each(|v| *v += 0.1 * normal(&mut r));
    p
}

// ---------------------------------------------------------------------------------------------
// original-problem oracles

/// Accelerated proximal gradient for `min ‖Ax − b‖² + λ‖x‖₁`, run to stationarity. Products
/// with `A` go through its triplet list; the step comes from a dense SVD.
pub fn lasso_fista(data: &LassoData, max_iters: usize) -> (Vec<f64>, f64) {
    let (m, n) = (data.a.nrows(), data.a.ncols());
    let trip: Vec<(usize, usize, f64)> = data.a.triplets().collect();
    let ax = |x: &[f64]| {
        let mut out = vec![0.0; m];
        for &(i, j, v) in &trip {
            out[i] += v * x[j];
        }
        out
    };
    let aty = |y: &[f64]| {
        let mut out = vec![0.0; n];
        for &(i, j, v) in &trip {
            out[j] += v * y[i];
        }
        out
    };
    let dense = DMatrix::from_row_slice(m, n, &data.a.to_dense());
    let top = dense.svd(false, false).singular_values.max();
    let step = 1.0 / (2.0 * top * top).max(1e-300);
    let lam = data.lambda;
    let obj = |x: &[f64]| {
        let r = ax(x);
        r.iter().zip(&data.b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>()
            + lam * x.iter().map(|v| v.abs()).sum::<f64>()
    };
    let mut x = vec![0.0; n];
    let mut z = x.clone();
    let mut tk = 1.0f64;
    let mut fx = obj(&x);
    for _ in 0..max_iters {
        let r: Vec<f64> = ax(&z).iter().zip(&data.b).map(|(p, q)| p - q).collect();
        let grad = aty(&r);
        let xn: Vec<f64> = z
            .iter()
            .zip(&grad)
            .map(|(zi, gi)| {
                let v = zi - step * 2.0 * gi;
                v.signum() * (v.abs() - step * lam).max(0.0)
            })
            .collect();
        let fnew = obj(&xn);
        // restart the momentum whenever the objective goes up
        if fnew > fx {
            z = x.clone();
            tk = 1.0;
            continue;
        }
        let tn = (1.0 + (1.0 + 4.0 * tk * tk).sqrt()) / 2.0;
        let moved = max_abs_diff(&xn, &x);
        z = xn.iter().zip(&x).map(|(a, b)| a + ((tk - 1.0) / tn) * (a - b)).collect();
        x = xn;
        tk = tn;
        fx = fnew;
        if moved <= 1e-16 * (1.0 + x.iter().fold(0.0f64, |a, v| a.max(v.abs()))) {
            break;
        }
    }
    (x, fx)
}

/// KKT violations of the Eisenberg–Gale program `max Σ wᵢ log(Uᵢ·Xᵢ)` s.t. `Σᵢ Xᵢⱼ = bⱼ`,
/// `X ≥ 0`, at `X` with the equilibrium prices `pⱼ = maxᵢ wᵢUᵢⱼ/uᵢ`.
///
/// Returns `(clearing, sign, complementarity)`: the largest `|Σᵢ Xᵢⱼ − bⱼ|`, the largest
/// `−Xᵢⱼ`, and the largest `Xᵢⱼ·(pⱼ − wᵢUᵢⱼ/uᵢ)`. Dual feasibility `pⱼ ≥ wᵢUᵢⱼ/uᵢ` holds by
/// construction of `p`.
pub fn fisher_kkt(data: &FisherData, m: usize, n: usize, x: &[f64]) -> (f64, f64, f64) {
    let u = &data.utility;
    let util: Vec<f64> = (0..m).map(|i| (0..n).map(|j| u[i * n + j] * x[i * n + j]).sum()).collect();
    let price: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| data.budget[i] * u[i * n + j] / util[i]).fold(0.0, f64::max))
        .collect();
    let clearing = (0..n)
        .map(|j| ((0..m).map(|i| x[i * n + j]).sum::<f64>() - data.supply[j]).abs())
        .fold(0.0, f64::max);
    let sign = x[..m * n].iter().fold(0.0f64, |a, &v| a.max(-v));
    let mut comp = 0.0f64;
    for i in 0..m {
        for j in 0..n {
            let gap = price[j] - data.budget[i] * u[i * n + j] / util[i];
            comp = comp.max(x[i * n + j].max(0.0) * gap);
        }
    }
    (clearing, sign, comp)
}
