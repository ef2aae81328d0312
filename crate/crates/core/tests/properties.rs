mod common;

use common::*;
use pdcs::cones::exp::ExpProjectionProblem;
use pdcs::cones::{in_cone, in_dual_cone, BlockProjector};
use pdcs::generators::{gen_fisher, gen_lasso, gen_mpo, FisherSpec, LassoSpec, MpoSpec};
use pdcs::io::{instance_from_json, instance_to_json, report_from_json, report_to_json};
use pdcs::scaling::{cone_scaling_slices, scale_program, ScalingOptions};
use pdcs::solver::{reflected_halpern, Iterate, PdhgOperator};
use pdcs::{
    compute_residuals, sgm, solve, Cone, ConeKind, ConicProgram, SolverParamsF64, SparseMatrix,
    Status,
};
use proptest::prelude::*;

fn lp_a() -> ConicProgram<f64> {
    ConicProgram {
        c: vec![1.0, 1.0],
        g: SparseMatrix::from_dense(1, 2, &[1.0, 1.0]).unwrap(),
        h: vec![1.0],
        l: vec![0.0, 0.0],
        u: vec![f64::INFINITY; 2],
        primal_cones: vec![],
        dual_cones: vec![Cone::nonneg(1)],
    }
}

fn iterate(p: &ConicProgram<f64>, x: Vec<f64>, y: Vec<f64>) -> Iterate<f64> {
    let gx = p.g.spmv(&x).unwrap();
    let gty = p.g.spmv_t(&y).unwrap();
    Iterate { x, y, gx, gty, eta: 1.0 }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn kind_strategy() -> impl Strategy<Value = (ConeKind, usize)> {
    prop_oneof![
        (1usize..6).prop_map(|d| (ConeKind::Zero, d)),
        (1usize..6).prop_map(|d| (ConeKind::NonNeg, d)),
        (2usize..7).prop_map(|d| (ConeKind::SecondOrder, d)),
        (3usize..7).prop_map(|d| (ConeKind::RotatedSecondOrder, d)),
        Just((ConeKind::Exponential, 3)),
        Just((ConeKind::DualExponential, 3)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dual_slack_is_c_minus_gty(seed in 0u64..1000) {
        let p = random_program(seed);
        let y = normals(&mut rng(seed), p.m());
        let (l1, l2) = p.dual_slack(&y).unwrap();
        let gty = p.g.spmv_t(&y).unwrap();
        let want: Vec<f64> = p.c.iter().zip(&gty).map(|(c, g)| c - g).collect();
        prop_assert_eq!(l1.len(), p.n1());
        prop_assert_eq!([l1, l2].concat(), want);
    }

    #[test]
    fn validate_is_idempotent(seed in 0u64..1000, corrupt in 0usize..4) {
        let mut p = random_program(seed);
        match corrupt {
            1 => p.h.push(0.0),
            2 => p.c[0] = f64::NAN,
            3 => p.dual_cones.push(Cone::soc(1)),
            _ => {}
        }
        let a = p.validate();
        prop_assert_eq!(&a, &p.validate());
        prop_assert_eq!(a.is_empty(), corrupt == 0);
    }

    #[test]
    fn spmv_adjoint_and_reproducible(seed in 0u64..1000) {
        let p = random_program(seed);
        let mut r = rng(seed ^ 7);
        let x = normals(&mut r, p.n());
        let y = normals(&mut r, p.m());
        let gx = p.g.spmv(&x).unwrap();
        let gty = p.g.spmv_t(&y).unwrap();
        let (a, b) = (dot(&y, &gx), dot(&x, &gty));
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        prop_assert_eq!(gx, p.g.spmv(&x).unwrap());
        prop_assert_eq!(gty, p.g.spmv_t(&y).unwrap());
    }

    #[test]
    fn projection_idempotent_on_scaled_cones(
        (kind, dim) in kind_strategy(),
        seed in 0u64..10_000,
    ) {
        let mut r = rng(seed);
        let mut scale: Vec<f64> = (0..dim).map(|_| log_uniform(&mut r, 0.1, 10.0)).collect();
        if kind == ConeKind::RotatedSecondOrder {
            scale[1] = scale[0];
        }
        let p = BlockProjector::for_cone(kind, Some(&scale)).unwrap();
        let mut v = normals(&mut r, dim);
        p.project_in_place(&mut v).unwrap();
        let mut w = v.clone();
        p.project_in_place(&mut w).unwrap();
        prop_assert!(max_abs_diff(&v, &w) <= 1e-10 * (1.0 + norm(&v)));
        // the result lies in D·K: dividing by the scaling lands in the cone
        let u: Vec<f64> = v.iter().zip(&scale).map(|(a, s)| a / s).collect();
        prop_assert!(in_cone(&u, Cone::new(kind, dim), 1e-9));
    }

    #[test]
    fn exp_moreau_decomposition(
        v in prop::array::uniform3(-10.0f64..10.0),
        d in prop::array::uniform3(0.1f64..10.0),
    ) {
        let dec = ExpProjectionProblem::new(v, d).unwrap().decompose().unwrap();
        let nv = norm(&v);
        for i in 0..3 {
            prop_assert!((v[i] - dec.vp[i] - dec.vd[i]).abs() <= 1e-9 * (1.0 + nv));
        }
        prop_assert!(dot(&dec.vp, &dec.vd).abs() <= 1e-9 * (1.0 + nv * nv));
        let vp: [f64; 3] = std::array::from_fn(|i| dec.vp[i] / d[i]);
        let vd: [f64; 3] = std::array::from_fn(|i| -dec.vd[i] * d[i]);
        prop_assert!(exp_member(vp, 1e-9));
        prop_assert!(exp_dual_member(vd, 1e-9));
    }

    #[test]
    fn scaling_round_trip_preserves_residuals(seed in 0u64..500) {
        let s = saddle_instance(seed);
        let p = &s.program;
        let mut r = rng(seed + 1);
        let x: Vec<f64> = s.x.iter().map(|a| a + 0.1 * normal(&mut r)).collect();
        let y: Vec<f64> = s.y.iter().map(|a| a + 0.1 * normal(&mut r)).collect();
        let (scaled, info) = scale_program(p, &ScalingOptions::default()).unwrap();
        let (xs, ys) = info.scale_point(&x, &y);
        let (xb, yb) = info.unscale_point(&xs, &ys);
        prop_assert!(max_abs_diff(&xb, &x) <= 1e-12 * (1.0 + norm(&x)));
        prop_assert!(max_abs_diff(&yb, &y) <= 1e-12 * (1.0 + norm(&y)));
        // objectives agree between the scaled and original programs
        let (a, b) = (p.objective(&x), scaled.objective(&xs));
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        // residuals are measured on the original data after unscaling
        let r1 = compute_residuals(p, &x, &y).unwrap();
        let r2 = compute_residuals(p, &xb, &yb).unwrap();
        prop_assert!((r1.err_p - r2.err_p).abs() <= 1e-9);
        prop_assert!((r1.err_d - r2.err_d).abs() <= 1e-9);
        prop_assert!((r1.err_gap - r2.err_gap).abs() <= 1e-9);
    }

    #[test]
    fn scaled_projectors_map_into_scaled_cones(seed in 0u64..500) {
        let s = saddle_instance(seed);
        let (scaled, info) = scale_program(&s.program, &ScalingOptions::default()).unwrap();
        let slices = cone_scaling_slices(&info, &scaled).unwrap();
        let mut r = rng(seed + 2);
        let n1 = scaled.n1();
        let mut x2 = normals(&mut r, scaled.n2());
        slices.primal.project_in_place(&mut x2).unwrap();
        let mut y = normals(&mut r, scaled.m());
        slices.dual.project_in_place(&mut y).unwrap();
        // undo the scaling: the unscaled points must lie in the original cones
        let (x, yu) = info.unscale_point(&[vec![0.0; n1], x2].concat(), &y);
        for (range, cone) in s.program.primal_blocks().into_iter().zip(&s.program.primal_cones) {
            prop_assert!(in_cone(&x[range], *cone, 1e-9));
        }
        let blocks = s.program.dual_blocks();
        for (range, cone) in blocks.into_iter().zip(&s.program.dual_cones) {
            prop_assert!(in_dual_cone(&yu[range], *cone, 1e-9));
        }
    }

    #[test]
    fn sgm_monotone_and_permutation_invariant(
        times in prop::collection::vec(0.0f64..200.0, 1..12),
        bump in 0.0f64..50.0,
        idx in any::<prop::sample::Index>(),
        shift in 0.0f64..20.0,
    ) {
        let cap = 150.0;
        let base = sgm(&times, shift, cap).unwrap();
        let mut rev = times.clone();
        rev.reverse();
        prop_assert!((sgm(&rev, shift, cap).unwrap() - base).abs() <= 1e-12 * (1.0 + base));
        let mut slower = times.clone();
        slower[idx.index(times.len())] += bump;
        prop_assert!(sgm(&slower, shift, cap).unwrap() >= base - 1e-12 * (1.0 + base));
    }

    #[test]
    fn gap_is_symmetric_under_swap(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        // x = (a, 0), y = b has objectives (a, b); swapping swaps them
        let p = lp_a();
        let r1 = compute_residuals(&p, &[a, 0.0], &[b]).unwrap();
        let r2 = compute_residuals(&p, &[b, 0.0], &[a]).unwrap();
        prop_assert!((r1.err_gap - r2.err_gap).abs() <= 1e-15);
    }

    #[test]
    fn residuals_invariant_in_kind_under_data_scaling(seed in 0u64..500, kappa in 1e-3f64..1e3) {
        let s = saddle_instance(seed);
        let mut p = s.program.clone();
        for v in p.c.iter_mut().chain(p.h.iter_mut()).chain(p.l.iter_mut()).chain(p.u.iter_mut()) {
            *v *= kappa;
        }
        let x: Vec<f64> = s.x.iter().map(|a| a * kappa).collect();
        let y: Vec<f64> = s.y.iter().map(|a| a * kappa).collect();
        let res = compute_residuals(&p, &x, &y).unwrap();
        prop_assert!(res.err_p.max(res.err_d).max(res.err_gap) <= 1e-9, "{:?}", res);
    }

    #[test]
    fn halpern_without_reflection_contracts_to_anchor(
        seed in 0u64..1000,
        k in 0u64..1000,
    ) {
        let p = random_program(seed);
        let mut r = rng(seed);
        let z = iterate(&p, normals(&mut r, p.n()), normals(&mut r, p.m()));
        let a = iterate(&p, normals(&mut r, p.n()), normals(&mut r, p.m()));
        let next = reflected_halpern(&z, &z, &a, 0.0, k);
        let w = 1.0 / (k as f64 + 2.0);
        for (got, (zi, ai)) in next.x.iter().zip(z.x.iter().zip(&a.x)) {
            prop_assert!((got - (ai + (k as f64 + 1.0) * w * (zi - ai))).abs() <= 1e-12 * (1.0 + zi.abs() + ai.abs()));
        }
        for (got, (zi, ai)) in next.y.iter().zip(z.y.iter().zip(&a.y)) {
            prop_assert!((got - (ai + (k as f64 + 1.0) * w * (zi - ai))).abs() <= 1e-12 * (1.0 + zi.abs() + ai.abs()));
        }
    }

    #[test]
    fn accepted_step_respects_bound(seed in 0u64..500, omega in 0.1f64..10.0, eta in 0.01f64..100.0) {
        let p = random_program(seed);
        let (scaled, info) = scale_program(&p, &ScalingOptions::default()).unwrap();
        let slices = cone_scaling_slices(&info, &scaled).unwrap();
        let mut r = rng(seed + 3);
        let z = iterate(&scaled, normals(&mut r, scaled.n()), normals(&mut r, scaled.m()));
        let mut op = PdhgOperator::new(&scaled, &slices).unwrap();
        let out = pdcs::solver::adaptive_step(&z, omega, eta, &scaled, &slices).unwrap();
        let trial = op.trial(&z, out.eta / omega, out.eta * omega).unwrap();
        prop_assert!(out.eta <= PdhgOperator::step_bound(&z, &trial, omega));
        prop_assert!(out.eta_next >= 0.0 && out.eta_next <= PdhgOperator::step_bound(&z, &trial, omega));
    }

    #[test]
    fn instance_json_round_trip(seed in 0u64..1000) {
        let p = random_program(seed);
        let back = instance_from_json(&instance_to_json(&p).unwrap()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn generators_deterministic_and_feasible(seed in 0u64..50, family in 0usize..3) {
        let run = |s: u64| match family {
            0 => gen_lasso(&LassoSpec { sparsity: 0.05, ..LassoSpec::new(6, 12, s) }).unwrap(),
            1 => gen_fisher(&FisherSpec::new(4, 5, s)).unwrap(),
            _ => gen_mpo(&MpoSpec::new(2, 4, s)).unwrap(),
        };
        let (a, b) = (run(seed), run(seed));
        prop_assert_eq!(&a.program, &b.program);
        prop_assert!(a.program.validate().is_empty());
        let c = run(seed + 1000);
        prop_assert_ne!(&a.program, &c.program);
        // the certificate satisfies boxes and cones; primal residual only, y = 0
        let res = compute_residuals(&a.program, &a.feasible_x, &vec![0.0; a.program.m()]).unwrap();
        prop_assert!(res.err_p <= 1e-9, "err_p {}", res.err_p);
        let n1 = a.program.n1();
        for (j, &xj) in a.feasible_x[..n1].iter().enumerate() {
            prop_assert!(a.program.l[j] <= xj && xj <= a.program.u[j]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn solver_is_deterministic(seed in 0u64..100) {
        let p = gen_fisher(&FisherSpec::new(3, 4, seed)).unwrap().program;
        let params = SolverParamsF64 { max_iters: 400, ..Default::default() };
        let mut a = solve(&p, &params).unwrap();
        let mut b = solve(&p, &params).unwrap();
        a.wall_seconds = 0.0;
        b.wall_seconds = 0.0;
        prop_assert_eq!(report_to_json(&a).unwrap(), report_to_json(&b).unwrap());
        let back = report_from_json(&report_to_json(&a).unwrap()).unwrap();
        prop_assert_eq!(report_to_json(&back).unwrap(), report_to_json(&a).unwrap());
    }

    #[test]
    fn solver_handles_scaled_data(kappa_exp in -3i32..=3) {
        let kappa = 10f64.powi(kappa_exp);
        let mut p = lp_a();
        p.c.iter_mut().for_each(|v| *v *= kappa);
        p.h.iter_mut().for_each(|v| *v *= kappa);
        let rep = solve(&p, &SolverParamsF64::default()).unwrap();
        prop_assert_eq!(rep.status, Status::Optimal);
        // residuals are relative to 1 + data norms, so accuracy is absolute for small κ
        prop_assert!((rep.primal_obj - kappa * kappa).abs() <= 1e-4 * (1.0 + kappa * kappa));
    }
}
