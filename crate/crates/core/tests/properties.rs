//! Property tests for the invariants each module promises.

use proptest::prelude::*;

use kinterp::holmstedt_lab::{lhs_decomposition, prepare_profile, HolmstedtCase};
use kinterp::interp_norms::{index, ln_partial_norms, space_norm, IndexKind, Limiting, Weighted};
use kinterp::logfn::{ClosureFn, PowerFn, ProductFn};
use kinterp::profiles::{check_quasiconcave, k_from_rearrangement, realize_rearrangement, truncation_split, KProfile, Rearrangement};
use kinterp::quadrature::{GridSpec, QuadOptions};
use kinterp::reiteration::{build_hat_b, build_tilde_b, lk_embedding_check, ReiterationSpec, Side};
use kinterp::sv_algebra::{ln_integral_x, WeightExpr};
use kinterp::weighted_ineq::{
    best_constant_probe, compute_constant, ln_extremal_direct, ln_extremal_split, ElemFn, InequalitySpec, Which,
};
use kinterp::LogFn;

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn grid() -> Vec<f64> {
    GridSpec::coarse(1e-8, 1e8, 2).points()
}

/// `log(a0, aInf)` or a product with `explog`.
fn any_weight() -> impl Strategy<Value = WeightExpr<f64>> {
    prop_oneof![
        (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b)| WeightExpr::log(a, b)),
        (-3.0..3.0f64, -3.0..3.0f64, 0.1..0.9f64)
            .prop_map(|(a, b, c)| WeightExpr::log(a, b).mul(WeightExpr::explog(c).unwrap())),
    ]
}

/// `log(a0, aInf)` in `SV_(0,1)`.
fn sv0_weight() -> impl Strategy<Value = WeightExpr<f64>> {
    (-2.0..1.0f64, -4.0..-1.5f64).prop_map(|(a, b)| WeightExpr::log(a, b))
}

/// Step rearrangement with 1..5 steps.
fn steps() -> impl Strategy<Value = Rearrangement<f64>> {
    prop::collection::vec((-3.0..3.0f64, -2.0..2.0f64), 1..5).prop_map(|v| {
        let mut ts: Vec<f64> = v.iter().map(|p| 10f64.powf(p.0)).collect();
        let mut ys: Vec<f64> = v.iter().map(|p| 10f64.powf(p.1)).collect();
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ts.dedup_by(|a, b| (*a / *b - 1.0).abs() < 1e-9);
        ys.truncate(ts.len());
        ys.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Rearrangement::steps(&ts.into_iter().zip(ys).collect::<Vec<_>>()).unwrap()
    })
}

/// Concave profile: linear, then powers with decreasing exponents, then flat.
fn concave_profile() -> impl Strategy<Value = KProfile<f64>> {
    prop::collection::vec((0.2..1.5f64, 0.0..1.0f64), 1..5).prop_map(|v| {
        let mut exps: Vec<f64> = v.iter().map(|p| p.1).collect();
        exps.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut nodes = vec![(10f64.powf(-2.0), 10f64.powf(-2.0))];
        for (i, p) in v.iter().enumerate() {
            let (t, k) = nodes[i];
            let t2 = t * 10f64.powf(p.0);
            nodes.push((t2, k * (t2 / t).powf(exps[i])));
        }
        KProfile::from_parts(&nodes, &exps, 1.0, 0.0).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn product_and_power_closure(b1 in any_weight(), b2 in any_weight(), r in -2.0..2.0f64) {
        let p = b1.clone().mul(b2.clone());
        let w = b1.clone().pow(r).unwrap();
        for t in grid() {
            prop_assert!(rel(p.eval(t), b1.eval(t) * b2.eval(t)) <= 1e-12);
            prop_assert!(rel(w.eval(t), b1.eval(t).powf(r)) <= 1e-12);
        }
    }

    #[test]
    fn flip_is_an_involution(b in any_weight()) {
        let ff = b.clone().flip().flip();
        for t in grid() {
            prop_assert_eq!(ff.eval(t), b.eval(t));
        }
    }

    #[test]
    fn partial_norms_are_monotone(b in any_weight(), q in 0.5..3.0f64) {
        let ts = grid();
        for w in ts.windows(2) {
            prop_assert!(b.tail_qnorm(q, w[1]) <= b.tail_qnorm(q, w[0]) * (1.0 + 1e-12));
            prop_assert!(b.head_qnorm(q, w[1]) >= b.head_qnorm(q, w[0]) * (1.0 - 1e-12));
        }
    }

    #[test]
    fn integration_is_additive_and_monotone(b in any_weight(), alpha in 0.2..2.0f64, a in -8.0..0.0f64, m in 0.1..6.0f64, c in 0.1..6.0f64) {
        let p = PowerFn(-alpha);
        let g = ProductFn::new().with(&p).with(&b);
        let o = QuadOptions::default();
        let whole = ln_integral_x(&g, 1.0, a, a + m + c, &o).unwrap().exp();
        let left = ln_integral_x(&g, 1.0, a, a + m, &o).unwrap().exp();
        let right = ln_integral_x(&g, 1.0, a + m, a + m + c, &o).unwrap().exp();
        prop_assert!(rel(whole, left + right) <= 2e-9);
        prop_assert!(whole >= left && whole >= right);
        let tail = ln_integral_x(&g, 1.0, a, f64::INFINITY, &o).unwrap().exp();
        prop_assert!(tail >= whole * (1.0 - 1e-12));
    }

    #[test]
    fn integration_is_dilation_invariant(p in 0.2..2.0f64, beta in 0.2..3.0f64, q in 0.5..3.0f64) {
        let g = ElemFn::new(1.0, p, beta);
        let o = QuadOptions::default();
        let base = ln_integral_x(&g, q, f64::NEG_INFINITY, f64::INFINITY, &o).unwrap();
        for lambda in [0.1f64, 10.0] {
            let s = lambda.ln();
            let h = ClosureFn::new(|x: f64| g.ln_at(x + s));
            let v = ln_integral_x(&h, q, f64::NEG_INFINITY, f64::INFINITY, &o).unwrap();
            prop_assert!(rel(v.exp(), base.exp()) <= 1e-9, "lambda {} {} {}", lambda, v, base);
        }
    }

    #[test]
    fn realization_round_trips(phi in concave_profile()) {
        let k = k_from_rearrangement(&realize_rearrangement(&phi).unwrap()).unwrap();
        for t in grid() {
            prop_assert!(rel(k.eval(t), phi.eval(t)) <= 1e-12, "t {} {} {}", t, k.eval(t), phi.eval(t));
        }
    }

    #[test]
    fn truncation_splits_k(f in steps(), l in -2.5..2.5f64) {
        let (f0, f1) = truncation_split(&f, 10f64.powf(l)).unwrap();
        let (k, k0, k1) = (k_from_rearrangement(&f).unwrap(), k_from_rearrangement(&f0).unwrap(), k_from_rearrangement(&f1).unwrap());
        prop_assert!(check_quasiconcave(&k).ok);
        for t in grid() {
            prop_assert!(rel(k0.eval(t) + k1.eval(t), k.eval(t)) <= 1e-12);
        }
    }

    #[test]
    fn index_bounds_and_duality(b0 in sv0_weight(), b1 in sv0_weight(), q1 in 1.0..2.0f64) {
        let (w0, w1) = (Weighted::new(1.0, b0), Weighted::new(q1, b1));
        let k = KProfile::min1();
        let o = QuadOptions::default();
        let mut prev = (f64::NEG_INFINITY, f64::INFINITY);
        for t in grid() {
            let x = t.ln();
            let (i, j) = ln_partial_norms(&k, x, Limiting::Zero, &w0, &w1, &o);
            prop_assert!(i >= prev.0 - 1e-12 && j <= prev.1 + 1e-12);
            prev = (i, j);
            let rho = index(t, IndexKind::Rho, &w0, &w1).value;
            // rho J >= ||b0||_(t,inf) K(t), and J >= c K(t) b1(t).
            prop_assert!(rho.ln() + j >= w0.ln_tail(x) + k.ln_at(x) - 1e-10);
            prop_assert!(j - k.ln_at(x) - w1.b.ln_at(x) >= (0.1f64).ln());
            let eta = index(t, IndexKind::Eta, &w0, &w1).value;
            let dual = index(1.0 / t, IndexKind::Rho, &w0.flipped(), &w1.flipped()).value;
            prop_assert!((eta.is_nan() && dual.is_nan()) || rel(eta, dual) <= 1e-9, "{} {}", eta, dual);
        }
    }

    #[test]
    fn extremal_identity(b in any_weight(), q in 0.5..3.0f64, x in -15.0..15.0f64) {
        let split = ln_extremal_split(&b, q, x);
        prop_assume!(split.is_finite());
        prop_assert!(rel(split.exp(), ln_extremal_direct(&b, q, x).exp()) <= 1e-9);
    }

    #[test]
    fn probe_never_exceeds_a1(v in sv0_weight(), w in sv0_weight(), p in 0.5..1.5f64, dq in 0.0..1.5f64) {
        let spec = InequalitySpec::new(p, p + dq, v, w).unwrap();
        let a1 = compute_constant(&spec, Which::A1).unwrap().value;
        let probe = best_constant_probe(&spec, Which::A1, &GridSpec::coarse(1e-8, 1e8, 4)).unwrap().sup;
        prop_assert!(probe <= a1 * (1.0 + 1e-6), "probe {} A1 {}", probe, a1);
    }

    #[test]
    fn a3_is_one_on_the_diagonal(v in sv0_weight(), p in 0.5..3.0f64) {
        let spec = InequalitySpec::new(p, p, v.clone(), v).unwrap();
        prop_assume!(spec.check_sv().is_ok());
        let a3 = compute_constant(&spec, Which::A3).unwrap().value;
        prop_assert!((a3 - 1.0).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn truncation_k_functional_shape(f in steps(), c in 0.2..5.0f64) {
        let case = HolmstedtCase::limiting00(1.0, WeightExpr::log(0.0, -2.0), 2.0, WeightExpr::log(0.0, -2.0)).unwrap();
        let (x0, x1) = case.spaces();
        let k = k_from_rearrangement(&f).unwrap();
        let (n0, n1) = (space_norm(&k, &x0), space_norm(&k, &x1));
        let ss: Vec<f64> = GridSpec::coarse(1e-3, 1e3, 2).points();
        let lhs: Vec<f64> = ss.iter().map(|&s| lhs_decomposition(&case, &f, s).unwrap()).collect();
        for (i, &s) in ss.iter().enumerate() {
            prop_assert!(lhs[i] <= n0 * (1.0 + 1e-9) && lhs[i] <= s * n1 * (1.0 + 1e-9));
            if i > 0 {
                prop_assert!(lhs[i] >= lhs[i - 1] * (1.0 - 1e-6));
                prop_assert!(lhs[i] / s <= lhs[i - 1] / ss[i - 1] * (1.0 + 1e-6));
            }
            let scaled = lhs_decomposition(&case, &f.scaled(c), s).unwrap();
            prop_assert!(rel(scaled, c * lhs[i]) <= 1e-6);
        }
    }

    #[test]
    fn space_norm_is_homogeneous(phi in concave_profile(), c in prop::sample::select(vec![0.5f64, 3.0])) {
        let case = HolmstedtCase::limiting00(1.0, WeightExpr::log(0.0, -2.0), 2.0, WeightExpr::log(0.0, -2.0)).unwrap();
        let (x0, _) = case.spaces();
        let (_, k) = prepare_profile(&case, &phi).unwrap();
        prop_assert!(rel(space_norm(&k.scaled(c), &x0), c * space_norm(&k, &x0)) <= 1e-12);
    }

    #[test]
    fn reiterated_weights_are_dual(theta in 0.1..0.9f64, q in 0.5..3.0f64, a in -1.0..1.0f64, b0 in sv0_weight(), b1 in sv0_weight()) {
        let spec = ReiterationSpec::new(Side::Limiting0, theta, q, WeightExpr::log(a, a), 1.0, b0, 1.0, b1).unwrap();
        let tilde = build_tilde_b(&spec).unwrap();
        let hat = build_hat_b(&spec.flipped()).unwrap();
        for t in grid() {
            let v = tilde.value(t);
            prop_assert!(v.is_finite() && v > 0.0);
            prop_assert!(rel(hat.value(1.0 / t), v) <= 1e-9);
        }
    }

    #[test]
    fn lk_ratio_is_at_least_one(fs in prop::collection::vec(steps(), 1..4), a0 in -4.0..-1.2f64) {
        let r = lk_embedding_check(&fs, 1.0, &WeightExpr::log(a0, 0.0)).unwrap();
        prop_assert!(r.ratio_min >= 1.0 - 1e-9);
    }
}
