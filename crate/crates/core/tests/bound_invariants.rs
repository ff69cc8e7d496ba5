use proptest::prelude::*;
use resgap_core::bound::{
    eval_m, gap_lower_bound, minimize_phi, BoundParams, PhiScan, PhiSearch, WeightPolynomial,
};
use resgap_core::quadrature::{inner_weighted_integral, nested_integral_3d, sinc_kernel};

const TOL: f64 = 1e-10;

fn g_at(phi: f64, ell: f64, coeffs: Vec<f64>) -> f64 {
    let p = BoundParams::new(phi, ell, WeightPolynomial::new(coeffs).unwrap()).unwrap();
    gap_lower_bound(&p, TOL).unwrap().g_value
}

#[test]
fn scale_invariance_at_reference() {
    let base = gap_lower_bound(&BoundParams::reference(), TOL)
        .unwrap()
        .g_value;
    for c in [2.0, -3.0, 0.1] {
        let f = WeightPolynomial::reference_linear().scaled(c).unwrap();
        let p = BoundParams::new(0.508949, 1.15, f).unwrap();
        let g = gap_lower_bound(&p, TOL).unwrap().g_value;
        assert!((g - base).abs() < 1e-10, "c={c}: {g} vs {base}");
    }
}

#[test]
fn edge_cases_in_phi() {
    let zero = gap_lower_bound(
        &BoundParams::new(0.0, 1.15, WeightPolynomial::reference_linear()).unwrap(),
        TOL,
    )
    .unwrap();
    assert_eq!(zero.m_total, 0.0);
    assert_eq!(zero.g_value, 0.0);
    let half = gap_lower_bound(
        &BoundParams::new(0.5, 1.15, WeightPolynomial::reference_linear()).unwrap(),
        TOL,
    )
    .unwrap();
    assert_eq!(half.term1, 0.0);
}

#[test]
fn refinement_does_not_inflate_the_estimate() {
    let p = BoundParams::reference();
    let mut prev = f64::INFINITY;
    for tol in [1e-6, 1e-8, 1e-10, 1e-12] {
        let m = eval_m(&p, tol).unwrap();
        assert!(m.quad_error <= prev, "tol={tol}: {} > {prev}", m.quad_error);
        assert!(m.quad_error <= 10.0 * tol);
        prev = m.quad_error;
    }
}

#[test]
fn bisection_bracket_is_consistent() {
    let f = WeightPolynomial::reference_linear();
    let res = minimize_phi(1.15, &f, PhiScan::new(0.45, 0.55, 0.01).unwrap(), 1e-7, TOL).unwrap();
    let PhiSearch::Certified {
        phi_star,
        bracket,
        g_at_phi_star,
        ..
    } = res
    else {
        panic!("{res:?}")
    };
    assert_eq!(phi_star, bracket[1]);
    assert!(bracket[1] - bracket[0] <= 1e-7);
    assert!(g_at_phi_star > 0.0);
    assert!(g_at(bracket[0], 1.15, vec![1.0, -0.7]) <= 0.0);
    assert!(g_at(phi_star, 1.15, vec![1.0, -0.7]) == g_at_phi_star);
}

#[test]
fn kernel_order_does_not_matter_for_symmetric_inner() {
    let inner = |u1: f64, u2: f64, v: f64| (1.0 + u1 * u2) * (1.0 - 0.5 * v) + (u1 + u2).powi(2);
    let a = nested_integral_3d(
        |u| sinc_kernel(u, 1.3),
        |u| (2.0 * u).cos(),
        inner,
        1.2,
        1e-9,
    )
    .unwrap();
    let b = nested_integral_3d(
        |u| (2.0 * u).cos(),
        |u| sinc_kernel(u, 1.3),
        inner,
        1.2,
        1e-9,
    )
    .unwrap();
    assert!((a.value - b.value).abs() < 1e-8, "{} {}", a.value, b.value);
}

#[test]
fn substitution_captures_the_endpoint_mass() {
    let eps: f64 = 1e-6;
    for ell in [1.05f64, 1.15, 1.4, 2.0] {
        let s = ell * ell;
        let g = |v: f64| 2.0 + v;
        let r = inner_weighted_integral(g, eps, ell, 1e-15).unwrap();
        let tail = 2.0 * eps.powf(s) / s;
        assert!(
            (r.value - tail).abs() < 1e-9,
            "ell={ell}: {} vs {tail}",
            r.value
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn scale_invariance(
        phi in 0.05f64..0.95,
        ell in 1.0f64..2.0,
        c1 in -0.9f64..1.0,
        c2 in -0.5f64..0.5,
        scale in prop_oneof![Just(2.0), Just(-3.0), Just(0.1)],
    ) {
        let base = g_at(phi, ell, vec![1.0, c1, c2]);
        let scaled = g_at(phi, ell, vec![scale, scale * c1, scale * c2]);
        prop_assert!((base - scaled).abs() < 1e-10, "{base} {scaled}");
    }

    #[test]
    fn third_term_is_nonnegative(
        phi in 0.0f64..1.0,
        ell in 1.0f64..2.5,
        coeffs in proptest::collection::vec(-2.0f64..2.0, 1..4),
    ) {
        prop_assume!(coeffs.iter().any(|c| c.abs() > 1e-3));
        let p = BoundParams::new(phi, ell, WeightPolynomial::new(coeffs).unwrap()).unwrap();
        let m = eval_m(&p, TOL).unwrap();
        prop_assert!(m.term3 >= 0.0);
    }

    #[test]
    fn continuous_in_phi(phi in 0.05f64..0.9, ell in 1.0f64..2.0) {
        let d = 1e-7;
        let a = g_at(phi, ell, vec![1.0, -0.7]);
        let b = g_at(phi + d, ell, vec![1.0, -0.7]);
        // |dG/dphi| stays below ~5 on this range
        prop_assert!((a - b).abs() < 5.0 * d + 1e-9, "{a} {b}");
    }
}
