mod common;

use std::sync::OnceLock;

use proptest::prelude::*;
use resgap_core::arithfn::ArithTables;

const LIMIT: usize = 10_000;

fn tables() -> &'static ArithTables {
    static T: OnceLock<ArithTables> = OnceLock::new();
    T.get_or_init(|| ArithTables::build(LIMIT).unwrap())
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `d_{k+1} = 1 * d_k` by Dirichlet convolution, starting from `d_1 = 1`.
fn convolution_powers(n_max: usize, k_max: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; n_max + 1]];
    for _ in 0..k_max {
        let prev = out.last().unwrap().clone();
        let mut next = vec![0.0; n_max + 1];
        if out.len() == 1 {
            next[1..].iter_mut().for_each(|x| *x = 1.0);
        } else {
            for d in 1..=n_max {
                for m in (d..=n_max).step_by(d) {
                    next[m] += prev[d];
                }
            }
        }
        out.push(next);
    }
    out
}

#[test]
fn integer_ell_matches_convolution() {
    let t = tables();
    let conv = convolution_powers(LIMIT, 3);
    for ell in 1..=3 {
        let table = t.d_ell_table(ell as f64).unwrap();
        for n in 1..=LIMIT {
            assert!(
                (table[n] - conv[ell][n]).abs() <= 1e-12 * conv[ell][n],
                "ell={ell} n={n}"
            );
        }
    }
}

#[test]
fn von_mangoldt_sums_to_log() {
    let t = tables();
    for n in 1..=2000usize {
        let s: f64 = (1..=n)
            .filter(|d| n % d == 0)
            .map(|d| t.von_mangoldt(d).unwrap())
            .sum();
        assert!((s - (n as f64).ln()).abs() < 1e-12, "n={n}");
    }
}

#[test]
fn sieve_agrees_with_trial_division() {
    let t = tables();
    for n in 1..=LIMIT {
        assert_eq!(t.von_mangoldt(n).unwrap(), common::von_mangoldt(n), "n={n}");
        assert_eq!(
            t.liouville(n).unwrap() as f64,
            common::liouville(n),
            "n={n}"
        );
        let d = common::d_ell(n, 1.15);
        assert!((t.d_ell(n, 1.15).unwrap() - d).abs() <= 1e-14 * d, "n={n}");
    }
}

fn pair_below_limit() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=LIMIT).prop_flat_map(|m| (Just(m), 1usize..=LIMIT / m))
}

proptest! {
    #[test]
    fn d_ell_is_multiplicative(m in 1usize..=100, n in 1usize..=100, ell in 1.0f64..3.0) {
        prop_assume!(gcd(m, n) == 1);
        let t = tables();
        let lhs = t.d_ell(m * n, ell).unwrap();
        let rhs = t.d_ell(m, ell).unwrap() * t.d_ell(n, ell).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs, "{lhs} {rhs}");
    }

    #[test]
    fn d_ell_multiplicative_across_range((m, n) in pair_below_limit(), ell in 1.0f64..2.5) {
        prop_assume!(gcd(m, n) == 1);
        let t = tables();
        let lhs = t.d_ell(m * n, ell).unwrap();
        let rhs = t.d_ell(m, ell).unwrap() * t.d_ell(n, ell).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }

    #[test]
    fn liouville_is_completely_multiplicative((m, n) in pair_below_limit()) {
        let t = tables();
        prop_assert_eq!(
            t.liouville(m * n).unwrap(),
            t.liouville(m).unwrap() * t.liouville(n).unwrap()
        );
    }

    #[test]
    fn g_h_is_purely_imaginary_and_bounded(k in 1usize..=LIMIT, h in 0.001f64..1.0) {
        let t = tables();
        let g = t.g_h(k, h).unwrap();
        prop_assert_eq!(g.re(), 0.0);
        // |sin x| <= |x| gives |g_h(k)| <= h Lambda(k)
        prop_assert!(g.im().abs() <= h * t.von_mangoldt(k).unwrap() + 1e-15);
    }
}
