//! Slow, direct reference implementations shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use std::f64::consts::PI;

/// Prime factorization by trial division.
pub fn trial_factor(mut n: usize) -> Vec<(usize, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn von_mangoldt(n: usize) -> f64 {
    match trial_factor(n).as_slice() {
        [(p, _)] => (*p as f64).ln(),
        _ => 0.0,
    }
}

pub fn liouville(n: usize) -> f64 {
    let omega: u32 = trial_factor(n).iter().map(|(_, e)| e).sum();
    if omega % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `d_ell(n) = Π binom(ell + a - 1, a)` over `p^a || n`.
pub fn d_ell(n: usize, ell: f64) -> f64 {
    trial_factor(n)
        .iter()
        .map(|&(_, a)| {
            (1..=a)
                .map(|j| (ell + j as f64 - 1.0) / j as f64)
                .product::<f64>()
        })
        .product()
}

pub fn poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| c * x.powi(i as i32))
        .sum()
}

pub struct NaiveSums {
    pub sum1: f64,
    pub sum2: f64,
    pub sum3: f64,
    pub normalizer: f64,
}

/// Direct complex evaluation of the three sums, enumerating every index tuple.
pub fn naive_sums(l: usize, t: f64, phi: f64, ell: f64, coeffs: &[f64]) -> NaiveSums {
    let h = 2.0 * PI * phi / t.ln();
    let liouville_mode = h * t.ln() / PI >= 1.0;
    let log_l = (l as f64).ln();
    let r: Vec<f64> = (0..=l)
        .map(|n| {
            if n == 0 {
                return 0.0;
            }
            let x = if l == 1 { 0.0 } else { (n as f64).ln() / log_l };
            let sign = if liouville_mode { liouville(n) } else { 1.0 };
            d_ell(n, ell) * sign * poly(coeffs, x)
        })
        .collect();
    let g: Vec<Complex64> = (0..=l)
        .map(|k| {
            if k < 2 {
                return Complex64::new(0.0, 0.0);
            }
            let lk = (k as f64).ln();
            Complex64::new(0.0, -2.0 * von_mangoldt(k) * (0.5 * h * lk).sin() / lk)
        })
        .collect();
    let a = g.clone();
    let prefactor = 1.0 - h * t.ln() / PI;

    let mut s1 = Complex64::new(0.0, 0.0);
    for k in 1..=l {
        for m in 1..=l / k {
            s1 += g[k] / k as f64 * r[m] * r[k * m] / m as f64;
        }
    }
    let sum1 = -prefactor / PI * s1.im;

    let mut s2 = Complex64::new(0.0, 0.0);
    for n_big in 1..=l {
        for k in (1..=n_big).filter(|k| n_big % k == 0) {
            let m = n_big / k;
            for q in (1..=n_big).filter(|q| n_big % q == 0) {
                let n = n_big / q;
                s2 += (g[k] * 2.0 - a[k]) * a[q].conj() / ((k * q) as f64).sqrt() * r[m] * r[n]
                    / ((m * n) as f64).sqrt();
            }
        }
    }
    let sum2 = s2.re / (2.0 * PI * PI);

    let mut s3 = Complex64::new(0.0, 0.0);
    for k in 1..=l {
        for q in 1..=l / k {
            for m in 1..=l / (k * q) {
                s3 += g[k] * g[q] / (k * q) as f64 * r[m] * r[k * q * m] / m as f64;
            }
        }
    }
    let sum3 = -s3.re / (2.0 * PI * PI);

    let normalizer = (1..=l).map(|n| r[n] * r[n] / n as f64).sum();
    NaiveSums {
        sum1,
        sum2,
        sum3,
        normalizer,
    }
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
