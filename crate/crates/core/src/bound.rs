//! The limiting gap functional.
//!
//! For a weight polynomial `f`, `ell >= 1` and a normalized gap length `phi`,
//!
//! ```text
//! G(phi, ell, f) = M(phi) / I_f(ell) - phi (1 - phi)
//! ```
//!
//! where `I_f(ell) = ∫₀¹ f(u)² u^(ell²-1) du` and `M` is the sum of three simplex
//! integrals with `sin(pi phi u) / u` kernels. A positive `G` at `phi` shows that,
//! for every large height, some window of `phi` mean spacings holds two zeros.
//!
//! Because `f` is a polynomial, the innermost `v`-integrals are monomial moments
//! `∫₀^U v^(b + ell² - 1) dv = U^(b + ell²) / (b + ell²)` and are evaluated in
//! closed form; only the outer kernel integrals go through adaptive quadrature.
//! [`eval_m_nested`] evaluates the same functional fully numerically and is kept
//! as an independent cross-check.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::{
    self, integrate_1d, integrate_1d_propagating, sinc_kernel, QuadError, QuadResult,
};

/// Default absolute tolerance for each outer integral.
pub const DEFAULT_TOL: f64 = 1e-9;

/// `|I_f|` below this is treated as a vanishing weight.
pub const DEGENERATE_I_F: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("degenerate weight: I_f(ell) = {0:e} vanishes")]
    DegenerateWeight(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// Polynomial weight `f(x) = Σ c_j x^j` on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightPolynomial {
    coeffs: Vec<f64>,
}

impl WeightPolynomial {
    pub fn new(coeffs: Vec<f64>) -> Result<Self, BoundError> {
        if coeffs.is_empty() {
            return Err(BoundError::InvalidParameter(
                "weight polynomial needs at least one coefficient".into(),
            ));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(BoundError::InvalidParameter(
                "weight coefficients must be finite".into(),
            ));
        }
        if coeffs.iter().all(|&c| c == 0.0) {
            return Err(BoundError::DegenerateWeight(0.0));
        }
        Ok(Self { coeffs })
    }

    /// `f(x) = 1 - 0.7 x`.
    pub fn reference_linear() -> Self {
        Self {
            coeffs: vec![1.0, -0.7],
        }
    }

    pub fn constant_one() -> Self {
        Self { coeffs: vec![1.0] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self, BoundError> {
        Self::new(self.coeffs.iter().map(|c| c * factor).collect())
    }
}

/// `(phi, ell, f)` feeding the functional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub phi: f64,
    pub ell: f64,
    pub f: WeightPolynomial,
}

impl BoundParams {
    /// `phi = 0` is accepted: every kernel vanishes there and `G = 0`.
    pub fn new(phi: f64, ell: f64, f: WeightPolynomial) -> Result<Self, BoundError> {
        if !(phi >= 0.0) || !phi.is_finite() {
            return Err(BoundError::InvalidParameter(format!(
                "phi must be a finite value >= 0, got {phi}"
            )));
        }
        check_ell(ell)?;
        Ok(Self { phi, ell, f })
    }

    /// `phi = 0.508949`, `ell = 1.15`, `f = 1 - 0.7x`.
    pub fn reference() -> Self {
        Self {
            phi: 0.508949,
            ell: 1.15,
            f: WeightPolynomial::reference_linear(),
        }
    }
}

fn check_ell(ell: f64) -> Result<(), BoundError> {
    if ell >= 1.0 && ell.is_finite() {
        Ok(())
    } else {
        Err(BoundError::InvalidParameter(format!(
            "ell must be a finite value >= 1, got {ell}"
        )))
    }
}

/// The three summands of `M`, in display order, with their summed error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MTerms {
    pub term1: f64,
    pub term2: f64,
    pub term3: f64,
    pub m_total: f64,
    pub quad_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapBoundResult {
    pub i_f: f64,
    pub term1: f64,
    pub term2: f64,
    pub term3: f64,
    pub m_total: f64,
    pub g_value: f64,
    pub quad_error: f64,
}

impl GapBoundResult {
    /// Margin below which a positive `g_value` is not trusted.
    pub fn certification_margin(&self) -> f64 {
        10.0 * (self.quad_error + 1e-12)
    }

    pub fn is_certified(&self) -> bool {
        self.g_value > self.certification_margin()
    }
}

/// `I_f(ell) = Σ_{i,j} c_i c_j / (i + j + ell²)`.
pub fn eval_i_f(f: &WeightPolynomial, ell: f64) -> Result<f64, BoundError> {
    check_ell(ell)?;
    let s = ell * ell;
    let c = f.coeffs();
    let mut acc = crate::sum::NeumaierSum::new();
    for (i, ci) in c.iter().enumerate() {
        for (j, cj) in c.iter().enumerate() {
            acc.push(ci * cj / (i as f64 + j as f64 + s));
        }
    }
    let value = acc.value();
    if value.abs() < DEGENERATE_I_F {
        return Err(BoundError::DegenerateWeight(value));
    }
    Ok(value)
}

/// Kernel setting of the functional: `sin(frequency u) / u` kernels and the
/// prefactor multiplying the first term.
///
/// The limiting functional uses `frequency = pi phi` and `prefactor = |1 - 2phi|`;
/// the finite-`L` asymptotic formula uses `frequency = h log L / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub frequency: f64,
    pub term1_prefactor: f64,
}

impl KernelSpec {
    pub fn limiting(phi: f64) -> Self {
        Self {
            frequency: PI * phi,
            term1_prefactor: (1.0 - 2.0 * phi).abs(),
        }
    }
}

fn binomial_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0; n + 1];
    for k in 1..n {
        row[k] = row[k - 1] * (n - k + 1) as f64 / k as f64;
    }
    row
}

/// Coefficients `p[a][b]` of `f(v) f(u + v) = Σ p[a][b] u^a v^b`.
fn shifted_product(c: &[f64]) -> Vec<Vec<f64>> {
    let d = c.len() - 1;
    let mut p = vec![vec![0.0; 2 * d + 1]; d + 1];
    for (j, cj) in c.iter().enumerate() {
        let binom = binomial_row(j);
        for m in 0..=j {
            for (i, ci) in c.iter().enumerate() {
                p[j - m][i + m] += ci * cj * binom[m];
            }
        }
    }
    p
}

/// Coefficients of `f(v) f(u1 + u2 + v) + f(u1 + v) f(u2 + v)` in `u1^a u2^b v^c`.
fn symmetric_triple_product(c: &[f64]) -> Vec<Vec<Vec<f64>>> {
    let d = c.len() - 1;
    let n = 2 * d + 1;
    let mut p = vec![vec![vec![0.0; n]; n]; n];
    for (j, cj) in c.iter().enumerate() {
        // (u1 + u2 + v)^j = Σ j! / (a! b! m!) u1^a u2^b v^m
        let outer = binomial_row(j);
        for a in 0..=j {
            let inner = binomial_row(j - a);
            for b in 0..=(j - a) {
                let m = j - a - b;
                let multinomial = outer[a] * inner[b];
                for (i, ci) in c.iter().enumerate() {
                    p[a][b][i + m] += ci * cj * multinomial;
                }
            }
        }
    }
    for (i, ci) in c.iter().enumerate() {
        let bi = binomial_row(i);
        for (j, cj) in c.iter().enumerate() {
            let bj = binomial_row(j);
            for a in 0..=i {
                for b in 0..=j {
                    p[a][b][(i - a) + (j - b)] += ci * cj * bi[a] * bj[b];
                }
            }
        }
    }
    p
}

/// `Σ_b coeffs[b] U^(b + s) / (b + s)`, i.e. `∫₀^U Σ coeffs[b] v^b v^(s-1) dv`.
#[inline]
fn weighted_moment(coeffs: &[f64], upper: f64, s: f64) -> f64 {
    if upper <= 0.0 {
        return 0.0;
    }
    let base = upper.powf(s);
    let mut pow = base;
    let mut acc = 0.0;
    for (b, &cb) in coeffs.iter().enumerate() {
        acc += cb * pow / (b as f64 + s);
        pow *= upper;
    }
    acc
}

/// Evaluates the three terms of `M` for an arbitrary [`KernelSpec`].
pub fn m_functional(
    kernel: KernelSpec,
    ell: f64,
    f: &WeightPolynomial,
    tol: f64,
) -> Result<MTerms, BoundError> {
    check_ell(ell)?;
    if !(tol > 0.0) {
        return Err(BoundError::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let s = ell * ell;
    let c = kernel.frequency;
    let coeffs = f.coeffs();

    let pair = shifted_product(coeffs);
    let raw1 = integrate_1d(
        |u| {
            let k = sinc_kernel(u, c);
            if k == 0.0 {
                return 0.0;
            }
            let upper = 1.0 - u;
            let mut u_pow = 1.0;
            let mut acc = 0.0;
            for row in &pair {
                acc += u_pow * weighted_moment(row, upper, s);
                u_pow *= u;
            }
            k * acc
        },
        0.0,
        1.0,
        tol,
    )?;

    let mut f_squared = vec![0.0; 2 * coeffs.len() - 1];
    for (i, ci) in coeffs.iter().enumerate() {
        for (j, cj) in coeffs.iter().enumerate() {
            f_squared[i + j] += ci * cj;
        }
    }
    let raw3 = integrate_1d(
        |u| {
            let k = sinc_kernel(u, c);
            if k == 0.0 {
                return 0.0;
            }
            k * (c * u).sin() * weighted_moment(&f_squared, 1.0 - u, s)
        },
        0.0,
        1.0,
        tol,
    )?;

    let triple = symmetric_triple_product(coeffs);
    let raw2 = integrate_term2(&triple, c, s, tol)?;

    let term1 = kernel.term1_prefactor * (2.0 / PI) * ell * raw1.value;
    let term2 = (2.0 / (PI * PI)) * s * raw2.value;
    let term3 = (2.0 / (PI * PI)) * raw3.value;
    let quad_error = kernel.term1_prefactor * (2.0 / PI) * ell * raw1.abs_error_estimate
        + (2.0 / (PI * PI)) * s * raw2.abs_error_estimate
        + (2.0 / (PI * PI)) * raw3.abs_error_estimate;

    Ok(MTerms {
        term1,
        term2,
        term3,
        m_total: term1 + term2 + term3,
        quad_error,
    })
}

fn integrate_term2(
    triple: &[Vec<Vec<f64>>],
    c: f64,
    s: f64,
    tol: f64,
) -> Result<QuadResult, BoundError> {
    if c == 0.0 {
        return Ok(QuadResult::ZERO);
    }
    let n = triple.len();
    let mut failure: Option<QuadError> = None;
    let mut evals = 0usize;
    let mut collapsed = vec![vec![0.0; n]; n];
    let r = integrate_1d_propagating(
        |u1| {
            let k1 = sinc_kernel(u1, c);
            // collapse the u1 powers once per outer node: q[b][m] = Σ_a p[a][b][m] u1^a
            for b in 0..n {
                for m in 0..n {
                    collapsed[b][m] = 0.0;
                }
            }
            let mut u1_pow = 1.0;
            for plane in triple {
                for (b, row) in plane.iter().enumerate() {
                    for (m, &v) in row.iter().enumerate() {
                        collapsed[b][m] += v * u1_pow;
                    }
                }
                u1_pow *= u1;
            }
            let collapsed = &collapsed;
            let inner = integrate_1d(
                |u2| {
                    let k2 = sinc_kernel(u2, c);
                    let upper = 1.0 - u1 - u2;
                    let mut u2_pow = 1.0;
                    let mut acc = 0.0;
                    for row in collapsed {
                        acc += u2_pow * weighted_moment(row, upper, s);
                        u2_pow *= u2;
                    }
                    k2 * acc
                },
                0.0,
                1.0 - u1,
                tol / 64.0,
            );
            match inner {
                Ok(q) => {
                    evals += q.evaluations;
                    (k1 * q.value, k1 * q.abs_error_estimate)
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    (0.0, 0.0)
                }
            }
        },
        0.0,
        1.0,
        tol,
    )?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    Ok(QuadResult {
        evaluations: evals,
        ..r
    })
}

/// The three terms of `M` at `params`.
pub fn eval_m(params: &BoundParams, tol: f64) -> Result<MTerms, BoundError> {
    m_functional(KernelSpec::limiting(params.phi), params.ell, &params.f, tol)
}

/// Same functional as [`m_functional`], with every integral (including the
/// innermost weighted `v`-integral) done by nested adaptive quadrature.
pub fn eval_m_nested(
    kernel: KernelSpec,
    ell: f64,
    f: &WeightPolynomial,
    tol: f64,
) -> Result<MTerms, BoundError> {
    check_ell(ell)?;
    let c = kernel.frequency;
    let s = ell * ell;
    let raw1 = quadrature::nested_integral_2d(
        |u| sinc_kernel(u, c),
        |u, v| f.eval(v) * f.eval(u + v),
        ell,
        tol,
    )?;
    let raw2 = quadrature::nested_integral_3d(
        |u1| sinc_kernel(u1, c),
        |u2| sinc_kernel(u2, c),
        |u1, u2, v| f.eval(v) * f.eval(u1 + u2 + v) + f.eval(u1 + v) * f.eval(u2 + v),
        ell,
        tol,
    )?;
    let raw3 = quadrature::nested_integral_2d(
        |u| sinc_kernel(u, c) * (c * u).sin(),
        |_, v| f.eval(v).powi(2),
        ell,
        tol,
    )?;
    let term1 = kernel.term1_prefactor * (2.0 / PI) * ell * raw1.value;
    let term2 = (2.0 / (PI * PI)) * s * raw2.value;
    let term3 = (2.0 / (PI * PI)) * raw3.value;
    Ok(MTerms {
        term1,
        term2,
        term3,
        m_total: term1 + term2 + term3,
        quad_error: kernel.term1_prefactor * (2.0 / PI) * ell * raw1.abs_error_estimate
            + (2.0 / (PI * PI)) * s * raw2.abs_error_estimate
            + (2.0 / (PI * PI)) * raw3.abs_error_estimate,
    })
}

/// `G(phi, ell, f) = M / I_f - phi (1 - phi)`, the large-height limit of the
/// lower bound for `sup (N_h² - N_h)`; lower-order terms are not modeled.
///
/// `M` is evaluated for `f / sqrt(I_f)`, so `tol` acts on `M / I_f` and the result
/// does not depend on the scale of `f`. Reported terms are rescaled back to `f`.
pub fn gap_lower_bound(params: &BoundParams, tol: f64) -> Result<GapBoundResult, BoundError> {
    let i_f = eval_i_f(&params.f, params.ell)?;
    let unit = params.f.scaled(1.0 / i_f.sqrt())?;
    let i_unit = eval_i_f(&unit, params.ell)?;
    let m = m_functional(KernelSpec::limiting(params.phi), params.ell, &unit, tol)?;
    let phi = params.phi;
    let back = i_f / i_unit;
    Ok(GapBoundResult {
        i_f,
        term1: m.term1 * back,
        term2: m.term2 * back,
        term3: m.term3 * back,
        m_total: m.m_total * back,
        g_value: m.m_total / i_unit - phi * (1.0 - phi),
        quad_error: m.quad_error / i_unit,
    })
}

/// Grid for the coarse `phi` scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiScan {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl PhiScan {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self, BoundError> {
        if !(lo < hi) || !(step > 0.0) || !lo.is_finite() || !hi.is_finite() || lo < 0.0 {
            return Err(BoundError::InvalidParameter(format!(
                "phi scan needs 0 <= lo < hi and step > 0, got lo={lo} hi={hi} step={step}"
            )));
        }
        Ok(Self { lo, hi, step })
    }

    /// Grid points `lo, lo + step, ...`, always ending exactly at `hi`.
    pub fn grid(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step - 1e-9).ceil().max(1.0) as usize;
        let mut pts: Vec<f64> = (0..n).map(|i| self.lo + i as f64 * self.step).collect();
        pts.push(self.hi);
        pts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PhiSearch {
    /// `g` changes sign in `bracket`; `phi_star` is its upper end, where `g > 0`.
    Certified {
        phi_star: f64,
        bracket: [f64; 2],
        g_at_phi_star: f64,
        quad_error_at_phi_star: f64,
        within_margin: bool,
        evaluations: usize,
    },
    /// No negative-to-positive crossing on the grid.
    NoCertificate {
        reason: String,
        max_g: f64,
        evaluations: usize,
    },
}

impl PhiSearch {
    pub fn phi_star(&self) -> Option<f64> {
        match self {
            PhiSearch::Certified { phi_star, .. } => Some(*phi_star),
            PhiSearch::NoCertificate { .. } => None,
        }
    }
}

/// Smallest `phi` in the scan range at which `G` turns positive.
///
/// The scan evaluates `G` on the grid (in parallel), takes the first grid cell
/// where `G <= 0` is followed by `G > 0`, and bisects it to width `tol_phi`.
pub fn minimize_phi(
    ell: f64,
    f: &WeightPolynomial,
    scan: PhiScan,
    tol_phi: f64,
    quad_tol: f64,
) -> Result<PhiSearch, BoundError> {
    if !(tol_phi > 0.0) {
        return Err(BoundError::InvalidParameter(format!(
            "tol_phi must be positive, got {tol_phi}"
        )));
    }
    check_ell(ell)?;
    eval_i_f(f, ell)?;
    let g_at = |phi: f64| -> Result<GapBoundResult, BoundError> {
        gap_lower_bound(&BoundParams::new(phi, ell, f.clone())?, quad_tol)
    };

    let grid = scan.grid();
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&phi| g_at(phi).map(|r| r.g_value))
        .collect::<Result<_, _>>()?;
    let mut evaluations = grid.len();

    let crossing = values.windows(2).position(|w| w[0] <= 0.0 && w[1] > 0.0);
    let Some(i) = crossing else {
        let max_g = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let reason = if values[0] > 0.0 {
            "g is already positive at the lower end of the scan range".to_string()
        } else {
            "no sign change from negative to positive in the scan range".to_string()
        };
        return Ok(PhiSearch::NoCertificate {
            reason,
            max_g,
            evaluations,
        });
    };

    let (mut lo, mut hi) = (grid[i], grid[i + 1]);
    let mut at_hi = g_at(hi)?;
    evaluations += 1;
    while hi - lo > tol_phi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let r = g_at(mid)?;
        evaluations += 1;
        if r.g_value > 0.0 {
            hi = mid;
            at_hi = r;
        } else {
            lo = mid;
        }
    }
    Ok(PhiSearch::Certified {
        phi_star: hi,
        bracket: [lo, hi],
        g_at_phi_star: at_hi.g_value,
        quad_error_at_phi_star: at_hi.quad_error,
        within_margin: at_hi.is_certified(),
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn i_f_closed_forms() {
        let one = WeightPolynomial::constant_one();
        assert!((eval_i_f(&one, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((eval_i_f(&one, 1.15).unwrap() - 1.0 / 1.3225).abs() < 1e-15);
        assert!((eval_i_f(&one, 1.15).unwrap() - 0.756144).abs() < 1e-6);
        let lin = WeightPolynomial::reference_linear();
        let expected = 1.0 - 0.7 + 0.49 / 3.0;
        assert!((eval_i_f(&lin, 1.0).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn zero_weight_is_rejected() {
        assert!(matches!(
            WeightPolynomial::new(vec![0.0, 0.0]),
            Err(BoundError::DegenerateWeight(_))
        ));
        assert!(WeightPolynomial::new(vec![]).is_err());
        assert!(WeightPolynomial::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn polynomial_eval() {
        let f = WeightPolynomial::new(vec![1.0, -0.7, 0.25]).unwrap();
        assert!((f.eval(0.5) - (1.0 - 0.35 + 0.0625)).abs() < 1e-15);
        assert_eq!(f.degree(), 2);
    }

    #[test]
    fn shifted_product_expands_correctly() {
        let c = [1.0, -0.7, 0.3];
        let p = shifted_product(&c);
        let f = |x: f64| c[0] + c[1] * x + c[2] * x * x;
        for &(u, v) in &[(0.1, 0.2), (0.5, 0.3), (0.9, 0.05)] {
            let mut acc = 0.0;
            for (a, row) in p.iter().enumerate() {
                for (b, &coef) in row.iter().enumerate() {
                    acc += coef * f64::powi(u, a as i32) * f64::powi(v, b as i32);
                }
            }
            assert!((acc - f(v) * f(u + v)).abs() < 1e-14);
        }
    }

    #[test]
    fn triple_product_expands_correctly() {
        let c = [0.8, -0.4, 1.1];
        let p = symmetric_triple_product(&c);
        let f = |x: f64| c[0] + c[1] * x + c[2] * x * x;
        for &(u1, u2, v) in &[(0.1, 0.2, 0.3), (0.5, 0.1, 0.05), (0.0, 0.7, 0.2)] {
            let mut acc = 0.0;
            for (a, plane) in p.iter().enumerate() {
                for (b, row) in plane.iter().enumerate() {
                    for (m, &coef) in row.iter().enumerate() {
                        acc += coef
                            * f64::powi(u1, a as i32)
                            * f64::powi(u2, b as i32)
                            * f64::powi(v, m as i32);
                    }
                }
            }
            let exact = f(v) * f(u1 + u2 + v) + f(u1 + v) * f(u2 + v);
            assert!((acc - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn phi_zero_gives_zero() {
        let p = BoundParams::new(0.0, 1.0, WeightPolynomial::constant_one()).unwrap();
        let r = gap_lower_bound(&p, 1e-9).unwrap();
        assert_eq!(r.term1, 0.0);
        assert_eq!(r.term2, 0.0);
        assert_eq!(r.term3, 0.0);
        assert_eq!(r.g_value, 0.0);
        assert!(!r.is_certified());
    }

    #[test]
    fn phi_half_kills_term1() {
        let p = BoundParams::new(0.5, 1.15, WeightPolynomial::reference_linear()).unwrap();
        let r = gap_lower_bound(&p, 1e-9).unwrap();
        assert_eq!(r.term1, 0.0);
        assert!(r.term2 > 0.0 && r.term3 > 0.0);
        assert!(r.g_value.is_finite());
    }

    #[test]
    fn total_is_sum_of_terms() {
        let r = gap_lower_bound(&BoundParams::reference(), 1e-9).unwrap();
        assert!((r.m_total - (r.term1 + r.term2 + r.term3)).abs() <= 1e-12);
    }

    #[test]
    fn params_validation() {
        let f = WeightPolynomial::constant_one();
        assert!(BoundParams::new(-0.1, 1.0, f.clone()).is_err());
        assert!(BoundParams::new(0.3, 0.9, f.clone()).is_err());
        assert!(BoundParams::new(f64::NAN, 1.0, f).is_err());
    }

    #[test]
    fn scan_grid_includes_both_ends() {
        let g = PhiScan::new(0.45, 0.55, 0.01).unwrap().grid();
        assert_eq!(g.len(), 11);
        assert_eq!(g[0], 0.45);
        assert_eq!(*g.last().unwrap(), 0.55);
        let g = PhiScan::new(0.0, 1.0, 0.3).unwrap().grid();
        assert_eq!(g, vec![0.0, 0.3, 0.6, 0.8999999999999999, 1.0]);
        assert!(PhiScan::new(0.5, 0.4, 0.01).is_err());
        assert!(PhiScan::new(0.4, 0.5, 0.0).is_err());
    }

    #[test]
    fn minimize_rejects_zero_weight_via_constructor() {
        assert!(matches!(
            WeightPolynomial::new(vec![0.0]),
            Err(BoundError::DegenerateWeight(_))
        ));
    }

    #[test]
    fn minimize_reports_missing_crossing() {
        let f = WeightPolynomial::constant_one();
        let scan = PhiScan::new(0.1, 0.2, 0.05).unwrap();
        let r = minimize_phi(1.0, &f, scan, 1e-4, 1e-9).unwrap();
        assert!(matches!(r, PhiSearch::NoCertificate { .. }));
        assert!(r.phi_star().is_none());
    }
}
