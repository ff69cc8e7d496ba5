//! Exact evaluation of the finite Dirichlet sums behind the gap functional.
//!
//! For a resonator length `L` the lower bound is driven by
//!
//! ```text
//! N(T, h, L) = -(1 - (h/pi) log T) (1/pi) Im Σ_{km<=L} g_h(k)/k · r(m) r(km)/m
//!            + 1/(2pi²) Re Σ_{km=ln<=L} (2g_h(k) - a(k)) conj(a(l)) / sqrt(kl) · r(m) r(n) / sqrt(mn)
//!            - 1/(2pi²) Re Σ_{klm<=L} g_h(k) g_h(l) / (kl) · r(m) r(klm) / m
//! ```
//!
//! normalized by `Σ_{n<=L} r(n)²/n`. With `h = 2 pi phi / log T` and
//! `L = T / (log T)²` the normalized sum should approach the integral formula
//! evaluated with kernels `sin((u/2) h log L) / u`; [`convergence_study`] measures
//! how fast.
//!
//! `g_h` and `a = g_h` are purely imaginary and are handled through their
//! imaginary parts, so every sum below is a real sum over prime powers.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::arithfn::{ArithError, ArithTables};
use crate::bound::{self, BoundError, KernelSpec, WeightPolynomial};
use crate::sum::NeumaierSum;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("resonator length L = {l} has no height T with L = T/(log T)^2 (need L >= e^2/4)")]
    NoHeight { l: usize },
    #[error("invalid oracle instance: {0}")]
    InvalidInstance(String),
    #[error("tables cover 1..={limit} but the instance needs L = {l}")]
    TablesTooSmall { l: usize, limit: usize },
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Bound(#[from] BoundError),
}

/// Sign pattern of the resonator coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResonatorMode {
    /// `r(n) = d_ell(n) lambda(n) f(log n / log L)`, used when `(h/pi) log T >= 1`.
    Liouville,
    /// `r(n) = d_ell(n) f(log n / log L)`.
    Plain,
}

/// Solves `L = T / (log T)²` for the larger root by fixed-point iteration
/// `T <- L (log T)²` (50 iterations, relative tolerance 1e-12).
pub fn height_for_length(l: usize) -> Result<f64, OracleError> {
    let lf = l as f64;
    // T/(log T)^2 attains its minimum e^2/4 at T = e^2
    if lf < std::f64::consts::E.powi(2) / 4.0 {
        return Err(OracleError::NoHeight { l });
    }
    let mut t = (lf * lf.ln().max(2.0).powi(2)).max(std::f64::consts::E.powi(2) * 1.5);
    for _ in 0..50 {
        let next = lf * t.ln().powi(2);
        let done = ((next - t) / next).abs() <= 1e-12;
        t = next;
        if done {
            break;
        }
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleInstance {
    pub l: usize,
    pub t: f64,
    pub h: f64,
    pub phi: f64,
    pub ell: f64,
    pub f: WeightPolynomial,
    pub mode: ResonatorMode,
}

impl OracleInstance {
    /// Instance on the ray `L = T/(log T)²`, `h = 2 pi phi / log T`.
    pub fn on_ray(l: usize, phi: f64, ell: f64, f: WeightPolynomial) -> Result<Self, OracleError> {
        let t = height_for_length(l)?;
        Self::with_height(l, t, phi, ell, f)
    }

    /// Instance at an explicit height `T`, still with `h = 2 pi phi / log T`.
    pub fn with_height(
        l: usize,
        t: f64,
        phi: f64,
        ell: f64,
        f: WeightPolynomial,
    ) -> Result<Self, OracleError> {
        if l == 0 {
            return Err(OracleError::InvalidInstance("L must be positive".into()));
        }
        if !(t > 1.0) || !t.is_finite() {
            return Err(OracleError::InvalidInstance(format!("need T > 1, got {t}")));
        }
        if !(phi > 0.0) || !phi.is_finite() {
            return Err(OracleError::InvalidInstance(format!(
                "need phi > 0, got {phi}"
            )));
        }
        if !(ell >= 1.0) || !ell.is_finite() {
            return Err(OracleError::InvalidInstance(format!(
                "need ell >= 1, got {ell}"
            )));
        }
        let h = 2.0 * PI * phi / t.ln();
        if !(h > 0.0 && h <= 1.0) {
            return Err(OracleError::InvalidInstance(format!(
                "h = 2 pi phi / log T = {h} must lie in (0, 1]"
            )));
        }
        // (h/pi) log T = 2 phi
        let mode = if 2.0 * phi >= 1.0 {
            ResonatorMode::Liouville
        } else {
            ResonatorMode::Plain
        };
        Ok(Self {
            l,
            t,
            h,
            phi,
            ell,
            f,
            mode,
        })
    }

    /// `(h/pi) log T`.
    pub fn h_log_t_over_pi(&self) -> f64 {
        self.h * self.t.ln() / PI
    }

    fn check_tables(&self, tables: &ArithTables) -> Result<(), OracleError> {
        if tables.limit() < self.l {
            Err(OracleError::TablesTooSmall {
                l: self.l,
                limit: tables.limit(),
            })
        } else {
            Ok(())
        }
    }
}

/// `r(1..=L)` at indices `1..=L`; index 0 holds 0.
pub fn resonator_coeffs(
    inst: &OracleInstance,
    tables: &ArithTables,
) -> Result<Vec<f64>, OracleError> {
    inst.check_tables(tables)?;
    let l = inst.l;
    let log_l = (l as f64).ln();
    let mut r = vec![0.0; l + 1];
    if l == 1 {
        r[1] = inst.f.eval(0.0);
        return Ok(r);
    }
    let d = tables.d_ell_table(inst.ell)?;
    for n in 1..=l {
        let x = (n as f64).ln() / log_l;
        let sign = match inst.mode {
            ResonatorMode::Liouville => tables.liouville(n)? as f64,
            ResonatorMode::Plain => 1.0,
        };
        r[n] = d[n] * sign * inst.f.eval(x);
    }
    Ok(r)
}

/// `Im a(k) = Im g_h(k)` at indices `1..=L`; index 0 holds 0.
pub fn approximator_coeffs(
    inst: &OracleInstance,
    tables: &ArithTables,
) -> Result<Vec<f64>, OracleError> {
    inst.check_tables(tables)?;
    let mut a = vec![0.0; inst.l + 1];
    for (k, slot) in a.iter_mut().enumerate().skip(2) {
        *slot = tables.g_h_imag_unchecked(k, inst.h);
    }
    Ok(a)
}

/// The three sums of `N`, each already multiplied by its prefactor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirichletSums {
    pub sum1: f64,
    pub sum2: f64,
    pub sum3: f64,
    /// `Σ_{km<=L} G(k) r(m) r(km) / (km)` with `g_h = i G`, before the `-(1-2phi)/pi` factor.
    pub sum1_core: f64,
    pub normalizer: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub l: usize,
    pub t: f64,
    pub h: f64,
    pub mode: ResonatorMode,
    pub sum1: f64,
    pub sum2: f64,
    pub sum3: f64,
    pub normalizer: f64,
    pub ratio: f64,
    /// `ratio` with the first prefactor moved by `∓h`, bracketing the dropped `O(h)`.
    pub ratio_band: [f64; 2],
    pub afh_prediction: f64,
    pub discrepancy: f64,
}

/// Sums over general coefficient arrays. `g` and `a` are imaginary parts,
/// `r` is real; all arrays are indexed `0..=L`.
pub fn dirichlet_sums(prefactor: f64, g: &[f64], a: &[f64], r: &[f64]) -> DirichletSums {
    let l = r.len() - 1;
    let support = |c: &[f64]| -> Vec<usize> { (1..=l).filter(|&k| c[k] != 0.0).collect() };
    let g_support = support(g);
    let a_support = support(a);

    // sum1: Σ_k G(k)/k Σ_{m<=L/k} r(m) r(km)/m
    let mut core1 = NeumaierSum::new();
    for &k in &g_support {
        let mut inner = NeumaierSum::new();
        for m in 1..=l / k {
            inner.push(r[m] * r[k * m] / m as f64);
        }
        core1.push(g[k] / k as f64 * inner.value());
    }
    let core1 = core1.value();
    let sum1 = -prefactor / PI * core1;

    // sum2: b(N) = Σ_{k|N} (2G - A)(k) r(N/k), c(N) = Σ_{l|N} A(l) r(N/l);
    // (i b) conj(i c) = b c, so the term is b(N) c(N) / N
    let mut b = vec![NeumaierSum::new(); l + 1];
    let mut c = vec![NeumaierSum::new(); l + 1];
    let mut two_g_minus_a_support: Vec<usize> =
        g_support.iter().chain(&a_support).copied().collect();
    two_g_minus_a_support.sort_unstable();
    two_g_minus_a_support.dedup();
    for &k in &two_g_minus_a_support {
        let w = 2.0 * g[k] - a[k];
        if w == 0.0 {
            continue;
        }
        for m in 1..=l / k {
            b[k * m].push(w * r[m]);
        }
    }
    for &k in &a_support {
        for m in 1..=l / k {
            c[k * m].push(a[k] * r[m]);
        }
    }
    let mut acc2 = NeumaierSum::new();
    for n in 1..=l {
        acc2.push(b[n].value() * c[n].value() / n as f64);
    }
    let sum2 = acc2.value() / (2.0 * PI * PI);

    // sum3: g(k) g(l) = -G(k) G(l); fold pairs into conv(j) = Σ_{kl=j} G(k) G(l)
    let mut conv = vec![NeumaierSum::new(); l + 1];
    for &k in &g_support {
        for &q in &g_support {
            if k * q > l {
                break;
            }
            conv[k * q].push(g[k] * g[q]);
        }
    }
    let mut acc3 = NeumaierSum::new();
    for j in 1..=l {
        let cj = conv[j].value();
        if cj == 0.0 {
            continue;
        }
        let mut inner = NeumaierSum::new();
        for m in 1..=l / j {
            inner.push(r[m] * r[j * m] / m as f64);
        }
        acc3.push(cj / j as f64 * inner.value());
    }
    let sum3 = acc3.value() / (2.0 * PI * PI);

    let normalizer = (1..=l)
        .map(|n| r[n] * r[n] / n as f64)
        .sum::<NeumaierSum>()
        .value();

    DirichletSums {
        sum1,
        sum2,
        sum3,
        sum1_core: core1,
        normalizer,
    }
}

/// Evaluates the three sums and the normalizer for `inst`.
pub fn eval_n(inst: &OracleInstance, tables: &ArithTables) -> Result<DirichletSums, OracleError> {
    let r = resonator_coeffs(inst, tables)?;
    let a = approximator_coeffs(inst, tables)?;
    Ok(dirichlet_sums(1.0 - inst.h_log_t_over_pi(), &a, &a, &r))
}

/// Main term of the asymptotic formula for `N / Σ r(n)²/n`.
pub fn afh_prediction(inst: &OracleInstance, tol: f64) -> Result<f64, OracleError> {
    let kernel = KernelSpec {
        frequency: 0.5 * inst.h * (inst.l as f64).ln(),
        term1_prefactor: (1.0 - inst.h_log_t_over_pi()).abs(),
    };
    let i_f = bound::eval_i_f(&inst.f, inst.ell)?;
    let m = bound::m_functional(kernel, inst.ell, &inst.f, tol)?;
    Ok(m.m_total / i_f)
}

/// Sums, ratio, prediction and discrepancy for one instance.
pub fn evaluate(
    inst: &OracleInstance,
    tables: &ArithTables,
    tol: f64,
) -> Result<OracleResult, OracleError> {
    let sums = eval_n(inst, tables)?;
    if !(sums.normalizer > 0.0) {
        return Err(OracleError::InvalidInstance(
            "resonator vanishes on 1..=L (normalizer is zero)".into(),
        ));
    }
    let prediction = afh_prediction(inst, tol)?;
    let rest = sums.sum2 + sums.sum3;
    let ratio = (sums.sum1 + rest) / sums.normalizer;
    let base = 1.0 - inst.h_log_t_over_pi();
    let band_at = |p: f64| (-p / PI * sums.sum1_core + rest) / sums.normalizer;
    let (x, y) = (band_at(base - inst.h), band_at(base + inst.h));
    Ok(OracleResult {
        l: inst.l,
        t: inst.t,
        h: inst.h,
        mode: inst.mode,
        sum1: sums.sum1,
        sum2: sums.sum2,
        sum3: sums.sum3,
        normalizer: sums.normalizer,
        ratio,
        ratio_band: [x.min(y), x.max(y)],
        afh_prediction: prediction,
        discrepancy: (ratio - prediction).abs(),
    })
}

/// Least-squares fit `discrepancy ≈ A / log L + B h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscrepancyFit {
    pub a: f64,
    pub b: f64,
    /// `‖residual‖₂ / ‖discrepancy‖₂`.
    pub relative_residual: f64,
}

/// Relative residual below which the fit is taken to explain the data.
pub const FIT_RESIDUAL_THRESHOLD: f64 = 0.30;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<OracleResult>,
    /// `None` for a single row.
    pub discrepancy_non_increasing: Option<bool>,
    /// `None` with fewer than three rows (two rows are fitted exactly).
    pub fit: Option<DiscrepancyFit>,
    pub fit_explains: Option<bool>,
}

fn fit_discrepancy(rows: &[OracleResult]) -> Option<DiscrepancyFit> {
    if rows.len() < 3 {
        return None;
    }
    let (mut s11, mut s12, mut s22, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for r in rows {
        let x1 = 1.0 / (r.l as f64).ln();
        let x2 = r.h;
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        y1 += x1 * r.discrepancy;
        y2 += x2 * r.discrepancy;
    }
    let det = s11 * s22 - s12 * s12;
    if det.abs() <= f64::EPSILON * s11 * s22 {
        return None;
    }
    let a = (y1 * s22 - y2 * s12) / det;
    let b = (s11 * y2 - s12 * y1) / det;
    let (mut res2, mut norm2) = (0.0, 0.0);
    for r in rows {
        let fit = a / (r.l as f64).ln() + b * r.h;
        res2 += (r.discrepancy - fit).powi(2);
        norm2 += r.discrepancy.powi(2);
    }
    Some(DiscrepancyFit {
        a,
        b,
        relative_residual: if norm2 > 0.0 {
            (res2 / norm2).sqrt()
        } else {
            0.0
        },
    })
}

/// Runs [`evaluate`] on instances of increasing `L` sharing `(phi, ell, f, mode)`.
pub fn convergence_study(
    instances: &[OracleInstance],
    tables: &ArithTables,
    tol: f64,
) -> Result<ConvergenceReport, OracleError> {
    if let Some(first) = instances.first() {
        for inst in instances {
            if inst.phi != first.phi
                || inst.ell != first.ell
                || inst.f != first.f
                || inst.mode != first.mode
            {
                return Err(OracleError::InvalidInstance(
                    "convergence study instances must share phi, ell, f and mode".into(),
                ));
            }
        }
        if instances.windows(2).any(|w| w[1].l <= w[0].l) {
            return Err(OracleError::InvalidInstance(
                "convergence study needs strictly increasing L".into(),
            ));
        }
    }
    let rows = instances
        .iter()
        .map(|inst| evaluate(inst, tables, tol))
        .collect::<Result<Vec<_>, _>>()?;
    let discrepancy_non_increasing = (rows.len() >= 2).then(|| {
        rows.windows(2)
            .all(|w| w[1].discrepancy <= w[0].discrepancy)
    });
    let fit = fit_discrepancy(&rows);
    Ok(ConvergenceReport {
        discrepancy_non_increasing,
        fit_explains: fit.map(|f| f.relative_residual < FIT_RESIDUAL_THRESHOLD),
        fit,
        rows,
    })
}

/// `max_t |R_L(1/2 + it)|² / (L Σ r(n)²/n)` over the samples, for coefficients
/// `r` indexed `0..=L`.
pub fn resonator_sup_ratio(r: &[f64], t_samples: &[f64]) -> Result<f64, OracleError> {
    let l = r.len().saturating_sub(1);
    if l < 3 {
        return Err(OracleError::InvalidInstance(format!(
            "need L >= 3, got {l}"
        )));
    }
    let normalizer = (1..=l)
        .map(|n| r[n] * r[n] / n as f64)
        .sum::<NeumaierSum>()
        .value();
    if normalizer == 0.0 {
        return Ok(0.0);
    }
    let amplitude: Vec<f64> = (0..=l)
        .map(|n| {
            if n == 0 {
                0.0
            } else {
                r[n] / (n as f64).sqrt()
            }
        })
        .collect();
    let logs: Vec<f64> = (0..=l)
        .map(|n| if n == 0 { 0.0 } else { (n as f64).ln() })
        .collect();
    let mut best = 0.0f64;
    for &t in t_samples {
        let mut re = NeumaierSum::new();
        let mut im = NeumaierSum::new();
        for n in 1..=l {
            let (s, c) = (t * logs[n]).sin_cos();
            re.push(amplitude[n] * c);
            im.push(-amplitude[n] * s);
        }
        let modulus2 = re.value().powi(2) + im.value().powi(2);
        best = best.max(modulus2 / (l as f64 * normalizer));
    }
    Ok(best)
}

/// [`resonator_sup_ratio`] with the instance's resonator.
pub fn resonator_sup_check(
    inst: &OracleInstance,
    tables: &ArithTables,
    t_samples: &[f64],
) -> Result<f64, OracleError> {
    let r = resonator_coeffs(inst, tables)?;
    resonator_sup_ratio(&r, t_samples)
}
