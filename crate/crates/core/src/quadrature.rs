//! Adaptive Gauss-Legendre quadrature for the 1-, 2- and 3-dimensional
//! simplex integrals of the gap functional.
//!
//! Every panel is integrated with a fixed 15-point Gauss-Legendre rule. The
//! error of a panel is the difference between its one-panel value and the sum
//! of its two halves; the panel with the largest estimate is bisected until the
//! summed estimate drops below the requested absolute tolerance.
//!
//! Nested integrals are built by composition: the outer integrand is itself an
//! adaptive integral, and the error reported by the inner integral is carried
//! into the outer estimate.

use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use crate::sum::NeumaierSum;

/// Points of the fixed panel rule.
pub const PANEL_ORDER: usize = 15;

/// Maximum number of live panels before the adaptive loop gives up.
pub const MAX_PANELS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

impl QuadResult {
    pub const ZERO: QuadResult = QuadResult {
        value: 0.0,
        abs_error_estimate: 0.0,
        evaluations: 0,
    };
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error(
        "adaptive quadrature did not converge after {panels} panels \
         (best value {}, error estimate {})",
        best.value,
        best.abs_error_estimate
    )]
    NonConvergence { best: QuadResult, panels: usize },
    #[error("invalid quadrature input: {0}")]
    InvalidInput(String),
}

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes the rule by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// The shared 15-point rule.
    pub fn panel_rule() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(PANEL_ORDER))
    }

    /// Applies the rule on `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = NeumaierSum::new();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc.push(w * f(mid + half * x));
        }
        half * acc.value()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `sin(c u) / u`, continuously extended by `c` at `u = 0`.
#[inline]
pub fn sinc_kernel(u: f64, c: f64) -> f64 {
    if u == 0.0 {
        c
    } else {
        (c * u).sin() / u
    }
}

/// Value of a panel rule together with the propagated integrand error.
#[derive(Debug, Clone, Copy)]
struct Estimate {
    value: f64,
    carried: f64,
}

struct Panel {
    a: f64,
    b: f64,
    left: Estimate,
    right: Estimate,
    est: f64,
}

impl Panel {
    fn fine(&self) -> f64 {
        self.left.value + self.right.value
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.est
            .total_cmp(&other.est)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn rule_estimate<F: FnMut(f64) -> (f64, f64)>(
    f: &mut F,
    a: f64,
    b: f64,
    evals: &mut usize,
) -> Estimate {
    let rule = GaussLegendre::panel_rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut value = NeumaierSum::new();
    let mut carried = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let (v, e) = f(mid + half * x);
        value.push(w * v);
        carried += w * e.abs();
    }
    *evals += PANEL_ORDER;
    Estimate {
        value: half * value.value(),
        carried: half.abs() * carried,
    }
}

fn make_panel<F: FnMut(f64) -> (f64, f64)>(
    f: &mut F,
    a: f64,
    b: f64,
    coarse: Estimate,
    evals: &mut usize,
) -> Panel {
    let mid = 0.5 * (a + b);
    let left = rule_estimate(f, a, mid, evals);
    let right = rule_estimate(f, mid, b, evals);
    let est = (coarse.value - (left.value + right.value)).abs() + left.carried + right.carried;
    Panel {
        a,
        b,
        left,
        right,
        est,
    }
}

fn splittable(a: f64, b: f64) -> bool {
    let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    (b - a) > 64.0 * f64::EPSILON * scale
}

/// Adaptive integration of an integrand that reports `(value, abs_error)` at
/// each point. The integrated point errors are added to the panel estimates.
pub fn integrate_1d_propagating<F>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<QuadResult, QuadError>
where
    F: FnMut(f64) -> (f64, f64),
{
    if !(tol > 0.0) {
        return Err(QuadError::InvalidInput(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if !(a <= b) || !a.is_finite() || !b.is_finite() {
        return Err(QuadError::InvalidInput(format!(
            "need finite a <= b, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(QuadResult::ZERO);
    }

    let mut evals = 0usize;
    let coarse = rule_estimate(&mut f, a, b, &mut evals);
    let root = make_panel(&mut f, a, b, coarse, &mut evals);

    let mut total_est = root.est;
    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Panel> = Vec::new();
    heap.push(root);

    let summarize = |heap: &BinaryHeap<Panel>, frozen: &[Panel], evals: usize| {
        let mut value = NeumaierSum::new();
        let mut est = NeumaierSum::new();
        for p in heap.iter().chain(frozen.iter()) {
            value.push(p.fine());
            est.push(p.est);
        }
        QuadResult {
            value: value.value(),
            abs_error_estimate: est.value(),
            evaluations: evals,
        }
    };

    loop {
        if total_est <= tol {
            let result = summarize(&heap, &frozen, evals);
            if result.abs_error_estimate <= tol {
                return Ok(result);
            }
            total_est = result.abs_error_estimate;
        }
        if heap.len() + frozen.len() >= MAX_PANELS {
            return Err(QuadError::NonConvergence {
                best: summarize(&heap, &frozen, evals),
                panels: heap.len() + frozen.len(),
            });
        }
        let Some(worst) = heap.pop() else {
            // every panel is at the resolution floor
            let result = summarize(&heap, &frozen, evals);
            return Err(QuadError::NonConvergence {
                best: result,
                panels: frozen.len(),
            });
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !splittable(worst.a, mid) || !splittable(mid, worst.b) {
            frozen.push(worst);
            continue;
        }
        let left = make_panel(&mut f, worst.a, mid, worst.left, &mut evals);
        let right = make_panel(&mut f, mid, worst.b, worst.right, &mut evals);
        total_est += left.est + right.est - worst.est;
        heap.push(left);
        heap.push(right);
    }
}

/// Adaptive integral of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate_1d<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<QuadResult, QuadError> {
    integrate_1d_propagating(|x| (f(x), 0.0), a, b, tol)
}

/// `∫₀^upper g(v) v^(ell²-1) dv`.
///
/// For `ell > 1` the substitution `v = w^(1/ell²)` turns the weight into the
/// constant `1/ell²`, so the adaptive rule integrates a continuous integrand on
/// `[0, upper^(ell²)]`.
pub fn inner_weighted_integral<G: FnMut(f64) -> f64>(
    mut g: G,
    upper: f64,
    ell: f64,
    tol: f64,
) -> Result<QuadResult, QuadError> {
    if !(ell >= 1.0) || !ell.is_finite() {
        return Err(QuadError::InvalidInput(format!(
            "ell must be >= 1, got {ell}"
        )));
    }
    // 1 - u1 - u2 may round slightly below zero on the simplex edge
    let upper = if upper < 0.0 && upper > -1e-12 {
        0.0
    } else {
        upper
    };
    if !(0.0..=1.0 + 1e-12).contains(&upper) {
        return Err(QuadError::InvalidInput(format!(
            "upper limit must lie in [0, 1], got {upper}"
        )));
    }
    if upper == 0.0 {
        return Ok(QuadResult::ZERO);
    }
    let power = ell * ell;
    if power == 1.0 {
        return integrate_1d(g, 0.0, upper, tol);
    }
    let inv = 1.0 / power;
    let top = upper.powf(power);
    let r = integrate_1d(|w| g(w.powf(inv)), 0.0, top, tol * power)?;
    Ok(QuadResult {
        value: r.value * inv,
        abs_error_estimate: r.abs_error_estimate * inv,
        evaluations: r.evaluations,
    })
}

fn with_count(r: QuadResult, evals: usize) -> QuadResult {
    QuadResult {
        evaluations: evals,
        ..r
    }
}

/// Share of the tolerance handed to each nested inner integral.
const INNER_TOL_SHARE: f64 = 1.0 / 64.0;

/// `∫₀¹ kernel(u) ∫₀^(1-u) inner(u, v) v^(ell²-1) dv du`.
pub fn nested_integral_2d<K, G>(
    kernel: K,
    inner: G,
    ell: f64,
    tol: f64,
) -> Result<QuadResult, QuadError>
where
    K: Fn(f64) -> f64,
    G: Fn(f64, f64) -> f64,
{
    let evals = Cell::new(0usize);
    let inner_tol = tol * INNER_TOL_SHARE;
    let mut failure = None;
    let r = integrate_1d_propagating(
        |u| {
            let k = kernel(u);
            if k == 0.0 {
                return (0.0, 0.0);
            }
            match inner_weighted_integral(|v| inner(u, v), 1.0 - u, ell, inner_tol) {
                Ok(q) => {
                    evals.set(evals.get() + q.evaluations);
                    (k * q.value, k * q.abs_error_estimate)
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
        return Err(e);
    }
    Ok(with_count(r, evals.get()))
}

/// `∫₀¹ k1(u1) ∫₀^(1-u1) k2(u2) ∫₀^(1-u1-u2) inner(u1, u2, v) v^(ell²-1) dv du2 du1`.
pub fn nested_integral_3d<K1, K2, G>(
    outer_kernel: K1,
    middle_kernel: K2,
    inner: G,
    ell: f64,
    tol: f64,
) -> Result<QuadResult, QuadError>
where
    K1: Fn(f64) -> f64,
    K2: Fn(f64) -> f64,
    G: Fn(f64, f64, f64) -> f64,
{
    let evals = Cell::new(0usize);
    let middle_tol = tol * INNER_TOL_SHARE;
    let inner_tol = middle_tol * INNER_TOL_SHARE;
    let failure: Cell<Option<QuadError>> = Cell::new(None);
    let record = |e: QuadError| {
        let prev = failure.take();
        failure.set(Some(prev.unwrap_or(e)));
    };
    let r = integrate_1d_propagating(
        |u1| {
            let k1 = outer_kernel(u1);
            if k1 == 0.0 {
                return (0.0, 0.0);
            }
            let middle = integrate_1d_propagating(
                |u2| {
                    let k2 = middle_kernel(u2);
                    if k2 == 0.0 {
                        return (0.0, 0.0);
                    }
                    match inner_weighted_integral(
                        |v| inner(u1, u2, v),
                        1.0 - u1 - u2,
                        ell,
                        inner_tol,
                    ) {
                        Ok(q) => {
                            evals.set(evals.get() + q.evaluations);
                            (k2 * q.value, k2 * q.abs_error_estimate)
                        }
                        Err(e) => {
                            record(e);
                            (0.0, 0.0)
                        }
                    }
                },
                0.0,
                1.0 - u1,
                middle_tol,
            );
            match middle {
                Ok(q) => (k1 * q.value, k1 * q.abs_error_estimate),
                Err(e) => {
                    record(e);
                    (0.0, 0.0)
                }
            }
        },
        0.0,
        1.0,
        tol,
    )?;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(with_count(r, evals.get()))
}
