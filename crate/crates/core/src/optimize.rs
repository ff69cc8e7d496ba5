//! Nelder-Mead search over `(ell, c_1, ..., c_d)` for weights `f(x) = 1 + c_1 x + ... + c_d x^d`
//! that lower the certified `phi*`.
//!
//! `G` is invariant under `f -> c f`, so `c_0` is pinned to 1. A candidate that
//! fails to certify scores `phi_scan.hi`. Each start runs its own simplex with a
//! share of the evaluation budget; starts run in parallel and their traces are
//! merged in start order, so the report depends only on the spec.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bound::{minimize_phi, BoundError, BoundParams, PhiScan, PhiSearch, WeightPolynomial};

/// Reference feasible point `(ell, c_1) = (1.15, -0.7)`.
pub const REFERENCE_POINT: [f64; 2] = [1.15, -0.7];

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Initial simplex edge as a fraction of each box side.
const SIMPLEX_STEP: f64 = 0.1;
/// Stop a start once all simplex vertices agree to this in every coordinate.
const SIMPLEX_XTOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpec {
    pub degree: usize,
    pub ell_range: [f64; 2],
    /// Box for `c_1..=c_degree`; a single entry is reused for every coefficient.
    pub coeff_range: Vec<[f64; 2]>,
    pub phi_scan: PhiScan,
    /// Maximum number of `minimize_phi` calls across all starts.
    pub budget: usize,
    pub seed: u64,
    pub starts: usize,
    pub tol_phi: f64,
    pub quad_tol: f64,
    /// First start; defaults to the reference point padded with zeros when it
    /// lies in the box, otherwise to the box centre.
    pub initial: Option<Vec<f64>>,
}

impl SearchSpec {
    pub fn new(degree: usize, budget: usize, seed: u64) -> Self {
        Self {
            degree,
            ell_range: [1.0, 2.0],
            coeff_range: vec![[-2.0, 2.0]],
            phi_scan: PhiScan {
                lo: 0.3,
                hi: 0.7,
                step: 0.01,
            },
            budget,
            seed,
            starts: 4,
            tol_phi: 1e-6,
            quad_tol: 1e-9,
            initial: None,
        }
    }

    pub fn validate(&self) -> Result<(), BoundError> {
        let bad = |msg: String| Err(BoundError::InvalidParameter(msg));
        if self.degree < 1 {
            return bad("degree must be at least 1".into());
        }
        if self.budget < 1 {
            return bad("budget must be at least 1".into());
        }
        if self.starts < 1 {
            return bad("need at least one start".into());
        }
        if !(self.ell_range[0] >= 1.0
            && self.ell_range[0] <= self.ell_range[1]
            && self.ell_range[1].is_finite())
        {
            return bad(format!(
                "ell range {:?} must satisfy 1 <= lo <= hi",
                self.ell_range
            ));
        }
        if self.coeff_range.len() != 1 && self.coeff_range.len() != self.degree {
            return bad(format!(
                "expected 1 or {} coefficient ranges, got {}",
                self.degree,
                self.coeff_range.len()
            ));
        }
        if self
            .coeff_range
            .iter()
            .any(|r| !(r[0] <= r[1]) || !r[0].is_finite() || !r[1].is_finite())
        {
            return bad("coefficient ranges must be finite with lo <= hi".into());
        }
        PhiScan::new(self.phi_scan.lo, self.phi_scan.hi, self.phi_scan.step)?;
        if !(self.tol_phi > 0.0) || !(self.quad_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if let Some(x) = &self.initial {
            if x.len() != self.degree + 1 {
                return bad(format!(
                    "initial point needs {} entries (ell, c_1..c_d), got {}",
                    self.degree + 1,
                    x.len()
                ));
            }
        }
        Ok(())
    }

    fn bounds(&self) -> Vec<[f64; 2]> {
        let mut b = vec![self.ell_range];
        for i in 0..self.degree {
            b.push(if self.coeff_range.len() == 1 {
                self.coeff_range[0]
            } else {
                self.coeff_range[i]
            });
        }
        b
    }

    fn reference_start(&self) -> Vec<f64> {
        let bounds = self.bounds();
        let mut x = vec![0.0; self.degree + 1];
        x[0] = REFERENCE_POINT[0];
        x[1] = REFERENCE_POINT[1];
        if in_box(&x, &bounds) {
            x
        } else {
            bounds.iter().map(|b| 0.5 * (b[0] + b[1])).collect()
        }
    }
}

fn in_box(x: &[f64], bounds: &[[f64; 2]]) -> bool {
    x.iter().zip(bounds).all(|(v, b)| *v >= b[0] && *v <= b[1])
}

fn clamp(x: &mut [f64], bounds: &[[f64; 2]]) {
    for (v, b) in x.iter_mut().zip(bounds) {
        *v = v.clamp(b[0], b[1]);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    /// Position in the merged trace.
    pub iteration: usize,
    pub start: usize,
    pub ell: f64,
    /// Full coefficient vector, `coeffs[0] = 1`.
    pub coeffs: Vec<f64>,
    /// `None` when the candidate did not certify.
    pub phi_star: Option<f64>,
    /// Value seen by the simplex (`phi_scan.hi` on failure).
    pub objective: f64,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchReport {
    pub best_phi_star: Option<f64>,
    pub best_params: Option<BoundParams>,
    pub trace: Vec<TraceEntry>,
    pub evaluations: usize,
}

impl SearchReport {
    pub fn successes(&self) -> impl Iterator<Item = &TraceEntry> {
        self.trace.iter().filter(|e| e.phi_star.is_some())
    }
}

struct Objective<'a> {
    spec: &'a SearchSpec,
    remaining: usize,
    trace: Vec<TraceEntry>,
    start: usize,
}

impl Objective<'_> {
    fn eval(&mut self, x: &[f64]) -> Option<f64> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let ell = x[0];
        let mut coeffs = Vec::with_capacity(x.len());
        coeffs.push(1.0);
        coeffs.extend_from_slice(&x[1..]);
        let outcome = WeightPolynomial::new(coeffs.clone()).and_then(|f| {
            minimize_phi(
                ell,
                &f,
                self.spec.phi_scan,
                self.spec.tol_phi,
                self.spec.quad_tol,
            )
        });
        let (phi_star, failure) = match outcome {
            Ok(PhiSearch::Certified { phi_star, .. }) => (Some(phi_star), None),
            Ok(PhiSearch::NoCertificate { reason, .. }) => (None, Some(reason)),
            Err(e) => (None, Some(e.to_string())),
        };
        let objective = phi_star.unwrap_or(self.spec.phi_scan.hi);
        self.trace.push(TraceEntry {
            iteration: 0,
            start: self.start,
            ell,
            coeffs,
            phi_star,
            objective,
            failure,
        });
        Some(objective)
    }
}

fn nelder_mead(spec: &SearchSpec, start: usize, x0: Vec<f64>, budget: usize) -> Vec<TraceEntry> {
    let bounds = spec.bounds();
    let n = x0.len();
    let mut obj = Objective {
        spec,
        remaining: budget,
        trace: Vec::new(),
        start,
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let Some(f0) = obj.eval(&x0) else {
        return obj.trace;
    };
    simplex.push((x0.clone(), f0));
    for i in 0..n {
        let mut x = x0.clone();
        let side = bounds[i][1] - bounds[i][0];
        let step = if side > 0.0 { SIMPLEX_STEP * side } else { 0.0 };
        x[i] += step;
        if x[i] > bounds[i][1] {
            x[i] = x0[i] - step;
        }
        clamp(&mut x, &bounds);
        let Some(fx) = obj.eval(&x) else {
            return obj.trace;
        };
        simplex.push((x, fx));
    }

    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = (0..n)
            .map(|k| {
                let (lo, hi) = simplex
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                        (lo.min(v.0[k]), hi.max(v.0[k]))
                    });
                hi - lo
            })
            .fold(0.0, f64::max);
        if spread < SIMPLEX_XTOL {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|v| v.0[k]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            let mut x: Vec<f64> = (0..n)
                .map(|k| centroid[k] + t * (simplex[n].0[k] - centroid[k]))
                .collect();
            clamp(&mut x, &bounds);
            x
        };
        let (f_best, f_second_worst, f_worst) = (simplex[0].1, simplex[n - 1].1, simplex[n].1);

        let xr = along(-REFLECT);
        let Some(fr) = obj.eval(&xr) else { break };
        if fr < f_best {
            let xe = along(-REFLECT * EXPAND);
            let Some(fe) = obj.eval(&xe) else { break };
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < f_second_worst {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc_ref) = if fr < f_worst {
            (along(-CONTRACT), fr)
        } else {
            (along(CONTRACT), f_worst)
        };
        let Some(fc) = obj.eval(&xc) else { break };
        if fc < fc_ref {
            simplex[n] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            let mut x: Vec<f64> = (0..n)
                .map(|k| best[k] + SHRINK * (v.0[k] - best[k]))
                .collect();
            clamp(&mut x, &bounds);
            let Some(fx) = obj.eval(&x) else {
                return obj.trace;
            };
            *v = (x, fx);
        }
    }
    obj.trace
}

fn start_points(spec: &SearchSpec, count: usize) -> Vec<Vec<f64>> {
    let bounds = spec.bounds();
    let first = spec
        .initial
        .clone()
        .unwrap_or_else(|| spec.reference_start());
    let mut pts = vec![first];
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    // lattice of cell centres along a Kronecker sequence, jittered within a quarter cell
    let alphas: Vec<f64> = (0..bounds.len())
        .map(|k| {
            let p = [2.0f64, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0][k % 8];
            p.sqrt().fract()
        })
        .collect();
    for s in 1..count {
        let x: Vec<f64> = bounds
            .iter()
            .zip(&alphas)
            .map(|(b, a)| {
                let u = (s as f64 * a).fract();
                let jitter: f64 = rng.gen_range(-0.125..0.125) / count as f64;
                b[0] + (u + jitter).clamp(0.0, 1.0) * (b[1] - b[0])
            })
            .collect();
        pts.push(x);
    }
    pts
}

/// Runs the multi-start simplex search described at module level.
pub fn optimize_weights(spec: &SearchSpec) -> Result<SearchReport, BoundError> {
    spec.validate()?;
    let starts = spec.starts.min(spec.budget);
    let points = start_points(spec, starts);
    let share = spec.budget / starts;
    let extra = spec.budget % starts;
    let traces: Vec<Vec<TraceEntry>> = points
        .into_par_iter()
        .enumerate()
        .map(|(s, x0)| nelder_mead(spec, s, x0, share + usize::from(s < extra)))
        .collect();

    let mut trace: Vec<TraceEntry> = traces.into_iter().flatten().collect();
    for (i, e) in trace.iter_mut().enumerate() {
        e.iteration = i;
    }
    let best = trace
        .iter()
        .filter_map(|e| e.phi_star.map(|p| (p, e)))
        .min_by(|a, b| a.0.total_cmp(&b.0));
    let (best_phi_star, best_params) = match best {
        Some((p, e)) => (
            Some(p),
            Some(BoundParams::new(
                p,
                e.ell,
                WeightPolynomial::new(e.coeffs.clone())?,
            )?),
        ),
        None => (None, None),
    };
    Ok(SearchReport {
        best_phi_star,
        best_params,
        evaluations: trace.len(),
        trace,
    })
}
