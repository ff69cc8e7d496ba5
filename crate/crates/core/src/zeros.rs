//! Tables of zeta-zero ordinates and the empirical gap statistics built on them.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::sum::NeumaierSum;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZeroTableError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: cannot parse {content:?} as an ordinate")]
    Parse { line: usize, content: String },
    #[error("line {line}: ordinate {value} is smaller than the previous one ({previous})")]
    NonMonotone {
        line: usize,
        previous: f64,
        value: f64,
    },
    #[error("no ordinates")]
    NoOrdinates,
    #[error("first ordinate {0} is not above 14")]
    FirstTooSmall(f64),
    #[error("interval [{lo}, {hi}] is outside the table coverage [{cover_lo}, {cover_hi}]")]
    OutOfCoverage {
        lo: f64,
        hi: f64,
        cover_lo: f64,
        cover_hi: f64,
    },
    #[error("window holds {0} zero(s); at least 2 are needed")]
    TooFewZeros(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Ascending ordinates `gamma_1 <= gamma_2 <= ...` of zeros on the critical line.
///
/// A table of the first `n` zeros is complete on `[0, gamma_n]`, which is what
/// [`coverage`](Self::coverage) reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroTable {
    ordinates: Vec<f64>,
    source: String,
}

impl ZeroTable {
    pub fn new(ordinates: Vec<f64>, source: impl Into<String>) -> Result<Self, ZeroTableError> {
        let first = *ordinates.first().ok_or(ZeroTableError::NoOrdinates)?;
        if !(first > 14.0) {
            return Err(ZeroTableError::FirstTooSmall(first));
        }
        for (i, w) in ordinates.windows(2).enumerate() {
            if !(w[1] >= w[0]) {
                return Err(ZeroTableError::NonMonotone {
                    line: i + 2,
                    previous: w[0],
                    value: w[1],
                });
            }
        }
        Ok(Self {
            ordinates,
            source: source.into(),
        })
    }

    pub fn ordinates(&self) -> &[f64] {
        &self.ordinates
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.ordinates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordinates.is_empty()
    }

    pub fn coverage(&self) -> (f64, f64) {
        (0.0, *self.ordinates.last().expect("table is never empty"))
    }

    fn check_covered(&self, lo: f64, hi: f64) -> Result<(), ZeroTableError> {
        let (cover_lo, cover_hi) = self.coverage();
        if lo < cover_lo || hi > cover_hi || !(lo <= hi) {
            return Err(ZeroTableError::OutOfCoverage {
                lo,
                hi,
                cover_lo,
                cover_hi,
            });
        }
        Ok(())
    }

    /// `N(t + h/2) - N(t - h/2)` with ordinates on an endpoint counted as 1/2.
    pub fn count_n_h(&self, t: f64, h: f64) -> Result<f64, ZeroTableError> {
        if !(h >= 0.0) || !h.is_finite() || !t.is_finite() {
            return Err(ZeroTableError::InvalidParameter(format!(
                "need finite t and h >= 0, got t = {t}, h = {h}"
            )));
        }
        let (lo, hi) = (t - h / 2.0, t + h / 2.0);
        self.check_covered(lo, hi)?;
        Ok(self.count_closed_half(lo, hi))
    }

    fn count_closed_half(&self, lo: f64, hi: f64) -> f64 {
        let z = &self.ordinates;
        let below_lo = z.partition_point(|&g| g < lo);
        let upto_lo = z.partition_point(|&g| g <= lo);
        let below_hi = z.partition_point(|&g| g < hi);
        let upto_hi = z.partition_point(|&g| g <= hi);
        if lo == hi {
            // both endpoints coincide: each zero there is half in, half out twice over
            return 0.0;
        }
        let interior = below_hi - upto_lo;
        interior as f64 + 0.5 * ((upto_lo - below_lo) + (upto_hi - below_hi)) as f64
    }
}

/// Reads one ordinate per line, skipping blank lines and lines starting with `#`.
pub fn parse_zero_table(
    path: impl AsRef<Path>,
    limit: Option<usize>,
) -> Result<ZeroTable, ZeroTableError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| ZeroTableError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_zero_table_from(file, path.display().to_string(), limit)
}

pub fn parse_zero_table_from<R: Read>(
    reader: R,
    source: impl Into<String>,
    limit: Option<usize>,
) -> Result<ZeroTable, ZeroTableError> {
    let source = source.into();
    let limit = limit.unwrap_or(usize::MAX);
    let mut ordinates = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        if ordinates.len() >= limit {
            break;
        }
        let line_no = idx + 1;
        let line = line.map_err(|e| ZeroTableError::Io {
            path: source.clone(),
            message: format!("line {line_no}: {e}"),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let value: f64 = trimmed
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite() && *v > 0.0)
            .ok_or_else(|| ZeroTableError::Parse {
                line: line_no,
                content: trimmed.to_string(),
            })?;
        if ordinates.is_empty() && !(value > 14.0) {
            return Err(ZeroTableError::FirstTooSmall(value));
        }
        if let Some(&previous) = ordinates.last() {
            if value < previous {
                return Err(ZeroTableError::NonMonotone {
                    line: line_no,
                    previous,
                    value,
                });
            }
        }
        ordinates.push(value);
    }
    ZeroTable::new(ordinates, source)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub bin_width: f64,
    /// `counts[i]` holds gaps in `[i w, (i+1) w)`.
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn mass(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapStats {
    pub source: String,
    pub window: [f64; 2],
    pub phi: f64,
    pub zeros_in_window: usize,
    pub gap_count: usize,
    /// Smallest `(gamma_{n+1} - gamma_n) log(gamma_n) / (2 pi)`.
    pub min_normalized_gap: f64,
    /// Table indices (0-based) of the pair attaining the minimum.
    pub argmin: [usize; 2],
    pub argmin_ordinates: [f64; 2],
    pub histogram: Histogram,
    /// Mean of the normalized gaps as defined above.
    pub mean_normalized_gap: f64,
    /// Mean of `(gamma_{n+1} - gamma_n) log(gamma_n / (2 pi)) / (2 pi)`, i.e. gaps
    /// measured against the exact local density of zeros.
    pub mean_density_normalized_gap: f64,
    /// Supremum of `N_h(t)² - N_h(t)` over the candidate centres, `h = 2 pi phi / log t`.
    pub sup_nh2_minus_nh: f64,
    /// Centre `t` and width `h` attaining the supremum (`None` if no candidate fits).
    pub sup_at: Option<[f64; 2]>,
}

pub const DEFAULT_BIN_WIDTH: f64 = 0.05;

/// Gap statistics for the zeros with `t_lo <= gamma <= t_hi`.
///
/// The supremum of `N_h² - N_h` is taken over centres `t = (gamma_i + gamma_j)/2`
/// of pairs with `gamma_j - gamma_i < 2 pi phi / log t`: any interval of width
/// `h` that holds a set of zeros also holds them when re-centred on the midpoint
/// of its extreme pair. Candidates whose interval leaves the window are skipped.
pub fn gap_stats(
    zt: &ZeroTable,
    window: [f64; 2],
    phi: f64,
    bin_width: f64,
) -> Result<GapStats, ZeroTableError> {
    if !(phi > 0.0) || !phi.is_finite() {
        return Err(ZeroTableError::InvalidParameter(format!(
            "need phi > 0, got {phi}"
        )));
    }
    if !(bin_width > 0.0) || !bin_width.is_finite() {
        return Err(ZeroTableError::InvalidParameter(format!(
            "need a positive bin width, got {bin_width}"
        )));
    }
    let [t_lo, t_hi] = window;
    zt.check_covered(t_lo, t_hi)?;
    let z = zt.ordinates();
    let start = z.partition_point(|&g| g < t_lo);
    let end = z.partition_point(|&g| g <= t_hi);
    let zeros = &z[start..end];
    if zeros.len() < 2 {
        return Err(ZeroTableError::TooFewZeros(zeros.len()));
    }

    let mut min_gap = f64::INFINITY;
    let mut argmin = 0usize;
    let mut counts: Vec<u64> = Vec::new();
    let mut mean = NeumaierSum::new();
    let mut mean_density = NeumaierSum::new();
    for (i, w) in zeros.windows(2).enumerate() {
        let gap = w[1] - w[0];
        let normalized = gap * w[0].ln() / (2.0 * PI);
        mean.push(normalized);
        mean_density.push(gap * (w[0] / (2.0 * PI)).ln() / (2.0 * PI));
        if normalized < min_gap {
            min_gap = normalized;
            argmin = i;
        }
        let bin = (normalized / bin_width).floor() as usize;
        if bin >= counts.len() {
            counts.resize(bin + 1, 0);
        }
        counts[bin] += 1;
    }
    let gap_count = zeros.len() - 1;

    let width = |t: f64| 2.0 * PI * phi / t.ln();
    let mut sup = 0.0f64;
    let mut sup_at = None;
    let mut j = 0usize;
    for i in 0..zeros.len() {
        j = j.max(i);
        while j + 1 < zeros.len() {
            let mid = 0.5 * (zeros[i] + zeros[j + 1]);
            if zeros[j + 1] - zeros[i] < width(mid) {
                j += 1;
            } else {
                break;
            }
        }
        let t = 0.5 * (zeros[i] + zeros[j]);
        let h = width(t);
        if t - h / 2.0 < t_lo || t + h / 2.0 > t_hi {
            continue;
        }
        let n = zt.count_closed_half(t - h / 2.0, t + h / 2.0);
        let value = n * n - n;
        if sup_at.is_none() || value > sup {
            sup = value;
            sup_at = Some([t, h]);
        }
    }

    Ok(GapStats {
        source: zt.source().to_string(),
        window,
        phi,
        zeros_in_window: zeros.len(),
        gap_count,
        min_normalized_gap: min_gap,
        argmin: [start + argmin, start + argmin + 1],
        argmin_ordinates: [zeros[argmin], zeros[argmin + 1]],
        histogram: Histogram { bin_width, counts },
        mean_normalized_gap: mean.value() / gap_count as f64,
        mean_density_normalized_gap: mean_density.value() / gap_count as f64,
        sup_nh2_minus_nh: sup,
        sup_at,
    })
}
