//! Sieved arithmetic functions.
//!
//! One smallest-prime-factor table serves every function here: factorizations
//! are recovered in `O(log n)` steps, and the von Mangoldt and Liouville tables
//! are filled in the same pass.

use thiserror::Error;

/// Largest sieve limit accepted by [`ArithTables::build`].
pub const DEFAULT_MEMORY_CAP: usize = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArithError {
    #[error("sieve limit {limit} exceeds the memory cap of {cap}")]
    CapExceeded { limit: usize, cap: usize },
    #[error("sieve limit must be at least 2, got {0}")]
    LimitTooSmall(usize),
    #[error("argument {n} is outside the sieved range 1..={limit}")]
    OutOfRange { n: usize, limit: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Smallest prime factor, von Mangoldt and Liouville tables up to `limit`.
///
/// Immutable once built; share it by reference across threads.
#[derive(Debug, Clone)]
pub struct ArithTables {
    limit: usize,
    spf: Vec<u32>,
    von_mangoldt: Vec<f64>,
    liouville: Vec<i8>,
    primes: Vec<u32>,
}

/// `g_h(k)`, stored through its imaginary part. The real part is identically 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhCoefficient {
    pub k: usize,
    pub imag: f64,
}

impl GhCoefficient {
    pub fn re(&self) -> f64 {
        0.0
    }

    pub fn im(&self) -> f64 {
        self.imag
    }
}

impl ArithTables {
    /// Sieve up to `limit` under [`DEFAULT_MEMORY_CAP`].
    pub fn build(limit: usize) -> Result<Self, ArithError> {
        Self::build_with_cap(limit, DEFAULT_MEMORY_CAP)
    }

    pub fn build_with_cap(limit: usize, cap: usize) -> Result<Self, ArithError> {
        if limit < 2 {
            return Err(ArithError::LimitTooSmall(limit));
        }
        if limit > cap {
            return Err(ArithError::CapExceeded { limit, cap });
        }
        if limit > u32::MAX as usize {
            return Err(ArithError::CapExceeded {
                limit,
                cap: u32::MAX as usize,
            });
        }

        // linear sieve: every composite is crossed out exactly once, by its spf
        let mut spf = vec![0u32; limit + 1];
        let mut primes: Vec<u32> = Vec::new();
        for n in 2..=limit {
            if spf[n] == 0 {
                spf[n] = n as u32;
                primes.push(n as u32);
            }
            let p_n = spf[n];
            for &p in &primes {
                if p > p_n || (p as usize) * n > limit {
                    break;
                }
                spf[p as usize * n] = p;
            }
        }

        let mut von_mangoldt = vec![0.0f64; limit + 1];
        let mut liouville = vec![0i8; limit + 1];
        // prime-power flag doubles as "n = p^a" for the recursion below
        let mut prime_power = vec![false; limit + 1];
        liouville[1] = 1;
        for n in 2..=limit {
            let p = spf[n] as usize;
            let m = n / p;
            liouville[n] = -liouville[m];
            prime_power[n] = m == 1 || (spf[m] as usize == p && prime_power[m]);
            if prime_power[n] {
                von_mangoldt[n] = (p as f64).ln();
            }
        }

        Ok(Self {
            limit,
            spf,
            von_mangoldt,
            liouville,
            primes,
        })
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    fn check(&self, n: usize) -> Result<(), ArithError> {
        if n == 0 || n > self.limit {
            Err(ArithError::OutOfRange {
                n,
                limit: self.limit,
            })
        } else {
            Ok(())
        }
    }

    /// Smallest prime factor of `n >= 2`; returns 1 for `n = 1`.
    pub fn spf(&self, n: usize) -> Result<usize, ArithError> {
        self.check(n)?;
        Ok(if n == 1 { 1 } else { self.spf[n] as usize })
    }

    pub fn von_mangoldt(&self, n: usize) -> Result<f64, ArithError> {
        self.check(n)?;
        Ok(self.von_mangoldt[n])
    }

    pub fn liouville(&self, n: usize) -> Result<i8, ArithError> {
        self.check(n)?;
        Ok(self.liouville[n])
    }

    pub fn is_prime_power(&self, n: usize) -> Result<bool, ArithError> {
        Ok(self.von_mangoldt(n)? != 0.0)
    }

    /// Prime factorization as `(p, a)` pairs in increasing order of `p`.
    pub fn factorize(&self, n: usize) -> Result<Vec<(usize, u32)>, ArithError> {
        self.check(n)?;
        let mut out = Vec::new();
        let mut m = n;
        while m > 1 {
            let p = self.spf[m] as usize;
            let mut a = 0;
            while m % p == 0 {
                m /= p;
                a += 1;
            }
            out.push((p, a));
        }
        Ok(out)
    }

    /// Generalized divisor function `d_ell(n)` for real `ell >= 1`.
    ///
    /// Uses `d_ell(p^a) = d_ell(p^(a-1)) * (a - 1 + ell) / a` per prime power,
    /// so no Gamma function is evaluated.
    pub fn d_ell(&self, n: usize, ell: f64) -> Result<f64, ArithError> {
        check_ell(ell)?;
        self.check(n)?;
        Ok(self.d_ell_unchecked(n, ell))
    }

    pub(crate) fn d_ell_unchecked(&self, n: usize, ell: f64) -> f64 {
        let mut value = 1.0;
        let mut m = n;
        while m > 1 {
            let p = self.spf[m] as usize;
            let mut a = 0u32;
            let mut local = 1.0;
            while m % p == 0 {
                m /= p;
                a += 1;
                local *= (a as f64 - 1.0 + ell) / a as f64;
            }
            value *= local;
        }
        value
    }

    /// All `d_ell(n)` for `1 <= n <= limit`, index 0 set to 0.
    pub fn d_ell_table(&self, ell: f64) -> Result<Vec<f64>, ArithError> {
        check_ell(ell)?;
        let mut d = vec![0.0; self.limit + 1];
        d[1] = 1.0;
        for n in 2..=self.limit {
            let p = self.spf[n] as usize;
            let mut m = n;
            let mut a = 0u32;
            let mut local = 1.0;
            while m % p == 0 {
                m /= p;
                a += 1;
                local *= (a as f64 - 1.0 + ell) / a as f64;
            }
            d[n] = d[m] * local;
        }
        Ok(d)
    }

    /// Dirichlet coefficient `g_h(k) = -2i Lambda(k) sin((h/2) log k) / log k`.
    pub fn g_h(&self, k: usize, h: f64) -> Result<GhCoefficient, ArithError> {
        check_h(h)?;
        self.check(k)?;
        Ok(GhCoefficient {
            k,
            imag: self.g_h_imag_unchecked(k, h),
        })
    }

    pub(crate) fn g_h_imag_unchecked(&self, k: usize, h: f64) -> f64 {
        let lambda = self.von_mangoldt[k];
        if lambda == 0.0 {
            return 0.0;
        }
        let log_k = (k as f64).ln();
        -2.0 * lambda * (0.5 * h * log_k).sin() / log_k
    }

    /// Prime powers `<= bound` in increasing order.
    pub fn prime_powers_up_to(&self, bound: usize) -> Vec<usize> {
        let bound = bound.min(self.limit);
        (2..=bound)
            .filter(|&n| self.von_mangoldt[n] != 0.0)
            .collect()
    }
}

fn check_ell(ell: f64) -> Result<(), ArithError> {
    if ell.is_finite() && ell >= 1.0 {
        Ok(())
    } else {
        Err(ArithError::InvalidParameter(format!(
            "ell must be a finite real >= 1, got {ell}"
        )))
    }
}

fn check_h(h: f64) -> Result<(), ArithError> {
    if h > 0.0 && h <= 1.0 {
        Ok(())
    } else {
        Err(ArithError::InvalidParameter(format!(
            "h must satisfy 0 < h <= 1, got {h}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn trial_spf(n: usize) -> usize {
        (2..=n).find(|d| n % d == 0).unwrap()
    }

    #[test]
    fn small_von_mangoldt_values() {
        let t = ArithTables::build(10).unwrap();
        assert_eq!(t.von_mangoldt(8).unwrap(), LN_2);
        assert_eq!(t.von_mangoldt(6).unwrap(), 0.0);
        assert_eq!(t.von_mangoldt(7).unwrap(), 7f64.ln());
        assert_eq!(t.von_mangoldt(1).unwrap(), 0.0);
    }

    #[test]
    fn liouville_of_twelve() {
        let t = ArithTables::build(12).unwrap();
        assert_eq!(t.liouville(12).unwrap(), -1);
        assert_eq!(t.liouville(1).unwrap(), 1);
        assert_eq!(t.liouville(4).unwrap(), 1);
    }

    #[test]
    fn spf_matches_trial_division() {
        let t = ArithTables::build(5000).unwrap();
        for n in 2..=5000 {
            assert_eq!(t.spf(n).unwrap(), trial_spf(n), "n = {n}");
        }
    }

    #[test]
    fn factorization_reconstructs_n() {
        let t = ArithTables::build(10_000).unwrap();
        for n in 1..=10_000usize {
            let prod: usize = t
                .factorize(n)
                .unwrap()
                .iter()
                .map(|&(p, a)| p.pow(a))
                .product();
            assert_eq!(prod, n);
        }
    }

    #[test]
    fn cap_and_range_errors() {
        assert_eq!(
            ArithTables::build_with_cap(1000, 999).unwrap_err(),
            ArithError::CapExceeded {
                limit: 1000,
                cap: 999
            }
        );
        assert!(ArithTables::build(1).is_err());
        let t = ArithTables::build(10).unwrap();
        assert!(matches!(
            t.d_ell(11, 1.0),
            Err(ArithError::OutOfRange { .. })
        ));
        assert!(t.d_ell(0, 1.0).is_err());
        assert!(t.d_ell(4, 0.5).is_err());
    }

    #[test]
    fn d_ell_examples() {
        let t = ArithTables::build(100).unwrap();
        assert_eq!(t.d_ell(1, 1.15).unwrap(), 1.0);
        assert_eq!(t.d_ell(1, 3.7).unwrap(), 1.0);
        assert!((t.d_ell(2, 1.15).unwrap() - 1.15).abs() < 1e-15);
        // brute-force divisor count of 12
        let tau12 = (1..=12).filter(|d| 12 % d == 0).count() as f64;
        assert_eq!(t.d_ell(12, 2.0).unwrap(), tau12);
        assert_eq!(t.d_ell(12, 2.0).unwrap(), 6.0);
    }

    #[test]
    fn d_ell_table_matches_pointwise() {
        let t = ArithTables::build(3000).unwrap();
        let table = t.d_ell_table(1.15).unwrap();
        for n in 1..=3000 {
            let pointwise = t.d_ell(n, 1.15).unwrap();
            assert!(
                (table[n] - pointwise).abs() <= 4.0 * f64::EPSILON * pointwise,
                "n={n}"
            );
        }
    }

    #[test]
    fn g_h_examples() {
        let t = ArithTables::build(100).unwrap();
        assert_eq!(t.g_h(1, 0.3).unwrap().im(), 0.0);
        assert_eq!(t.g_h(6, 0.3).unwrap().im(), 0.0);
        let g = t.g_h(4, 1.0).unwrap();
        assert_eq!(g.re(), 0.0);
        let expected = -(LN_2).sin();
        assert!((g.im() - expected).abs() < 1e-15);
        assert!((g.im() + 0.638_961_276_3).abs() < 1e-9);
        assert!(t.g_h(4, 0.0).is_err());
        assert!(t.g_h(4, 1.5).is_err());
    }

    #[test]
    fn prime_power_count_to_a_million() {
        let limit = 1_000_000;
        let t = ArithTables::build(limit).unwrap();
        let sieved = (1..=limit)
            .filter(|&n| t.von_mangoldt(n).unwrap() != 0.0)
            .count();
        // independent count: primes by trial division, then their powers
        let is_prime = |n: usize| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0);
        let mut count = 0;
        for p in 2..=limit {
            if is_prime(p) {
                let mut q = p;
                while q <= limit {
                    count += 1;
                    q *= p;
                }
            }
        }
        assert_eq!(sieved, count);
        // pi(10^6) = 78498 plus the higher powers
        assert!(count > 78_498);
    }
}
