//! Exact smooth counting. Two independent algorithms back every number this
//! module reports: a segmented divide-out sweep (default up to 10^8) and a
//! recursion over the largest prime factor (default above 10^8).

use crate::arith::PrimeTable;
use crate::{Error, Result};
use rayon::prelude::*;

pub const PSI_EXACT_MAX_X: u64 = 1_000_000_000;
pub const PSI_SWEEP_MAX_X: u64 = 100_000_000;
const SEGMENT: u64 = 1 << 20;

/// Exact number of y-smooth integers in `[1, x]` (counting n = 1).
pub fn psi_exact(x: u64, y: u64, table: &PrimeTable) -> Result<u64> {
    if x > PSI_EXACT_MAX_X {
        return Err(Error::EnumerationRange(x, PSI_EXACT_MAX_X));
    }
    if y >= x {
        return Ok(x);
    }
    if y < 2 {
        return Ok(1.min(x));
    }
    if x <= PSI_SWEEP_MAX_X {
        psi_exact_sweep(x, y, table)
    } else {
        psi_exact_recursive(x, y, table)
    }
}

fn check_table(y: u64, table: &PrimeTable) -> Result<()> {
    if table.bound() < y {
        return Err(Error::AboveTableBound(y, table.bound()));
    }
    Ok(())
}

/// Segmented sweep: divide every n in `[1, x]` by the primes up to y and
/// count the positions whose residual collapses to 1.
pub fn psi_exact_sweep(x: u64, y: u64, table: &PrimeTable) -> Result<u64> {
    if x > PSI_EXACT_MAX_X {
        return Err(Error::EnumerationRange(x, PSI_EXACT_MAX_X));
    }
    if y >= x {
        return Ok(x);
    }
    check_table(y, table)?;
    let primes = table.primes_in(2, y);
    let n_segments = x.div_ceil(SEGMENT);
    let total: u64 = (0..n_segments)
        .into_par_iter()
        .map(|s| {
            let lo = s * SEGMENT + 1;
            let hi = ((s + 1) * SEGMENT).min(x);
            sweep_segment_count(lo, hi, primes)
        })
        .sum();
    Ok(total)
}

fn sweep_segment_count(lo: u64, hi: u64, primes: &[u64]) -> u64 {
    let len = (hi - lo + 1) as usize;
    let mut residual: Vec<u64> = (lo..=hi).collect();
    for &p in primes {
        let mut m = lo.div_ceil(p) * p;
        while m <= hi {
            let slot = &mut residual[(m - lo) as usize];
            while *slot % p == 0 {
                *slot /= p;
            }
            m += p;
        }
    }
    residual[..len].iter().filter(|&&r| r == 1).count() as u64
}

/// Recursion over the largest prime factor: `Psi(x, p_i)` splits by the
/// exponent of `p_i`. Cost is proportional to the count itself.
pub fn psi_exact_recursive(x: u64, y: u64, table: &PrimeTable) -> Result<u64> {
    if x > PSI_EXACT_MAX_X {
        return Err(Error::EnumerationRange(x, PSI_EXACT_MAX_X));
    }
    if y >= x {
        return Ok(x);
    }
    check_table(y, table)?;
    let primes = table.primes_in(2, y);
    Ok(count_rec(x, primes.len(), primes))
}

fn count_rec(x: u64, mut i: usize, primes: &[u64]) -> u64 {
    let mut acc = 0u64;
    loop {
        while i > 0 && primes[i - 1] > x {
            i -= 1;
        }
        if i == 0 {
            return acc + 1;
        }
        let p = primes[i - 1];
        // exponent >= 1 branches; the exponent-0 branch continues the loop
        let mut m = x / p;
        while m >= 1 {
            acc += count_rec(m, i - 1, primes);
            m /= p;
        }
        i -= 1;
    }
}

/// `Psi(x, p)` for every prime cutoff at once: `cumulative[i]` counts the
/// n <= x whose largest prime factor is exactly `primes[i]`, accumulated.
#[derive(Debug, Clone)]
pub struct SmoothProfile {
    pub x: u64,
    primes: Vec<u64>,
    cumulative: Vec<u64>,
}

impl SmoothProfile {
    /// Exact `Psi(x, y)` for any `y <= y_hi` of the profile.
    pub fn psi(&self, y: u64) -> u64 {
        if y >= self.x {
            return self.x;
        }
        let k = self.primes.partition_point(|&p| p <= y);
        // +1 counts n = 1
        if k == 0 {
            1
        } else {
            1 + self.cumulative[k - 1]
        }
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn y_hi(&self) -> u64 {
        self.primes.last().copied().unwrap_or(1)
    }

    pub(crate) fn from_histogram(x: u64, primes: Vec<u64>, hist: Vec<u64>) -> Self {
        let mut cumulative = hist;
        for i in 1..cumulative.len() {
            cumulative[i] += cumulative[i - 1];
        }
        SmoothProfile { x, primes, cumulative }
    }
}

/// Build a [`SmoothProfile`] by the segmented sweep, recording for each n the
/// largest prime that divides it.
pub fn smooth_profile_sweep(x: u64, y_hi: u64, table: &PrimeTable) -> Result<SmoothProfile> {
    if x > PSI_EXACT_MAX_X {
        return Err(Error::EnumerationRange(x, PSI_EXACT_MAX_X));
    }
    let y_hi = y_hi.min(x);
    check_table(y_hi, table)?;
    let primes: Vec<u64> = table.primes_in(2, y_hi).to_vec();
    let n_segments = x.div_ceil(SEGMENT);
    let hist = (0..n_segments)
        .into_par_iter()
        .map(|s| {
            let lo = s * SEGMENT + 1;
            let hi = ((s + 1) * SEGMENT).min(x);
            sweep_segment_histogram(lo, hi, &primes)
        })
        .reduce(
            || vec![0u64; primes.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(SmoothProfile::from_histogram(x, primes, hist))
}

fn sweep_segment_histogram(lo: u64, hi: u64, primes: &[u64]) -> Vec<u64> {
    let len = (hi - lo + 1) as usize;
    let mut residual: Vec<u64> = (lo..=hi).collect();
    let mut largest: Vec<u32> = vec![u32::MAX; len];
    for (idx, &p) in primes.iter().enumerate() {
        let mut m = lo.div_ceil(p) * p;
        while m <= hi {
            let pos = (m - lo) as usize;
            let slot = &mut residual[pos];
            while *slot % p == 0 {
                *slot /= p;
            }
            largest[pos] = idx as u32; // primes ascend, the last write wins
            m += p;
        }
    }
    let mut hist = vec![0u64; primes.len()];
    for pos in 0..len {
        if residual[pos] == 1 && largest[pos] != u32::MAX {
            hist[largest[pos] as usize] += 1;
        }
    }
    hist
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> PrimeTable {
        PrimeTable::sieve(1 << 20).unwrap()
    }

    /// Independent oracle: depth-first enumeration of the smooth numbers
    /// themselves, bucketed by largest prime factor.
    pub(crate) fn dfs_profile(x: u64, y_hi: u64, table: &PrimeTable) -> SmoothProfile {
        let primes: Vec<u64> = table.primes_in(2, y_hi.min(x)).to_vec();
        let mut hist = vec![0u64; primes.len()];
        fn dfs(val: u64, start: usize, x: u64, primes: &[u64], hist: &mut [u64]) {
            for idx in start..primes.len() {
                let p = primes[idx];
                if val > x / p {
                    break;
                }
                let mut v = val * p;
                while v <= x {
                    hist[idx] += 1;
                    dfs(v, idx + 1, x, primes, hist);
                    if v > x / p {
                        break;
                    }
                    v *= p;
                }
            }
        }
        dfs(1, 0, x, &primes, &mut hist);
        SmoothProfile::from_histogram(x, primes, hist)
    }

    /// Naive per-n largest-prime-factor oracle for tiny x.
    fn psi_naive(x: u64, y: u64) -> u64 {
        (1..=x)
            .filter(|&n| {
                let mut m = n;
                let mut d = 2;
                let mut largest = 1;
                while d * d <= m {
                    while m % d == 0 {
                        m /= d;
                        largest = largest.max(d);
                    }
                    d += 1;
                }
                largest.max(m) <= y || n == 1
            })
            .count() as u64
    }

    #[test]
    fn trivial_cases() {
        let t = table();
        assert_eq!(psi_exact(100, 1000, &t).unwrap(), 100);
        assert_eq!(psi_exact(1000, 1, &t).unwrap(), 1);
        assert_eq!(psi_exact(1, 1, &t).unwrap(), 1);
        assert!(psi_exact(2_000_000_000, 100, &t).is_err());
    }

    #[test]
    fn matches_naive_oracle_small() {
        let t = table();
        for (x, y) in [(100, 5), (1000, 7), (5000, 31), (10_000, 97)] {
            let expect = psi_naive(x, y);
            assert_eq!(psi_exact_sweep(x, y, &t).unwrap(), expect, "sweep ({x},{y})");
            assert_eq!(
                psi_exact_recursive(x, y, &t).unwrap(),
                expect,
                "recursive ({x},{y})"
            );
        }
    }

    #[test]
    fn two_algorithms_agree_at_all_cutoffs_to_1e6() {
        let t = table();
        let x = 1_000_000u64;
        let sweep = smooth_profile_sweep(x, x, &t).unwrap();
        let dfs = dfs_profile(x, x, &t);
        assert_eq!(sweep.primes(), dfs.primes());
        for (i, &p) in sweep.primes().iter().enumerate() {
            assert_eq!(sweep.psi(p), dfs.psi(p), "cutoff {p} (index {i})");
        }
        // spot values pinned from the independent oracle
        assert_eq!(sweep.psi(100), 72_271);
    }

    #[test]
    fn monotone_in_x_and_y() {
        let t = table();
        let mut prev = 0;
        for x in [1000, 2000, 4000, 8000] {
            let v = psi_exact(x, 13, &t).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        let mut prev = 0;
        for y in [2, 3, 5, 11, 31, 101, 1009] {
            let v = psi_exact(100_000, y, &t).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn recursive_matches_sweep_above_crossover_shape() {
        let t = table();
        for (x, y) in [(3_000_000, 43), (10_000_000, 199), (50_000_000, 997)] {
            assert_eq!(
                psi_exact_sweep(x, y, &t).unwrap(),
                psi_exact_recursive(x, y, &t).unwrap(),
                "({x},{y})"
            );
        }
    }
}
