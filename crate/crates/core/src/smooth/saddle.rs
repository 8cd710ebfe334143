//! Saddle-point machinery for Psi(x, y): the xi(u) equation, the saddle point
//! alpha(x, y), and the Hildebrand-Tenenbaum estimate
//!
//!     Psi(x, y) ~ x^alpha xi(alpha, y) / (alpha sqrt(2 pi phi2(alpha, y))),
//!
//! where xi(s, y) is the Euler product over p <= y and phi2 is its second
//! log-derivative sum (phi2 ~ log x log y in the large-u limit).

use super::dickman::default_table;
use super::psi::psi_exact;
use super::LogNum;
use crate::arith::PrimeTable;
use crate::{Error, Result};
use rayon::prelude::*;

/// Solve `e^xi = u xi + 1` for the positive root; requires u > 1.
pub fn xi_of_u(u: f64) -> Result<f64> {
    if !(u > 1.0) {
        return Err(Error::InvalidParam(format!("xi_of_u needs u > 1, got {u}")));
    }
    let h = |xi: f64| xi.exp() - u * xi - 1.0;
    // h dips negative at xi = 1 - 1/u and is positive for large xi
    let mut lo = 1.0 - 1.0 / u;
    let mut hi = (u * u.ln().max(1.0) + 1.0).ln().max(2.0);
    while h(hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NoRoot { lo, hi, flo: h(lo), fhi: h(hi) });
        }
    }
    // bisection with a Newton polish
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * hi.max(1.0) {
            break;
        }
    }
    let mut xi = 0.5 * (lo + hi);
    for _ in 0..4 {
        let hp = xi.exp() - u;
        if hp.abs() > 0.0 {
            xi -= h(xi) / hp;
        }
    }
    debug_assert!(h(xi).abs() <= 1e-10 * xi.exp());
    Ok(xi)
}

/// Deterministic chunked-parallel sum: the chunk boundaries are fixed, so the
/// result is bit-identical no matter how many threads execute it.
fn par_sum<F: Fn(u64) -> f64 + Sync>(primes: &[u64], f: F) -> f64 {
    const CHUNK: usize = 1 << 14;
    primes
        .par_chunks(CHUNK)
        .map(|c| c.iter().map(|&p| f(p)).sum::<f64>())
        .collect::<Vec<f64>>()
        .iter()
        .sum()
}

/// Saddle point alpha(x, y): the solution of
/// `sum_{p <= y} log p / (p^alpha - 1) = log x`.
pub fn saddle_alpha(x: u64, y: u64, table: &PrimeTable) -> Result<f64> {
    if y < 2 || y > x {
        return Err(Error::InvalidParam(format!(
            "saddle_alpha needs 2 <= y <= x, got x = {x}, y = {y}"
        )));
    }
    if table.bound() < y {
        return Err(Error::AboveTableBound(y, table.bound()));
    }
    let primes = table.primes_in(2, y);
    let ln_x = (x as f64).ln();
    let residual = |a: f64| par_sum(primes, |p| (p as f64).ln() / f64::exp_m1(a * (p as f64).ln())) - ln_x;
    // The sum is strictly decreasing in alpha; expand to bracket the root.
    let mut lo = 1e-12;
    let mut hi = 1.0;
    let mut f_hi = residual(hi);
    while f_hi > 0.0 {
        lo = hi;
        hi *= 2.0;
        f_hi = residual(hi);
        if hi > 64.0 {
            return Err(Error::NoRoot { lo, hi, flo: residual(lo), fhi: f_hi });
        }
    }
    // Newton (derivative = -phi2) with bisection safeguard
    let mut a = 0.5 * (lo + hi);
    for _ in 0..80 {
        let r = residual(a);
        if r.abs() <= 1e-9 * ln_x {
            return Ok(a);
        }
        if r > 0.0 {
            lo = a;
        } else {
            hi = a;
        }
        let d = phi2(a, primes);
        let step = r / d; // residual' = -phi2
        let mut next = a + step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        a = next;
    }
    Ok(a)
}

/// `phi2(alpha, y) = sum_{p<=y} log^2 p * p^alpha / (p^alpha - 1)^2`.
fn phi2(a: f64, primes: &[u64]) -> f64 {
    par_sum(primes, |p| {
        let lp = (p as f64).ln();
        let e = f64::exp_m1(a * lp);
        lp * lp * (1.0 + 1.0 / e) / e
    })
}

/// Hildebrand-Tenenbaum estimate of Psi(x, y) in log-space.
pub fn psi_ht(x: u64, y: u64, table: &PrimeTable) -> Result<LogNum> {
    if y < 2 || x < y {
        return Err(Error::InvalidParam(format!(
            "psi_ht needs 2 <= y <= x, got x = {x}, y = {y}"
        )));
    }
    let a = saddle_alpha(x, y, table)?;
    let primes = table.primes_in(2, y);
    let ln_xi = -par_sum(primes, |p| f64::ln_1p(-f64::exp(-a * (p as f64).ln())));
    let p2 = phi2(a, primes);
    let ln = a * (x as f64).ln() + ln_xi
        - a.ln()
        - 0.5 * (2.0 * std::f64::consts::PI * p2).ln();
    Ok(LogNum::from_ln(ln))
}

/// Dickman estimate `x * rho(log x / log y)` in log-space.
pub fn psi_dickman(x: u64, y: u64) -> Result<LogNum> {
    if y < 2 {
        return Err(Error::InvalidParam(format!("psi_dickman needs y >= 2, got {y}")));
    }
    let u = (x as f64).ln() / (y as f64).ln();
    let ln_rho = default_table().ln_rho(u)?;
    Ok(LogNum::from_ln((x as f64).ln() + ln_rho))
}

/// Exact ratio `Psi(x/d, y) / Psi(x, y)` next to its saddle-point prediction
/// `d^{-alpha(x,y)}`.
pub fn psi_ratio_check(x: u64, d: u64, y: u64, table: &PrimeTable) -> Result<(f64, f64)> {
    if d == 0 || d > y || y > x / d {
        return Err(Error::InvalidParam(format!(
            "psi_ratio_check needs 1 <= d <= y <= x/d, got x = {x}, d = {d}, y = {y}"
        )));
    }
    let num = psi_exact(x / d, y, table)? as f64;
    let den = psi_exact(x, y, table)? as f64;
    let alpha = saddle_alpha(x, y, table)?;
    Ok((num / den, (d as f64).powf(-alpha)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> PrimeTable {
        PrimeTable::sieve(1 << 20).unwrap()
    }

    #[test]
    fn xi_defining_residual() {
        for u in [1.5, 2.0, 10.0, 100.0, 1e6] {
            let xi = xi_of_u(u).unwrap();
            let res = (xi.exp() - u * xi - 1.0).abs();
            assert!(res <= 1e-10 * xi.exp(), "u = {u}: residual {res}");
        }
        assert!(xi_of_u(1.0).is_err());
    }

    #[test]
    fn xi_asymptotic_ratio() {
        let u = 1e6;
        let xi = xi_of_u(u).unwrap();
        let approx = (u * u.ln()).ln();
        assert!((xi / approx - 1.0).abs() < 0.05, "xi = {xi}, approx = {approx}");
    }

    #[test]
    fn xi_matches_plain_bisection_oracle() {
        let u = 2.0;
        // oracle: raw bisection of e^t - u t - 1 on [1e-6, 10]
        let f = |t: f64| t.exp() - u * t - 1.0;
        let (mut lo, mut hi) = (1e-6, 10.0);
        assert!(f(lo) < 0.0 && f(hi) > 0.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        assert!((xi_of_u(u).unwrap() - oracle).abs() < 1e-10);
    }

    #[test]
    fn alpha_defining_residual_and_range() {
        let t = table();
        let x = 100_000_000u64;
        let y = 1000u64;
        let a = saddle_alpha(x, y, &t).unwrap();
        let primes = t.primes_in(2, y);
        let sum: f64 = primes
            .iter()
            .map(|&p| (p as f64).ln() / ((p as f64).powf(a) - 1.0))
            .sum();
        let lnx = (x as f64).ln();
        assert!((sum - lnx).abs() <= 1e-8 * lnx, "residual {}", sum - lnx);
        assert!(a > 0.0 && a < 1.0);
    }

    #[test]
    fn alpha_decreasing_in_x() {
        let t = table();
        let a8 = saddle_alpha(100_000_000, 1000, &t).unwrap();
        let a9 = saddle_alpha(1_000_000_000, 1000, &t).unwrap();
        assert!(a9 < a8);
    }

    #[test]
    fn alpha_residual_grid() {
        let t = table();
        for &x in &[10_000u64, 1_000_000, 100_000_000, 10_000_000_000] {
            for &y in &[31u64, 101, 1009, 10_007, 100_003] {
                if y > x {
                    continue;
                }
                let a = saddle_alpha(x, y, &t).unwrap();
                assert!(a > 0.0 && a < 1.0, "alpha({x},{y}) = {a}");
                let lnx = (x as f64).ln();
                let sum: f64 = t
                    .primes_in(2, y)
                    .iter()
                    .map(|&p| (p as f64).ln() / f64::exp_m1(a * (p as f64).ln()))
                    .sum();
                assert!((sum - lnx).abs() <= 1e-8 * lnx, "({x},{y})");
            }
        }
    }

    #[test]
    fn y_one_minus_alpha_tracks_u_xi() {
        let t = table();
        let (x, y) = (100_000_000u64, 1000u64);
        let a = saddle_alpha(x, y, &t).unwrap();
        let u = (x as f64).ln() / (y as f64).ln();
        let lhs = (y as f64).powf(1.0 - a);
        let rhs = u * xi_of_u(u).unwrap();
        assert!((lhs / rhs - 1.0).abs() < 0.25, "lhs {lhs} rhs {rhs}");
    }

    #[test]
    fn ht_within_15_percent_of_exact() {
        let t = table();
        for (x, y) in [(1_000_000u64, 100u64), (100_000_000, 1000)] {
            let exact = psi_exact(x, y, &t).unwrap() as f64;
            let est = psi_ht(x, y, &t).unwrap().value();
            assert!(
                (est / exact - 1.0).abs() < 0.15,
                "({x},{y}): est {est}, exact {exact}"
            );
        }
    }

    #[test]
    fn ht_monotone_in_x() {
        let t = table();
        let a = psi_ht(50_000_000, 1000, &t).unwrap().ln;
        let b = psi_ht(100_000_000, 1000, &t).unwrap().ln;
        assert!(b > a);
    }

    #[test]
    fn dickman_estimate_behaviour() {
        let t = table();
        // y >= x collapses to x
        let est = psi_dickman(1000, 2000).unwrap();
        assert!((est.value() - 1000.0).abs() < 1e-9);
        // within 20% at the classical checkpoint
        let exact = psi_exact(100_000_000, 1000, &t).unwrap() as f64;
        let est = psi_dickman(100_000_000, 1000).unwrap().value();
        assert!((est / exact - 1.0).abs() < 0.20, "est {est} exact {exact}");
    }

    #[test]
    fn dickman_ratio_trend_at_u2() {
        // x rho(2) / Psi(x, sqrt(x)) climbs toward 1 as x grows
        let t = table();
        let mut prev = 0.0;
        for x in [100_000u64, 10_000_000, 1_000_000_000] {
            let y = (x as f64).sqrt().round() as u64;
            let exact = psi_exact(x, y, &t).unwrap() as f64;
            let ratio = psi_dickman(x, y).unwrap().value() / exact;
            assert!(ratio > prev, "ratio {ratio} at x = {x} not improving");
            assert!(ratio < 1.0);
            prev = ratio;
        }
        assert!(prev > 0.8);
    }

    #[test]
    fn ratio_check_examples() {
        let t = table();
        let (one, pred) = psi_ratio_check(1_000_000, 1, 100, &t).unwrap();
        assert!((one - 1.0).abs() < 1e-12 && (pred - 1.0).abs() < 1e-12);

        let (exact, pred) = psi_ratio_check(100_000_000, 97, 1000, &t).unwrap();
        assert!(
            (exact / pred - 1.0).abs() < 0.20,
            "d=97: exact {exact} pred {pred}"
        );

        // single large prime p just above y0(x): ratio against (log y0)/p
        let x = 100_000_000u64;
        let y0 = crate::smooth::find_params(x, crate::smooth::PsiMode::Exact)
            .unwrap()
            .y0;
        let p = *t.primes_in(y0 + 1, 2 * y0).first().unwrap();
        let exact = psi_exact(x / p, y0, &t).unwrap() as f64 / psi_exact(x, y0, &t).unwrap() as f64;
        let predicted = (y0 as f64).ln() / p as f64;
        assert!(
            (exact / predicted - 1.0).abs() < 0.30,
            "exact {exact} predicted {predicted}"
        );
    }
}
