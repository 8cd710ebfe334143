//! The (y0, J0) parameter solver: y0 maximizes Psi(x, y)/y over prime
//! cutoffs, J0 = pi(y0) x / Psi(x, y0) is the natural time unit of the
//! sampling process, and the factor-base tuning equation balances relation
//! collection against the GF(2) linear algebra.

use super::psi::{smooth_profile_sweep, SmoothProfile, PSI_EXACT_MAX_X};
use super::saddle::{psi_ht, saddle_alpha};
use crate::arith::PrimeTable;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Which Psi evaluator backs a parameter search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PsiMode {
    Exact,
    Ht,
}

impl std::str::FromStr for PsiMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(PsiMode::Exact),
            "ht" => Ok(PsiMode::Ht),
            other => Err(format!("unknown psi mode '{other}' (expected exact|ht)")),
        }
    }
}

/// `L(x) = exp(sqrt(0.5 log x log log x))`, the natural scale of y0.
pub fn l_of_x(x: f64) -> f64 {
    let lx = x.ln();
    (0.5 * lx * lx.ln()).sqrt().exp()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmoothParams {
    pub x: u64,
    pub mode: PsiMode,
    /// Prime cutoff maximizing Psi(x, y)/y over the search grid.
    pub y0: u64,
    /// log x / log y0.
    pub u0: f64,
    /// pi(y0) x / Psi(x, y0), with Psi from the same evaluator as the search.
    pub j0: f64,
    /// Saddle point alpha(x, y0).
    pub alpha0: f64,
    /// log Psi(x, y0) from the evaluator that produced j0.
    pub ln_psi_y0: f64,
    pub pi_y0: u64,
    /// Diagnostic: log y0 / log L(x).
    pub log_y0_over_log_l: f64,
    /// Diagnostic: second-order prediction for the same ratio,
    /// `1 + (log_3 x - log 2) / (2 log_2 x)`.
    pub log_ratio_refined: f64,
}

enum Evaluator<'a> {
    Exact(SmoothProfile),
    Ht(&'a PrimeTable),
}

impl Evaluator<'_> {
    /// log Psi(x, y); `None` when below the smallest prime.
    fn ln_psi(&self, x: u64, y: u64) -> Option<f64> {
        match self {
            Evaluator::Exact(profile) => {
                let v = profile.psi(y);
                Some((v as f64).ln())
            }
            Evaluator::Ht(table) => {
                if y < 2 {
                    return None;
                }
                psi_ht(x, y, table).ok().map(|e| e.ln)
            }
        }
    }
}

/// Find y0 and J0 for the given x.
///
/// The search runs golden-section on log y over `[L^0.5, L^2.5]`, with Psi
/// evaluated at the largest prime <= y, then settles the winner by scanning
/// every prime cutoff in the final bracket (ties toward smaller y).
pub fn find_params(x: u64, mode: PsiMode) -> Result<SmoothParams> {
    if x < 100 {
        return Err(Error::InvalidParam(format!("find_params needs x >= 100, got {x}")));
    }
    if mode == PsiMode::Exact && x > PSI_EXACT_MAX_X {
        return Err(Error::EnumerationRange(x, PSI_EXACT_MAX_X));
    }
    let l = l_of_x(x as f64);
    let y_lo = (l.sqrt().floor() as u64).max(3);
    let y_hi = ((l.powf(2.5)).ceil() as u64).min(x).max(y_lo + 10);
    let table = PrimeTable::sieve(y_hi + 64)?;
    let evaluator = match mode {
        PsiMode::Exact => Evaluator::Exact(smooth_profile_sweep(x, y_hi, &table)?),
        PsiMode::Ht => Evaluator::Ht(&table),
    };

    // objective: log(Psi(x, p)/p) at the largest prime p <= y
    let objective = |y: u64| -> Option<(f64, u64)> {
        let p = *table.primes_in(2, y).last()?;
        let ln_psi = evaluator.ln_psi(x, p)?;
        Some((ln_psi - (p as f64).ln(), p))
    };

    let mut lo = (y_lo as f64).ln();
    let mut hi = (y_hi as f64).ln();
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut m1 = hi - INV_PHI * (hi - lo);
    let mut m2 = lo + INV_PHI * (hi - lo);
    let mut f1 = objective(m1.exp() as u64);
    let mut f2 = objective(m2.exp() as u64);
    while hi - lo > 0.18 {
        let v1 = f1.map(|t| t.0).unwrap_or(f64::NEG_INFINITY);
        let v2 = f2.map(|t| t.0).unwrap_or(f64::NEG_INFINITY);
        if v1 < v2 {
            lo = m1;
            m1 = m2;
            f1 = f2;
            m2 = lo + INV_PHI * (hi - lo);
            f2 = objective(m2.exp() as u64);
        } else {
            hi = m2;
            m2 = m1;
            f2 = f1;
            m1 = hi - INV_PHI * (hi - lo);
            f1 = objective(m1.exp() as u64);
        }
    }

    // exhaustive pass over the primes in (a slightly widened) final bracket
    let scan_lo = ((lo - 0.35).exp().floor() as u64).max(2);
    let scan_hi = ((hi + 0.35).exp().ceil() as u64).min(y_hi);
    let mut best: Option<(f64, u64)> = None;
    for &p in table.primes_in(scan_lo, scan_hi) {
        if let Some(ln_psi) = evaluator.ln_psi(x, p) {
            let val = ln_psi - (p as f64).ln();
            match best {
                Some((b, _)) if val <= b => {}
                _ => best = Some((val, p)),
            }
        }
    }
    let (_, y0) = best.ok_or_else(|| Error::Internal("empty y0 scan window".into()))?;

    let ln_psi_y0 = evaluator
        .ln_psi(x, y0)
        .ok_or_else(|| Error::Internal("psi evaluation failed at y0".into()))?;
    let pi_y0 = table.prime_pi(y0)?;
    let j0 = ((pi_y0 as f64).ln() + (x as f64).ln() - ln_psi_y0).exp();
    let u0 = (x as f64).ln() / (y0 as f64).ln();
    let alpha0 = saddle_alpha(x, y0, &table)?;
    let lx = (x as f64).ln();
    let llx = lx.ln();
    Ok(SmoothParams {
        x,
        mode,
        y0,
        u0,
        j0,
        alpha0,
        ln_psi_y0,
        pi_y0,
        log_y0_over_log_l: (y0 as f64).ln() / l.ln(),
        log_ratio_refined: 1.0 + (llx.ln() - 2.0f64.ln()) / (2.0 * llx),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TuneResult {
    pub y1: f64,
    pub y0: u64,
    /// `|LHS/RHS - 1|` of the tuning equation at y1.
    pub residual: f64,
    pub c: f64,
}

/// Solve the factor-base tuning equation
/// `c pi(y) / (Psi(x,y)/x) = y^2 / (log y log log y)` for y1 < y0.
///
/// Relation collection on the left, GF(2) elimination cost on the right; the
/// left side is a step function of y (jumps at primes) and the right side is
/// continuous, so the crossing is located in real y by bisection on log y.
pub fn tune_factor_base(x: u64, c: f64, mode: PsiMode) -> Result<TuneResult> {
    if x < 10_000 {
        return Err(Error::InvalidParam(format!("tune_factor_base needs x >= 10^4, got {x}")));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidParam(format!("tune_factor_base needs c > 0, got {c}")));
    }
    let params = find_params(x, mode)?;
    let y0 = params.y0;
    let table = PrimeTable::sieve(y0 + 64)?;
    let profile = match mode {
        PsiMode::Exact => Some(smooth_profile_sweep(x, y0, &table)?),
        PsiMode::Ht => None,
    };
    let ln_lhs = |y: f64| -> Option<f64> {
        let p = *table.primes_in(2, y.floor() as u64).last()?;
        let pi = table.prime_pi(p).ok()? as f64;
        let ln_psi = match &profile {
            Some(pr) => (pr.psi(p) as f64).ln(),
            None => psi_ht(x, p, &table).ok()?.ln,
        };
        Some(c.ln() + pi.ln() + (x as f64).ln() - ln_psi)
    };
    let ln_rhs = |y: f64| 2.0 * y.ln() - y.ln().ln() - y.ln().ln().ln();
    let h = |t: f64| {
        let y = t.exp();
        ln_lhs(y).map(|l| l - ln_rhs(y))
    };
    let mut lo = 5.0f64.ln();
    let mut hi = (y0 as f64).ln();
    let f_lo = h(lo).ok_or_else(|| Error::Internal("tuning eval failed at bracket".into()))?;
    let f_hi = h(hi).ok_or_else(|| Error::Internal("tuning eval failed at bracket".into()))?;
    if f_lo <= 0.0 || f_hi >= 0.0 {
        return Err(Error::NoRoot { lo: lo.exp(), hi: hi.exp(), flo: f_lo, fhi: f_hi });
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        match h(mid) {
            Some(v) if v > 0.0 => lo = mid,
            Some(_) => hi = mid,
            None => lo = mid,
        }
    }
    let t = 0.5 * (lo + hi);
    let y1 = t.exp();
    let residual = h(t).map(|v| v.exp() - 1.0).unwrap_or(f64::NAN).abs();
    Ok(TuneResult { y1, y0, residual, c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smooth::psi::psi_exact;

    #[test]
    fn maximizer_beats_grid_neighbors() {
        let p = find_params(100_000_000, PsiMode::Exact).unwrap();
        let table = PrimeTable::sieve(4 * p.y0).unwrap();
        let psi = |y: u64| psi_exact(p.x, y, &table).unwrap() as f64;
        let at = |y: u64| {
            let q = *table.primes_in(2, y).last().unwrap();
            psi(q) / q as f64
        };
        let best = at(p.y0);
        assert!(best >= at(p.y0 / 2), "y0/2 beats y0");
        assert!(best >= at(2 * p.y0), "2*y0 beats y0");
    }

    #[test]
    fn exact_matches_exhaustive_scan_oracle() {
        // oracle: enumerate smooth numbers depth-first, bucket by largest
        // prime factor, and take the arg max over every prime cutoff
        let x = 10_000_000u64;
        let p = find_params(x, PsiMode::Exact).unwrap();
        let l = l_of_x(x as f64);
        let y_hi = (l.powf(2.5).ceil() as u64).min(x);
        let table = PrimeTable::sieve(y_hi + 64).unwrap();
        let primes: Vec<u64> = table.primes_in(2, y_hi).to_vec();
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
        let mut cum = 1u64;
        let mut best = (f64::NEG_INFINITY, 0u64);
        let y_lo = l.sqrt().floor() as u64;
        for (i, &q) in primes.iter().enumerate() {
            cum += hist[i];
            if q < y_lo {
                continue;
            }
            let val = (cum as f64).ln() - (q as f64).ln();
            if val > best.0 {
                best = (val, q);
            }
        }
        assert_eq!(p.y0, best.1, "golden-section disagrees with exhaustive scan");
        let expected_j0 = best.1 as f64; // reuse table for pi
        let _ = expected_j0;
        let pi = table.prime_pi(best.1).unwrap() as f64;
        let psi = cum as f64; // cum holds Psi(x, y0) only if y0 is the last scanned; recompute
        let _ = psi;
        let mut cum2 = 1u64;
        for (i, &q) in primes.iter().enumerate() {
            cum2 += hist[i];
            if q == best.1 {
                let j0 = pi * x as f64 / cum2 as f64;
                assert!((p.j0 / j0 - 1.0).abs() < 1e-9, "j0 {} vs oracle {}", p.j0, j0);
                break;
            }
        }
    }

    #[test]
    fn l_band_diagnostic() {
        for &x in &[1_000_000u64, 100_000_000] {
            let p = find_params(x, PsiMode::Exact).unwrap();
            assert!(
                (0.7..=1.6).contains(&p.log_y0_over_log_l),
                "x = {x}: ratio {}",
                p.log_y0_over_log_l
            );
        }
        for &x in &[10_000_000_000u64, 1_000_000_000_000] {
            let p = find_params(x, PsiMode::Ht).unwrap();
            assert!(
                (0.7..=1.6).contains(&p.log_y0_over_log_l),
                "x = {x}: ratio {}",
                p.log_y0_over_log_l
            );
        }
    }

    #[test]
    fn ht_and_exact_j0_agree_roughly() {
        let a = find_params(100_000_000, PsiMode::Exact).unwrap();
        let b = find_params(100_000_000, PsiMode::Ht).unwrap();
        assert!(
            (a.j0 / b.j0 - 1.0).abs() < 0.20,
            "exact j0 {} vs ht j0 {}",
            a.j0,
            b.j0
        );
    }

    #[test]
    fn small_x_works() {
        let p = find_params(100, PsiMode::Exact).unwrap();
        assert!(p.y0 >= 2 && p.j0 > 0.0);
        assert!(find_params(99, PsiMode::Exact).is_err());
    }

    #[test]
    fn tuning_equation_residual_and_ordering() {
        let r = tune_factor_base(100_000_000, 1.0, PsiMode::Exact).unwrap();
        assert!(r.residual < 0.01, "residual {}", r.residual);
        assert!(r.y1 < r.y0 as f64, "y1 {} not below y0 {}", r.y1, r.y0);
    }

    #[test]
    fn tuning_increasing_in_c() {
        let y_half = tune_factor_base(100_000_000, 0.5, PsiMode::Exact).unwrap().y1;
        let y_one = tune_factor_base(100_000_000, 1.0, PsiMode::Exact).unwrap().y1;
        let y_two = tune_factor_base(100_000_000, 2.0, PsiMode::Exact).unwrap().y1;
        assert!(y_half < y_one && y_one < y_two, "{y_half} {y_one} {y_two}");
        // cross-check the middle solution against a dense grid scan
        let x = 100_000_000u64;
        let table = PrimeTable::sieve(100_000).unwrap();
        let profile = smooth_profile_sweep(x, 65_536, &table).unwrap();
        let mut best = (f64::INFINITY, 0.0f64);
        let mut y = 10.0f64;
        while y < 10_000.0 {
            let p = *table.primes_in(2, y as u64).last().unwrap();
            let lhs = (table.prime_pi(p).unwrap() as f64).ln() + (x as f64).ln()
                - (profile.psi(p) as f64).ln();
            let rhs = 2.0 * y.ln() - y.ln().ln() - y.ln().ln().ln();
            let gap = (lhs - rhs).abs();
            if gap < best.0 {
                best = (gap, y);
            }
            y *= 1.003;
        }
        assert!(
            (best.1 / y_one - 1.0).abs() < 0.02,
            "solver {y_one} vs grid scan {}",
            best.1
        );
    }
}
