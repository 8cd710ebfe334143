//! The eta thresholds: the smallest eta at which the expected pseudosmooth
//! count reaches pi(y), i.e. the root of `int_0^eta F(u) du = 1`.
//!
//! Two integrands are exposed. Theorem mode takes the recursion literally:
//! `F(u) = gamma_{m+1}(u)/u = exp_k(A_M(gamma_m(u)))`. Table mode counts
//! every admitted class size j = 0..k, giving
//! `F(u) = exp_{k+1}(A_M(gamma_fix(u)))` with the fixed point taken at index
//! k; this is the reading that reproduces the analytically verifiable k = 1
//! radix (1 + A(u) integrates to eta + eta^2/2 - eta^3/12 + ...), and the
//! published table. k = 0 means no large primes at all, so F = 1 and eta = 1.

use super::funcs::{exp_k, gamma_fixed_from, gamma_m, GammaResult};
use crate::limit::funcs::a_m;
use crate::{Error, KBound, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EtaMode {
    Theorem,
    Table,
}

impl std::str::FromStr for EtaMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "theorem" => Ok(EtaMode::Theorem),
            "table" => Ok(EtaMode::Table),
            other => Err(format!("unknown eta mode '{other}' (expected theorem|table)")),
        }
    }
}

const ETA_CAP: f64 = 2.0;
const GRID: usize = 4096; // Simpson nodes on [0, ETA_CAP]

/// Solve `int_0^eta F(u) du = 1` for eta.
///
/// `m = None` means the fixed point (m = infinity), which requires finite M
/// or finite k. The integrand is tabulated on a fixed fine grid with the
/// fixed point warm-started along it, then the crossing panel is refined by
/// bisection.
pub fn threshold_eta(
    multiplier: f64,
    k: KBound,
    mode: EtaMode,
    m: Option<u32>,
) -> Result<f64> {
    if let KBound::Finite(0) = k {
        // no large primes: every pseudosmooth is a plain smooth number
        return Ok(1.0);
    }
    if m.is_none() && multiplier.is_infinite() && k == KBound::Inf {
        return Err(Error::InvalidParam(
            "m = infinity needs finite M or finite k for the fixed point".into(),
        ));
    }
    let h = ETA_CAP / GRID as f64;
    let mut warm = 0.0f64;
    let integrand_at = |u: f64, warm: &mut f64| -> Result<f64> {
        let g = match m {
            Some(m_levels) => gamma_m(m_levels, multiplier, k, u),
            None => match gamma_fixed_from(multiplier, k, u, *warm) {
                GammaResult::Converged { value, .. } => value,
                GammaResult::Divergent { iterations } => {
                    return Err(Error::Internal(format!(
                        "fixed point diverged at u = {u} after {iterations} iterations"
                    )))
                }
            },
        };
        if m.is_none() {
            *warm = g;
        }
        let a = a_m(multiplier, g);
        Ok(match mode {
            EtaMode::Theorem => exp_k(k, a),
            EtaMode::Table => match k {
                KBound::Finite(kk) => exp_k(KBound::Finite(kk + 1), a),
                KBound::Inf => exp_k(KBound::Inf, a),
            },
        })
    };
    let mut values = Vec::with_capacity(GRID + 1);
    for i in 0..=GRID {
        values.push(integrand_at(i as f64 * h, &mut warm)?);
    }
    // cumulative Simpson over panel pairs; refine inside the crossing panel
    let mut acc = 0.0;
    for i in (0..GRID).step_by(2) {
        let panel = h / 3.0 * (values[i] + 4.0 * values[i + 1] + values[i + 2]);
        if acc + panel >= 1.0 {
            let u_lo = i as f64 * h;
            let mut lo = u_lo;
            let mut hi = u_lo + 2.0 * h;
            let mut warm_local = if m.is_none() {
                // re-warm from below the panel
                match gamma_fixed_from(multiplier, k, u_lo, 0.0) {
                    GammaResult::Converged { value, .. } => value,
                    _ => 0.0,
                }
            } else {
                0.0
            };
            for _ in 0..50 {
                let mid = 0.5 * (lo + hi);
                // Simpson with 16 panels from u_lo to mid
                let n = 16;
                let hh = (mid - u_lo) / n as f64;
                let mut w = warm_local;
                let mut vals = Vec::with_capacity(n + 1);
                for j in 0..=n {
                    vals.push(integrand_at(u_lo + j as f64 * hh, &mut w)?);
                }
                let mut part = 0.0;
                for j in (0..n).step_by(2) {
                    part += hh / 3.0 * (vals[j] + 4.0 * vals[j + 1] + vals[j + 2]);
                }
                if acc + part < 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let _ = &mut warm_local;
            return Ok(0.5 * (lo + hi));
        }
        acc += panel;
    }
    Err(Error::NoRoot { lo: 0.0, hi: ETA_CAP, flo: -1.0, fhi: acc - 1.0 })
}

/// The full threshold table: k = 0..5 by M in {inf, 100, 10}, table mode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EtaTable {
    pub multipliers: [f64; 3],
    /// rows[k][col] for k = 0..=5 and columns following `multipliers`.
    pub rows: Vec<[f64; 3]>,
}

pub fn eta_table() -> Result<EtaTable> {
    let multipliers = [f64::INFINITY, 100.0, 10.0];
    let mut rows = Vec::with_capacity(6);
    for k in 0..=5u32 {
        let mut row = [0.0; 3];
        for (c, &m) in multipliers.iter().enumerate() {
            row[c] = threshold_eta(m, KBound::Finite(k), EtaMode::Table, None)?;
        }
        rows.push(row);
    }
    Ok(EtaTable { multipliers, rows })
}
