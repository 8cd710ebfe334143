//! Dickman's rho: u rho'(u) = -rho(u - 1), rho = 1 on [0, 1].
//!
//! The table is built by exact per-unit Taylor series expanded at interval
//! midpoints: matching coefficients in (t_m + s) rho'(t_m + s) = -rho(t_m - 1 + s)
//! gives `c_{j+1} = -(b_j + j c_j) / (t_m (j+1))` against the previous
//! segment's series `b`, with the constant term fixed by continuity at the
//! interval boundary.
//!
//! The recurrence runs in extended-precision arithmetic with per-segment
//! precision and term counts sized from the decay of rho itself. This is not
//! optional: perturbations of the delay equation decay only like 1/u while
//! rho decays superexponentially, so any error injected at segment m (rounding
//! at fixed precision, or the series tail beyond a fixed order) persists in
//! absolute terms and swamps rho(u) once rho(u) < error * rho(m). Holding a
//! relative 1e-6 out to u = 500 therefore needs ~5200 mantissa bits and ~3300
//! series terms at the early segments, decaying to nothing near the far end.
//! f64 only enters when the finished segments are sampled onto the query grid.

use crate::{Error, Result};
use num_bigint::{BigInt, Sign};

/// Query grid spacing (the stored table samples log rho every 2^-10 in u).
pub const DICKMAN_STEP: f64 = 1.0 / 1024.0;
pub const DICKMAN_U_MAX: f64 = 500.0;

/// log(rho) sampled on `[0, u_max]` with spacing [`DICKMAN_STEP`].
#[derive(Debug, Clone)]
pub struct DickmanTable {
    step: f64,
    log_values: Vec<f64>,
}

/// Sign-magnitude float `mant * 2^exp` with explicit truncation.
#[derive(Clone, Debug)]
struct BigFloat {
    mant: BigInt,
    exp: i64,
}

impl BigFloat {
    fn zero() -> Self {
        BigFloat { mant: BigInt::from(0), exp: 0 }
    }

    fn is_zero(&self) -> bool {
        self.mant.sign() == Sign::NoSign
    }

    /// `num / den` to `prec` bits.
    fn from_ratio(num: i64, den: u64, prec: u32) -> Self {
        let mant = (BigInt::from(num) << prec) / den;
        BigFloat { mant, exp: -(prec as i64) }
    }

    fn truncate(&mut self, prec: u32) {
        let bits = self.mant.bits();
        if bits > prec as u64 {
            let shift = (bits - prec as u64) as usize;
            self.mant = &self.mant >> shift;
            self.exp += shift as i64;
        }
    }

    fn add(&self, other: &Self, prec: u32) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (hi, lo) = if self.exp >= other.exp { (self, other) } else { (other, self) };
        let diff = (hi.exp - lo.exp) as u64;
        // far-apart magnitudes: the small term is below the truncation floor
        if diff > prec as u64 + 64 + lo.mant.bits() {
            let hi_bits = hi.mant.bits() as i64 + hi.exp;
            let lo_bits = lo.mant.bits() as i64 + lo.exp;
            if hi_bits - lo_bits > prec as i64 + 2 {
                return hi.clone();
            }
        }
        let mut out = BigFloat {
            mant: (&hi.mant << diff as usize) + &lo.mant,
            exp: lo.exp,
        };
        out.truncate(prec);
        out
    }

    fn neg(&self) -> Self {
        BigFloat { mant: -&self.mant, exp: self.exp }
    }

    fn mul_u64(&self, k: u64, prec: u32) -> Self {
        let mut out = BigFloat { mant: &self.mant * k, exp: self.exp };
        out.truncate(prec);
        out
    }

    fn div_u64(&self, k: u64, prec: u32) -> Self {
        let mut out = BigFloat { mant: (&self.mant << 64) / k, exp: self.exp - 64 };
        out.truncate(prec);
        out
    }

    /// Halve: exact (shift the exponent).
    fn half(&self) -> Self {
        BigFloat { mant: self.mant.clone(), exp: self.exp - 1 }
    }

    /// Natural log of |value| and the sign; None for zero.
    fn ln_abs(&self) -> Option<(f64, bool)> {
        if self.is_zero() {
            return None;
        }
        let bits = self.mant.bits();
        let take = bits.min(53);
        let top: BigInt = &self.mant >> (bits - take) as usize;
        let (sign, mag) = top.into_parts();
        let top_f = mag.to_string().parse::<f64>().unwrap_or(1.0);
        let ln = top_f.ln() + ((bits - take) as i64 + self.exp) as f64 * std::f64::consts::LN_2;
        Some((ln, sign != Sign::Minus))
    }
}

/// `ln(3/2)` to `prec` bits via 2 atanh(1/5).
fn ln_three_halves(prec: u32) -> BigFloat {
    let work = prec + 32;
    let mut term = BigFloat::from_ratio(2, 5, work); // 2 * (1/5)
    let mut sum = term.clone();
    let mut k = 1u64;
    loop {
        term = term.div_u64(25, work);
        let contrib = term.div_u64(2 * k + 1, work);
        if contrib.mant.bits() as i64 + contrib.exp < -(work as i64) {
            break;
        }
        sum = sum.add(&contrib, work);
        k += 1;
        debug_assert!(k < 10_000);
    }
    sum
}

/// Main de Bruijn term of |log rho(u)|, used only to size precision budgets.
fn ln_rho_magnitude(u: f64) -> f64 {
    if u <= 2.0 {
        return 0.0;
    }
    let lu = u.ln();
    u * (lu + lu.ln().max(0.0) - 1.0)
}

struct Segment {
    /// ln of the midpoint value c_0.
    ln_c0: f64,
    /// Coefficients relative to c_0, as f64 (tiny tails flush to zero).
    rel: Vec<f64>,
}

fn horner_rel(seg: &Segment, s: f64) -> f64 {
    let mut acc = 0.0;
    for &c in seg.rel.iter().rev() {
        acc = acc * s + c;
    }
    acc
}

impl DickmanTable {
    pub fn build(u_max: f64) -> Self {
        let u_max = u_max.clamp(2.0, DICKMAN_U_MAX);
        let top = u_max.ceil() as usize; // segments cover [m, m+1) for m = 1..top-1
        let budget = ln_rho_magnitude(top as f64);
        let prec_for = |m: usize| ((budget - ln_rho_magnitude(m as f64)) / std::f64::consts::LN_2) as u32 + 128;
        let terms_for = |m: usize| ((budget - ln_rho_magnitude(m as f64)) / 3f64.ln()) as usize + 96;

        // seed segment [1, 2) at t = 3/2: rho = 1 - log(3/2) - log(1 + 2s/3)
        let prec0 = prec_for(1);
        let n0 = terms_for(1);
        let mut b: Vec<BigFloat> = Vec::with_capacity(n0);
        let one = BigFloat::from_ratio(1, 1, prec0);
        b.push(one.add(&ln_three_halves(prec0).neg(), prec0));
        let mut pow = one; // (-2/3)^j by repeated multiply; b_j = (-2/3)^j / j
        for j in 1..n0 {
            pow = pow.mul_u64(2, prec0).div_u64(3, prec0).neg();
            b.push(pow.div_u64(j as u64, prec0));
        }

        let mut segments: Vec<Segment> = Vec::with_capacity(top);
        segments.push(extract_segment(&b));

        for m in 2..top {
            let prec = prec_for(m);
            let n = terms_for(m).min(b.len());
            let tm2 = 2 * m as u64 + 1; // t_m = (2m+1)/2
            let mut c: Vec<BigFloat> = vec![BigFloat::zero(); n];
            for j in 0..n - 1 {
                // c_{j+1} = -(b_j + j c_j) * 2 / ((2m+1)(j+1))
                let mut t = b[j].add(&c[j].mul_u64(j as u64, prec), prec).neg();
                t = BigFloat { mant: t.mant, exp: t.exp + 1 };
                c[j + 1] = t.div_u64(tm2 * (j as u64 + 1), prec);
            }
            // continuity at u = m: value of old segment at s=1/2 equals
            // value of new segment at s=-1/2
            let old_at_half = eval_bigfloat(&b, false, prec);
            let partial = eval_bigfloat(&c, true, prec); // sum_{j>=1} c_j (-1/2)^j
            c[0] = old_at_half.add(&partial.neg(), prec);
            segments.push(extract_segment(&c));
            b = c;
        }

        // sample onto the query grid
        let h = DICKMAN_STEP;
        let n_total = (u_max / h).round() as usize + 1;
        let per_unit = (1.0 / h) as usize;
        let mut log_values = vec![0.0f64; n_total];
        for (n, slot) in log_values.iter_mut().enumerate().skip(per_unit + 1) {
            let u = n as f64 * h;
            let m = (u.floor() as usize).min(top - 1).max(1);
            let seg = &segments[m - 1];
            let s = u - (m as f64 + 0.5);
            *slot = seg.ln_c0 + horner_rel(seg, s).ln();
        }
        DickmanTable { step: h, log_values }
    }

    pub fn u_max(&self) -> f64 {
        (self.log_values.len() - 1) as f64 * self.step
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// log(rho(u)); linear interpolation of the stored logarithm.
    pub fn ln_rho(&self, u: f64) -> Result<f64> {
        if u < 0.0 {
            return Err(Error::InvalidParam(format!("negative u = {u}")));
        }
        if u <= 1.0 {
            return Ok(0.0);
        }
        if u > self.u_max() {
            return Err(Error::InvalidParam(format!(
                "u = {u} beyond table range {}",
                self.u_max()
            )));
        }
        let pos = u / self.step;
        let idx = pos.floor() as usize;
        if idx + 1 >= self.log_values.len() {
            return Ok(*self.log_values.last().unwrap());
        }
        let frac = pos - idx as f64;
        Ok(self.log_values[idx] * (1.0 - frac) + self.log_values[idx + 1] * frac)
    }

    pub fn rho(&self, u: f64) -> Result<f64> {
        Ok(self.ln_rho(u)?.exp())
    }
}

/// Horner evaluation at s = 1/2 (skip_constant selects sum_{j>=1} at s = -1/2).
fn eval_bigfloat(coeffs: &[BigFloat], skip_constant_negative_half: bool, prec: u32) -> BigFloat {
    let mut acc = BigFloat::zero();
    for (j, c) in coeffs.iter().enumerate().rev() {
        if skip_constant_negative_half {
            if j == 0 {
                acc = acc.half().neg();
                break;
            }
            acc = acc.half().neg().add(c, prec);
        } else {
            acc = acc.half().add(c, prec);
        }
    }
    acc
}

fn extract_segment(coeffs: &[BigFloat]) -> Segment {
    let (ln_c0, c0_positive) = coeffs[0].ln_abs().expect("segment constant must be nonzero");
    debug_assert!(c0_positive, "rho must stay positive");
    let rel = coeffs
        .iter()
        .map(|c| match c.ln_abs() {
            None => 0.0,
            Some((ln, positive)) => {
                let v = (ln - ln_c0).exp();
                if positive {
                    v
                } else {
                    -v
                }
            }
        })
        .collect();
    Segment { ln_c0, rel }
}

/// rho(u) from a shared default table covering `[0, 500]`.
pub fn dickman_rho(u: f64) -> Result<f64> {
    Ok(dickman_rho_ln(u)?.exp())
}

/// log rho(u) from the shared default table.
pub fn dickman_rho_ln(u: f64) -> Result<f64> {
    default_table().ln_rho(u)
}

pub(crate) fn default_table() -> &'static DickmanTable {
    use std::sync::OnceLock;
    static CELL: OnceLock<DickmanTable> = OnceLock::new();
    CELL.get_or_init(|| DickmanTable::build(DICKMAN_U_MAX))
}
