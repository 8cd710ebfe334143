//! The random-squares process: draw uniform integers from `[1, x]` until the
//! GF(2) eliminator reports the first square dependence, certify the square
//! subset by exact exponent bookkeeping, and classify samples by their large
//! prime factors for the witness machinery.

use crate::arith::{factorize, PrimeTable, TRIAL_DIVISION_BOUND};
use crate::gf2::{Eliminator, ExponentVector, InsertOutcome};
use crate::{Error, KBound, Result};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassParams {
    /// Smoothness cutoff y.
    pub y: u64,
    /// Large primes live in the open interval (y, M y).
    pub m_ratio: f64,
    /// Cap on the number of large primes tracked per sample.
    pub k: KBound,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProcessConfig {
    pub x: u64,
    pub seed: u64,
    pub max_samples: u64,
    pub class_params: Option<ClassParams>,
}

impl ProcessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.x < 1 {
            return Err(Error::InvalidParam("x must be >= 1".into()));
        }
        if self.max_samples < 1 {
            return Err(Error::InvalidParam("max_samples must be >= 1".into()));
        }
        Ok(())
    }
}

/// The class of a sample: its odd-power large primes, or Delta when some
/// prime factor exceeds M y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", content = "primes")]
pub enum ExponentClass {
    Smooth,
    Large(Vec<u64>),
    Delta,
}

impl ExponentClass {
    /// The class as a slice of large primes; empty for Smooth, None for Delta.
    pub fn as_set(&self) -> Option<&[u64]> {
        match self {
            ExponentClass::Smooth => Some(&[]),
            ExponentClass::Large(ps) => Some(ps),
            ExponentClass::Delta => None,
        }
    }
}

/// Classify `n` by its prime factors relative to the window `(y, M y)`:
/// any factor above `M y` gives Delta; otherwise the class is the set of
/// primes in the open interval dividing n to an odd power (even powers fold
/// away, and a y-smooth n has the empty class).
pub fn classify(n: u64, y: u64, m_ratio: f64, table: &PrimeTable) -> Result<ExponentClass> {
    if n < 1 {
        return Err(Error::InvalidParam("classify needs n >= 1".into()));
    }
    let f = factorize(n, table)?;
    let cap = m_ratio * y as f64;
    if f.factors.iter().any(|&(p, _)| (p as f64) > cap) {
        return Ok(ExponentClass::Delta);
    }
    let large: Vec<u64> = f
        .factors
        .iter()
        .filter(|&&(p, e)| e % 2 == 1 && p > y && (p as f64) < cap)
        .map(|&(p, _)| p)
        .collect();
    if large.is_empty() {
        Ok(ExponentClass::Smooth)
    } else {
        Ok(ExponentClass::Large(large))
    }
}

/// One finished (or truncated) trial.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: u64,
    pub truncated: bool,
    /// Stopping time: index of the draw that closed the first dependence.
    pub t: Option<u64>,
    /// The square subset I (draw indices, ascending); contains t.
    pub i: Option<Vec<u64>>,
    pub i_size: Option<usize>,
    pub max_prime_in_i: Option<u64>,
    pub t_over_j0: Option<f64>,
    /// Histogram over floor(log2(P(a_i))) for i in I.
    pub smoothness_hist: Option<Vec<u32>>,
}

/// Draw uniformly from `[1, x]` by rejection from the next power of two.
pub fn sample_uniform(rng: &mut impl RngCore, x: u64) -> u64 {
    if x == 1 {
        return 1;
    }
    let mask = u64::MAX >> x.leading_zeros();
    loop {
        let v = rng.next_u64() & mask;
        if v < x {
            return v + 1;
        }
    }
}

/// RNG for a given trial index: one stream per trial from the master seed,
/// so trials are reproducible and order-independent under parallelism.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// Run one trial: draw until the first square dependence or `max_samples`.
///
/// The square certificate is checked by exact exponent sums over the full
/// factorizations, independent of the GF(2) parity path.
pub fn run_trial(
    cfg: &ProcessConfig,
    trial: u64,
    table: &PrimeTable,
    j0: Option<f64>,
) -> Result<TrialResult> {
    cfg.validate()?;
    let mut rng = trial_rng(cfg.seed, trial);
    let dense: Vec<u64> = table
        .primes_in(2, TRIAL_DIVISION_BOUND.min(table.bound()))
        .to_vec();
    let mut elim = Eliminator::new(dense);
    let mut factorizations: HashMap<u64, crate::arith::Factorization> = HashMap::new();
    for t in 1..=cfg.max_samples {
        let a = sample_uniform(&mut rng, cfg.x);
        let f = factorize(a, table)?;
        let v = ExponentVector::from_factorization(&f);
        factorizations.insert(t, f);
        if let InsertOutcome::Dependent(ids) = elim.insert(&v, t)? {
            // exact certificate: every prime exponent summed over I is even
            let mut exponents: HashMap<u64, u64> = HashMap::new();
            let mut hist = vec![0u32; 64];
            let mut max_prime = 0u64;
            for id in &ids {
                let f = &factorizations[id];
                for &(p, e) in &f.factors {
                    *exponents.entry(p).or_insert(0) += e as u64;
                }
                let pmax = f.max_prime().unwrap_or(1);
                max_prime = max_prime.max(pmax);
                hist[63 - pmax.leading_zeros() as usize] += 1;
            }
            if let Some((&p, _)) = exponents.iter().find(|(_, &e)| e % 2 != 0) {
                return Err(Error::Internal(format!(
                    "square certificate failed at prime {p} (trial {trial})"
                )));
            }
            return Ok(TrialResult {
                trial,
                truncated: false,
                t: Some(t),
                i_size: Some(ids.len()),
                max_prime_in_i: Some(max_prime),
                t_over_j0: j0.map(|j| t as f64 / j),
                smoothness_hist: Some(hist),
                i: Some(ids),
            });
        }
    }
    Ok(TrialResult {
        trial,
        truncated: true,
        t: None,
        i: None,
        i_size: None,
        max_prime_in_i: None,
        t_over_j0: None,
        smoothness_hist: None,
    })
}

/// Single-trial convenience wrapper (trial index 0).
pub fn run_until_dependence(cfg: &ProcessConfig, table: &PrimeTable) -> Result<TrialResult> {
    run_trial(cfg, 0, table, None)
}

/// Draw `j_len` samples and classify each; reproducible from the seed.
pub fn simulate_stream(
    cfg: &ProcessConfig,
    j_len: u64,
    table: &PrimeTable,
) -> Result<Vec<ExponentClass>> {
    cfg.validate()?;
    let cp = cfg
        .class_params
        .as_ref()
        .ok_or_else(|| Error::InvalidParam("simulate_stream needs class_params".into()))?;
    let mut rng = trial_rng(cfg.seed, 0);
    (0..j_len)
        .map(|_| classify(sample_uniform(&mut rng, cfg.x), cp.y, cp.m_ratio, table))
        .collect()
}

/// Descriptive statistics over finished trials: how often |I| falls in the
/// window `y0 exp(+-c3 sqrt(log y0))` with c3 = sqrt(2 - log 2), and how often
/// every element of I is `y0^2 exp(2 sqrt(log y0 log log y0))`-smooth.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SizeWindowReport {
    pub trials: usize,
    pub completed: usize,
    pub truncated: usize,
    pub single_square: usize,
    pub c3: f64,
    pub i_window: (f64, f64),
    pub frac_i_in_window: f64,
    pub smoothness_bound: f64,
    pub frac_smooth_in_bound: f64,
    pub mean_t_over_j0: Option<f64>,
    pub median_t_over_j0: Option<f64>,
}

pub fn size_window_report(
    results: &[TrialResult],
    params: &crate::smooth::SmoothParams,
) -> Result<SizeWindowReport> {
    if results.is_empty() {
        return Err(Error::InvalidParam("empty result set".into()));
    }
    let c3 = (2.0 - std::f64::consts::LN_2).sqrt();
    let y0 = params.y0 as f64;
    let w = (c3 * y0.ln().sqrt()).exp();
    let window = (y0 / w, y0 * w);
    let smooth_bound = y0 * y0 * (2.0 * (y0.ln() * y0.ln().ln()).sqrt()).exp();
    let completed: Vec<&TrialResult> = results.iter().filter(|r| !r.truncated).collect();
    let single = completed.iter().filter(|r| r.i_size == Some(1)).count();
    let in_window = completed
        .iter()
        .filter(|r| {
            let n = r.i_size.unwrap_or(0) as f64;
            n >= window.0 && n <= window.1
        })
        .count();
    let smooth_ok = completed
        .iter()
        .filter(|r| (r.max_prime_in_i.unwrap_or(0) as f64) <= smooth_bound)
        .count();
    let mut ratios: Vec<f64> = completed.iter().filter_map(|r| r.t_over_j0).collect();
    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mean = if ratios.is_empty() {
        None
    } else {
        Some(ratios.iter().sum::<f64>() / ratios.len() as f64)
    };
    let median = if ratios.is_empty() { None } else { Some(ratios[ratios.len() / 2]) };
    Ok(SizeWindowReport {
        trials: results.len(),
        completed: completed.len(),
        truncated: results.len() - completed.len(),
        single_square: single,
        c3,
        i_window: window,
        frac_i_in_window: in_window as f64 / completed.len().max(1) as f64,
        smoothness_bound: smooth_bound,
        frac_smooth_in_bound: smooth_ok as f64 / completed.len().max(1) as f64,
        mean_t_over_j0: mean,
        median_t_over_j0: median,
    })
}
