//! Scalar limit functions: exp_k, A_M, the gamma recursion, its fixed point,
//! theta, and the threshold constant e^{-gamma}.

use super::LimitParams;
use crate::quad::gauss_legendre;
use crate::{KBound, EULER_GAMMA};
use serde::{Deserialize, Serialize};

/// Truncated exponential `sum_{j=0}^{k-1} z^j / j!`; the full exponential
/// for k = infinity.
pub fn exp_k(k: KBound, z: f64) -> f64 {
    match k {
        KBound::Inf => z.exp(),
        KBound::Finite(k) => {
            let mut sum = 0.0;
            let mut term = 1.0;
            for j in 0..k {
                if j > 0 {
                    term *= z / j as f64;
                }
                sum += term;
            }
            sum
        }
    }
}

/// `A_M(z) = int_{1/M}^1 (1 - e^{-z t}) / t dt`, evaluated as
/// `int_{z/M}^{z} (1 - e^{-s})/s ds`. Beyond s = 45 the integrand is 1/s to
/// machine precision and the tail is taken as a logarithm.
pub fn a_m(multiplier: f64, z: f64) -> f64 {
    debug_assert!(z >= 0.0);
    if z == 0.0 {
        return 0.0;
    }
    let lo = if multiplier.is_infinite() { 0.0 } else { z / multiplier };
    let f = |s: f64| if s == 0.0 { 1.0 } else { -f64::exp_m1(-s) / s };
    const SPLIT: f64 = 45.0;
    if z <= SPLIT {
        gauss_legendre(f, lo, z, 6.0)
    } else if lo >= SPLIT {
        (z / lo).ln()
    } else {
        gauss_legendre(f, lo, SPLIT, 6.0) + (z / SPLIT).ln()
    }
}

/// m applications of the recursion `gamma_{i+1}(u) = u exp_k(A_M(gamma_i(u)))`
/// starting from `gamma_0(u) = u`.
pub fn gamma_m(m: u32, multiplier: f64, k: KBound, u: f64) -> f64 {
    let mut z = u;
    for _ in 0..m {
        z = u * exp_k(k, a_m(multiplier, z));
    }
    z
}

pub const GAMMA_DIVERGENCE_CAP: f64 = 1e9;
pub const GAMMA_MAX_ITERATIONS: u32 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GammaResult {
    Converged { value: f64, iterations: u32 },
    Divergent { iterations: u32 },
}

impl GammaResult {
    pub fn value(&self) -> Option<f64> {
        match self {
            GammaResult::Converged { value, .. } => Some(*value),
            GammaResult::Divergent { .. } => None,
        }
    }
}

/// Fixed point of `z -> u exp_k(A_M(z))` by monotone iteration from u.
/// The iteration increases from below, so exceeding the cap is a clean
/// divergence signal (only possible when M = k = infinity and u > e^{-gamma}).
pub fn gamma_fixed(multiplier: f64, k: KBound, u: f64) -> GammaResult {
    gamma_fixed_from(multiplier, k, u, u)
}

/// Fixed point with a warm start from below (continuation along a u-grid).
pub(crate) fn gamma_fixed_from(multiplier: f64, k: KBound, u: f64, z0: f64) -> GammaResult {
    if u == 0.0 {
        return GammaResult::Converged { value: 0.0, iterations: 0 };
    }
    let mut z = z0.max(u);
    for i in 1..=GAMMA_MAX_ITERATIONS {
        let next = u * exp_k(k, a_m(multiplier, z));
        let delta = (next - z).abs();
        z = next;
        if z > GAMMA_DIVERGENCE_CAP {
            return GammaResult::Divergent { iterations: i };
        }
        if delta < 1e-12 {
            return GammaResult::Converged { value: z, iterations: i };
        }
    }
    GammaResult::Divergent { iterations: GAMMA_MAX_ITERATIONS }
}

/// `theta = 1 - e^{-gamma_m(eta)/rho}`, the limit spanning probability.
pub fn theta(params: &LimitParams) -> crate::Result<f64> {
    params.validate()?;
    let g = gamma_m(params.m, params.multiplier, params.k, params.eta);
    Ok(-f64::exp_m1(-g / params.rho))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EtaStar {
    /// The threshold constant e^{-gamma} ~ 0.561459.
    pub eta_star: f64,
    /// The lower-bound constant (pi/4) e^{-gamma}.
    pub lower_const: f64,
    /// Numerical check: z e^{-A(z)} at z = 10^6, which approaches eta_star.
    pub sup_estimate: f64,
}

/// The threshold constant e^{-gamma} together with a numerical verification
/// that `sup_z z e^{-A(z)}` reaches it.
pub fn eta_star() -> EtaStar {
    let e = (-EULER_GAMMA).exp();
    let z = 1e6;
    EtaStar {
        eta_star: e,
        lower_const: std::f64::consts::FRAC_PI_4 * e,
        sup_estimate: z * (-a_m(f64::INFINITY, z)).exp(),
    }
}
