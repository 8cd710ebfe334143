//! The analytic limit theory: the truncated exponential exp_k, the window
//! integral A_M, the gamma recursion and its fixed point, the spanning
//! probability theta, a Monte-Carlo sampler of the Poisson limit hypergraph
//! to cross-validate theta, and the eta threshold table.

mod funcs;
mod sampler;
mod threshold;

pub use funcs::{a_m, eta_star, exp_k, gamma_fixed, gamma_m, theta, EtaStar, GammaResult};
pub use sampler::{estimate_theta_mc, sample_h, SampledHypergraph};
pub use threshold::{eta_table, threshold_eta, EtaMode, EtaTable};

use crate::KBound;
use serde::{Deserialize, Serialize};

/// Parameter bundle for the limit functions. `m` is the neighborhood radius,
/// `multiplier` the large-prime window ratio M (may be infinite), `k` the
/// class-size cutoff, `eta` the time in units of J0, and `rho` the
/// renormalized root prime p/y in `[1, M]`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LimitParams {
    pub m: u32,
    pub multiplier: f64,
    pub k: KBound,
    pub eta: f64,
    pub rho: f64,
}

impl LimitParams {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.multiplier > 1.0) {
            return Err(crate::Error::InvalidParam(format!(
                "multiplier must exceed 1, got {}",
                self.multiplier
            )));
        }
        if !(self.eta > 0.0) {
            return Err(crate::Error::InvalidParam(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.rho >= 1.0 && self.rho <= self.multiplier) {
            return Err(crate::Error::InvalidParam(format!(
                "rho must lie in [1, M], got {}",
                self.rho
            )));
        }
        if let KBound::Finite(0) = self.k {
            return Err(crate::Error::InvalidParam("k must be >= 1".into()));
        }
        Ok(())
    }
}
