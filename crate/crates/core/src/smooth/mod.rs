//! Smooth-number counting and estimation: the Dickman function, exact
//! Psi(x, y), the saddle-point estimate, the (y0, J0) parameter solver, and
//! the factor-base tuning equation.

mod dickman;
mod params;
mod psi;
mod saddle;
mod special;

pub use dickman::{dickman_rho, dickman_rho_ln, DickmanTable};
pub use params::{find_params, l_of_x, tune_factor_base, PsiMode, SmoothParams, TuneResult};
pub use psi::{
    psi_exact, psi_exact_recursive, psi_exact_sweep, smooth_profile_sweep, SmoothProfile,
    PSI_EXACT_MAX_X, PSI_SWEEP_MAX_X,
};
pub use saddle::{psi_dickman, psi_ht, psi_ratio_check, saddle_alpha, xi_of_u};
pub use special::g_integral;

use serde::{Deserialize, Serialize};

/// A positive quantity carried in log-space; `Psi`-sized values overflow f64
/// for x near 2^63, so every estimator reports `ln` and converts on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNum {
    pub ln: f64,
}

impl LogNum {
    pub fn from_ln(ln: f64) -> Self {
        LogNum { ln }
    }

    pub fn from_value(v: f64) -> Self {
        LogNum { ln: v.ln() }
    }

    /// Plain value; `inf` when the log-space magnitude exceeds f64 range.
    pub fn value(self) -> f64 {
        self.ln.exp()
    }
}
