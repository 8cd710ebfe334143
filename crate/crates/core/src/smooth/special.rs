//! The overlap integral
//! `g(beta, C) = beta^-2 int_0^{C/beta^2} log((e^z + e^-z)/2) dz/z^2 + 1 - log C`,
//! whose C -> infinity limit at beta = 1 is gamma + log(4/pi).

use crate::quad::adaptive_simpson;
use crate::{Error, Result};

/// log(cosh z) / z^2, stable for all z >= 0.
fn integrand(z: f64) -> f64 {
    if z < 1e-3 {
        // series of log cosh z = z^2/2 - z^4/12 + z^6/45 - ...
        0.5 - z * z / 12.0 + z.powi(4) / 45.0
    } else {
        (z - std::f64::consts::LN_2 + f64::ln_1p((-2.0 * z).exp())) / (z * z)
    }
}

pub fn g_integral(beta: f64, c: f64) -> Result<f64> {
    if !(beta > 0.0) || !(c > 0.0) {
        return Err(Error::InvalidParam(format!(
            "g_integral needs beta > 0 and C > 0, got beta = {beta}, C = {c}"
        )));
    }
    let z_max = c / (beta * beta);
    // beyond z = 50 the integrand is (z - log 2)/z^2 to machine precision
    let integral = if z_max <= 50.0 {
        adaptive_simpson(integrand, 0.0, z_max, 1e-10)
    } else {
        adaptive_simpson(integrand, 0.0, 50.0, 1e-10)
            + (z_max / 50.0).ln()
            - std::f64::consts::LN_2 * (1.0 / 50.0 - 1.0 / z_max)
    };
    Ok(integral / (beta * beta) + 1.0 - c.ln())
}
