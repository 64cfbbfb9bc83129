//! Brute-force lattice sums, used only as an independent reference.
//!
//! Summation runs over the square `|a|, |b| <= radius` of lattice points
//! `a + b tau`. Odd-order tail terms cancel pairwise under `omega -> -omega`;
//! the surviving tail of `wp` behaves like `z^2 sum omega^-4`. The quasi-period
//! `zeta_R(z+1) - zeta_R(z)` only converges like `1/radius`.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OracleValues {
    pub wp: Complex64,
    pub zeta: Complex64,
    pub sigma: Complex64,
}

pub fn lattice_oracle(tau: Complex64, z: Complex64, radius: i64) -> Result<OracleValues> {
    if !(tau.im > 0.0) {
        return Err(Error::Domain(format!("Im(tau) must be positive, got {tau}")));
    }
    if radius < 10 {
        return Err(Error::Domain(format!("oracle radius must be >= 10, got {radius}")));
    }
    let guard = 1e-9;
    if z.norm() < guard {
        return Err(Error::Pole(format!("{z}")));
    }
    let mut wp = 1.0 / (z * z);
    let mut zeta = 1.0 / z;
    let mut log_sigma = z.ln();
    let z2 = z * z;
    for b in -radius..=radius {
        for a in -radius..=radius {
            if a == 0 && b == 0 {
                continue;
            }
            let omega = tau * b as f64 + a as f64;
            let d = z - omega;
            if d.norm() < guard {
                return Err(Error::Pole(format!("{z}")));
            }
            let inv = 1.0 / omega;
            let inv2 = inv * inv;
            wp += 1.0 / (d * d) - inv2;
            zeta += 1.0 / d + inv + z * inv2;
            let x = z * inv;
            log_sigma += (1.0 - x).ln() + x + z2 * inv2 / 2.0;
        }
    }
    Ok(OracleValues { wp, zeta, sigma: log_sigma.exp() })
}
