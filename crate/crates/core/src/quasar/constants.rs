//! Auxiliary constants: the composition constant, the power-norm moduli and their threshold.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// `C = (1−κ₁)(2−κ₁κ₂) / ((2−κ₁)(1−κ₁κ₂))`.
pub fn aux_constant_c(k1: f64, k2: f64) -> Result<f64> {
    if !(k1 > 0.0 && k1 < 1.0) {
        return Err(Error::BadParameter(format!("k1 = {k1} must lie in (0,1)")));
    }
    if !(k2 > 0.0 && k2 <= 1.0) {
        return Err(Error::BadParameter(format!("k2 = {k2} must lie in (0,1]")));
    }
    Ok((1.0 - k1) * (2.0 - k1 * k2) / ((2.0 - k1) * (1.0 - k1 * k2)))
}

fn t_hat_equation(t: f64) -> f64 {
    t * (t - 1.0) / 2.0 - 1.0 + (1.0 + (2.0 - SQRT3) * t / (t - 1.0)).powf(1.0 - t)
}

/// Root of `t(t−1)/2 = 1 − [1 + (2−√3)t/(t−1)]^{1−t}` on `(1.0001, 2)`, by bisection.
pub fn t_hat() -> f64 {
    static T_HAT: OnceLock<f64> = OnceLock::new();
    *T_HAT.get_or_init(|| {
        let (mut a, mut b) = (1.0001_f64, 2.0_f64);
        let fa = t_hat_equation(a);
        while b - a > 1e-12 {
            let m = 0.5 * (a + b);
            if (t_hat_equation(m) < 0.0) == (fa < 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    })
}

/// The power-norm monotonicity modulus `κ(t)` for `t ∈ (1,2)`.
pub fn kappa_p(t: f64) -> Result<f64> {
    if !(t > 1.0 && t < 2.0) {
        return Err(Error::OutOfDomain(t));
    }
    let c = (2.0 + SQRT3) / 16.0;
    Ok(if t <= t_hat() {
        c * (t - 1.0)
    } else {
        c * (1.0 - (3.0 - SQRT3).powf(1.0 - t))
    })
}

/// `σ̂_q = (1/2)^{(3q−2)/2}` for `q > 2`.
pub fn sigma_hat(q: f64) -> Result<f64> {
    if !(q > 2.0 && q.is_finite()) {
        return Err(Error::OutOfDomain(q));
    }
    Ok(0.5_f64.powf((3.0 * q - 2.0) / 2.0))
}
