//! Strong quasar-convexity certificates, their calculus, and sampled checks.

mod calculus;
mod constants;
mod verify;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::Vector;
use crate::region::{vec_serde, RegionDescriptor};

pub use calculus::{
    compose_linear, compose_monotone, parameter_transform, sum_certificates, Transform,
};
pub use constants::{aux_constant_c, kappa_p, sigma_hat, t_hat};
pub use verify::{
    landscape_check, residual, verify_certificate, CheckReport, LandscapeReport, Property,
    SamplerConfig, Witness, CLOSED_FORM_TOL,
};

/// Tolerance below which two certificate centers count as equal.
pub const CENTER_TOL: f64 = 1e-12;

/// A claim that `h` is `(kappa, gamma)`-strongly quasar-convex with respect
/// to `center` on `region`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasarCertificate {
    pub kappa: f64,
    pub gamma: f64,
    #[serde(with = "vec_serde")]
    pub center: Vector,
    pub region: RegionDescriptor,
}

impl QuasarCertificate {
    pub fn new(kappa: f64, gamma: f64, center: Vector, region: RegionDescriptor) -> Result<Self> {
        let c = QuasarCertificate {
            kappa,
            gamma,
            center,
            region,
        };
        c.validate()?;
        Ok(c)
    }

    /// A certificate over the whole space.
    pub fn global(kappa: f64, gamma: f64, center: Vector) -> Result<Self> {
        Self::new(kappa, gamma, center, RegionDescriptor::Whole)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            return Err(Error::InvalidCertificate(format!("kappa = {}", self.kappa)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidCertificate(format!("gamma = {}", self.gamma)));
        }
        if self.center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidCertificate("non-finite center".into()));
        }
        Ok(())
    }

    /// Quadratic growth modulus `κγ/(2(2−κ))`.
    pub fn growth_modulus(&self) -> f64 {
        self.kappa * self.gamma / (2.0 * (2.0 - self.kappa))
    }

    /// PL modulus `γκ²`.
    pub fn pl_modulus(&self) -> f64 {
        self.gamma * self.kappa * self.kappa
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: QuasarCertificate =
            serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        let z = Vector::zeros(2);
        assert!(QuasarCertificate::global(0.0, 1.0, z.clone()).is_err());
        assert!(QuasarCertificate::global(1.5, 1.0, z.clone()).is_err());
        assert!(QuasarCertificate::global(0.5, -1.0, z.clone()).is_err());
        assert!(QuasarCertificate::global(1.0, 0.0, z).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let c = QuasarCertificate::global(0.5, 1.0, Vector::from_vec(vec![0.0, 1.0])).unwrap();
        let s = c.to_json();
        assert!(s.contains("\"kappa\": 0.5"));
        assert!(s.contains("\"kind\": \"whole\""));
        assert_eq!(QuasarCertificate::from_json(&s).unwrap(), c);
        assert!(QuasarCertificate::from_json(r#"{"kappa":2,"gamma":0,"center":[0],"region":{"kind":"whole"}}"#).is_err());
    }
}
