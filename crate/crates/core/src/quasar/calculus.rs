//! Certificate transformations.

use serde::{Deserialize, Serialize};

use super::{aux_constant_c, QuasarCertificate, CENTER_TOL};
use crate::error::{Error, Result};
use crate::oracle::{Matrix, Vector};
use crate::region::{Ball, RegionDescriptor};

/// Residual allowed when solving `A x = x̄` for the composed center.
pub const RANGE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    /// Certificate of `α h`.
    Scale(f64),
    /// Certificate of `y ↦ h(z + y)`.
    Translate(#[serde(with = "crate::region::vec_serde")] Vector),
    /// Trade `κ` for `γ`: `(θκ, γ/θ)`.
    ReduceKappa(f64),
}

pub fn parameter_transform(cert: &QuasarCertificate, variant: &Transform) -> Result<QuasarCertificate> {
    cert.validate()?;
    let mut out = cert.clone();
    match variant {
        Transform::Scale(a) => {
            if !(*a > 0.0 && a.is_finite()) {
                return Err(Error::BadParameter(format!("scale {a}")));
            }
            out.gamma *= a;
        }
        Transform::Translate(z) => {
            if z.len() != cert.center.len() {
                return Err(Error::DimensionMismatch {
                    expected: cert.center.len(),
                    got: z.len(),
                });
            }
            out.center = &cert.center - z;
            out.region = shift_region(&cert.region, z);
        }
        Transform::ReduceKappa(theta) => {
            if !(*theta > 0.0 && *theta <= 1.0) {
                return Err(Error::BadParameter(format!("theta {theta}")));
            }
            out.kappa *= theta;
            out.gamma /= theta;
        }
    }
    Ok(out)
}

fn shift_region(region: &RegionDescriptor, z: &Vector) -> RegionDescriptor {
    let shift = |b: &Ball| Ball::new(&b.center - z, b.radius);
    match region {
        RegionDescriptor::Whole => RegionDescriptor::Whole,
        RegionDescriptor::Ball(b) => RegionDescriptor::Ball(shift(b)),
        RegionDescriptor::TwoBalls { first, second } => RegionDescriptor::TwoBalls {
            first: shift(first),
            second: shift(second),
        },
    }
}

/// Certificate of `Σ α_i h_i` from certificates sharing one center.
///
/// The region of the first term is kept; callers combining different regions
/// should intersect them beforehand.
pub fn sum_certificates(terms: &[(f64, QuasarCertificate)]) -> Result<QuasarCertificate> {
    let (_, first) = terms
        .first()
        .ok_or_else(|| Error::BadParameter("empty sum".into()))?;
    let mut kappa = f64::INFINITY;
    let mut weighted = 0.0;
    for (alpha, c) in terms {
        c.validate()?;
        if !(*alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::BadParameter(format!("weight {alpha}")));
        }
        if c.center.len() != first.center.len()
            || (&c.center - &first.center).norm() > CENTER_TOL
        {
            return Err(Error::CenterMismatch);
        }
        kappa = kappa.min(c.kappa);
        weighted += alpha * c.kappa * c.gamma;
    }
    QuasarCertificate::new(kappa, weighted / kappa, first.center.clone(), first.region.clone())
}

/// Certificate of `h ∘ A` for `A` with full column rank and `x̄` in its range.
pub fn compose_linear(cert: &QuasarCertificate, a: &Matrix) -> Result<QuasarCertificate> {
    cert.validate()?;
    if a.nrows() != cert.center.len() {
        return Err(Error::DimensionMismatch {
            expected: cert.center.len(),
            got: a.nrows(),
        });
    }
    if a.ncols() > a.nrows() {
        return Err(Error::RankDeficient);
    }
    let svd = a.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    if !(s_max > 0.0) || s_min <= 1e-12 * s_max.max(1.0) {
        return Err(Error::RankDeficient);
    }
    let xg = svd
        .solve(&cert.center, 0.0)
        .map_err(|e| Error::BadParameter(e.to_string()))?;
    let residual = (a * &xg - &cert.center).norm();
    if residual > RANGE_TOL {
        return Err(Error::RangeViolation(residual));
    }
    let pinv = svd
        .pseudo_inverse(0.0)
        .map_err(|e| Error::BadParameter(e.to_string()))?;
    // A ball of radius r/σ_max around the preimage center maps into the original ball.
    let pull = |b: &Ball| Ball::new(&pinv * &b.center, b.radius / s_max);
    let region = match &cert.region {
        RegionDescriptor::Whole => RegionDescriptor::Whole,
        RegionDescriptor::Ball(b) => RegionDescriptor::Ball(pull(b)),
        RegionDescriptor::TwoBalls { first, second } => RegionDescriptor::TwoBalls {
            first: pull(first),
            second: pull(second),
        },
    };
    QuasarCertificate::new(cert.kappa, cert.gamma * s_min * s_min, xg, region)
}

/// Certificate of `φ ∘ h` for a `kappa2`-quasar-convex `φ` satisfying
/// `φ(t) − φ(s) ≥ m (t − s)` for `t ≥ s`.
pub fn compose_monotone(cert: &QuasarCertificate, kappa2: f64, m: f64) -> Result<QuasarCertificate> {
    cert.validate()?;
    if !(cert.kappa < 1.0) {
        return Err(Error::BadParameter(
            "kappa = 1; apply ReduceKappa first".into(),
        ));
    }
    if !(m >= 0.0 && m.is_finite()) {
        return Err(Error::BadParameter(format!("m = {m}")));
    }
    let c = aux_constant_c(cert.kappa, kappa2)?;
    QuasarCertificate::new(
        cert.kappa * kappa2,
        c * m * cert.gamma / kappa2,
        cert.center.clone(),
        cert.region.clone(),
    )
}
