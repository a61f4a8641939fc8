//! Sampled verification and refutation of certificates.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::QuasarCertificate;
use crate::error::{Error, Result};
use crate::oracle::{ensure_finite, ObjectiveOracle, SeedStream, Vector};
use crate::region::RegionDescriptor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Definition,
    FirstOrder,
    QuadraticGrowth,
    Pl,
    ErrorBoundValue,
    ErrorBoundSubgrad,
}

impl Property {
    pub const ALL: [Property; 6] = [
        Property::Definition,
        Property::FirstOrder,
        Property::QuadraticGrowth,
        Property::Pl,
        Property::ErrorBoundValue,
        Property::ErrorBoundSubgrad,
    ];

    pub fn needs_gamma(self) -> bool {
        matches!(
            self,
            Property::QuadraticGrowth
                | Property::Pl
                | Property::ErrorBoundValue
                | Property::ErrorBoundSubgrad
        )
    }

    pub fn needs_subgradient(self) -> bool {
        matches!(
            self,
            Property::FirstOrder | Property::Pl | Property::ErrorBoundSubgrad
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Property::Definition => "definition",
            Property::FirstOrder => "first_order",
            Property::QuadraticGrowth => "quadratic_growth",
            Property::Pl => "pl",
            Property::ErrorBoundValue => "error_bound_value",
            Property::ErrorBoundSubgrad => "error_bound_subgrad",
        }
    }

    pub fn parse(s: &str) -> Option<Property> {
        Property::ALL.into_iter().find(|p| p.name() == s)
    }
}

/// How points are drawn around the certificate center.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Number of sampled points `x`.
    pub samples: usize,
    pub seed: u64,
    /// Sampling radius for unbounded regions.
    pub radius: f64,
    /// Number of points of the uniform λ-grid on `[0,1]`.
    pub lambda_grid: usize,
    /// Fraction of points whose radius is log-uniform rather than uniform.
    pub log_fraction: f64,
    /// Smallest log-uniform radius, relative to the sampling radius.
    pub min_rel_radius: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            samples: 1000,
            seed: 0,
            radius: 10.0,
            lambda_grid: 33,
            log_fraction: 0.5,
            min_rel_radius: 1e-6,
        }
    }
}

impl SamplerConfig {
    pub fn with_samples(samples: usize, seed: u64) -> Self {
        SamplerConfig {
            samples,
            seed,
            ..Default::default()
        }
    }

    pub fn lambdas(&self) -> Vec<f64> {
        let m = self.lambda_grid.max(2);
        (0..m).map(|i| i as f64 / (m - 1) as f64).collect()
    }

    /// Draws points around `center` inside `region`.
    pub fn points(&self, center: &Vector, region: &RegionDescriptor) -> Vec<Vector> {
        let mut rng = SeedStream::new(self.seed).rng();
        let n = center.len();
        let reach = match region {
            RegionDescriptor::Whole => self.radius,
            RegionDescriptor::Ball(b) => b.radius + (center - &b.center).norm(),
            RegionDescriptor::TwoBalls { first, second } => (first.radius
                + (center - &first.center).norm())
            .min(second.radius + (center - &second.center).norm()),
        };
        let mut out = Vec::with_capacity(self.samples);
        while out.len() < self.samples {
            let mut dir = Vector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
            let norm = dir.norm();
            if norm == 0.0 {
                continue;
            }
            dir /= norm;
            let r = if rng.random::<f64>() < self.log_fraction {
                let lo = (reach * self.min_rel_radius).ln();
                (lo + rng.random::<f64>() * (reach.ln() - lo)).exp()
            } else {
                reach * rng.random::<f64>()
            };
            let x = center + dir * r;
            if region.contains(&x, 0.0) {
                out.push(x);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<f64>,
    pub lambda: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub property: Property,
    pub samples_tested: usize,
    /// Largest `LHS − RHS`; nonpositive when the inequality held everywhere.
    pub worst_violation: f64,
    /// Violation level still counted as a pass.
    pub tolerance: f64,
    /// The worst sample, kept when it violates the inequality beyond `tolerance`.
    pub witness: Option<Witness>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.worst_violation <= self.tolerance
    }
}

/// Tolerance on residuals of closed-form objectives.
pub const CLOSED_FORM_TOL: f64 = 1e-8;

/// Signed residual (`LHS − RHS`) of `property` at `x` (and `lambda` for the definition).
pub fn residual(
    oracle: &ObjectiveOracle,
    cert: &QuasarCertificate,
    property: Property,
    x: &Vector,
    lambda: f64,
) -> Result<f64> {
    ensure_finite(x)?;
    let xbar = &cert.center;
    let (k, g) = (cert.kappa, cert.gamma);
    let hbar = oracle.value(xbar);
    let hx = oracle.value(x);
    let d2 = (x - xbar).norm_squared();
    let sub = || oracle.subgradient(x).ok_or(Error::MissingSubgradient);
    let r = match property {
        Property::Definition => {
            let xl = xbar * lambda + x * (1.0 - lambda);
            let rhs = k * lambda * hbar + (1.0 - k * lambda) * hx
                - lambda * (1.0 - lambda / (2.0 - k)) * (k * g / 2.0) * d2;
            oracle.value(&xl) - rhs
        }
        Property::FirstOrder => {
            let v = sub()?;
            hx + v.dot(&(xbar - x)) / k + g / 2.0 * d2 - hbar
        }
        Property::QuadraticGrowth => cert.growth_modulus() * d2 - (hx - hbar),
        Property::Pl => {
            let v = sub()?;
            cert.pl_modulus() * (hx - hbar) - v.norm_squared() / 2.0
        }
        Property::ErrorBoundValue => {
            let c = (2.0 * (2.0 - k) / (k * g)).sqrt();
            d2.sqrt() - c * (hx - hbar).max(0.0).sqrt()
        }
        Property::ErrorBoundSubgrad => {
            let v = sub()?;
            d2.sqrt() - 2.0 / (k * g) * v.norm()
        }
    };
    if r.is_nan() {
        return Err(Error::NonFiniteObjective);
    }
    Ok(r)
}

/// Samples `property` of `cert` for `oracle`.
///
/// For the definition every point is tested against the whole λ-grid. Stochastic
/// oracles pass when the worst residual stays within three standard errors.
pub fn verify_certificate(
    oracle: &ObjectiveOracle,
    cert: &QuasarCertificate,
    property: Property,
    sampler: &SamplerConfig,
) -> Result<CheckReport> {
    cert.validate()
        .map_err(|e| Error::InvalidCertificate(e.to_string()))?;
    if property.needs_gamma() && cert.gamma <= 0.0 {
        return Err(Error::GammaZeroForGrowth);
    }
    if property.needs_subgradient() && !oracle.has_subgradient() {
        return Err(Error::MissingSubgradient);
    }
    if cert.center.len() != oracle.dim() {
        return Err(Error::DimensionMismatch {
            expected: oracle.dim(),
            got: cert.center.len(),
        });
    }
    let lambdas = match property {
        Property::Definition => sampler.lambdas(),
        _ => vec![0.0],
    };
    let mut worst = f64::NEG_INFINITY;
    let mut worst_at: Option<Witness> = None;
    let mut tested = 0;
    let mut max_se: f64 = 0.0;
    for x in sampler.points(&cert.center, &cert.region) {
        if oracle.is_stochastic() {
            max_se = max_se.max(oracle.estimate(&x).std_err);
        }
        for &l in &lambdas {
            let r = residual(oracle, cert, property, &x, l)?;
            tested += 1;
            if r > worst {
                worst = r;
                worst_at = Some(Witness {
                    x: x.as_slice().to_vec(),
                    lambda: (property == Property::Definition).then_some(l),
                });
            }
        }
    }
    let tolerance = if oracle.is_stochastic() {
        3.0 * max_se
    } else {
        CLOSED_FORM_TOL
    };
    Ok(CheckReport {
        property,
        samples_tested: tested,
        worst_violation: worst,
        tolerance,
        witness: worst_at.filter(|_| worst > tolerance),
    })
}

/// Outcome of the directional-decrease and no-spurious-stationarity checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandscapeReport {
    pub samples_tested: usize,
    /// Largest violation of `h(x + t d) ≤ h(x) − κ t (h(x) − h(x̄))` with `d = x̄ − x`.
    pub worst_decrease_violation: f64,
    /// Sampled points whose slopes toward `x̄` were all at least `−1e-6`.
    pub flat_points: usize,
    /// Largest gap `h(x) − h*` among those points.
    pub worst_flat_gap: f64,
}

impl LandscapeReport {
    pub fn passed(&self) -> bool {
        self.worst_decrease_violation <= CLOSED_FORM_TOL && self.worst_flat_gap <= 1e-4
    }
}

/// Checks that no sampled point away from the minimizers is stationary along `x̄ − x`.
pub fn landscape_check(
    oracle: &ObjectiveOracle,
    cert: &QuasarCertificate,
    sampler: &SamplerConfig,
) -> Result<LandscapeReport> {
    cert.validate()?;
    let ts = [1e-3, 1e-4, 1e-5, 1e-6];
    let hbar = oracle.value(&cert.center);
    let mut report = LandscapeReport {
        samples_tested: 0,
        worst_decrease_violation: f64::NEG_INFINITY,
        flat_points: 0,
        worst_flat_gap: 0.0,
    };
    for x in sampler.points(&cert.center, &cert.region) {
        let hx = oracle.value(&x);
        let d = &cert.center - &x;
        let mut min_slope = f64::INFINITY;
        for &t in &ts {
            let ht = oracle.value(&(&x + &d * t));
            min_slope = min_slope.min((ht - hx) / t);
            let v = ht - (hx - cert.kappa * t * (hx - hbar));
            report.worst_decrease_violation = report.worst_decrease_violation.max(v);
        }
        if min_slope >= -1e-6 {
            report.flat_points += 1;
            report.worst_flat_gap = report.worst_flat_gap.max(hx - hbar);
        }
        report.samples_tested += 1;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::FnObjective;
    use std::sync::Arc;

    fn sq(n: usize) -> ObjectiveOracle {
        let h = FnObjective::new(n, |x: &Vector| x.norm_squared()).with_subgradient(|x| 2.0 * x);
        ObjectiveOracle::new(Arc::new(h)).with_minimizer(Vector::zeros(n), 0.0)
    }

    #[test]
    fn quadratic_passes_everything() {
        let c = QuasarCertificate::global(1.0, 2.0, Vector::zeros(3)).unwrap();
        for p in Property::ALL {
            let r = verify_certificate(&sq(3), &c, p, &SamplerConfig::with_samples(300, 1)).unwrap();
            assert!(r.worst_violation <= 1e-12 * 400.0, "{p:?}: {}", r.worst_violation);
            assert!(r.passed() && r.witness.is_none());
        }
    }

    #[test]
    fn pl_is_tight_for_quadratic() {
        let c = QuasarCertificate::global(1.0, 2.0, Vector::zeros(2)).unwrap();
        let x = Vector::from_vec(vec![0.3, -1.2]);
        assert!(residual(&sq(2), &c, Property::Pl, &x, 0.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn overclaimed_gamma_is_refuted() {
        let c = QuasarCertificate::global(1.0, 3.0, Vector::zeros(2)).unwrap();
        let r = verify_certificate(&sq(2), &c, Property::Definition, &SamplerConfig::default()).unwrap();
        assert!(!r.passed());
        let w = r.witness.unwrap();
        let again = residual(&sq(2), &c, Property::Definition, &Vector::from_vec(w.x), w.lambda.unwrap()).unwrap();
        assert_eq!(again, r.worst_violation);
    }

    #[test]
    fn errors() {
        let c0 = QuasarCertificate::global(1.0, 0.0, Vector::zeros(2)).unwrap();
        assert_eq!(
            verify_certificate(&sq(2), &c0, Property::Pl, &SamplerConfig::default()),
            Err(Error::GammaZeroForGrowth)
        );
        let bad = QuasarCertificate {
            kappa: 0.0,
            ..c0.clone()
        };
        assert!(matches!(
            verify_certificate(&sq(2), &bad, Property::Definition, &SamplerConfig::default()),
            Err(Error::InvalidCertificate(_))
        ));
        let abs = ObjectiveOracle::new(Arc::new(FnObjective::new(2, |x: &Vector| x.norm())));
        assert_eq!(
            verify_certificate(&abs, &c0, Property::FirstOrder, &SamplerConfig::default()),
            Err(Error::MissingSubgradient)
        );
    }

    #[test]
    fn sampler_respects_region() {
        let region = RegionDescriptor::ball(Vector::from_vec(vec![1.0, 0.0]), 0.5);
        let s = SamplerConfig::with_samples(500, 3);
        let pts = s.points(&Vector::from_vec(vec![1.0, 0.0]), &region);
        assert_eq!(pts.len(), 500);
        assert!(pts.iter().all(|p| region.contains(p, 0.0)));
        assert_eq!(s.lambdas().len(), 33);
    }

    #[test]
    fn landscape_of_quadratic() {
        let c = QuasarCertificate::global(1.0, 2.0, Vector::zeros(2)).unwrap();
        let r = landscape_check(&sq(2), &c, &SamplerConfig::default()).unwrap();
        assert!(r.passed(), "{r:?}");
    }
}
