//! `f(x) = ∫_0^x φ(t) dt` with `φ(t) = t^{2k−1} sin²(1/t) + t^{2k+1}`: smooth,
//! unimodal on `[−1, 1]`, and not quasar-convex for any `κ`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Complex;

use super::{find_witness, integrate, ZooEntry};
use crate::error::{Error, Result};
use crate::oracle::{Objective, ObjectiveOracle, Vector};
use crate::quasar::{Property, QuasarCertificate};
use crate::region::RegionDescriptor;

/// Length in `u = 1/t` integrated numerically before the asymptotic tail.
const TAIL_START: f64 = 100.0;
const TAIL_TERMS: usize = 8;

/// `∫_U^∞ u^{−e} cos 2u du` from `I(e) = −U^{−e} e^{2iU}/(2i) + (e/(2i)) I(e+1)`.
fn cos_tail(e: f64, big_u: f64) -> f64 {
    let i2 = Complex::new(0.0, 2.0);
    let mut term = Complex::new(big_u.powf(-e), 0.0);
    let mut sum = term;
    for j in 1..TAIL_TERMS {
        term = term * (e + (j - 1) as f64) / (i2 * big_u);
        sum += term;
    }
    let phase = Complex::new((2.0 * big_u).cos(), (2.0 * big_u).sin());
    (-phase / i2 * sum).re
}

/// Refuted values of `κ`.
pub const REFUTED_KAPPAS: [f64; 3] = [0.5, 0.1, 0.01];

#[derive(Clone, Copy, Debug)]
pub struct Oscillatory {
    pub k: u32,
}

impl Oscillatory {
    pub fn phi(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        let s = (1.0 / t).sin();
        t.powi(2 * self.k as i32 - 1) * s * s + t.powi(2 * self.k as i32 + 1)
    }

    /// `f(x)`, even in `x`.
    ///
    /// With `sin² = (1 − cos 2/t)/2` and `u = 1/t`,
    /// `f(x) = x^{2k}/(4k) + x^{2k+2}/(2k+2) − ½ ∫_{1/x}^∞ u^{−(2k+1)} cos 2u du`.
    /// The last integral runs by adaptive quadrature up to `1/x + TAIL_START`
    /// and by its integration-by-parts expansion beyond.
    pub fn f(&self, x: f64) -> f64 {
        let a = x.abs();
        if a == 0.0 {
            return 0.0;
        }
        let k = self.k as i32;
        let e = 2 * k + 1;
        let lo = 1.0 / a;
        let hi = lo + TAIL_START;
        let tol = 1e-10 * a.powi(2 * k);
        let body = integrate(|u| u.powi(-e) * (2.0 * u).cos(), lo, hi, tol);
        let osc = body + cos_tail(e as f64, hi);
        a.powi(2 * k) / (4.0 * k as f64) + a.powi(2 * k + 2) / (2 * k + 2) as f64 - 0.5 * osc
    }

    pub fn derivative(&self, x: f64) -> f64 {
        x.signum() * self.phi(x.abs())
    }

    /// `x f′(x) / f(x)`, which must stay at least `κ` for κ-quasar-convexity about 0.
    pub fn first_order_ratio(&self, x: f64) -> f64 {
        x * self.derivative(x) / self.f(x)
    }
}

impl Objective for Oscillatory {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &Vector) -> f64 {
        self.f(x[0])
    }

    fn subgradient(&self, x: &Vector) -> Option<Vector> {
        Some(Vector::from_element(1, self.derivative(x[0])))
    }
}

/// Points `1/(nπ)` where `sin(1/x)` vanishes.
pub fn ratio_witness_points() -> impl Iterator<Item = f64> {
    (1..=1000).map(|n| 1.0 / (n as f64 * PI))
}

pub fn make_oscillatory_counterexample(k: u32) -> Result<ZooEntry> {
    if k == 0 {
        return Err(Error::BadParameter("k must be at least 1".into()));
    }
    let zero = Vector::zeros(1);
    let oracle = ObjectiveOracle::new(Arc::new(Oscillatory { k })).with_minimizer(zero.clone(), 0.0);
    let region = RegionDescriptor::ball(zero.clone(), 1.0);
    let mut negative = Vec::new();
    for kappa in REFUTED_KAPPAS {
        let cert = QuasarCertificate::new(kappa, 0.0, zero.clone(), region.clone())?;
        let points = ratio_witness_points().map(|x| (Vector::from_element(1, x), 0.0));
        negative.push(find_witness(&oracle, &cert, Property::FirstOrder, points)?);
    }
    Ok(ZooEntry {
        id: "oscillatory".into(),
        oracle,
        certificate: None,
        negative_certificates: negative,
        provenance: format!("smooth unimodal integral of t^{}sin²(1/t) + t^{}", 2 * k - 1, 2 * k + 1),
        default_start: Vector::from_element(1, 0.5),
    })
}
