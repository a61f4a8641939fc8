//! `h(x) = max{0, ρ(x) − 1}` where `ρ` is the gauge of a four-petal star body.

use std::sync::Arc;

use super::ZooEntry;
use crate::error::Result;
use crate::oracle::{Objective, ObjectiveOracle, Vector};
use crate::quasar::QuasarCertificate;

/// Boundary radius `R(θ) = 1 + 0.35 cos 4θ`.
pub fn star_radius(theta: f64) -> f64 {
    1.0 + 0.35 * (4.0 * theta).cos()
}

/// `ρ(x) = ‖x‖ / R(arg x)`; the minimizers are exactly `{ρ ≤ 1}`.
pub fn star_gauge(x: &Vector) -> f64 {
    let r = x.norm();
    if r == 0.0 {
        0.0
    } else {
        r / star_radius(x[1].atan2(x[0]))
    }
}

fn gauge_grad(x: &Vector) -> Vector {
    let r = x.norm();
    if r == 0.0 {
        return Vector::zeros(2);
    }
    let theta = x[1].atan2(x[0]);
    let big_r = star_radius(theta);
    let dr = -1.4 * (4.0 * theta).sin();
    let rot = Vector::from_vec(vec![-x[1], x[0]]);
    x / (r * big_r) - rot * (dr / (big_r * big_r * r))
}

/// The positive part of `ρ − 1`, smoothed with width `mu` when `mu > 0`.
#[derive(Clone, Copy, Debug)]
struct StarFlower {
    mu: f64,
}

impl Objective for StarFlower {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: &Vector) -> f64 {
        let z = star_gauge(x) - 1.0;
        if self.mu > 0.0 {
            (z + (z * z + self.mu * self.mu).sqrt()) / 2.0 - self.mu / 2.0
        } else {
            z.max(0.0)
        }
    }

    fn subgradient(&self, x: &Vector) -> Option<Vector> {
        let z = star_gauge(x) - 1.0;
        let w = if self.mu > 0.0 {
            0.5 * (1.0 + z / (z * z + self.mu * self.mu).sqrt())
        } else if z > 0.0 {
            1.0
        } else {
            0.0
        };
        Some(gauge_grad(x) * w)
    }

    fn smoothed(&self, mu: f64) -> Option<Arc<dyn Objective>> {
        Some(Arc::new(StarFlower { mu }))
    }
}

pub fn make_star_flower() -> Result<ZooEntry> {
    let zero = Vector::zeros(2);
    let oracle = ObjectiveOracle::new(Arc::new(StarFlower { mu: 0.0 })).with_minimizer(zero.clone(), 0.0);
    Ok(ZooEntry {
        id: "star_flower".into(),
        oracle,
        certificate: Some(QuasarCertificate::global(1.0, 0.0, zero)?),
        negative_certificates: vec![],
        provenance: "star-convex with a nonisolated set of minimizers".into(),
        default_start: Vector::from_vec(vec![2.0, 1.0]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::smooth_surrogate;

    #[test]
    fn values() {
        let e = make_star_flower().unwrap();
        assert_eq!(e.oracle.value(&Vector::zeros(2)), 0.0);
        let x = Vector::from_vec(vec![2.7, 0.0]);
        assert!((star_gauge(&x) - 2.0).abs() < 1e-15);
        assert!((e.oracle.value(&x) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gauge_gradient_matches_differences() {
        let h = 1e-6;
        for x in [[1.3, 0.2], [-0.4, 1.9], [0.7, -2.2]] {
            let x = Vector::from_row_slice(&x);
            let g = gauge_grad(&x);
            for i in 0..2 {
                let mut e = Vector::zeros(2);
                e[i] = h;
                let fd = (star_gauge(&(&x + &e)) - star_gauge(&(&x - &e))) / (2.0 * h);
                assert!((fd - g[i]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn surrogate_stays_below_by_at_most_mu() {
        let e = make_star_flower().unwrap();
        let mu = 0.05;
        let s = smooth_surrogate(&e.oracle, mu).unwrap();
        for i in 0..200 {
            let a = i as f64 * 0.0314;
            let r = 0.02 * i as f64;
            let x = Vector::from_vec(vec![r * a.cos(), r * a.sin()]);
            let d = s.value(&x) - e.oracle.value(&x);
            assert!((-mu..=1e-15).contains(&d), "{d}");
        }
    }
}
