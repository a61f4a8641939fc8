//! `h(x) = ‖x‖^{1/2} + (2 + sin(3 arg x)) ‖x‖²` on the plane.

use std::f64::consts::PI;
use std::sync::Arc;

use super::{find_witness, ZooEntry};
use crate::error::Result;
use crate::oracle::{FnObjective, ObjectiveOracle, Vector};
use crate::quasar::{Property, QuasarCertificate};

pub fn spiky_value(x: &Vector) -> f64 {
    let r = x.norm();
    let theta = x[1].atan2(x[0]);
    r.sqrt() + (2.0 + (3.0 * theta).sin()) * r * r
}

/// Gradient away from the origin, 0 at the origin.
fn spiky_grad(x: &Vector) -> Vector {
    let r = x.norm();
    if r == 0.0 {
        return Vector::zeros(2);
    }
    let theta = x[1].atan2(x[0]);
    let radial = x * (0.5 * r.powf(-1.5) + 2.0 * (2.0 + (3.0 * theta).sin()));
    let angular = Vector::from_vec(vec![-x[1], x[0]]) * (3.0 * (3.0 * theta).cos());
    radial + angular
}

pub fn make_spiky_norm() -> Result<ZooEntry> {
    let zero = Vector::zeros(2);
    let h = FnObjective::new(2, spiky_value).with_subgradient(spiky_grad);
    let oracle = ObjectiveOracle::new(Arc::new(h)).with_minimizer(zero.clone(), 0.0);
    let star = QuasarCertificate::global(1.0, 0.0, zero.clone())?;
    let candidates = (1..=8).flat_map(|j| {
        (0..16).map(move |i| {
            let a = i as f64 * PI / 8.0;
            let r = 10f64.powi(-j);
            (Vector::from_vec(vec![r * a.cos(), r * a.sin()]), 0.5)
        })
    });
    let negative = find_witness(&oracle, &star, Property::Definition, candidates)?;
    Ok(ZooEntry {
        id: "spiky".into(),
        oracle,
        certificate: Some(QuasarCertificate::global(0.5, 1.0, zero)?),
        negative_certificates: vec![negative],
        provenance: "spiky norm; (1/2, 1)-strongly quasar-convex about 0 but not star-convex".into(),
        default_start: Vector::from_vec(vec![0.5, 0.0]),
    })
}
