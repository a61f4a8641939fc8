//! `h(x) = dist(x, C)^α` for a disk and for a cross-shaped union of rectangles.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{find_witness, ZooEntry};
use crate::error::{Error, Result};
use crate::oracle::{FnObjective, ObjectiveOracle, Vector};
use crate::quasar::{Property, QuasarCertificate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistShape {
    /// The closed unit disk.
    Disk,
    /// `([−2,2]×[−1,1]) ∪ ([−1,1]×[−2,2])`.
    Cross,
}

/// Nearest point of the box `[−a,a]×[−b,b]`.
fn clamp_box(x: &Vector, a: f64, b: f64) -> Vector {
    Vector::from_vec(vec![x[0].clamp(-a, a), x[1].clamp(-b, b)])
}

/// Distance to the cross and a nearest point of it.
pub fn cross_distance(x: &Vector) -> (f64, Vector) {
    let p = clamp_box(x, 2.0, 1.0);
    let q = clamp_box(x, 1.0, 2.0);
    let (dp, dq) = ((x - &p).norm(), (x - &q).norm());
    if dp <= dq {
        (dp, p)
    } else {
        (dq, q)
    }
}

fn disk_distance(x: &Vector) -> (f64, Vector) {
    let r = x.norm();
    if r <= 1.0 {
        (0.0, x.clone())
    } else {
        (r - 1.0, x / r)
    }
}

pub fn make_dist_power(shape: DistShape, alpha: f64) -> Result<ZooEntry> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::BadParameter(format!("alpha = {alpha}")));
    }
    let dist = match shape {
        DistShape::Disk => disk_distance,
        DistShape::Cross => cross_distance,
    };
    let h = FnObjective::new(2, move |x: &Vector| dist(x).0.powf(alpha)).with_subgradient(
        move |x: &Vector| {
            let (d, p) = dist(x);
            if d == 0.0 {
                Vector::zeros(2)
            } else {
                (x - p) * (alpha * d.powf(alpha - 2.0))
            }
        },
    );
    let zero = Vector::zeros(2);
    let oracle = ObjectiveOracle::new(Arc::new(h)).with_minimizer(zero.clone(), 0.0);
    let (id, negative, start) = match shape {
        DistShape::Disk => ("dist_disk", vec![], vec![3.0, 0.0]),
        DistShape::Cross => {
            let off = QuasarCertificate::global(alpha, 0.0, Vector::from_vec(vec![2.0, 1.0]))?;
            let witness = find_witness(
                &oracle,
                &off,
                Property::Definition,
                [(Vector::from_vec(vec![1.0, 2.0]), 0.5)],
            )?;
            ("dist_cross", vec![witness], vec![3.0, 3.0])
        }
    };
    Ok(ZooEntry {
        id: id.into(),
        oracle,
        certificate: Some(QuasarCertificate::global(alpha, 0.0, zero)?),
        negative_certificates: negative,
        provenance: format!("distance to a {shape:?} set raised to the power {alpha}"),
        default_start: Vector::from_vec(start),
    })
}
