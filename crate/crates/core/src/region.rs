//! Balls, intersections of two balls, and Euclidean projections onto them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::Vector;

/// Serde adapter writing a [`Vector`] as a plain JSON array.
pub mod vec_serde {
    use super::Vector;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Vector, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vector, D::Error> {
        Ok(Vector::from_vec(Vec::<f64>::deserialize(d)?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    #[serde(with = "vec_serde")]
    pub center: Vector,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vector, radius: f64) -> Self {
        Ball { center, radius }
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        (x - &self.center).norm() <= self.radius + tol
    }

    pub fn project(&self, x: &Vector) -> Vector {
        let d = x - &self.center;
        let n = d.norm();
        if n <= self.radius {
            x.clone()
        } else {
            &self.center + d * (self.radius / n)
        }
    }
}

/// Where a certificate holds, or where iterates are kept.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionDescriptor {
    Whole,
    Ball(Ball),
    TwoBalls { first: Ball, second: Ball },
}

pub const DYKSTRA_TOL: f64 = 1e-10;
pub const DYKSTRA_MAX_SWEEPS: usize = 10_000;

impl RegionDescriptor {
    pub fn ball(center: Vector, radius: f64) -> Self {
        RegionDescriptor::Ball(Ball::new(center, radius))
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        match self {
            RegionDescriptor::Whole => true,
            RegionDescriptor::Ball(b) => b.contains(x, tol),
            RegionDescriptor::TwoBalls { first, second } => {
                first.contains(x, tol) && second.contains(x, tol)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RegionDescriptor::Whole => Ok(()),
            RegionDescriptor::Ball(b) => check_ball(b),
            RegionDescriptor::TwoBalls { first, second } => {
                check_ball(first)?;
                check_ball(second)?;
                if first.center.len() != second.center.len() {
                    return Err(Error::DimensionMismatch {
                        expected: first.center.len(),
                        got: second.center.len(),
                    });
                }
                if (&first.center - &second.center).norm() > first.radius + second.radius {
                    return Err(Error::EmptyRegion);
                }
                Ok(())
            }
        }
    }
}

fn check_ball(b: &Ball) -> Result<()> {
    if !(b.radius >= 0.0 && b.radius.is_finite()) || b.center.iter().any(|c| !c.is_finite()) {
        return Err(Error::EmptyRegion);
    }
    Ok(())
}

/// Euclidean projection onto `region`. The two-ball case runs Dykstra's
/// alternating projections.
pub fn project_region(x: &Vector, region: &RegionDescriptor) -> Result<Vector> {
    crate::oracle::ensure_finite(x)?;
    region.validate()?;
    Ok(match region {
        RegionDescriptor::Whole => x.clone(),
        RegionDescriptor::Ball(b) => b.project(x),
        RegionDescriptor::TwoBalls { first, second } => dykstra(x, first, second).0,
    })
}

/// Dykstra's algorithm for two balls; returns the point and the sweeps used.
pub fn dykstra(x: &Vector, a: &Ball, b: &Ball) -> (Vector, usize) {
    if a.contains(x, 0.0) && b.contains(x, 0.0) {
        return (x.clone(), 0);
    }
    let mut cur = x.clone();
    let mut p = Vector::zeros(x.len());
    let mut q = Vector::zeros(x.len());
    for sweep in 1..=DYKSTRA_MAX_SWEEPS {
        let y = a.project(&(&cur + &p));
        p = &cur + &p - &y;
        let next = b.project(&(&y + &q));
        q = &y + &q - &next;
        let moved = (&next - &cur).norm();
        let gap = (&next - &y).norm();
        cur = next;
        if moved <= DYKSTRA_TOL && gap <= DYKSTRA_TOL {
            return (cur, sweep);
        }
    }
    (cur, DYKSTRA_MAX_SWEEPS)
}
