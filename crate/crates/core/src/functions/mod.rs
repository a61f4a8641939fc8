//! Test objectives with known minimizers and, where available, certificates.

mod dist_power;
mod oscillatory;
mod quadrature;
mod relu_glm;
mod rmtr;
mod simple;
mod spiky;
mod star_flower;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{ObjectiveOracle, Vector};
use crate::quasar::{residual, Property, QuasarCertificate, Witness, CLOSED_FORM_TOL};

pub use dist_power::{cross_distance, make_dist_power, DistShape};
pub use oscillatory::{make_oscillatory_counterexample, ratio_witness_points, Oscillatory, REFUTED_KAPPAS};
pub use quadrature::integrate;
pub use relu_glm::{glm_region, make_relu_glm, sample_ball, GlmConfig, GlmModel};
pub use rmtr::{compute_cx, make_rmtr, rmtr_gamma, Rmtr, RmtrConfig};
pub use simple::{make_abs, make_spiky_slice, make_square};
pub use spiky::{make_spiky_norm, spiky_value};
pub use star_flower::{make_star_flower, star_gauge, star_radius};

/// A claim the entry's objective is known to violate, with the point that shows it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NegativeClaim {
    pub certificate: QuasarCertificate,
    pub property: Property,
    pub witness: Witness,
}

impl NegativeClaim {
    /// Residual of the claim at its stored witness; positive means refuted.
    pub fn violation(&self, oracle: &ObjectiveOracle) -> Result<f64> {
        let x = Vector::from_column_slice(&self.witness.x);
        residual(oracle, &self.certificate, self.property, &x, self.witness.lambda.unwrap_or(0.0))
    }
}

#[derive(Clone, Debug)]
pub struct ZooEntry {
    pub id: String,
    pub oracle: ObjectiveOracle,
    pub certificate: Option<QuasarCertificate>,
    pub negative_certificates: Vec<NegativeClaim>,
    pub provenance: String,
    /// Starting point used when a run does not give one.
    pub default_start: Vector,
}

/// Identifiers accepted by [`lookup`].
pub const ZOO_IDS: [&str; 10] = [
    "spiky",
    "dist_disk",
    "dist_cross",
    "star_flower",
    "relu_glm",
    "rmtr",
    "oscillatory",
    "abs",
    "square",
    "spiky_slice",
];

/// The entry called `id` with default parameters.
pub fn lookup(id: &str) -> Result<ZooEntry> {
    match id {
        "spiky" => make_spiky_norm(),
        "dist_disk" => make_dist_power(DistShape::Disk, 0.5),
        "dist_cross" => make_dist_power(DistShape::Cross, 0.5),
        "star_flower" => make_star_flower(),
        "relu_glm" => make_relu_glm(&GlmConfig::default()),
        "rmtr" => make_rmtr(&RmtrConfig::default()),
        "oscillatory" => make_oscillatory_counterexample(1),
        "abs" => make_abs(),
        "square" => make_square(2),
        "spiky_slice" => make_spiky_slice(),
        other => Err(Error::UnknownEntry(other.to_string())),
    }
}

/// The first candidate `(x, λ)` at which `property` of `cert` fails.
pub(crate) fn find_witness(
    oracle: &ObjectiveOracle,
    cert: &QuasarCertificate,
    property: Property,
    candidates: impl IntoIterator<Item = (Vector, f64)>,
) -> Result<NegativeClaim> {
    for (x, lambda) in candidates {
        if residual(oracle, cert, property, &x, lambda)? > CLOSED_FORM_TOL {
            return Ok(NegativeClaim {
                certificate: cert.clone(),
                property,
                witness: Witness {
                    x: x.as_slice().to_vec(),
                    lambda: (property == Property::Definition).then_some(lambda),
                },
            });
        }
    }
    Err(Error::InvalidCertificate("no witness among the candidates".into()))
}
