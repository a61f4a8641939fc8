//! High-order proximal-point methods for strongly quasar-convex objectives.
//!
//! The crate bundles the HiPPA outer loop, an inner solver for the high-order
//! proximal subproblem, a certificate engine for `(κ, γ)`-strong
//! quasar-convexity, a zoo of test objectives, projected first-order
//! baselines, and rate checks on recorded traces.

// `!(x > 0.0)` style guards are meant to reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod functions;
pub mod hippa;
pub mod hope;
pub mod oracle;
pub mod quasar;
pub mod rates;
pub mod region;
pub mod trace;

pub use baselines::{run_baseline, BaselineConfig, Method, StepRule};
pub use error::{Error, Result};
pub use functions::{lookup, NegativeClaim, ZooEntry, ZOO_IDS};
pub use hippa::{run_hippa, BetaSchedule, HippaConfig};
pub use hope::ProxConfig;
pub use oracle::{
    ensure_finite, smooth_surrogate, subgradient_select, FnObjective, Matrix, McEstimate,
    Objective, ObjectiveOracle, SeedStream, StochasticObjective, Vector,
};
pub use quasar::{CheckReport, Property, QuasarCertificate, SamplerConfig};
pub use rates::{
    check_rate_bounds, estimate_rate, invariant_checks, theorem_bounds, FittedRates, RateOptions,
    RateReport, Regime, TheoremBounds, TheoremCheck,
};
pub use region::{project_region, Ball, RegionDescriptor};
pub use trace::{distance_metrics, RunTrace, Termination, TraceRecord};
