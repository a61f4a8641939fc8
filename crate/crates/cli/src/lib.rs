//! Experiment runner behind the `hippa` binary.

pub mod config;
pub mod experiment;

use std::io::Write;
use std::path::Path;

use hippa_core::quasar::verify_certificate;
use hippa_core::rates::max_local_radius;
use hippa_core::{
    check_rate_bounds, lookup, HippaConfig, Property, QuasarCertificate, RateOptions, RateReport, RunTrace,
    SamplerConfig, ZOO_IDS,
};
use serde::Serialize;

pub use config::{ExperimentConfig, MethodSpec, Stopping, OUTPUT_ENV};
pub use experiment::{run_experiment, SummaryRow, SUMMARY_HEADER};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] hippa_core::Error),
}

/// Tab-separated `id, dim, kappa, gamma, provenance`, one entry per line.
pub fn list_zoo<W: Write>(mut out: W) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    writeln!(out, "id\tdim\tkappa\tgamma\tprovenance").map_err(io)?;
    for id in ZOO_IDS {
        let e = lookup(id)?;
        let (k, g) = match &e.certificate {
            Some(c) => (c.kappa.to_string(), c.gamma.to_string()),
            None => ("-".into(), "-".into()),
        };
        writeln!(out, "{id}\t{}\t{k}\t{g}\t{}", e.oracle.dim(), e.provenance).map_err(io)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct VerifyOutput {
    pub entry_id: String,
    pub certificate: Option<QuasarCertificate>,
    pub checks: Vec<hippa_core::CheckReport>,
    /// Residual of each stored negative claim at its witness; positive means refuted.
    pub refutations: Vec<f64>,
}

impl VerifyOutput {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed()) && self.refutations.iter().all(|&r| r > 0.0)
    }
}

/// Samples the entry's certificate; with no properties given, every
/// property the certificate supports is checked.
pub fn verify(id: &str, properties: &[Property], sampler: &SamplerConfig) -> Result<VerifyOutput, CliError> {
    let e = lookup(id)?;
    let mut checks = Vec::new();
    if let Some(cert) = &e.certificate {
        let props: Vec<Property> = if properties.is_empty() {
            Property::ALL
                .into_iter()
                .filter(|p| cert.gamma > 0.0 || !p.needs_gamma())
                .filter(|p| e.oracle.has_subgradient() || !p.needs_subgradient())
                .collect()
        } else {
            properties.to_vec()
        };
        for p in props {
            checks.push(verify_certificate(&e.oracle, cert, p, sampler)?);
        }
    }
    let refutations = e
        .negative_certificates
        .iter()
        .map(|n| n.violation(&e.oracle))
        .collect::<Result<_, _>>()?;
    Ok(VerifyOutput { entry_id: e.id, certificate: e.certificate, checks, refutations })
}

/// Knobs of the `rates` command.
#[derive(Clone, Debug)]
pub struct RatesArgs {
    pub p: f64,
    pub beta: f64,
    pub radius: Option<f64>,
    pub eps: f64,
    pub min_value: Option<f64>,
    pub inner_tol: f64,
}

/// Checks a trace CSV written by `run` against a certificate file.
pub fn rates_from_files(trace: &Path, cert: &Path, args: &RatesArgs) -> Result<RateReport, CliError> {
    let open = |p: &Path| std::fs::File::open(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())));
    let mut t = RunTrace::read_csv(open(trace)?, args.min_value)?;
    t.inner_tol = args.inner_tol;
    let text = std::fs::read_to_string(cert).map_err(|e| CliError::Io(format!("{}: {e}", cert.display())))?;
    let cert = QuasarCertificate::from_json(&text)?;
    let radius = match args.radius {
        Some(r) => Some(r),
        None if args.p < 2.0 && cert.gamma > 0.0 => Some(max_local_radius(args.p)?),
        None => None,
    };
    let cfg = HippaConfig::new(args.p, args.beta);
    Ok(check_rate_bounds(&t, &cert, &cfg, &RateOptions { radius, eps: args.eps })?)
}
