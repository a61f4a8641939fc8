//! Experiment files.

use std::path::{Path, PathBuf};

use hippa_core::functions::{make_relu_glm, make_rmtr, GlmConfig, RmtrConfig};
use hippa_core::{lookup, BaselineConfig, HippaConfig, Method, StepRule, ZooEntry};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Overrides `output_dir` of every experiment when set.
pub const OUTPUT_ENV: &str = "HIPPA_OUTPUT_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub entry_id: String,
    pub methods: Vec<MethodSpec>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub stopping: Stopping,
    pub output_dir: PathBuf,
    /// Starting point; the entry's default when absent.
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    /// Keep every iterate inside the certificate region.
    #[serde(default)]
    pub project_to_region: bool,
    #[serde(default)]
    pub rmtr: Option<RmtrConfig>,
    #[serde(default)]
    pub glm: Option<GlmConfig>,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stopping {
    pub eps_step: f64,
    pub rel_err_tol: Option<f64>,
    pub max_iters: usize,
}

impl Default for Stopping {
    fn default() -> Self {
        Stopping { eps_step: 1e-10, rel_err_tol: None, max_iters: 2000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodSpec {
    Hippa {
        p: f64,
        beta: f64,
        inner_tol: Option<f64>,
        smoothing_mu: Option<f64>,
        batch: Option<usize>,
        label: Option<String>,
    },
    Pgd(BaselineSpec),
    Psgd(BaselineSpec),
    Psg(BaselineSpec),
    Pssg(BaselineSpec),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineSpec {
    pub step0: Option<f64>,
    pub step_rule: Option<StepRule>,
    pub batch: Option<usize>,
    pub label: Option<String>,
}

/// What a method spec turns into once the stopping rules are applied.
#[derive(Clone, Debug)]
pub enum Solver {
    Hippa(HippaConfig),
    Baseline(BaselineConfig),
}

impl MethodSpec {
    pub fn label(&self) -> String {
        match self {
            MethodSpec::Hippa { label: Some(l), .. } => l.clone(),
            MethodSpec::Hippa { p, .. } => format!("hippa-p{p}"),
            MethodSpec::Pgd(b) | MethodSpec::Psgd(b) | MethodSpec::Psg(b) | MethodSpec::Pssg(b) => {
                b.label.clone().unwrap_or_else(|| self.baseline_method().unwrap().name().to_string())
            }
        }
    }

    fn baseline_method(&self) -> Option<Method> {
        match self {
            MethodSpec::Hippa { .. } => None,
            MethodSpec::Pgd(_) => Some(Method::Pgd),
            MethodSpec::Psgd(_) => Some(Method::Psgd),
            MethodSpec::Psg(_) => Some(Method::Psg),
            MethodSpec::Pssg(_) => Some(Method::Pssg),
        }
    }

    pub fn solver(&self, stop: &Stopping, seed: u64) -> Solver {
        match self {
            MethodSpec::Hippa { p, beta, inner_tol, smoothing_mu, batch, .. } => {
                let mut c = HippaConfig::new(*p, *beta);
                c.eps_step = stop.eps_step;
                c.eps_rel = stop.rel_err_tol;
                c.max_iters = stop.max_iters;
                c.seed = seed;
                if let Some(t) = inner_tol {
                    c.prox.inner_tol = *t;
                }
                if let Some(mu) = smoothing_mu {
                    c.prox.smoothing_mu = *mu;
                }
                if let Some(b) = batch {
                    c.batch = *b;
                }
                Solver::Hippa(c)
            }
            MethodSpec::Pgd(b) | MethodSpec::Psgd(b) | MethodSpec::Psg(b) | MethodSpec::Pssg(b) => {
                let mut c = BaselineConfig::new(self.baseline_method().unwrap());
                c.step0 = b.step0.unwrap_or(c.step0);
                c.step_rule = b.step_rule.unwrap_or(c.step_rule);
                c.batch = b.batch.unwrap_or(c.batch);
                c.max_iters = stop.max_iters;
                c.rel_err_tol = stop.rel_err_tol;
                c.seed = seed;
                Solver::Baseline(c)
            }
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(s: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = toml::from_str(s).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.methods.is_empty() {
            return Err(CliError::Config("no methods".into()));
        }
        if self.seeds.is_empty() {
            return Err(CliError::Config("no seeds".into()));
        }
        let mut labels: Vec<String> = self.methods.iter().map(|m| m.label()).collect();
        labels.sort();
        labels.dedup();
        if labels.len() != self.methods.len() {
            return Err(CliError::Config("method labels must be distinct".into()));
        }
        Ok(())
    }

    /// The zoo entry, built with the experiment's parameters where it has any.
    pub fn entry(&self) -> Result<ZooEntry, CliError> {
        let e = match (self.entry_id.as_str(), &self.rmtr, &self.glm) {
            ("rmtr", Some(r), _) => make_rmtr(r)?,
            ("relu_glm", _, Some(g)) => make_relu_glm(g)?,
            (id, _, _) => lookup(id)?,
        };
        Ok(e)
    }

    /// `output_dir`, or the directory named by [`OUTPUT_ENV`].
    pub fn resolved_output(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_ENV) {
            Some(d) if !d.is_empty() => PathBuf::from(d),
            _ => self.output_dir.clone(),
        }
    }
}
