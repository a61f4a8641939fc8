//! Robust multi-task regression `Φ(W) = ((1/N) Σ ‖W x_i − y_i‖)^q` with `y_i = W* x_i`.

use std::sync::Arc;

use rand::seq::index;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::ZooEntry;
use crate::error::{Error, Result};
use crate::oracle::{Matrix, Objective, ObjectiveOracle, SeedStream, Vector};
use crate::quasar::QuasarCertificate;
use crate::region::{Ball, RegionDescriptor};

const DATA_OFFSET: u64 = 1 << 40;
const START_OFFSET: u64 = DATA_OFFSET + 1;
const CX_OFFSET: u64 = DATA_OFFSET + 2;

/// Multistart count and iterations per start used by [`compute_cx`].
pub const CX_STARTS: usize = 32;
pub const CX_ITERS: usize = 400;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RmtrConfig {
    pub d: usize,
    pub m: usize,
    /// Number of samples `N`.
    pub samples: usize,
    pub q: f64,
    /// Radius `R` of the ball around `W*` holding the certificate and the iterates.
    pub radius: f64,
    /// `κ` of the certificate; `q/2` when absent.
    pub kappa: Option<f64>,
    /// Standard deviation of the random initial matrix.
    pub init_scale: f64,
    pub seed: u64,
}

impl Default for RmtrConfig {
    fn default() -> Self {
        RmtrConfig {
            d: 100,
            m: 5,
            samples: 400,
            q: 0.5,
            radius: 1.0,
            kappa: None,
            init_scale: 20.0,
            seed: 0,
        }
    }
}

impl RmtrConfig {
    pub fn kappa(&self) -> f64 {
        self.kappa.unwrap_or(self.q / 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::BadParameter(m));
        if self.d == 0 || self.m == 0 || self.samples < self.d {
            return bad(format!("need d, m ≥ 1 and N ≥ d, got d={} m={} N={}", self.d, self.m, self.samples));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return bad(format!("q = {}", self.q));
        }
        let k = self.kappa();
        if !(k > 0.0 && k < self.q) {
            return bad(format!("kappa = {k} must lie in (0, q)"));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad(format!("radius = {}", self.radius));
        }
        Ok(())
    }
}

/// `Φ` over the columns of `x`, smoothed with width `mu` when `mu > 0`.
#[derive(Clone, Debug)]
pub struct Rmtr {
    pub x: Arc<Matrix>,
    pub w_star: Arc<Matrix>,
    pub q: f64,
    pub mu: f64,
}

impl Rmtr {
    fn residuals(&self, w: &Vector) -> Matrix {
        let (m, d) = self.w_star.shape();
        let w = Matrix::from_column_slice(m, d, w.as_slice());
        (w - self.w_star.as_ref()) * self.x.as_ref()
    }

    /// `(Ψ, per-column norms)` where `Ψ` is the mean (smoothed) residual norm.
    fn inner(&self, r: &Matrix) -> (f64, Vec<f64>) {
        let norms: Vec<f64> = r.column_iter().map(|c| c.norm()).collect();
        let n = norms.len() as f64;
        let psi = if self.mu > 0.0 {
            norms.iter().map(|v| (v * v + self.mu * self.mu).sqrt() - self.mu).sum::<f64>() / n
        } else {
            norms.iter().sum::<f64>() / n
        };
        (psi, norms)
    }
}

impl Objective for Rmtr {
    fn dim(&self) -> usize {
        self.w_star.len()
    }

    fn value(&self, w: &Vector) -> f64 {
        let (psi, _) = self.inner(&self.residuals(w));
        if self.mu > 0.0 {
            (psi + self.mu).powf(self.q) - self.mu.powf(self.q)
        } else {
            psi.powf(self.q)
        }
    }

    /// Zero at `W*`; columns with zero residual contribute nothing.
    fn subgradient(&self, w: &Vector) -> Option<Vector> {
        let mut r = self.residuals(w);
        let (psi, norms) = self.inner(&r);
        let outer = if self.mu > 0.0 {
            self.q * (psi + self.mu).powf(self.q - 1.0)
        } else if psi > 0.0 {
            self.q * psi.powf(self.q - 1.0)
        } else {
            return Some(Vector::zeros(self.dim()));
        };
        let n = norms.len() as f64;
        for (j, mut col) in r.column_iter_mut().enumerate() {
            let denom = if self.mu > 0.0 {
                (norms[j] * norms[j] + self.mu * self.mu).sqrt()
            } else {
                norms[j]
            };
            if denom > 0.0 {
                col *= outer / (denom * n);
            } else {
                col.fill(0.0);
            }
        }
        let g = r * self.x.transpose();
        Some(Vector::from_column_slice(g.as_slice()))
    }

    fn smoothed(&self, mu: f64) -> Option<Arc<dyn Objective>> {
        Some(Arc::new(Rmtr { mu, ..self.clone() }))
    }

    fn minibatch(&self, stream: SeedStream, batch: usize) -> Option<Arc<dyn Objective>> {
        let n = self.x.ncols();
        let mut rng = stream.rng();
        let picks = index::sample(&mut rng, n, batch.min(n)).into_vec();
        Some(Arc::new(Rmtr {
            x: Arc::new(self.x.select_columns(&picks)),
            ..self.clone()
        }))
    }
}

fn full_row_rank(x: &Matrix) -> bool {
    if x.nrows() > x.ncols() {
        return false;
    }
    let s = x.singular_values();
    let max = s.max();
    max > 0.0 && s.min() > 1e-10 * max
}

/// Smallest value of `(1/N) Σ ‖U x_i‖` over `‖U‖_F = 1` found by projected
/// subgradient descent from [`CX_STARTS`] random starts.
///
/// The search runs over single-row `U`: by concavity of the square root,
/// `‖U x‖ ≥ Σ_j σ_j² |⟨v_j, x⟩|` for the singular pairs of `U`, so a single row
/// attains the minimum for every row count.
pub fn compute_cx(x: &Matrix) -> Result<f64> {
    if !full_row_rank(x) {
        return Err(Error::RankDeficientData);
    }
    let (d, n) = x.shape();
    let f = |v: &Vector| x.tr_mul(v).abs().sum() / n as f64;
    let mut rng = SeedStream::new(0).at(CX_OFFSET).rng();
    let mut best = f64::INFINITY;
    for _ in 0..CX_STARTS {
        let mut v = Vector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
        v /= v.norm();
        for t in 0..CX_ITERS {
            let z = x.tr_mul(&v);
            best = best.min(z.abs().sum() / n as f64);
            let s = z.map(|zi| if zi > 0.0 { 1.0 } else if zi < 0.0 { -1.0 } else { 0.0 });
            let mut g = x * s / n as f64;
            g -= &v * v.dot(&g);
            let gn = g.norm();
            if gn == 0.0 {
                break;
            }
            v -= g * (0.3 / ((t + 1) as f64).sqrt() / gn);
            v /= v.norm();
        }
        best = best.min(f(&v));
    }
    if !(best > 0.0) {
        return Err(Error::RankDeficientData);
    }
    Ok(best)
}

/// `γ = 2(q − κ)/κ · c_X^q · R^{q−2}`.
pub fn rmtr_gamma(q: f64, kappa: f64, cx: f64, radius: f64) -> f64 {
    2.0 * (q - kappa) / kappa * cx.powf(q) * radius.powf(q - 2.0)
}

pub fn make_rmtr(cfg: &RmtrConfig) -> Result<ZooEntry> {
    cfg.validate()?;
    let mut rng = SeedStream::new(cfg.seed).at(DATA_OFFSET).rng();
    let g = Matrix::from_fn(cfg.m, cfg.d, |_, _| StandardNormal.sample(&mut rng));
    let w_star = &g * (2.0 / g.norm());
    let mut x = None;
    for _ in 0..10 {
        let cand = Matrix::from_fn(cfg.d, cfg.samples, |_, _| StandardNormal.sample(&mut rng));
        if full_row_rank(&cand) {
            x = Some(cand);
            break;
        }
    }
    let x = x.ok_or(Error::RankDeficientData)?;
    let cx = compute_cx(&x)?;
    let center = Vector::from_column_slice(w_star.as_slice());
    let h = Rmtr {
        x: Arc::new(x),
        w_star: Arc::new(w_star),
        q: cfg.q,
        mu: 0.0,
    };
    let oracle = ObjectiveOracle::new(Arc::new(h)).with_minimizer(center.clone(), 0.0);
    let kappa = cfg.kappa();
    let region = RegionDescriptor::Ball(Ball::new(center.clone(), cfg.radius));
    let mut srng = SeedStream::new(cfg.seed).at(START_OFFSET).rng();
    let w0 = Vector::from_fn(cfg.m * cfg.d, |_, _| { let z: f64 = StandardNormal.sample(&mut srng); cfg.init_scale * z });
    let start = match &region {
        RegionDescriptor::Ball(b) => b.project(&w0),
        _ => unreachable!(),
    };
    Ok(ZooEntry {
        id: "rmtr".into(),
        oracle,
        certificate: Some(QuasarCertificate::new(
            kappa,
            rmtr_gamma(cfg.q, kappa, cx, cfg.radius),
            center,
            region,
        )?),
        negative_certificates: vec![],
        provenance: format!(
            "robust multi-task regression, d = {}, m = {}, N = {}, q = {}, c_X ≈ {cx:.6}",
            cfg.d, cfg.m, cfg.samples, cfg.q
        ),
        default_start: start,
    })
}
