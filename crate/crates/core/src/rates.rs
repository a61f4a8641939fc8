//! Empirical rates from traces and the closed-form bounds they are held to.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hippa::HippaConfig;
use crate::quasar::{kappa_p, QuasarCertificate};
use crate::trace::RunTrace;

/// Distances at or below this are treated as exact hits and left out of fits.
pub const DIST_FLOOR: f64 = 1e-12;
/// Relative tolerance on every bound.
pub const BOUND_RTOL: f64 = 1e-6;
/// Additive tolerance of the Fejér and descent invariants.
pub const INVARIANT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "p_in_1_2")]
    PIn12,
    #[serde(rename = "p_eq_2")]
    PEq2,
    #[serde(rename = "p_gt_2")]
    PGt2,
    #[serde(rename = "gamma_zero")]
    GammaZero,
}

impl Regime {
    pub fn of(p: f64, gamma: f64) -> Regime {
        if gamma == 0.0 {
            Regime::GammaZero
        } else if p < 2.0 {
            Regime::PIn12
        } else if p == 2.0 {
            Regime::PEq2
        } else {
            Regime::PGt2
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FittedRates {
    /// Geometric mean of `d_{k+1}/d_k` over the second half of the usable pairs.
    pub linear_ratio: Option<f64>,
    /// Least-squares slope of `log d_{k+1}` against `log d_k`.
    pub superlinear_order: Option<f64>,
    /// Least-squares slope of `log(h(x^k) − h*)` against `log k` over the second half.
    pub sublinear_exponent: Option<f64>,
}

/// One inequality checked over a trace.
///
/// Ratio-type checks report `max (lhs − slack)/scale` against the constant.
/// Envelope checks use the envelope as the scale and 1 as the bound.
/// Complexity checks compare iteration counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremCheck {
    pub theorem_id: String,
    pub bound_value: f64,
    pub worst_observed: f64,
    pub pass: bool,
}

impl TheoremCheck {
    fn new(id: &str, bound: f64, worst: f64) -> Self {
        TheoremCheck {
            theorem_id: id.to_string(),
            bound_value: bound,
            worst_observed: worst,
            pass: worst <= bound * (1.0 + BOUND_RTOL),
        }
    }

    /// `bound_value − worst_observed`.
    pub fn margin(&self) -> f64 {
        self.bound_value - self.worst_observed
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PredictedN {
    pub iterate_complexity: Option<u64>,
    pub value_complexity: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub regime: Regime,
    pub fitted: FittedRates,
    pub theorem_checks: Vec<TheoremCheck>,
    pub predicted_n: PredictedN,
}

impl RateReport {
    pub fn passed(&self) -> bool {
        self.theorem_checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, id: &str) -> Option<&TheoremCheck> {
        self.theorem_checks.iter().find(|c| c.theorem_id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Knobs of [`check_rate_bounds`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateOptions {
    /// Local radius for `1 < p < 2` with `γ > 0`.
    pub radius: Option<f64>,
    /// Accuracy at which measured and predicted iteration counts are compared.
    pub eps: f64,
}

impl Default for RateOptions {
    fn default() -> Self {
        RateOptions { radius: None, eps: 1e-6 }
    }
}

fn slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Fits the three rate constants to a trace with stored distances.
pub fn estimate_rate(trace: &RunTrace) -> Result<FittedRates> {
    let d = trace
        .distances()
        .ok_or_else(|| Error::InsufficientTrace("no distances".into()))?;
    let usable = d.iter().filter(|&&v| v > DIST_FLOOR).count();
    if usable < 5 {
        return Err(Error::InsufficientTrace(format!(
            "{usable} distances above {DIST_FLOOR:e}"
        )));
    }
    let pairs: Vec<(f64, f64)> = d
        .windows(2)
        .filter(|w| w[0] > DIST_FLOOR && w[1] > DIST_FLOOR)
        .map(|w| (w[0].ln(), w[1].ln()))
        .collect();
    let tail = &pairs[pairs.len() / 2..];
    let linear_ratio = (!tail.is_empty())
        .then(|| (tail.iter().map(|(a, b)| b - a).sum::<f64>() / tail.len() as f64).exp());
    let superlinear_order = slope(&pairs);

    let sublinear_exponent = trace.value_gaps().and_then(|g| {
        let last = trace.last().k;
        let pts: Vec<(f64, f64)> = trace
            .records
            .iter()
            .zip(g)
            .filter(|(r, gap)| r.k >= 1 && 2 * r.k >= last && *gap > 0.0)
            .map(|(r, gap)| ((r.k as f64).ln(), gap.ln()))
            .collect();
        slope(&pts)
    });
    Ok(FittedRates {
        linear_ratio,
        superlinear_order,
        sublinear_exponent,
    })
}

/// Closed-form constants for a certificate and a HiPPA configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremBounds {
    pub regime: Regime,
    pub p: f64,
    pub kappa: f64,
    pub gamma: f64,
    /// `β′`, the smallest `β_k` the schedule can produce.
    pub beta_lo: f64,
    /// Per-step distance contraction: `η_p` for `p < 2`, `r` for `p = 2`.
    pub ratio: Option<f64>,
    /// Local radius the contraction for `p < 2` holds on.
    pub radius: Option<f64>,
    /// `c` in `‖x^{k+1} − x̄‖ ≤ c‖x^k − x̄‖^{p−1}`.
    pub superlinear_c: Option<f64>,
    /// `c^{−1/(p−2)}`.
    pub init_radius: Option<f64>,
}

/// Largest radius the local linear rate for `1 < p < 2` may use.
pub fn max_local_radius(p: f64) -> Result<f64> {
    Ok((kappa_p(p)? / 4.0).powf(1.0 / (2.0 - p)))
}

/// Closed-form rate constants.
pub fn theorem_bounds(
    cert: &QuasarCertificate,
    cfg: &HippaConfig,
    radius: Option<f64>,
) -> Result<TheoremBounds> {
    cert.validate()?;
    cfg.validate()?;
    let p = cfg.p();
    let (kappa, gamma) = (cert.kappa, cert.gamma);
    let beta_lo = cfg.beta_schedule.bounds().0;
    let regime = Regime::of(p, gamma);
    let mut b = TheoremBounds {
        regime,
        p,
        kappa,
        gamma,
        beta_lo,
        ratio: None,
        radius: None,
        superlinear_c: None,
        init_radius: None,
    };
    match regime {
        Regime::GammaZero => {}
        Regime::PIn12 => {
            let r = radius.ok_or(Error::RadiusRequired)?;
            let rmax = max_local_radius(p)?;
            if !(r > 0.0 && r <= rmax) {
                return Err(Error::BadParameter(format!("radius {r} outside (0, {rmax:e}]")));
            }
            b.ratio = Some((2.0 * p / (kappa_p(p)? * r.powf(p - 2.0))).powf(1.0 / (p - 1.0)));
            b.radius = Some(r);
        }
        Regime::PEq2 => {
            let kbg = kappa * beta_lo * gamma;
            b.ratio = Some(1.0 / (1.0 + kbg + kappa * kbg / (2.0 - kappa)).sqrt());
        }
        Regime::PGt2 => {
            let c = (2.0 - kappa) / (beta_lo * kappa * gamma);
            b.superlinear_c = Some(c);
            b.init_radius = Some(c.powf(-1.0 / (p - 2.0)));
        }
    }
    Ok(b)
}

/// `⌈v⌉` with exact integers left alone, or `None` for non-finite input.
fn ceil_count(v: f64) -> Option<u64> {
    if !v.is_finite() {
        return None;
    }
    let v = v.max(0.0);
    let r = v.round();
    Some(if (v - r).abs() <= 1e-9 * r.max(1.0) { r } else { v.ceil() } as u64)
}

impl TheoremBounds {
    /// `(C, e)` with `h(x^k) − h* ≤ C k^{−e}` for `k ≥ 1`; only for `γ = 0`.
    pub fn envelope(&self, x0_dist: f64) -> Option<(f64, f64)> {
        if self.regime != Regime::GammaZero {
            return None;
        }
        let (p, bk) = (self.p, self.beta_lo * self.kappa);
        Some(if p < 2.0 {
            (x0_dist.powf(p) / (2f64.powf(p - 1.0) * bk), p - 1.0)
        } else if p == 2.0 {
            (x0_dist * x0_dist / (2.0 * bk), 1.0)
        } else {
            let c = ((p - 2.0) / p).powf((p - 2.0) / 2.0) / (bk * p);
            (c * x0_dist.powf(p), p / 2.0)
        })
    }

    /// Bound on `h(x^{k+1}) − h*` for `γ > 0`.
    ///
    /// For `p < 2`, `k` counts from the first iterate inside the local ball.
    pub fn value_bound(&self, x0_dist: f64, k: usize) -> Option<f64> {
        let (p, b) = (self.p, self.beta_lo);
        match self.regime {
            Regime::GammaZero => None,
            Regime::PIn12 | Regime::PEq2 => {
                let eta = self.ratio?;
                Some(eta.powf(p * k as f64) * x0_dist.powf(p) / (p * b))
            }
            Regime::PGt2 => {
                let c = self.superlinear_c?;
                let u0 = c.powf(1.0 / (p - 2.0)) * x0_dist;
                (u0 <= 1.0).then(|| {
                    c.powf(-p / (p - 2.0)) * u0.powf(p * (p - 1.0).powf(k as f64)) / (p * b)
                })
            }
        }
    }

    /// Upper bound on the first `k` with `‖x^k − x̄‖ < eps`, for `γ > 0`.
    pub fn iterate_complexity(&self, x0_dist: f64, eps: f64) -> Option<u64> {
        if !(eps > 0.0 && eps < 1.0) {
            return None;
        }
        match self.regime {
            Regime::GammaZero => None,
            Regime::PIn12 | Regime::PEq2 => {
                let eta = self.ratio?;
                ceil_count(1.0 + (x0_dist / eps).ln() / (1.0 / eta).ln())
            }
            Regime::PGt2 => {
                let s = self.superlinear_c?.powf(1.0 / (self.p - 2.0));
                if !(s * eps < 1.0 && s * x0_dist < 1.0) {
                    return None;
                }
                let ratio = (1.0 / (s * eps)).ln() / (1.0 / (s * x0_dist)).ln();
                ceil_count(1.0 + ratio.ln() / (self.p - 1.0).ln())
            }
        }
    }

    /// Upper bound on the first `k` with `h(x^k) − h* < eps`.
    pub fn value_complexity(&self, x0_dist: f64, eps: f64) -> Option<u64> {
        if !(eps > 0.0) {
            return None;
        }
        let (p, b) = (self.p, self.beta_lo);
        match self.regime {
            Regime::GammaZero => {
                let (c, e) = self.envelope(x0_dist)?;
                ceil_count(1.0 + (c / eps).powf(1.0 / e))
            }
            Regime::PIn12 | Regime::PEq2 => {
                let top = x0_dist.powf(p) / (p * b);
                if !(eps < top) {
                    return None;
                }
                ceil_count(1.0 + (top / eps).ln() / (p * (1.0 / self.ratio?).ln()))
            }
            Regime::PGt2 => {
                let c = self.superlinear_c?;
                let s = c.powf(1.0 / (p - 2.0));
                let top = c.powf(-p / (p - 2.0)) / (p * b);
                if !(eps < top && s * x0_dist < 1.0) {
                    return None;
                }
                let ratio = (top / eps).ln() / (p * (1.0 / (s * x0_dist)).ln());
                ceil_count(1.0 + ratio.ln() / (p - 1.0).ln())
            }
        }
    }
}

/// Running maximum of `(lhs − slack)/scale`, floored at 0 so empty checks pass.
struct Worst {
    slack: f64,
    value: f64,
}

impl Worst {
    fn new(slack: f64) -> Self {
        Worst { slack, value: 0.0 }
    }

    fn push(&mut self, lhs: f64, scale: f64) {
        if scale > 0.0 {
            self.value = self.value.max((lhs - self.slack) / scale);
        } else if lhs > self.slack {
            self.value = f64::INFINITY;
        }
    }
}

fn first_below(v: &[f64], eps: f64) -> Option<usize> {
    v.iter().position(|&d| d < eps)
}

/// Holds a HiPPA trace to every rate and complexity bound that applies to
/// `cert` and `cfg`.
pub fn check_rate_bounds(
    trace: &RunTrace,
    cert: &QuasarCertificate,
    cfg: &HippaConfig,
    opts: &RateOptions,
) -> Result<RateReport> {
    let d = trace
        .distances()
        .ok_or_else(|| Error::InsufficientTrace("no distances".into()))?;
    if d.is_empty() {
        return Err(Error::InsufficientTrace("empty trace".into()));
    }
    let b = theorem_bounds(cert, cfg, opts.radius)?;
    let gaps = trace.value_gaps();
    let slack = 10.0 * trace.inner_tol;
    let p = b.p;
    let d0 = d[0];
    let mut checks = Vec::new();
    let mut predicted = PredictedN::default();

    match b.regime {
        Regime::PIn12 | Regime::PEq2 => {
            let eta = b.ratio.expect("set for this regime");
            // For p < 2 everything starts at the first iterate inside the ball.
            let start = match b.radius {
                Some(r) => d.iter().position(|&v| v <= r),
                None => Some(0),
            };
            let (ratio_id, value_id) = if b.regime == Regime::PEq2 {
                ("iterate_linear_p2", "value_linear_p2")
            } else {
                ("iterate_local_linear", "value_local_linear")
            };
            let mut w = Worst::new(slack);
            let mut wv = Worst::new(slack);
            if let Some(s) = start {
                for k in s..d.len().saturating_sub(1) {
                    if d[k] > DIST_FLOOR {
                        w.push(d[k + 1], d[k]);
                    }
                    if let Some(g) = &gaps {
                        wv.push(g[k + 1], b.value_bound(d[s], k - s).unwrap_or(0.0));
                    }
                }
                predicted.iterate_complexity = b.iterate_complexity(d[s], opts.eps);
                predicted.value_complexity = b.value_complexity(d[s], opts.eps);
                if let (Some(n), Some(m)) = (predicted.iterate_complexity, first_below(&d[s..], opts.eps)) {
                    checks.push(TheoremCheck::new("iterate_complexity", n as f64, m as f64));
                }
                if let (Some(n), Some(g)) = (predicted.value_complexity, &gaps) {
                    if let Some(m) = first_below(&g[s..], opts.eps) {
                        checks.push(TheoremCheck::new("value_complexity", n as f64, m as f64));
                    }
                }
            }
            checks.insert(0, TheoremCheck::new(ratio_id, eta, w.value));
            if gaps.is_some() {
                checks.insert(1, TheoremCheck::new(value_id, 1.0, wv.value));
            }
        }
        Regime::PGt2 => {
            let c = b.superlinear_c.expect("set for this regime");
            let mut w = Worst::new(slack);
            for k in 0..d.len().saturating_sub(1) {
                if d[k] > DIST_FLOOR {
                    w.push(d[k + 1], d[k].powf(p - 1.0));
                }
            }
            checks.push(TheoremCheck::new("iterate_superlinear", c, w.value));
            if let Some(g) = &gaps {
                if b.value_bound(d0, 0).is_some() {
                    let mut wv = Worst::new(slack);
                    for k in 0..d.len() - 1 {
                        wv.push(g[k + 1], b.value_bound(d0, k).unwrap_or(0.0));
                    }
                    checks.push(TheoremCheck::new("value_superlinear", 1.0, wv.value));
                }
            }
            predicted.iterate_complexity = b.iterate_complexity(d0, opts.eps);
            predicted.value_complexity = b.value_complexity(d0, opts.eps);
            if let (Some(n), Some(m)) = (predicted.iterate_complexity, first_below(&d, opts.eps)) {
                checks.push(TheoremCheck::new("iterate_complexity", n as f64, m as f64));
            }
            if let (Some(n), Some(g)) = (predicted.value_complexity, &gaps) {
                if let Some(m) = first_below(g, opts.eps) {
                    checks.push(TheoremCheck::new("value_complexity", n as f64, m as f64));
                }
            }
        }
        Regime::GammaZero => {
            if let Some(g) = &gaps {
                let (c, e) = b.envelope(d0).expect("set for this regime");
                let mut w = Worst::new(slack);
                for (k, &gap) in g.iter().enumerate().skip(1) {
                    w.push(gap, c * (k as f64).powf(-e));
                }
                checks.push(TheoremCheck::new("value_sublinear", 1.0, w.value));
                predicted.value_complexity = b.value_complexity(d0, opts.eps);
                // Here the count is for a gap of at most eps.
                let m = g.iter().position(|&v| v <= opts.eps);
                if let (Some(n), Some(m)) = (predicted.value_complexity, m) {
                    checks.push(TheoremCheck::new("value_complexity", n as f64, m as f64));
                }
            }
        }
    }

    Ok(RateReport {
        regime: b.regime,
        fitted: estimate_rate(trace).unwrap_or_default(),
        theorem_checks: checks,
        predicted_n: predicted,
    })
}

/// Fejér monotonicity, descent and step summability along a deterministic run.
///
/// `beta_hi` is `β″`. Each check tolerates [`INVARIANT_TOL`] plus ten times
/// the trace's inner tolerance.
pub fn invariant_checks(trace: &RunTrace, p: f64, beta_hi: f64) -> Vec<TheoremCheck> {
    let slack = 10.0 * trace.inner_tol;
    let check = |id: &str, worst: f64| TheoremCheck::new(id, INVARIANT_TOL, worst - slack);
    let recs = &trace.records;
    let mut out = Vec::new();
    if let Some(d) = trace.distances() {
        let worst = d.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        out.push(check("fejer", worst));
    }
    let worst = recs
        .windows(2)
        .map(|w| (w[1].value - w[0].value) / (1.0 + w[0].value.abs()))
        .fold(0.0, f64::max);
    out.push(check("descent", worst));
    // h(x^{k+1}) + ‖x^{k+1} − x^k‖^p/(pβ″) ≤ h(x^k), summed.
    let mut sum = 0.0;
    let mut worst = 0.0_f64;
    for w in recs.windows(2) {
        sum += w[0].step_norm.powf(p) / (p * beta_hi);
        let drop = recs[0].value - w[1].value;
        worst = worst.max((sum - drop) / (1.0 + recs[0].value.abs()));
    }
    out.push(check("summability", worst));
    out
}
