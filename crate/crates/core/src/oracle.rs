//! Objective oracles.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Returns `NonFiniteInput` unless every coordinate is finite.
pub fn ensure_finite(x: &Vector) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteInput)
    }
}

/// A deterministic objective `h: R^n -> R`.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &Vector) -> f64;

    /// A fixed element of the Clarke subdifferential, if the objective supplies one.
    fn subgradient(&self, _x: &Vector) -> Option<Vector> {
        None
    }

    /// The smoothed surrogate of width `mu` for objectives built from norm,
    /// absolute-value or positive-part atoms.
    fn smoothed(&self, _mu: f64) -> Option<Arc<dyn Objective>> {
        None
    }

    /// Monte-Carlo standard error of `value(x)` for sample-average objectives.
    fn std_err(&self, _x: &Vector) -> Option<f64> {
        None
    }

    /// The same objective over a random subset of `batch` data terms, for
    /// finite-sum objectives.
    fn minibatch(&self, _stream: SeedStream, _batch: usize) -> Option<Arc<dyn Objective>> {
        None
    }
}

/// A random objective `E[F(x, xi)]` that can be replaced by sample averages.
pub trait StochasticObjective: Send + Sync {
    fn dim(&self) -> usize;

    /// The sample average over `batch` draws taken from `stream`.
    fn sample(&self, stream: SeedStream, batch: usize) -> Arc<dyn Objective>;
}

/// Explicit handle into a reproducible random stream.
///
/// Two handles with equal `seed` and `offset` produce identical draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedStream {
    pub seed: u64,
    pub offset: u64,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        SeedStream { seed, offset: 0 }
    }

    /// The same seed at another offset.
    pub fn at(self, offset: u64) -> Self {
        SeedStream { seed: self.seed, offset }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.offset);
        rng
    }
}

/// Mean and standard error of a Monte-Carlo estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
}

#[derive(Clone)]
enum Source {
    Deterministic(Arc<dyn Objective>),
    Stochastic {
        model: Arc<dyn StochasticObjective>,
        eval: Arc<dyn Objective>,
        stream: SeedStream,
    },
}

/// An objective together with what is known about its minimizer.
#[derive(Clone)]
pub struct ObjectiveOracle {
    source: Source,
    minimizer: Option<Vector>,
    min_value: Option<f64>,
}

impl fmt::Debug for ObjectiveOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObjectiveOracle")
            .field("dim", &self.dim())
            .field("stochastic", &self.is_stochastic())
            .field("minimizer", &self.minimizer.as_ref().map(|m| m.as_slice().to_vec()))
            .field("min_value", &self.min_value)
            .finish()
    }
}

impl ObjectiveOracle {
    pub fn new(objective: Arc<dyn Objective>) -> Self {
        ObjectiveOracle {
            source: Source::Deterministic(objective),
            minimizer: None,
            min_value: None,
        }
    }

    /// A stochastic oracle whose values are sample averages over `eval_batch`
    /// draws from `stream`.
    pub fn stochastic(
        model: Arc<dyn StochasticObjective>,
        stream: SeedStream,
        eval_batch: usize,
    ) -> Self {
        let eval = model.sample(stream, eval_batch);
        ObjectiveOracle {
            source: Source::Stochastic {
                model,
                eval,
                stream,
            },
            minimizer: None,
            min_value: None,
        }
    }

    pub fn with_minimizer(mut self, x: Vector, value: f64) -> Self {
        self.minimizer = Some(x);
        self.min_value = Some(value);
        self
    }

    pub fn dim(&self) -> usize {
        self.objective().dim()
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self.source, Source::Stochastic { .. })
    }

    /// The stream that generated the evaluation batch of a stochastic oracle.
    pub fn stream(&self) -> Option<SeedStream> {
        match &self.source {
            Source::Deterministic(_) => None,
            Source::Stochastic { stream, .. } => Some(*stream),
        }
    }

    /// The objective used for values: `h` itself, or the evaluation-batch average.
    pub fn objective(&self) -> &Arc<dyn Objective> {
        match &self.source {
            Source::Deterministic(h) => h,
            Source::Stochastic { eval, .. } => eval,
        }
    }

    /// A fresh sample average for stochastic oracles; `h` itself otherwise.
    pub fn sampled(&self, stream: SeedStream, batch: usize) -> Arc<dyn Objective> {
        match &self.source {
            Source::Deterministic(h) => h.clone(),
            Source::Stochastic { model, .. } => model.sample(stream, batch),
        }
    }

    pub fn value(&self, x: &Vector) -> f64 {
        self.objective().value(x)
    }

    pub fn estimate(&self, x: &Vector) -> McEstimate {
        let h = self.objective();
        McEstimate {
            mean: h.value(x),
            std_err: h.std_err(x).unwrap_or(0.0),
        }
    }

    pub fn subgradient(&self, x: &Vector) -> Option<Vector> {
        self.objective().subgradient(x)
    }

    pub fn has_subgradient(&self) -> bool {
        let x = Vector::from_element(self.dim(), 0.5);
        self.subgradient(&x).is_some()
    }

    pub fn minimizer(&self) -> Option<&Vector> {
        self.minimizer.as_ref()
    }

    pub fn min_value(&self) -> Option<f64> {
        self.min_value
    }
}

/// One element of the supplied subgradient selection at `x`.
pub fn subgradient_select(oracle: &ObjectiveOracle, x: &Vector) -> Result<Vector> {
    ensure_finite(x)?;
    oracle.subgradient(x).ok_or(Error::MissingSubgradient)
}

/// The surrogate of `oracle` where every declared nonsmooth atom is smoothed with width `mu`.
pub fn smooth_surrogate(oracle: &ObjectiveOracle, mu: f64) -> Result<ObjectiveOracle> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::BadParameter(format!("smoothing width {mu}")));
    }
    if oracle.is_stochastic() {
        return Err(Error::UnsupportedAtom);
    }
    let smooth = oracle.objective().smoothed(mu).ok_or(Error::UnsupportedAtom)?;
    Ok(ObjectiveOracle {
        source: Source::Deterministic(smooth),
        minimizer: oracle.minimizer.clone(),
        min_value: oracle.min_value,
    })
}

type ValueFn = dyn Fn(&Vector) -> f64 + Send + Sync;
type GradFn = dyn Fn(&Vector) -> Vector + Send + Sync;

/// Objective assembled from closures.
#[derive(Clone)]
pub struct FnObjective {
    dim: usize,
    value: Arc<ValueFn>,
    grad: Option<Arc<GradFn>>,
}

impl FnObjective {
    pub fn new(dim: usize, value: impl Fn(&Vector) -> f64 + Send + Sync + 'static) -> Self {
        FnObjective {
            dim,
            value: Arc::new(value),
            grad: None,
        }
    }

    pub fn with_subgradient(
        mut self,
        grad: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        self.grad = Some(Arc::new(grad));
        self
    }
}

impl Objective for FnObjective {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &Vector) -> f64 {
        (self.value)(x)
    }

    fn subgradient(&self, x: &Vector) -> Option<Vector> {
        self.grad.as_ref().map(|g| g(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn quadratic() -> ObjectiveOracle {
        let h = FnObjective::new(2, |x: &Vector| x.norm_squared()).with_subgradient(|x| 2.0 * x);
        ObjectiveOracle::new(Arc::new(h)).with_minimizer(Vector::zeros(2), 0.0)
    }

    #[test]
    fn gradient_of_quadratic() {
        let g = subgradient_select(&quadratic(), &Vector::from_vec(vec![1.0, 0.0])).unwrap();
        assert_eq!(g.as_slice(), &[2.0, 0.0]);
    }

    #[test]
    fn missing_subgradient_and_nan() {
        let h = FnObjective::new(1, |x: &Vector| x[0].abs());
        let o = ObjectiveOracle::new(Arc::new(h));
        let x = Vector::from_vec(vec![1.0]);
        assert_eq!(subgradient_select(&o, &x), Err(Error::MissingSubgradient));
        let bad = Vector::from_vec(vec![f64::NAN, 0.0]);
        assert_eq!(subgradient_select(&quadratic(), &bad), Err(Error::NonFiniteInput));
    }

    #[test]
    fn seed_streams_are_reproducible_and_distinct() {
        let a: u64 = SeedStream::new(7).at(3).rng().random();
        let b: u64 = SeedStream::new(7).at(3).rng().random();
        let c: u64 = SeedStream::new(7).at(4).rng().random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
