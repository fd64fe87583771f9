//! Gaussian stochastic-function surrogate.
//!
//! The model is a stationary Gaussian process with unknown mean `mu`,
//! unknown variance `sigma2` and a fixed correlation kernel. Parameters are
//! estimated from the evaluation history, either with the plain sample
//! estimator or with maximum likelihood under the known correlation
//! structure. All solves go through a Cholesky factor of the correlation
//! matrix; no explicit inverse is ever formed.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two points closer than this in the max-norm are treated as the same point.
pub const DUPLICATE_THRESHOLD: f64 = 1e-12;

const JITTER_START: f64 = 1e-12;
const JITTER_MAX: f64 = 1e-6;

/// Raw conditional variances down to `-VARIANCE_CLAMP_TOL * sigma2` are
/// round-off and clamp silently.
const VARIANCE_CLAMP_TOL: f64 = 1e-10;

pub fn max_norm_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Axis-aligned feasible box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Region {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidRegion("dimension must be at least 1".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::InvalidRegion(format!(
                "lower has {} coordinates, upper has {}",
                lower.len(),
                upper.len()
            )));
        }
        for (k, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidRegion(format!("bound {k} is not finite")));
            }
            if lo >= hi {
                return Err(Error::InvalidRegion(format!(
                    "lower bound {lo} is not below upper bound {hi} on axis {k}"
                )));
            }
        }
        Ok(Region { lower, upper })
    }

    pub fn interval(lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower], vec![upper])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| v.is_finite() && *v >= *lo && *v <= *hi)
    }
}

/// Observed pairs `(x_i, y_i)` inside a region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationHistory {
    region: Region,
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl EvaluationHistory {
    pub fn new(region: Region, points: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidHistory(
                "history must hold at least one point".into(),
            ));
        }
        if points.len() != values.len() {
            return Err(Error::InvalidHistory(format!(
                "{} points but {} values",
                points.len(),
                values.len()
            )));
        }
        let mut history = EvaluationHistory {
            region,
            points: Vec::with_capacity(points.len()),
            values: Vec::with_capacity(values.len()),
        };
        for (p, v) in points.into_iter().zip(values) {
            history.push(p, v)?;
        }
        Ok(history)
    }

    /// Appends an observation, rejecting points outside the region, non-finite
    /// values and duplicates.
    pub fn push(&mut self, point: Vec<f64>, value: f64) -> Result<()> {
        if !self.region.contains(&point) {
            return Err(Error::InvalidHistory(format!(
                "point {point:?} lies outside the region"
            )));
        }
        if !value.is_finite() {
            return Err(Error::ObjectiveNonFinite { point, value });
        }
        if let Some(i) = self.find(&point) {
            return Err(Error::DuplicatePoints {
                first: i,
                second: self.points.len(),
                distance: max_norm_distance(&self.points[i], &point),
            });
        }
        self.points.push(point);
        self.values.push(value);
        Ok(())
    }

    /// Index of a stored point within the duplicate threshold of `x`.
    pub fn find(&self, x: &[f64]) -> Option<usize> {
        self.points
            .iter()
            .position(|p| max_norm_distance(p, x) < DUPLICATE_THRESHOLD)
    }

    /// Same points, different values (e.g. an affinely scaled copy).
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.points.len() {
            return Err(Error::InvalidHistory(format!(
                "{} points but {} values",
                self.points.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidHistory(format!("non-finite value {v}")));
        }
        Ok(EvaluationHistory {
            region: self.region.clone(),
            points: self.points.clone(),
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn is_constant(&self) -> bool {
        self.values.iter().all(|v| *v == self.values[0])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelFamily {
    /// `exp(-c |x - x'|)`
    Exponential,
    /// `exp(-c |x - x'|^2)`
    SquaredExponential,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationKernel {
    pub family: KernelFamily,
    pub decay: f64,
}

impl CorrelationKernel {
    pub fn new(family: KernelFamily, decay: f64) -> Result<Self> {
        if !(decay.is_finite() && decay > 0.0) {
            return Err(Error::InvalidKernel(format!(
                "decay rate must be positive and finite, got {decay}"
            )));
        }
        Ok(CorrelationKernel { family, decay })
    }

    pub fn exponential(decay: f64) -> Result<Self> {
        Self::new(KernelFamily::Exponential, decay)
    }

    pub fn squared_exponential(decay: f64) -> Result<Self> {
        Self::new(KernelFamily::SquaredExponential, decay)
    }

    pub fn correlation(&self, a: &[f64], b: &[f64]) -> f64 {
        let r = euclidean_distance(a, b);
        match self.family {
            KernelFamily::Exponential => (-self.decay * r).exp(),
            KernelFamily::SquaredExponential => (-self.decay * r * r).exp(),
        }
    }
}

impl Default for CorrelationKernel {
    fn default() -> Self {
        CorrelationKernel {
            family: KernelFamily::Exponential,
            decay: 5.0,
        }
    }
}

/// Builds the `n x n` correlation matrix of the history points.
pub fn correlation_matrix(
    history: &EvaluationHistory,
    kernel: &CorrelationKernel,
) -> Result<DMatrix<f64>> {
    let pts = history.points();
    let n = pts.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = max_norm_distance(&pts[i], &pts[j]);
            if d < DUPLICATE_THRESHOLD {
                return Err(Error::DuplicatePoints {
                    first: i,
                    second: j,
                    distance: d,
                });
            }
        }
    }
    let mut sigma = DMatrix::identity(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let r = kernel.correlation(&pts[i], &pts[j]);
            sigma[(i, j)] = r;
            sigma[(j, i)] = r;
        }
    }
    Ok(sigma)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    Sample,
    #[default]
    Mle,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParameters {
    pub mu: f64,
    pub sigma2: f64,
    pub estimator: Estimator,
}

impl ModelParameters {
    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }
}

/// Sample mean and unbiased sample variance.
pub fn estimate_sample(history: &EvaluationHistory) -> Result<ModelParameters> {
    let n = history.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let values = history.values();
    if history.is_constant() {
        return Ok(ModelParameters {
            mu: values[0],
            sigma2: 0.0,
            estimator: Estimator::Sample,
        });
    }
    let mu = values.iter().sum::<f64>() / n as f64;
    let sigma2 = values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (n - 1) as f64;
    Ok(ModelParameters {
        mu,
        sigma2,
        estimator: Estimator::Sample,
    })
}

/// Cholesky factor of a correlation matrix, with the diagonal jitter that
/// was needed to obtain it.
#[derive(Clone, Debug)]
pub struct CorrelationFactor {
    chol: Cholesky<f64, Dyn>,
    jitter: f64,
}

impl CorrelationFactor {
    pub fn new(sigma: &DMatrix<f64>) -> Result<Self> {
        if let Some(chol) = Cholesky::new(sigma.clone()) {
            return Ok(CorrelationFactor { chol, jitter: 0.0 });
        }
        let mut jitter = JITTER_START;
        while jitter <= JITTER_MAX * (1.0 + 1e-9) {
            let mut m = sigma.clone();
            for i in 0..m.nrows() {
                m[(i, i)] += jitter;
            }
            if let Some(chol) = Cholesky::new(m) {
                return Ok(CorrelationFactor { chol, jitter });
            }
            jitter *= 10.0;
        }
        Err(Error::IllConditioned {
            max_jitter: JITTER_MAX,
        })
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(b)
    }

    /// `L^{-1} b` for the lower factor `L`.
    pub fn forward(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol
            .l_dirty()
            .solve_lower_triangular(b)
            .expect("Cholesky factor has a positive diagonal")
    }

    /// `b^T S^{-1} b`
    pub fn quadratic_form(&self, b: &DVector<f64>) -> f64 {
        self.forward(b).norm_squared()
    }
}

fn gls_weights(factor: &CorrelationFactor, n: usize) -> DVector<f64> {
    let ones = DVector::from_element(n, 1.0);
    let w = factor.solve(&ones);
    let total = w.sum();
    w / total
}

fn mle_from_factor(
    history: &EvaluationHistory,
    factor: &CorrelationFactor,
) -> (ModelParameters, DVector<f64>) {
    let n = history.len();
    let weights = gls_weights(factor, n);
    if history.is_constant() {
        return (
            ModelParameters {
                mu: history.values()[0],
                sigma2: 0.0,
                estimator: Estimator::Mle,
            },
            weights,
        );
    }
    let y = DVector::from_column_slice(history.values());
    let mu = weights.dot(&y);
    let resid = y.map(|v| v - mu);
    let sigma2 = factor.quadratic_form(&resid) / n as f64;
    (
        ModelParameters {
            mu,
            sigma2,
            estimator: Estimator::Mle,
        },
        weights,
    )
}

/// Maximum-likelihood `(mu, sigma2)` under the kernel's correlation
/// structure: the generalized-least-squares mean and `r^T S^{-1} r / n`.
pub fn estimate_mle(
    history: &EvaluationHistory,
    kernel: &CorrelationKernel,
) -> Result<ModelParameters> {
    let sigma = correlation_matrix(history, kernel)?;
    let factor = CorrelationFactor::new(&sigma)?;
    Ok(mle_from_factor(history, &factor).0)
}

pub fn estimate(
    history: &EvaluationHistory,
    kernel: &CorrelationKernel,
    estimator: Estimator,
) -> Result<ModelParameters> {
    match estimator {
        Estimator::Sample => estimate_sample(history),
        Estimator::Mle => estimate_mle(history, kernel),
    }
}

/// Conditional mean and variance at a query point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    /// Set when the raw variance fell below `-1e-10 * sigma2` and had to be
    /// clamped, which points at an ill-conditioned correlation matrix.
    pub clamped: bool,
}

impl Moments {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Posterior of the Gaussian model given a history. Immutable once built.
#[derive(Clone, Debug)]
pub struct SurrogatePosterior {
    history: EvaluationHistory,
    kernel: CorrelationKernel,
    params: ModelParameters,
    factor: CorrelationFactor,
    /// `S^{-1} (y - mu)`
    alpha: DVector<f64>,
    /// Linear weights giving `mu` from the values.
    mean_weights: DVector<f64>,
}

impl SurrogatePosterior {
    pub fn build(
        history: &EvaluationHistory,
        kernel: &CorrelationKernel,
        estimator: Estimator,
    ) -> Result<Self> {
        let sigma = correlation_matrix(history, kernel)?;
        let factor = CorrelationFactor::new(&sigma)?;
        let n = history.len();
        let (params, mean_weights) = match estimator {
            Estimator::Mle => mle_from_factor(history, &factor),
            Estimator::Sample => (
                estimate_sample(history)?,
                DVector::from_element(n, 1.0 / n as f64),
            ),
        };
        Ok(Self::assemble(
            history,
            kernel,
            params,
            factor,
            mean_weights,
        ))
    }

    /// Posterior with externally supplied parameters.
    pub fn with_parameters(
        history: &EvaluationHistory,
        kernel: &CorrelationKernel,
        params: ModelParameters,
    ) -> Result<Self> {
        if !(params.mu.is_finite() && params.sigma2.is_finite() && params.sigma2 >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "model parameters must be finite with sigma2 >= 0, got {params:?}"
            )));
        }
        let sigma = correlation_matrix(history, kernel)?;
        let factor = CorrelationFactor::new(&sigma)?;
        let n = history.len();
        let mean_weights = match params.estimator {
            Estimator::Mle => gls_weights(&factor, n),
            Estimator::Sample => DVector::from_element(n, 1.0 / n as f64),
        };
        Ok(Self::assemble(
            history,
            kernel,
            params,
            factor,
            mean_weights,
        ))
    }

    fn assemble(
        history: &EvaluationHistory,
        kernel: &CorrelationKernel,
        params: ModelParameters,
        factor: CorrelationFactor,
        mean_weights: DVector<f64>,
    ) -> Self {
        let resid = DVector::from_iterator(
            history.len(),
            history.values().iter().map(|v| v - params.mu),
        );
        let alpha = factor.solve(&resid);
        SurrogatePosterior {
            history: history.clone(),
            kernel: *kernel,
            params,
            factor,
            alpha,
            mean_weights,
        }
    }

    pub fn history(&self) -> &EvaluationHistory {
        &self.history
    }

    pub fn kernel(&self) -> &CorrelationKernel {
        &self.kernel
    }

    pub fn parameters(&self) -> &ModelParameters {
        &self.params
    }

    pub fn jitter(&self) -> f64 {
        self.factor.jitter()
    }

    /// Weights `w` with `mu = sum_i w_i y_i`.
    pub fn mean_weights(&self) -> &[f64] {
        self.mean_weights.as_slice()
    }

    /// The row `(rho(x_1, x), ..., rho(x_n, x))`.
    pub fn correlation_row(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.history.len(),
            self.history
                .points()
                .iter()
                .map(|p| self.kernel.correlation(p, x)),
        )
    }

    /// Returns `S^{-1} u` and `u^T S^{-1} u` for the correlation row `u` at `x`.
    ///
    /// The conditional mean is `mu + sum_i beta_i (y_i - mu)` and the
    /// conditional variance is `sigma2 (1 - q)`.
    pub fn kriging_weights(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let row = self.correlation_row(x);
        let half = self.factor.forward(&row);
        let q = half.norm_squared();
        let beta = self.factor.solve(&row);
        (beta.as_slice().to_vec(), q)
    }

    /// `S^{-1} v` for a vector of length `n`.
    pub fn solve(&self, v: &[f64]) -> Vec<f64> {
        self.factor
            .solve(&DVector::from_column_slice(v))
            .as_slice()
            .to_vec()
    }

    /// Fraction of prior variance left at `x`: `1 - u^T S^{-1} u`.
    pub fn residual_fraction(&self, x: &[f64]) -> f64 {
        let row = self.correlation_row(x);
        1.0 - self.factor.quadratic_form(&row)
    }

    /// Conditional mean and variance at `x`. At a history point (within the
    /// duplicate threshold) these are the recorded value and zero.
    pub fn conditional_moments(&self, x: &[f64]) -> Moments {
        if let Some(i) = self.history.find(x) {
            return Moments {
                mean: self.history.values()[i],
                variance: 0.0,
                clamped: false,
            };
        }
        let row = self.correlation_row(x);
        let mean = self.params.mu + self.alpha.dot(&row);
        let sigma2 = self.params.sigma2;
        let raw = sigma2 * (1.0 - self.factor.quadratic_form(&row));
        let (variance, clamped) = if raw < 0.0 {
            (0.0, raw < -VARIANCE_CLAMP_TOL * sigma2)
        } else if raw > sigma2 {
            (sigma2, false)
        } else {
            (raw, false)
        };
        Moments {
            mean,
            variance,
            clamped,
        }
    }
}
