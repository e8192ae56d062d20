//! Evaluation of the product depth and its components for event sequences
//! observed up to their first `k` events.
//!
//! The depth of a realization `s = (s_1, .., s_k)` with start `s_0` is
//!
//! ```text
//! D(s) = omega(s_k) ^ (|s_k - eta| / (M - s_0)) * D_c(s)
//! ```
//!
//! where `omega` is the normalized one-dimensional Mahalanobis depth of the
//! duration `s_k - s_0`, and `D_c` scores the normalized inter-event gaps
//! against their expected proportions `u_bar`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{DepthError, Result};

/// Ridge factor applied (relative to the mean diagonal) when the baseline
/// covariance cannot be factorized as given.
pub const COVARIANCE_RIDGE: f64 = 1e-10;

const PROPORTION_SUM_TOLERANCE: f64 = 1e-12;

/// One realization: ordered event times `s_1 <= .. <= s_k` after a start time `s_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSequence {
    start: f64,
    times: Vec<f64>,
}

impl EventSequence {
    pub fn new(start: f64, times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(DepthError::EmptySequence);
        }
        if !start.is_finite() {
            return Err(DepthError::NonFinite {
                position: 0,
                value: start,
            });
        }
        let mut previous = start;
        for (i, &t) in times.iter().enumerate() {
            if !t.is_finite() {
                return Err(DepthError::NonFinite {
                    position: i + 1,
                    value: t,
                });
            }
            if t < previous {
                return Err(DepthError::Unordered {
                    position: i + 1,
                    value: t,
                    previous,
                });
            }
            previous = t;
        }
        Ok(Self { start, times })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn k(&self) -> usize {
        self.times.len()
    }

    pub fn last(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Total observed duration `s_k - s_0`.
    pub fn duration(&self) -> f64 {
        self.last() - self.start
    }

    /// Inter-event gaps `s_i - s_{i-1}`, the first measured from the start.
    pub fn gaps(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.start)
            .chain(self.times.iter().copied())
            .zip(self.times.iter().copied())
            .map(|(prev, t)| t - prev)
    }

    /// True when at least one ordering constraint holds with equality.
    pub fn on_boundary(&self) -> bool {
        self.gaps().any(|g| g == 0.0)
    }

    /// The image of this sequence under `t -> a t + b`.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        Self::new(
            scale * self.start + shift,
            self.times.iter().map(|t| scale * t + shift).collect(),
        )
    }
}

/// Fitted quantities that fully determine the product depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthParams {
    pub k: usize,
    pub start: f64,
    /// Mean of the duration `S_k - S_0`.
    pub mu_last: f64,
    /// Variance of the duration `S_k - S_0`.
    pub var_last: f64,
    /// Expected normalized gap proportions; positive, summing to one.
    pub u_bar: Vec<f64>,
    /// Location of the maximum of the marginal depth.
    pub eta: f64,
    /// Horizon hyperparameter `M`, the expected last event time by default.
    pub big_m: f64,
    /// The central event-time vector.
    pub center: Vec<f64>,
}

impl DepthParams {
    /// Builds parameters from the duration moments and gap proportions, with
    /// `eta` and `M` both at the mean last event time.
    pub fn from_moments(start: f64, mu_last: f64, var_last: f64, u_bar: Vec<f64>) -> Result<Self> {
        let center = center(start, mu_last, &u_bar)?;
        let params = Self {
            k: u_bar.len(),
            start,
            mu_last,
            var_last,
            u_bar,
            eta: start + mu_last,
            big_m: start + mu_last,
            center,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_big_m(mut self, big_m: f64) -> Result<Self> {
        self.big_m = big_m;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.mu_last.is_finite() && self.var_last.is_finite()) {
            return Err(DepthError::InvalidConfig(
                "non-finite parameter values".into(),
            ));
        }
        if !(self.mu_last > 0.0) {
            return Err(DepthError::NonPositiveDuration(self.mu_last));
        }
        if !(self.var_last > 0.0) {
            return Err(DepthError::DegenerateVariance(self.var_last));
        }
        if !(self.big_m - self.start > 0.0) {
            return Err(DepthError::DegenerateHorizon(self.big_m - self.start));
        }
        check_proportions(&self.u_bar)?;
        if self.k != self.u_bar.len() {
            return Err(DepthError::LengthMismatch {
                expected: self.k,
                found: self.u_bar.len(),
            });
        }
        if self.center.len() != self.k {
            return Err(DepthError::LengthMismatch {
                expected: self.k,
                found: self.center.len(),
            });
        }
        Ok(())
    }

    /// Parameters of the transformed population `a S + b`.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(DepthError::InvalidConfig(format!(
                "scale must be positive, got {scale}"
            )));
        }
        let start = scale * self.start + shift;
        let mu_last = scale * self.mu_last;
        let mut params = Self::from_moments(
            start,
            mu_last,
            scale * scale * self.var_last,
            self.u_bar.clone(),
        )?;
        params.eta = scale * self.eta + shift;
        params.big_m = scale * self.big_m + shift;
        params.validate()?;
        Ok(params)
    }

    /// Parameters with the same duration moments but uniform gap proportions,
    /// the homogeneous Poisson case.
    pub fn with_uniform_proportions(&self) -> Result<Self> {
        let u = vec![1.0 / self.k as f64; self.k];
        let mut params = Self::from_moments(self.start, self.mu_last, self.var_last, u)?;
        params.eta = self.eta;
        params.big_m = self.big_m;
        Ok(params)
    }

    pub fn center_sequence(&self) -> EventSequence {
        EventSequence {
            start: self.start,
            times: self.center.clone(),
        }
    }
}

fn check_proportions(u_bar: &[f64]) -> Result<()> {
    if u_bar.is_empty() {
        return Err(DepthError::InvalidProportions("empty".into()));
    }
    if let Some((i, u)) = u_bar
        .iter()
        .enumerate()
        .find(|(_, u)| !(u.is_finite() && **u > 0.0))
    {
        return Err(DepthError::InvalidProportions(format!(
            "component {} is {u}",
            i + 1
        )));
    }
    let total: f64 = u_bar.iter().sum();
    if (total - 1.0).abs() > PROPORTION_SUM_TOLERANCE {
        return Err(DepthError::InvalidProportions(format!("sum is {total}")));
    }
    Ok(())
}

/// Per-realization output of [`product_depth`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthBreakdown {
    pub omega: f64,
    pub exponent: f64,
    pub marginal_factor: f64,
    pub conditional: f64,
    pub product: f64,
    pub baseline_mahalanobis: Option<f64>,
}

/// One-dimensional Mahalanobis depth of the duration `last_time - start`.
pub fn marginal_depth_d1(last_time: f64, params: &DepthParams) -> Result<f64> {
    if !(params.var_last > 0.0) {
        return Err(DepthError::DegenerateVariance(params.var_last));
    }
    let deviation = last_time - params.start - params.mu_last;
    Ok(1.0 / (1.0 + deviation * deviation / params.var_last))
}

/// Normalized marginal depth. The one-dimensional Mahalanobis depth peaks at
/// the mean with value one, so the normalizer is one and `eta` is the mean.
pub fn omega(last_time: f64, params: &DepthParams) -> Result<f64> {
    marginal_depth_d1(last_time, params)
}

/// Distance-weighted exponent `|s_k - eta| / (M - s_0)`.
pub fn marginal_exponent(last_time: f64, params: &DepthParams) -> Result<f64> {
    let horizon = params.big_m - params.start;
    if !(horizon > 0.0) {
        return Err(DepthError::DegenerateHorizon(horizon));
    }
    Ok((last_time - params.eta).abs() / horizon)
}

/// `omega(s_k) ^ (|s_k - eta| / (M - s_0))`. A zero exponent gives one
/// whatever the base.
pub fn marginal_factor(last_time: f64, params: &DepthParams) -> Result<f64> {
    let exponent = marginal_exponent(last_time, params)?;
    if exponent == 0.0 {
        return Ok(1.0);
    }
    Ok(omega(last_time, params)?.powf(exponent))
}

/// Natural log of the conditional depth before clamping, or `None` on the
/// boundary where the depth is exactly zero.
pub(crate) fn log_conditional_depth(seq: &EventSequence, u_bar: &[f64]) -> Result<Option<f64>> {
    if seq.k() != u_bar.len() {
        return Err(DepthError::LengthMismatch {
            expected: u_bar.len(),
            found: seq.k(),
        });
    }
    let total = seq.duration();
    if !(total > 0.0) {
        return Ok(None);
    }
    let log_total = total.ln();
    let mut acc = 0.0;
    for (gap, &u) in seq.gaps().zip(u_bar) {
        if !(gap > 0.0) {
            return Ok(None);
        }
        acc += u * (gap.ln() - log_total - u.ln());
    }
    Ok(Some(acc))
}

/// Weighted geometric score of the normalized gaps against `u_bar`:
/// `prod_i [ (s_i - s_{i-1}) / ((s_k - s_0) u_i) ] ^ u_i`.
///
/// Evaluated in log space; any zero gap gives exactly zero.
pub fn conditional_depth(seq: &EventSequence, params: &DepthParams) -> Result<f64> {
    Ok(log_conditional_depth(seq, &params.u_bar)?
        .map_or(0.0, |log| log.exp().min(1.0)))
}

/// Conditional depth with uniform proportions, `k * prod_i (gap_i / (s_k - s_0))^(1/k)`.
pub fn hpp_conditional_depth(seq: &EventSequence) -> f64 {
    let total = seq.duration();
    if !(total > 0.0) || seq.on_boundary() {
        return 0.0;
    }
    let k = seq.k() as f64;
    let mean_log = seq.gaps().map(|g| (g / total).ln()).sum::<f64>() / k;
    (k * mean_log.exp()).min(1.0)
}

/// Full product depth with its components.
pub fn product_depth(seq: &EventSequence, params: &DepthParams) -> Result<DepthBreakdown> {
    if seq.k() != params.k {
        return Err(DepthError::LengthMismatch {
            expected: params.k,
            found: seq.k(),
        });
    }
    if seq.start() != params.start {
        return Err(DepthError::StartMismatch {
            expected: params.start,
            found: seq.start(),
        });
    }
    let last = seq.last();
    let omega = omega(last, params)?;
    let exponent = marginal_exponent(last, params)?;
    let marginal_factor = marginal_factor(last, params)?;
    let conditional = conditional_depth(seq, params)?;
    Ok(DepthBreakdown {
        omega,
        exponent,
        marginal_factor,
        conditional,
        product: marginal_factor * conditional,
        baseline_mahalanobis: None,
    })
}

/// Central event-time vector `theta_i = s_0 + mu * sum_{j<=i} u_j`.
pub fn center(start: f64, mu_last: f64, u_bar: &[f64]) -> Result<Vec<f64>> {
    if !(mu_last > 0.0) {
        return Err(DepthError::NonPositiveDuration(mu_last));
    }
    check_proportions(u_bar)?;
    let mut cumulative = 0.0;
    let mut out: Vec<f64> = u_bar
        .iter()
        .map(|u| {
            cumulative += u;
            start + mu_last * cumulative
        })
        .collect();
    // pin the last coordinate so rounding in the cumulative sum cannot move it
    *out.last_mut().unwrap() = start + mu_last;
    Ok(out)
}

/// Multivariate Mahalanobis depth on the raw event-time vector, the
/// fixed-count comparison baseline.
#[derive(Debug, Clone)]
pub struct MahalanobisModel {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
    factor: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    regularized: bool,
}

impl MahalanobisModel {
    /// Factorizes the covariance, adding a small ridge when the matrix is
    /// not numerically positive definite.
    pub fn new(mean: &[f64], covariance: &[Vec<f64>]) -> Result<Self> {
        let k = mean.len();
        if k == 0 {
            return Err(DepthError::EmptySequence);
        }
        if covariance.len() != k || covariance.iter().any(|row| row.len() != k) {
            return Err(DepthError::InvalidCovariance(format!(
                "expected a {k}x{k} matrix"
            )));
        }
        let cov = DMatrix::from_fn(k, k, |i, j| covariance[i][j]);
        if cov.iter().any(|v| !v.is_finite()) {
            return Err(DepthError::InvalidCovariance("non-finite entry".into()));
        }
        for i in 0..k {
            for j in 0..i {
                let (a, b) = (cov[(i, j)], cov[(j, i)]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(DepthError::InvalidCovariance("not symmetric".into()));
                }
            }
        }
        let (factor, regularized) = match factorize(&cov) {
            Some(f) => (f, false),
            None => {
                let ridge = COVARIANCE_RIDGE * cov.trace() / k as f64;
                if !(ridge > 0.0) {
                    return Err(DepthError::SingularCovariance);
                }
                let shifted = &cov + DMatrix::identity(k, k) * ridge;
                (factorize(&shifted).ok_or(DepthError::SingularCovariance)?, true)
            }
        };
        Ok(Self {
            mean: DVector::from_column_slice(mean),
            covariance: cov,
            factor,
            regularized,
        })
    }

    pub fn k(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        self.mean.as_slice()
    }

    pub fn covariance(&self) -> Vec<Vec<f64>> {
        self.covariance
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    /// Whether the ridge had to be added.
    pub fn is_regularized(&self) -> bool {
        self.regularized
    }

    /// `(x - mean)' Sigma^-1 (x - mean)`.
    pub fn squared_distance(&self, times: &[f64]) -> Result<f64> {
        if times.len() != self.k() {
            return Err(DepthError::LengthMismatch {
                expected: self.k(),
                found: times.len(),
            });
        }
        let diff = DVector::from_column_slice(times) - &self.mean;
        let z = self
            .factor
            .l_dirty()
            .solve_lower_triangular(&diff)
            .ok_or(DepthError::SingularCovariance)?;
        Ok(z.norm_squared())
    }

    pub fn depth(&self, times: &[f64]) -> Result<f64> {
        Ok(1.0 / (1.0 + self.squared_distance(times)?))
    }
}

/// Cholesky factor, rejecting pivots that vanish at machine precision.
fn factorize(cov: &DMatrix<f64>) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let factor = nalgebra::Cholesky::new(cov.clone())?;
    let threshold = 16.0 * cov.nrows() as f64 * f64::EPSILON * cov.diagonal().max();
    let l = factor.l_dirty();
    let stable = (0..cov.nrows()).all(|i| {
        let pivot = l[(i, i)];
        pivot.is_finite() && pivot * pivot > threshold
    });
    stable.then_some(factor)
}

/// Convenience form of [`MahalanobisModel::depth`] for a single evaluation.
pub fn mahalanobis_depth(seq: &EventSequence, mean: &[f64], covariance: &[Vec<f64>]) -> Result<f64> {
    MahalanobisModel::new(mean, covariance)?.depth(seq.times())
}
