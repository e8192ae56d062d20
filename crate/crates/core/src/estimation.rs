//! Sample estimates of the depth parameters and of the baseline moments.

use serde::{Deserialize, Serialize};

use crate::depth::{DepthParams, EventSequence, MahalanobisModel};
use crate::error::{DepthError, Result};

/// A homogeneous collection of realizations sharing `k` and the start time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    start: f64,
    k: usize,
    realizations: Vec<EventSequence>,
}

impl SampleSet {
    pub fn new(realizations: Vec<EventSequence>) -> Result<Self> {
        let first = realizations.first().ok_or(DepthError::SampleSize {
            required: 1,
            found: 0,
        })?;
        let (start, k) = (first.start(), first.k());
        for r in &realizations {
            if r.k() != k {
                return Err(DepthError::LengthMismatch {
                    expected: k,
                    found: r.k(),
                });
            }
            if r.start() != start {
                return Err(DepthError::StartMismatch {
                    expected: start,
                    found: r.start(),
                });
            }
        }
        Ok(Self {
            start,
            k,
            realizations,
        })
    }

    /// Builds a sample from raw rows of event times.
    pub fn from_rows(start: f64, rows: Vec<Vec<f64>>) -> Result<Self> {
        let realizations = rows
            .into_iter()
            .map(|times| EventSequence::new(start, times))
            .collect::<Result<Vec<_>>>()?;
        Self::new(realizations)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.realizations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.realizations.is_empty()
    }

    pub fn realizations(&self) -> &[EventSequence] {
        &self.realizations
    }

    pub fn iter(&self) -> std::slice::Iter<'_, EventSequence> {
        self.realizations.iter()
    }

    /// The sample under `t -> a t + b`, start time included.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        Self::new(
            self.realizations
                .iter()
                .map(|r| r.affine(scale, shift))
                .collect::<Result<_>>()?,
        )
    }
}

/// Neumaier-compensated running sum.
#[derive(Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

fn mean(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    let mut acc = CompensatedSum::default();
    values.for_each(|v| acc.add(v));
    acc.value() / n as f64
}

fn require_size(sample: &SampleSet, required: usize) -> Result<()> {
    if sample.len() < required {
        return Err(DepthError::SampleSize {
            required,
            found: sample.len(),
        });
    }
    Ok(())
}

/// Fits the duration mean and unbiased variance, the mean normalized gap
/// proportions and the derived center. `eta` and `M` default to the mean
/// last event time.
pub fn fit_params(sample: &SampleSet) -> Result<DepthParams> {
    require_size(sample, 2)?;
    let n = sample.len();
    if let Some(index) = sample.iter().position(|r| !(r.duration() > 0.0)) {
        return Err(DepthError::ZeroDuration { index });
    }

    let mu_last = mean(sample.iter().map(EventSequence::duration), n);
    let var_last = {
        let mut acc = CompensatedSum::default();
        for r in sample.iter() {
            let d = r.duration() - mu_last;
            acc.add(d * d);
        }
        acc.value() / (n - 1) as f64
    };
    if !(var_last > 0.0) {
        return Err(DepthError::DegenerateVariance(var_last));
    }

    let k = sample.k();
    let mut sums = vec![CompensatedSum::default(); k];
    for r in sample.iter() {
        let total = r.duration();
        for (acc, gap) in sums.iter_mut().zip(r.gaps()) {
            acc.add(gap / total);
        }
    }
    let mut u_bar: Vec<f64> = sums.iter().map(|s| s.value() / n as f64).collect();
    // each realization's proportions sum to one; remove the rounding residue
    let total: f64 = u_bar.iter().sum();
    u_bar.iter_mut().for_each(|u| *u /= total);

    DepthParams::from_moments(sample.start(), mu_last, var_last, u_bar)
}

/// Componentwise mean and unbiased covariance of the event-time vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MahalanobisFit {
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
}

impl MahalanobisFit {
    pub fn model(&self) -> Result<MahalanobisModel> {
        MahalanobisModel::new(&self.mean, &self.covariance)
    }
}

pub fn fit_mahalanobis(sample: &SampleSet) -> Result<MahalanobisFit> {
    require_size(sample, 2)?;
    let n = sample.len();
    let k = sample.k();
    let means: Vec<f64> = (0..k)
        .map(|j| mean(sample.iter().map(|r| r.times()[j]), n))
        .collect();
    let mut covariance = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..=i {
            let mut acc = CompensatedSum::default();
            for r in sample.iter() {
                let t = r.times();
                acc.add((t[i] - means[i]) * (t[j] - means[j]));
            }
            let c = acc.value() / (n - 1) as f64;
            covariance[i][j] = c;
            covariance[j][i] = c;
        }
    }
    Ok(MahalanobisFit {
        mean: means,
        covariance,
    })
}
