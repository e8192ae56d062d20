use serde::{Deserialize, Serialize};

use super::{rank, Method};
use crate::depth::{DepthParams, EventSequence};
use crate::error::{DepthError, Result};
use crate::estimation::SampleSet;

/// Mean ranks of the near-boundary realizations under the product depth
/// and under the Mahalanobis baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySummary {
    pub threshold: f64,
    pub n: usize,
    pub subset: Vec<usize>,
    /// `None` when the subset is empty.
    pub mean_product_rank: Option<f64>,
    pub mean_mahalanobis_rank: Option<f64>,
}

impl BoundarySummary {
    pub fn is_empty(&self) -> bool {
        self.subset.is_empty()
    }
}

/// Smallest gap as a fraction of the total duration; zero for a zero-length
/// realization.
pub fn min_normalized_gap(seq: &EventSequence) -> f64 {
    let total = seq.duration();
    if !(total > 0.0) {
        return 0.0;
    }
    seq.gaps().map(|g| g / total).fold(f64::INFINITY, f64::min)
}

pub fn near_boundary_comparison(
    sample: &SampleSet,
    params: &DepthParams,
    threshold: f64,
) -> Result<BoundarySummary> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(DepthError::InvalidConfig(format!(
            "threshold must lie in (0, 1], got {threshold}"
        )));
    }
    let product = rank(sample, params, Method::Product)?.ranks_by_index();
    let mahalanobis = rank(sample, params, Method::Mahalanobis)?.ranks_by_index();
    let subset: Vec<usize> = sample
        .iter()
        .enumerate()
        .filter(|(_, seq)| min_normalized_gap(seq) < threshold)
        .map(|(i, _)| i)
        .collect();
    let mean_rank = |ranks: &[usize]| {
        (!subset.is_empty())
            .then(|| subset.iter().map(|&i| ranks[i] as f64).sum::<f64>() / subset.len() as f64)
    };
    Ok(BoundarySummary {
        threshold,
        n: sample.len(),
        mean_product_rank: mean_rank(&product),
        mean_mahalanobis_rank: mean_rank(&mahalanobis),
        subset,
    })
}
