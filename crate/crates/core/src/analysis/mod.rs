//! Ranking, contour grids, near-boundary comparisons and the randomized
//! property checks.

mod boundary;
mod contour;
pub mod properties;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::depth::{
    conditional_depth, hpp_conditional_depth, marginal_factor, product_depth, DepthParams,
    EventSequence, MahalanobisModel,
};
use crate::error::{DepthError, Result};
use crate::estimation::{fit_mahalanobis, SampleSet};

pub use boundary::{near_boundary_comparison, min_normalized_gap, BoundarySummary};
pub use contour::{contour_grid, ContourGrid, GridSpec};
pub use properties::{verify_properties, PropertyCheck, PropertyReport};

/// Which depth a value or ranking was computed with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Product,
    /// The marginal factor `omega ^ exponent` alone.
    Marginal,
    Conditional,
    /// Conditional depth with uniform gap proportions.
    HppConditional,
    Mahalanobis,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Product,
        Method::Marginal,
        Method::Conditional,
        Method::HppConditional,
        Method::Mahalanobis,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Product => "product",
            Method::Marginal => "marginal",
            Method::Conditional => "conditional",
            Method::HppConditional => "hpp-conditional",
            Method::Mahalanobis => "mahalanobis",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown method {s:?}"))
    }
}

/// Depth of one realization under `method`.
pub fn evaluate(
    seq: &EventSequence,
    params: &DepthParams,
    method: Method,
    baseline: Option<&MahalanobisModel>,
) -> Result<f64> {
    match method {
        Method::Product => Ok(product_depth(seq, params)?.product),
        Method::Marginal => marginal_factor(seq.last(), params),
        Method::Conditional => conditional_depth(seq, params),
        Method::HppConditional => Ok(hpp_conditional_depth(seq)),
        Method::Mahalanobis => baseline
            .ok_or(DepthError::MissingBaseline)?
            .depth(seq.times()),
    }
}

/// Depths of every realization in sample order.
pub fn depth_values(
    sample: &SampleSet,
    params: &DepthParams,
    method: Method,
    baseline: Option<&MahalanobisModel>,
) -> Result<Vec<f64>> {
    sample
        .iter()
        .map(|seq| evaluate(seq, params, method, baseline))
        .collect()
}

/// Competition ranks: the largest value gets rank 1 and ties share the
/// smallest rank of their block.
pub fn competition_ranks(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut ranks = vec![0; values.len()];
    for (pos, &idx) in order.iter().enumerate() {
        ranks[idx] = if pos > 0 && values[order[pos - 1]] == values[idx] {
            ranks[order[pos - 1]]
        } else {
            pos + 1
        };
    }
    ranks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub index: usize,
    pub depth: f64,
    pub rank: usize,
}

/// Realizations ordered from deepest to shallowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub method: Method,
    pub entries: Vec<RankEntry>,
}

impl RankTable {
    pub fn from_values(method: Method, values: &[f64]) -> Self {
        let ranks = competition_ranks(values);
        let mut entries: Vec<RankEntry> = values
            .iter()
            .zip(&ranks)
            .enumerate()
            .map(|(index, (&depth, &rank))| RankEntry { index, depth, rank })
            .collect();
        entries.sort_by_key(|e| (e.rank, e.index));
        Self { method, entries }
    }

    /// Ranks indexed by realization.
    pub fn ranks_by_index(&self) -> Vec<usize> {
        let mut out = vec![0; self.entries.len()];
        for e in &self.entries {
            out[e.index] = e.rank;
        }
        out
    }

    pub fn top(&self, count: usize) -> impl Iterator<Item = &RankEntry> {
        self.entries.iter().take(count)
    }
}

/// Ranks `sample` under `method`. The Mahalanobis baseline is fitted on the
/// same sample.
pub fn rank(sample: &SampleSet, params: &DepthParams, method: Method) -> Result<RankTable> {
    let baseline = match method {
        Method::Mahalanobis => Some(fit_mahalanobis(sample)?.model()?),
        _ => None,
    };
    let values = depth_values(sample, params, method, baseline.as_ref())?;
    Ok(RankTable::from_values(method, &values))
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn ranks_depend_only_on_order(values in prop::collection::vec(0.0f64..1.0, 1..40)) {
            let transformed: Vec<f64> = values.iter().map(|v| (3.0 * v).exp() - 7.0).collect();
            prop_assert_eq!(competition_ranks(&values), competition_ranks(&transformed));
        }

        #[test]
        fn distinct_values_give_a_permutation(values in prop::collection::hash_set(0u32..100_000, 1..40)) {
            let values: Vec<f64> = values.into_iter().map(f64::from).collect();
            let mut ranks = competition_ranks(&values);
            ranks.sort_unstable();
            prop_assert_eq!(ranks, (1..=values.len()).collect::<Vec<_>>());
        }
    }
}
