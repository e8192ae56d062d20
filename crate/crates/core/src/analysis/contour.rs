use serde::{Deserialize, Serialize};

use super::{evaluate, Method};
use crate::depth::{DepthParams, EventSequence, MahalanobisModel};
use crate::error::{DepthError, Result};

/// Rectangle `[xmin, xmax] x [ymin, ymax]` sampled at `resolution` nodes per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub resolution: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.resolution < 2 {
            return Err(DepthError::InvalidConfig(
                "grid resolution must be at least 2".into(),
            ));
        }
        let finite = [self.xmin, self.xmax, self.ymin, self.ymax]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.xmax > self.xmin) || !(self.ymax > self.ymin) {
            return Err(DepthError::InvalidConfig(format!(
                "grid ranges must be finite and increasing: {self:?}"
            )));
        }
        Ok(())
    }

    fn axis(min: f64, max: f64, n: usize) -> Vec<f64> {
        let step = (max - min) / (n - 1) as f64;
        let mut axis: Vec<f64> = (0..n).map(|i| min + step * i as f64).collect();
        axis[n - 1] = max;
        axis
    }
}

/// Depth values over a `(s_1, s_2)` grid. `values[i][j]` belongs to
/// `(axis1[i], axis2[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourGrid {
    pub method: Method,
    pub axis1: Vec<f64>,
    pub axis2: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl ContourGrid {
    /// Largest grid value and its node.
    pub fn max(&self) -> (f64, usize, usize) {
        let mut best = (f64::NEG_INFINITY, 0, 0);
        for (i, row) in self.values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > best.0 {
                    best = (v, i, j);
                }
            }
        }
        best
    }
}

/// Evaluates `method` on a dense grid for `k = 2`. Nodes outside the ordered
/// region `s_0 <= s_1 <= s_2` are zero except under the Mahalanobis baseline,
/// which is evaluated everywhere.
pub fn contour_grid(
    params: &DepthParams,
    method: Method,
    grid: &GridSpec,
    baseline: Option<&MahalanobisModel>,
) -> Result<ContourGrid> {
    grid.validate()?;
    let k = match (method, baseline) {
        (Method::Mahalanobis, Some(b)) => b.k(),
        (Method::Mahalanobis, None) => return Err(DepthError::MissingBaseline),
        _ => params.k,
    };
    if k != 2 {
        return Err(DepthError::UnsupportedDimension {
            method: method.as_str(),
            k,
        });
    }
    let axis1 = GridSpec::axis(grid.xmin, grid.xmax, grid.resolution);
    let axis2 = GridSpec::axis(grid.ymin, grid.ymax, grid.resolution);
    let start = params.start;
    let values = axis1
        .iter()
        .map(|&s1| {
            axis2
                .iter()
                .map(|&s2| match method {
                    Method::Mahalanobis => baseline.unwrap().depth(&[s1, s2]),
                    _ if !(start <= s1 && s1 <= s2) => Ok(0.0),
                    _ => {
                        let seq = EventSequence::new(start, vec![s1, s2])?;
                        evaluate(&seq, params, method, baseline)
                    }
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ContourGrid {
        method,
        axis1,
        axis2,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> DepthParams {
        DepthParams::from_moments(0.0, 1.0, 0.5, vec![0.5, 0.5]).unwrap()
    }

    fn spec() -> GridSpec {
        GridSpec {
            xmin: 0.0,
            xmax: 2.0,
            ymin: 0.0,
            ymax: 2.0,
            resolution: 41,
        }
    }

    #[test]
    fn masked_outside_ordered_region() {
        let g = contour_grid(&params(), Method::Product, &spec(), None).unwrap();
        for (i, &s1) in g.axis1.iter().enumerate() {
            for (j, &s2) in g.axis2.iter().enumerate() {
                if s1 >= s2 {
                    assert_eq!(g.values[i][j], 0.0, "({s1}, {s2})");
                }
            }
        }
    }

    #[test]
    fn maximum_at_center() {
        // the center (0.5, 1.0) sits on the grid
        let g = contour_grid(&params(), Method::Product, &spec(), None).unwrap();
        let (v, i, j) = g.max();
        assert!((v - 1.0).abs() < 1e-15);
        assert_eq!((g.axis1[i], g.axis2[j]), (0.5, 1.0));
    }

    #[test]
    fn mahalanobis_is_not_masked() {
        let model = MahalanobisModel::new(&[0.5, 1.0], &[vec![0.25, 0.25], vec![0.25, 0.5]]).unwrap();
        let g = contour_grid(&params(), Method::Mahalanobis, &spec(), Some(&model)).unwrap();
        assert!(g.values[40][0] > 0.0);
    }

    #[test]
    fn rejects_other_dimensions() {
        let p = DepthParams::from_moments(0.0, 1.0, 0.5, vec![0.2, 0.3, 0.5]).unwrap();
        assert!(matches!(
            contour_grid(&p, Method::Product, &spec(), None),
            Err(DepthError::UnsupportedDimension { k: 3, .. })
        ));
        let bad = GridSpec { resolution: 1, ..spec() };
        assert!(contour_grid(&params(), Method::Product, &bad, None).is_err());
    }
}
