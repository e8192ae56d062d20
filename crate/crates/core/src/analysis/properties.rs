//! Randomized checks of the product depth's structural properties.
//!
//! Each check draws its own ChaCha stream from the seed, so a report is a
//! pure function of `(params, trials, seed, reference)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::depth::{
    conditional_depth, hpp_conditional_depth, log_conditional_depth, product_depth, DepthParams,
    EventSequence,
};
use crate::error::Result;
use crate::estimation::{fit_params, SampleSet};

pub const BOUNDARY_VANISHING: &str = "boundary_vanishing";
pub const VANISHING_AT_INFINITY: &str = "vanishing_at_infinity";
pub const MAXIMALITY: &str = "maximality";
pub const SCALE_SHIFT_INVARIANCE: &str = "scale_shift_invariance";
pub const RAY_MONOTONICITY: &str = "ray_monotonicity";
pub const RAY_MINIMUM_AT_ENDPOINT: &str = "ray_minimum_at_endpoint";
pub const UNIFORM_CONDITIONAL_AGREEMENT: &str = "uniform_conditional_agreement";
pub const CONDITIONAL_BOUND: &str = "conditional_bound";
pub const WEIGHTED_FRACTION_INEQUALITY: &str = "weighted_fraction_inequality";

pub const INFINITY_TOLERANCE: f64 = 1e-6;
/// Distance of the far point beyond the mean duration, in standard deviations.
pub const INFINITY_SIGMAS: f64 = 100.0;
pub const MAXIMALITY_TOLERANCE: f64 = 1e-12;
pub const INVARIANCE_TOLERANCE: f64 = 1e-10;
pub const MONOTONICITY_SLACK: f64 = 1e-9;
pub const RAY_GRID_POINTS: usize = 101;
pub const AGREEMENT_TOLERANCE: f64 = 1e-12;
pub const BOUND_TOLERANCE: f64 = 1e-12;
pub const INEQUALITY_SLACK: f64 = 1e-9;

/// Outcome of one property over its randomized trials. `worst_margin` is the
/// largest observed value of the quantity compared against `tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    pub trials: usize,
    pub violations: usize,
    pub worst_margin: f64,
    pub tolerance: f64,
}

impl PropertyCheck {
    fn new(name: &str, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            trials: 0,
            violations: 0,
            worst_margin: f64::NEG_INFINITY,
            tolerance,
        }
    }

    /// Records an observation that must not exceed the tolerance.
    fn observe(&mut self, margin: f64) {
        self.trials += 1;
        // NaN counts as a violation
        if !(margin <= self.tolerance) {
            self.violations += 1;
        }
        if margin > self.worst_margin || margin.is_nan() {
            self.worst_margin = margin;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub seed: u64,
    pub trials: usize,
    pub checks: Vec<PropertyCheck>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(PropertyCheck::passed)
    }

    pub fn check(&self, name: &str) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Uniform draw from `(0, 1]`.
fn open_unit(rng: &mut impl Rng) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Point uniformly distributed on the probability simplex.
fn random_proportions(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| -open_unit(rng).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

fn sequence_from_proportions(start: f64, total: f64, proportions: &[f64]) -> EventSequence {
    let mut t = start;
    let times: Vec<f64> = proportions
        .iter()
        .map(|p| {
            t += total * p;
            t
        })
        .collect();
    EventSequence::new(start, times).expect("cumulative sums are ordered")
}

/// Interior realization with duration spread around the fitted mean.
fn random_sequence(rng: &mut impl Rng, params: &DepthParams) -> EventSequence {
    let proportions = random_proportions(rng, params.k);
    let total = params.mu_last * (0.05 + 2.95 * rng.random::<f64>());
    sequence_from_proportions(params.start, total, &proportions)
}

fn relative_difference(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Realizations with one zero gap must have depth exactly zero.
pub fn check_boundary_vanishing(params: &DepthParams, trials: usize, seed: u64) -> Result<PropertyCheck> {
    let mut rng = stream(seed, 1);
    let mut check = PropertyCheck::new(BOUNDARY_VANISHING, 0.0);
    for _ in 0..trials {
        let mut proportions = random_proportions(&mut rng, params.k);
        let zeroed = rng.random_range(0..params.k);
        proportions[zeroed] = 0.0;
        let total = params.mu_last * (0.05 + 2.95 * rng.random::<f64>());
        let seq = sequence_from_proportions(params.start, total, &proportions);
        check.observe(product_depth(&seq, params)?.product);
    }
    Ok(check)
}

pub fn check_vanishing_at_infinity(params: &DepthParams, trials: usize, seed: u64) -> Result<PropertyCheck> {
    let mut rng = stream(seed, 2);
    let mut check = PropertyCheck::new(VANISHING_AT_INFINITY, INFINITY_TOLERANCE);
    let total = params.mu_last + INFINITY_SIGMAS * params.var_last.sqrt();
    for _ in 0..trials {
        let proportions = random_proportions(&mut rng, params.k);
        let seq = sequence_from_proportions(params.start, total, &proportions);
        check.observe(product_depth(&seq, params)?.product);
    }
    Ok(check)
}

/// The center has depth one and no sampled realization is deeper.
pub fn check_maximality(params: &DepthParams, trials: usize, seed: u64) -> Result<PropertyCheck> {
    let mut rng = stream(seed, 3);
    let mut check = PropertyCheck::new(MAXIMALITY, MAXIMALITY_TOLERANCE);
    let at_center = product_depth(&params.center_sequence(), params)?.product;
    check.observe((at_center - 1.0).abs());
    for _ in 0..trials {
        let seq = random_sequence(&mut rng, params);
        check.observe(product_depth(&seq, params)?.product - at_center);
    }
    Ok(check)
}

/// Relative change in depth when both the population and the point are
/// mapped by `t -> a t + b`. With a reference sample the transformed
/// parameters are refitted from the transformed sample; otherwise they are
/// transformed analytically.
pub fn scale_shift_deviation(
    seq: &EventSequence,
    params: &DepthParams,
    reference: Option<&SampleSet>,
    scale: f64,
    shift: f64,
) -> Result<f64> {
    let (base, moved) = match reference {
        Some(sample) => (fit_params(sample)?, fit_params(&sample.affine(scale, shift)?)?),
        None => (params.clone(), params.affine(scale, shift)?),
    };
    let before = product_depth(seq, &base)?.product;
    let after = product_depth(&seq.affine(scale, shift)?, &moved)?.product;
    Ok(relative_difference(before, after))
}

pub fn check_scale_shift_invariance(
    params: &DepthParams,
    reference: Option<&SampleSet>,
    trials: usize,
    seed: u64,
) -> Result<PropertyCheck> {
    let mut rng = stream(seed, 4);
    let mut check = PropertyCheck::new(SCALE_SHIFT_INVARIANCE, INVARIANCE_TOLERANCE);
    let base = match reference {
        Some(sample) => fit_params(sample)?,
        None => params.clone(),
    };
    for _ in 0..trials {
        let seq = random_sequence(&mut rng, &base);
        let scale = rng.random_range(0.1..=10.0);
        let shift = rng.random_range(-10.0..=10.0);
        check.observe(scale_shift_deviation(&seq, &base, reference, scale, shift)?);
    }
    Ok(check)
}

/// Depths along `center + alpha (seq - center)` on an even grid of `alpha` in `[0, 1]`.
pub fn ray_profile(seq: &EventSequence, params: &DepthParams, points: usize) -> Result<Vec<f64>> {
    (0..points)
        .map(|j| {
            let alpha = j as f64 / (points - 1) as f64;
            let mut floor = params.start;
            let times = params
                .center
                .iter()
                .zip(seq.times())
                .map(|(&c, &s)| {
                    // rounding can reorder nearly equal coordinates by an ulp
                    floor = floor.max(c + alpha * (s - c));
                    floor
                })
                .collect();
            let point = EventSequence::new(params.start, times)?;
            Ok(product_depth(&point, params)?.product)
        })
        .collect()
}

/// Monotone decrease along rays from the center, checked over every pair of
/// grid points, and the endpoint being the ray minimum.
pub fn check_ray_monotonicity(
    params: &DepthParams,
    rays: usize,
    seed: u64,
) -> Result<(PropertyCheck, PropertyCheck)> {
    let mut rng = stream(seed, 5);
    let mut monotone = PropertyCheck::new(RAY_MONOTONICITY, MONOTONICITY_SLACK);
    let mut endpoint = PropertyCheck::new(RAY_MINIMUM_AT_ENDPOINT, MONOTONICITY_SLACK);
    for _ in 0..rays {
        let seq = random_sequence(&mut rng, params);
        let profile = ray_profile(&seq, params, RAY_GRID_POINTS)?;
        let mut running_min = profile[0];
        let mut worst_increase = f64::NEG_INFINITY;
        for &d in &profile[1..] {
            worst_increase = worst_increase.max(d - running_min);
            running_min = running_min.min(d);
        }
        monotone.observe(worst_increase);
        let end = profile[profile.len() - 1];
        endpoint.observe(end - profile.iter().copied().fold(f64::INFINITY, f64::min));
    }
    Ok((monotone, endpoint))
}

/// Uniform-proportion conditional depth against its dedicated closed form,
/// for random interior sequences with `k` drawn from `ks`.
pub fn check_uniform_agreement(
    instances: usize,
    ks: std::ops::RangeInclusive<usize>,
    seed: u64,
) -> Result<PropertyCheck> {
    let mut rng = stream(seed, 6);
    let mut check = PropertyCheck::new(UNIFORM_CONDITIONAL_AGREEMENT, AGREEMENT_TOLERANCE);
    for _ in 0..instances {
        let k = rng.random_range(ks.clone());
        let start = rng.random_range(-10.0..10.0);
        let total = 0.01 + 100.0 * rng.random::<f64>();
        let seq = sequence_from_proportions(start, total, &random_proportions(&mut rng, k));
        let uniform = DepthParams::from_moments(start, total, 1.0, vec![1.0 / k as f64; k])?;
        let general = conditional_depth(&seq, &uniform)?;
        check.observe(relative_difference(general, hpp_conditional_depth(&seq)));
    }
    Ok(check)
}

/// The unclamped conditional depth never exceeds one, with the fitted
/// proportions on even trials and random proportions on odd ones.
pub fn check_conditional_bound(params: &DepthParams, trials: usize, seed: u64) -> Result<PropertyCheck> {
    let mut rng = stream(seed, 7);
    let mut check = PropertyCheck::new(CONDITIONAL_BOUND, BOUND_TOLERANCE);
    for trial in 0..trials {
        let seq = random_sequence(&mut rng, params);
        let u_bar = if trial % 2 == 0 {
            params.u_bar.clone()
        } else {
            random_proportions(&mut rng, params.k)
        };
        let raw = log_conditional_depth(&seq, &u_bar)?.map_or(0.0, f64::exp);
        check.observe(raw - 1.0);
    }
    Ok(check)
}

/// Left side minus right side of
/// `sum_i (a_i - b_i) / ((1 - alpha) + alpha a_i / b_i)
///   <= (A - B) / ((1 - alpha) + alpha A / B)` with `A = sum a`, `B = sum b`.
pub fn weighted_fraction_gap(a: &[f64], b: &[f64], alpha: f64) -> f64 {
    let lhs: f64 = a
        .iter()
        .zip(b)
        .map(|(&ai, &bi)| (ai - bi) / ((1.0 - alpha) + alpha * ai / bi))
        .sum();
    let sum_a: f64 = a.iter().sum();
    let sum_b: f64 = b.iter().sum();
    let rhs = (sum_a - sum_b) / ((1.0 - alpha) + alpha * sum_a / sum_b);
    lhs - rhs
}

/// Random instances with `k` up to `max_k`, entries in `(0, 10]` and
/// `alpha` in `[0, 1]`.
pub fn check_weighted_fraction_inequality(
    instances: usize,
    max_k: usize,
    seed: u64,
) -> PropertyCheck {
    let mut rng = stream(seed, 8);
    let mut check = PropertyCheck::new(WEIGHTED_FRACTION_INEQUALITY, INEQUALITY_SLACK);
    let mut a = Vec::with_capacity(max_k);
    let mut b = Vec::with_capacity(max_k);
    for _ in 0..instances {
        let k = rng.random_range(1..=max_k.max(1));
        a.clear();
        b.clear();
        a.extend((0..k).map(|_| 10.0 * open_unit(&mut rng)));
        b.extend((0..k).map(|_| 10.0 * open_unit(&mut rng)));
        let alpha = rng.random_range(0.0..=1.0);
        check.observe(weighted_fraction_gap(&a, &b, alpha));
    }
    check
}

/// Runs every check with `trials` draws each (rays: `trials / 10`). When a
/// reference sample is given, invariance refits on the transformed sample.
pub fn verify_properties(
    params: &DepthParams,
    trials: usize,
    seed: u64,
    reference: Option<&SampleSet>,
) -> Result<PropertyReport> {
    params.validate()?;
    let trials = trials.max(1);
    let rays = (trials / 10).max(1);
    let (monotone, endpoint) = check_ray_monotonicity(params, rays, seed)?;
    let checks = vec![
        check_boundary_vanishing(params, trials, seed)?,
        check_vanishing_at_infinity(params, trials, seed)?,
        check_maximality(params, trials, seed)?,
        check_scale_shift_invariance(params, reference, trials, seed)?,
        monotone,
        endpoint,
        check_uniform_agreement(trials, params.k..=params.k, seed)?,
        check_conditional_bound(params, trials, seed)?,
        check_weighted_fraction_inequality(trials, params.k.max(2), seed),
    ];
    Ok(PropertyReport {
        seed,
        trials,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> DepthParams {
        DepthParams::from_moments(0.0, 1.0, 0.5, vec![0.3, 0.7]).unwrap()
    }

    #[test]
    fn identity_transform_has_zero_deviation() {
        let p = params();
        let seq = EventSequence::new(0.0, vec![0.2, 0.9]).unwrap();
        assert_eq!(scale_shift_deviation(&seq, &p, None, 1.0, 0.0).unwrap(), 0.0);
        let sample =
            SampleSet::from_rows(0.0, vec![vec![0.2, 1.0], vec![0.5, 0.7], vec![0.1, 1.4]]).unwrap();
        assert_eq!(
            scale_shift_deviation(&seq, &p, Some(&sample), 1.0, 0.0).unwrap(),
            0.0
        );
    }

    #[test]
    fn weighted_fraction_equal_vectors_are_tight() {
        let a = [1.0, 2.5, 3.0];
        assert_eq!(weighted_fraction_gap(&a, &a, 0.3), 0.0);
        assert_eq!(weighted_fraction_gap(&a, &a, 1.0), 0.0);
    }

    #[test]
    fn weighted_fraction_two_term_closed_form() {
        // W = -alpha (a1 b2 - a2 b1)^2 / (A1 A2 C)
        let (a1, a2, b1, b2, alpha) = (3.0, 0.5, 1.0, 2.0, 0.4);
        let a_1 = (1.0 - alpha) * b1 + alpha * a1;
        let a_2 = (1.0 - alpha) * b2 + alpha * a2;
        let c = (1.0 - alpha) * (b1 + b2) + alpha * (a1 + a2);
        let w = -alpha * (a1 * b2 - a2 * b1) * (a1 * b2 - a2 * b1) / (a_1 * a_2 * c);
        let gap = weighted_fraction_gap(&[a1, a2], &[b1, b2], alpha);
        assert!((gap - w).abs() < 1e-12, "{gap} vs {w}");
    }

    #[test]
    fn observe_counts_nan_as_violation() {
        let mut c = PropertyCheck::new("x", 0.0);
        c.observe(f64::NAN);
        assert_eq!(c.violations, 1);
    }

    #[test]
    fn report_covers_every_property() {
        let report = verify_properties(&params(), 200, 11, None).unwrap();
        let names: Vec<&str> = report.checks.iter().map(|c| c.name.as_str()).collect();
        for expected in [
            BOUNDARY_VANISHING,
            VANISHING_AT_INFINITY,
            MAXIMALITY,
            SCALE_SHIFT_INVARIANCE,
            RAY_MONOTONICITY,
            RAY_MINIMUM_AT_ENDPOINT,
            UNIFORM_CONDITIONAL_AGREEMENT,
            CONDITIONAL_BOUND,
            WEIGHTED_FRACTION_INEQUALITY,
        ] {
            assert!(names.contains(&expected), "missing {expected}");
        }
        assert!(report.passed(), "{report:#?}");
    }

    #[test]
    fn report_is_reproducible() {
        let a = verify_properties(&params(), 300, 5, None).unwrap();
        let b = verify_properties(&params(), 300, 5, None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ray_profile_starts_at_one() {
        let p = params();
        let seq = EventSequence::new(0.0, vec![0.9, 2.0]).unwrap();
        let profile = ray_profile(&seq, &p, RAY_GRID_POINTS).unwrap();
        assert!((profile[0] - 1.0).abs() < 1e-15);
        assert_eq!(profile.len(), RAY_GRID_POINTS);
    }
}
