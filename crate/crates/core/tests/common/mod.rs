//! Straight-line reference formulas, kept independent of the library's
//! log-space evaluation.
#![allow(dead_code)]

pub fn d1(last: f64, start: f64, mu: f64, var: f64) -> f64 {
    let dev = last - start - mu;
    1.0 / (1.0 + dev * dev / var)
}

pub fn conditional(start: f64, times: &[f64], u: &[f64]) -> f64 {
    let total = times[times.len() - 1] - start;
    let mut prev = start;
    let mut prod = 1.0;
    for (t, ui) in times.iter().zip(u) {
        prod *= ((t - prev) / (total * ui)).powf(*ui);
        prev = *t;
    }
    prod
}

pub fn hpp_conditional(start: f64, times: &[f64]) -> f64 {
    let k = times.len() as f64;
    let total = times[times.len() - 1] - start;
    let mut prev = start;
    let mut prod = 1.0;
    for t in times {
        prod *= ((t - prev) / total).powf(1.0 / k);
        prev = *t;
    }
    k * prod
}

#[allow(clippy::too_many_arguments)]
pub fn product(
    start: f64,
    times: &[f64],
    mu: f64,
    var: f64,
    u: &[f64],
    eta: f64,
    big_m: f64,
) -> f64 {
    let last = times[times.len() - 1];
    let omega = d1(last, start, mu, var);
    omega.powf((last - eta).abs() / (big_m - start)) * conditional(start, times, u)
}

/// Mean and standard error of the mean.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
