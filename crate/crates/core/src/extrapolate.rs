//! Limits of sampled sequences v(h) as h -> 0 by polynomial (Richardson) extrapolation.

use serde::Serialize;

/// Value at h = 0 of the interpolating polynomial through (h_i, v_i) (Neville).
pub fn neville_at_zero(h: &[f64], v: &[f64]) -> f64 {
    let n = h.len();
    let mut p = v.to_vec();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (h[i + k] * p[i] - h[i] * p[i + 1]) / (h[i + k] - h[i]);
        }
    }
    p[0]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Limit {
    pub value: f64,
    /// Difference between the extrapolants of the last two windows.
    pub gap: f64,
    pub allowed: f64,
    pub converged: bool,
}

/// Richardson limit from the last `window` samples, Cauchy-checked against the window one step back.
/// Accepts when gap <= tol (1 + |limit|) + 1e3 eps max|v|.
pub fn limit(h: &[f64], v: &[f64], window: usize, tol: f64) -> Limit {
    let n = h.len();
    assert!(n == v.len() && window >= 2 && n > window, "need more samples than the window");
    let a = neville_at_zero(&h[n - window..], &v[n - window..]);
    let b = neville_at_zero(&h[n - window - 1..n - 1], &v[n - window - 1..n - 1]);
    let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let gap = (a - b).abs();
    let allowed = tol * (1.0 + a.abs()) + 1e3 * f64::EPSILON * vmax;
    Limit { value: a, gap, allowed, converged: gap.is_finite() && gap <= allowed && a.is_finite() }
}

/// Limit of the first divided differences (v_{k+1} - v_k)/(h_{k+1} - h_k), placed at midpoints.
pub fn derivative_limit(h: &[f64], v: &[f64], window: usize, tol: f64) -> Limit {
    let n = h.len();
    let mut mids = Vec::with_capacity(n - 1);
    let mut dd = Vec::with_capacity(n - 1);
    let mut floor = 0.0f64;
    for k in 0..n - 1 {
        let dh = h[k + 1] - h[k];
        mids.push(0.5 * (h[k] + h[k + 1]));
        dd.push((v[k + 1] - v[k]) / dh);
        floor = floor.max(2.0 * f64::EPSILON * v[k].abs().max(v[k + 1].abs()) / dh.abs());
    }
    let mut l = limit(&mids, &dd, window, tol);
    // Roundoff in v is amplified by 1/dh; widen the allowance accordingly.
    l.allowed += 1e3 * floor;
    l.converged = l.gap.is_finite() && l.gap <= l.allowed && l.value.is_finite();
    l
}
