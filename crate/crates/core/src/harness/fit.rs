// Copyright 2026 The cavityduo Authors
// SPDX-License-Identifier: Apache-2.0

//! Decay-rate extraction from sampled amplitude traces.

use crate::C64;

/// Straight-line fit of `ln|amp|` against time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit {
    /// Minus the fitted slope.
    pub rate: f64,
    /// Largest absolute deviation of `ln|amp|` from the fitted line.
    pub max_residual: f64,
}

/// Least-squares fit of `ln|amp|` over the final quarter of the sampled
/// window. Rate and residual are NaN with fewer than two usable points.
pub fn tail_decay_fit(times: &[f64], amps: &[C64]) -> TailFit {
    assert_eq!(times.len(), amps.len());
    let none = TailFit { rate: f64::NAN, max_residual: f64::NAN };
    let (t0, t1) = match (times.first(), times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return none,
    };
    let start = t0 + 0.75 * (t1 - t0);
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(amps)
        .filter(|(t, a)| **t >= start - 1e-12 && a.norm() > 0.0)
        .map(|(&t, a)| (t, a.norm().ln()))
        .collect();
    if pts.len() < 2 {
        return none;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    let slope = sxy / sxx;
    let max_residual = pts.iter().fold(0.0, |m: f64, p| m.max((p.1 - my - slope * (p.0 - mt)).abs()));
    TailFit { rate: -slope, max_residual }
}

/// Minus the least-squares slope of `ln|amp|` over the final quarter of the
/// sampled window.
pub fn tail_decay_rate(times: &[f64], amps: &[C64]) -> f64 {
    tail_decay_fit(times, amps).rate
}

/// Both normal-mode decay rates `(slow, fast)` of a two-amplitude trace.
///
/// Fits the one-sample transfer matrix `P` with `v_{k+1} ≈ P v_k` by least
/// squares over the first quarter of the window (where the fast component is
/// still visible); the rates are `−ln|λ(P)|/Δt`. Samples must be uniform.
pub fn mode_decay_rates(times: &[f64], va: &[C64], vb: &[C64]) -> (f64, f64) {
    assert!(times.len() == va.len() && times.len() == vb.len());
    if times.len() < 3 {
        return (f64::NAN, f64::NAN);
    }
    let dt = times[1] - times[0];
    let t_end = times[0] + 0.25 * (times[times.len() - 1] - times[0]);
    let mut last = times.iter().take_while(|&&t| t <= t_end + 1e-12).count().max(3);
    last = last.min(times.len());

    // Normal equations: P = (Σ y xᴴ)(Σ x xᴴ)⁻¹ with x = v_k, y = v_{k+1}.
    let zero = C64::new(0.0, 0.0);
    let mut yx = [[zero; 2]; 2];
    let mut xx = [[zero; 2]; 2];
    for k in 0..last - 1 {
        let x = [va[k], vb[k]];
        let y = [va[k + 1], vb[k + 1]];
        for i in 0..2 {
            for j in 0..2 {
                yx[i][j] += y[i] * x[j].conj();
                xx[i][j] += x[i] * x[j].conj();
            }
        }
    }
    let det = xx[0][0] * xx[1][1] - xx[0][1] * xx[1][0];
    if det.norm() == 0.0 {
        return (f64::NAN, f64::NAN);
    }
    let inv = [[xx[1][1] / det, -xx[0][1] / det], [-xx[1][0] / det, xx[0][0] / det]];
    let mut p = [[zero; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            p[i][j] = yx[i][0] * inv[0][j] + yx[i][1] * inv[1][j];
        }
    }
    let half_tr = (p[0][0] + p[1][1]) * 0.5;
    let disc = (half_tr * half_tr - (p[0][0] * p[1][1] - p[0][1] * p[1][0])).sqrt();
    let r1 = -(half_tr + disc).norm().ln() / dt;
    let r2 = -(half_tr - disc).norm().ln() / dt;
    (r1.min(r2), r1.max(r2))
}
