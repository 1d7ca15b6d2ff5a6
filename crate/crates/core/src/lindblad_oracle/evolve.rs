// Copyright 2026 The cavityduo Authors
// SPDX-License-Identifier: Apache-2.0

//! Fixed-step classical RK4 on the linear system `dρ/dt = Lρ`.

use super::{diagnostics, DensityMatrix, Diagnostics, LiouvillianSpec, OracleError};
use crate::C64;

/// Minimum eigenvalue below which a sample is flagged.
pub const POSITIVITY_WARN: f64 = -1e-7;
/// Minimum eigenvalue below which evolution aborts.
pub const POSITIVITY_FAIL: f64 = -1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub t_max: f64,
    pub dt: f64,
    /// Record diagnostics every this many steps.
    pub sample_every: usize,
    /// Skip the step-size stability check.
    pub allow_large_step: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { t_max: 10.0, dt: 1e-3, sample_every: 100, allow_large_step: false }
    }
}

impl EvolveOptions {
    pub fn steps(&self) -> usize {
        (self.t_max / self.dt + 1e-9).floor() as usize
    }
}

/// Largest step accepted without `allow_large_step`.
pub fn stability_bound(spec: &LiouvillianSpec, dim_a: usize, dim_b: usize) -> f64 {
    let rate = spec.max_rate();
    if rate == 0.0 {
        f64::INFINITY
    } else {
        0.1 / (rate * dim_a.max(dim_b) as f64)
    }
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub samples: Vec<Diagnostics>,
    pub final_state: DensityMatrix,
    /// Non-fatal positivity events.
    pub warnings: Vec<String>,
}

/// Integrates from `rho0` and calls `observer` with every sampled state
/// (including `t = 0`).
pub fn evolve(
    rho0: &DensityMatrix,
    spec: &LiouvillianSpec,
    opts: &EvolveOptions,
    mut observer: impl FnMut(&DensityMatrix, &Diagnostics),
) -> Result<Evolution, OracleError> {
    if !(opts.dt.is_finite() && opts.dt > 0.0) || !(opts.t_max.is_finite() && opts.t_max >= 0.0) {
        return Err(OracleError::InvalidOptions(format!("t_max = {}, dt = {}", opts.t_max, opts.dt)));
    }
    if opts.sample_every == 0 {
        return Err(OracleError::InvalidOptions("sample_every must be >= 1".into()));
    }
    let (da, db) = (rho0.dim_a(), rho0.dim_b());
    let bound = stability_bound(spec, da, db);
    if opts.dt > bound && !opts.allow_large_step {
        return Err(OracleError::StepTooLarge { dt: opts.dt, bound });
    }

    let gen = spec.compile(da, db);
    let hermitian = gen.preserves_hermiticity() && rho0.herm_residual() == 0.0;
    let apply = |x: &[C64], out: &mut [C64]| {
        if hermitian {
            gen.apply_hermitian_into(x, out)
        } else {
            gen.apply_into(x, out)
        }
    };
    let mut rho = rho0.clone();
    let n = rho.data().len();
    let mut k = vec![C64::new(0.0, 0.0); n];
    let mut acc = vec![C64::new(0.0, 0.0); n];
    let mut stage = vec![C64::new(0.0, 0.0); n];
    let dt = opts.dt;
    let mut samples = Vec::new();
    let mut warnings = Vec::new();

    let mut record = |rho: &DensityMatrix, t: f64, samples: &mut Vec<Diagnostics>| {
        let diag = diagnostics(t, rho);
        if diag.min_eig < POSITIVITY_FAIL {
            return Err(OracleError::PositivityViolation { t, min_eig: diag.min_eig });
        }
        if diag.min_eig < POSITIVITY_WARN {
            warnings.push(format!("t = {t}: minimum eigenvalue {:.3e}", diag.min_eig));
        }
        observer(rho, &diag);
        samples.push(diag);
        Ok(())
    };

    record(&rho, 0.0, &mut samples)?;
    for step in 1..=opts.steps() {
        let y = rho.data_mut();
        // k1
        apply(y, &mut k);
        for ((a, s), (&yi, &ki)) in acc.iter_mut().zip(stage.iter_mut()).zip(y.iter().zip(&k)) {
            *a = ki;
            *s = yi + ki * (0.5 * dt);
        }
        // k2
        apply(&stage, &mut k);
        for ((a, s), (&yi, &ki)) in acc.iter_mut().zip(stage.iter_mut()).zip(y.iter().zip(&k)) {
            *a += ki * 2.0;
            *s = yi + ki * (0.5 * dt);
        }
        // k3
        apply(&stage, &mut k);
        for ((a, s), (&yi, &ki)) in acc.iter_mut().zip(stage.iter_mut()).zip(y.iter().zip(&k)) {
            *a += ki * 2.0;
            *s = yi + ki * dt;
        }
        // k4
        apply(&stage, &mut k);
        for ((yi, &a), &ki) in y.iter_mut().zip(&acc).zip(&k) {
            *yi += (a + ki) * (dt / 6.0);
        }
        if step % opts.sample_every == 0 {
            record(&rho, step as f64 * dt, &mut samples)?;
        }
    }
    Ok(Evolution { samples, final_state: rho, warnings })
}
