// Copyright 2026 The cavityduo Authors
// SPDX-License-Identifier: Apache-2.0

//! One-parameter sweeps of the analytic solution.
//!
//! Each point evaluates the coherent pair on the sample grid
//! `t_k = k·dt·sample_every` and fits its decay rates; the cat entropy is
//! taken at the last sample. Points run on a rayon pool and are returned in
//! parameter order.

use rayon::prelude::*;

use super::fit::{mode_decay_rates, tail_decay_fit};
use super::verify::exact_rates;
use super::{load_spectrum, num, opt_num, ConfigError, HarnessError, Reservoir, ResolvedModel, RunConfig};
use crate::coefficients::{LabCoefficients, ModelParams, ReservoirSpectrum};
use crate::propagator::aux_functions;
use crate::states::{cat_components, evolve_coherent_pair, linear_entropy, weak_coupling_rates, CatState, CoherentPair};
use crate::C64;

pub const SWEEP_HEADER: [&str; 9] = [
    "value",
    "slow_rate_fit",
    "fast_rate_fit",
    "slow_rate_exact",
    "fast_rate_exact",
    "slow_rate_weak",
    "fast_rate_weak",
    "final_delta",
    "max_residual",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    /// Tail fit of `ln|v_a|`.
    pub slow_rate_fit: f64,
    /// Transfer-matrix fit over the early window.
    pub fast_rate_fit: f64,
    pub slow_rate_exact: f64,
    pub fast_rate_exact: f64,
    /// `k_aa + g²/Δk`, when the weak-coupling expansion applies.
    pub slow_rate_weak: Option<f64>,
    pub fast_rate_weak: Option<f64>,
    /// Cat linear entropy at the last sample (`φ = 0` only).
    pub final_delta: Option<f64>,
    /// Largest deviation of `ln|v_a|` from the tail fit.
    pub max_residual: f64,
    pub warnings: Vec<String>,
}

pub(crate) fn to_csv(rows: &[SweepRow]) -> String {
    let mut s = SWEEP_HEADER.join(",");
    s.push('\n');
    for r in rows {
        let cols = [
            num(r.value),
            num(r.slow_rate_fit),
            num(r.fast_rate_fit),
            num(r.slow_rate_exact),
            num(r.fast_rate_exact),
            opt_num(r.slow_rate_weak),
            opt_num(r.fast_rate_weak),
            opt_num(r.final_delta),
            num(r.max_residual),
        ];
        s.push_str(&cols.join(","));
        s.push('\n');
    }
    s
}

enum Base {
    Direct(LabCoefficients),
    Spectrum(ReservoirSpectrum),
}

fn set_param(params: &mut ModelParams, name: &str, v: f64) -> bool {
    match name {
        "g" => params.g = v,
        "omega_a" => params.omega_a = v,
        "omega_b" => params.omega_b = v,
        _ => return false,
    }
    true
}

fn set_coeff(c: &mut LabCoefficients, name: &str, v: f64) -> bool {
    let slot = match name {
        "k_aa" => &mut c.k_aa,
        "k_ab" => &mut c.k_ab,
        "k_ba" => &mut c.k_ba,
        "k_bb" => &mut c.k_bb,
        "d_aa" => &mut c.d_aa,
        "d_ab" => &mut c.d_ab,
        "d_ba" => &mut c.d_ba,
        "d_bb" => &mut c.d_bb,
        _ => return false,
    };
    *slot = v;
    true
}

fn model_at(params: ModelParams, base: &Base, name: &str, value: f64) -> Result<ResolvedModel, HarnessError> {
    let mut params = params;
    let context = format!("sweep {name} = {value}");
    let bad = |msg: String| HarnessError::Input { context: context.clone(), message: msg };
    let param_changed = set_param(&mut params, name, value);
    params.validate().map_err(|e| bad(e.to_string()))?;
    match base {
        Base::Direct(c) => {
            let mut c = *c;
            if !param_changed && !set_coeff(&mut c, name, value) {
                return Err(bad(format!("cannot sweep `{name}` with direct coefficients")));
            }
            c.validate().map_err(|e| bad(e.to_string()))?;
            Ok(ResolvedModel::direct(params, c))
        }
        Base::Spectrum(s) => {
            if param_changed {
                ResolvedModel::from_spectrum(params, s)
            } else if name == "tau_c" {
                let s = s.with_tau_c(value).map_err(|e| HarnessError::coefficient(&context, e))?;
                ResolvedModel::from_spectrum(params, &s)
            } else {
                Err(bad(format!("`{name}` is computed from the spectrum and cannot be swept")))
            }
        }
    }
}

fn sweep_point(cfg: &RunConfig, model: &ResolvedModel, value: f64) -> Result<SweepRow, HarnessError> {
    let pc = model.propagator_constants();
    let stride = cfg.dt * cfg.sample_every as f64;
    let steps = (cfg.t_max / cfg.dt + 1e-9).floor() as usize;
    let n = steps / cfg.sample_every;
    let times: Vec<f64> = (0..=n).map(|k| (k * cfg.sample_every) as f64 * cfg.dt).collect();
    let init = CoherentPair::new(cfg.v_a, cfg.v_b);
    let (mut va, mut vb) = (Vec::with_capacity(n + 1), Vec::with_capacity(n + 1));
    for &t in &times {
        let v = evolve_coherent_pair(&init, &pc, &aux_functions(t, &pc));
        va.push(v.v_a);
        vb.push(v.v_b);
    }
    debug_assert!(times.len() < 2 || (times[1] - times[0] - stride).abs() < 1e-12);
    let tail = tail_decay_fit(&times, &va);
    let (_, fast_fit) = mode_decay_rates(&times, &va, &vb);
    let (slow_exact, fast_exact) = exact_rates(&pc);
    let c = &model.coeffs;
    let weak = (c.k_ab == 0.0 && c.k_ba == 0.0 && c.d_ab == 0.0 && c.d_ba == 0.0)
        .then(|| weak_coupling_rates(c.k_aa, c.k_bb, model.params.g).ok())
        .flatten();
    let final_delta = if cfg.phi == 0.0 && cfg.w != C64::new(0.0, 0.0) {
        let cat = CatState::new(cfg.w, cfg.phi).map_err(|e| HarnessError::state("cat state", e))?;
        let t_end = *times.last().unwrap_or(&0.0);
        let comps = cat_components(&cat, &pc, &aux_functions(t_end, &pc));
        linear_entropy(&cat, &comps).ok().map(|e| e.delta)
    } else {
        None
    };
    Ok(SweepRow {
        value,
        slow_rate_fit: tail.rate,
        fast_rate_fit: fast_fit,
        slow_rate_exact: slow_exact,
        fast_rate_exact: fast_exact,
        slow_rate_weak: weak.map(|w| w.k_plus),
        fast_rate_weak: weak.map(|w| w.k_minus),
        final_delta,
        max_residual: tail.max_residual,
        warnings: model.warnings.clone(),
    })
}

/// Evaluates every sweep point on up to `jobs` threads.
pub fn run_sweep(cfg: &RunConfig, jobs: Option<usize>) -> Result<Vec<SweepRow>, HarnessError> {
    let spec = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| ConfigError::Validation(vec!["scenario `sweep` needs a `sweep` descriptor".into()]))?;
    let params = cfg.params.ok_or_else(|| ConfigError::Validation(vec!["`params` is required".into()]))?;
    let base = match &cfg.reservoir {
        Some(Reservoir::Direct(c)) => Base::Direct(*c),
        Some(Reservoir::Spectrum { path, tau_c }) => Base::Spectrum(load_spectrum(path, *tau_c)?),
        None => return Err(ConfigError::Validation(vec!["one of `coeffs` or `spectrum` is required".into()]).into()),
    };
    let values = spec.values();
    let work = || {
        values
            .par_iter()
            .map(|&v| model_at(params, &base, &spec.parameter, v).and_then(|m| sweep_point(cfg, &m, v)))
            .collect::<Result<Vec<_>, _>>()
    };
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| HarnessError::Numerical { context: "thread pool".into(), message: e.to_string() })?
            .install(work),
        None => work(),
    }
}
