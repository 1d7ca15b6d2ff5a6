// Copyright 2026 The cavityduo Authors
// SPDX-License-Identifier: Apache-2.0

//! Paired analytic and oracle trajectories.

use std::fmt::Write as _;

use super::{num, opt_num, HarnessError, ResolvedModel, RunConfig};
use crate::lindblad_oracle::{build_cat, build_coherent, evolve, DensityMatrix, EvolveOptions, LiouvillianSpec};
use crate::propagator::{aux_functions, PropagatorConstants};
use crate::states::{
    cat_components, cat_density_matrix, evolve_coherent_pair, linear_entropy, CatComponents, CatState, CoherentPair,
};
use crate::C64;

pub const TRAJECTORY_HEADER: [&str; 15] = [
    "t",
    "va_re",
    "va_im",
    "vb_re",
    "vb_im",
    "mean_a_re",
    "mean_a_im",
    "mean_b_re",
    "mean_b_im",
    "purity_analytic",
    "purity_oracle",
    "delta_analytic",
    "n_total",
    "min_eig",
    "trace_err",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    Coherent(CoherentPair),
    Cat(CatState),
}

impl InitialState {
    pub fn coherent(v_a: C64, v_b: C64) -> Self {
        InitialState::Coherent(CoherentPair::new(v_a, v_b))
    }

    pub fn cat(w: C64, phi: f64) -> Result<Self, HarnessError> {
        CatState::new(w, phi).map(InitialState::Cat).map_err(|e| HarnessError::state("cat state", e))
    }

    pub fn density(&self, dim_a: usize, dim_b: usize) -> Result<DensityMatrix, HarnessError> {
        match self {
            InitialState::Coherent(p) => build_coherent(p.v_a, p.v_b, dim_a, dim_b),
            InitialState::Cat(c) => build_cat(c.w, c.phi, dim_a, dim_b),
        }
        .map_err(|e| HarnessError::oracle("initial state", e))
    }
}

/// One sampled time. `v_a`, `v_b` and the purity/entropy columns are
/// analytic; the means and remaining columns come from the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub v_a: C64,
    pub v_b: C64,
    pub mean_a: C64,
    pub mean_b: C64,
    pub purity_analytic: Option<f64>,
    pub purity_oracle: f64,
    pub delta_analytic: Option<f64>,
    pub n_total: f64,
    pub min_eig: f64,
    pub trace_err: f64,
    /// Not written to CSV.
    pub herm_residual: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub rows: Vec<TrajectoryRow>,
    pub final_state: DensityMatrix,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn to_csv(&self) -> String {
        let mut s = TRAJECTORY_HEADER.join(",");
        s.push('\n');
        for r in &self.rows {
            let cols = [
                num(r.t),
                num(r.v_a.re),
                num(r.v_a.im),
                num(r.v_b.re),
                num(r.v_b.im),
                num(r.mean_a.re),
                num(r.mean_a.im),
                num(r.mean_b.re),
                num(r.mean_b.im),
                opt_num(r.purity_analytic),
                num(r.purity_oracle),
                opt_num(r.delta_analytic),
                num(r.n_total),
                num(r.min_eig),
                num(r.trace_err),
            ];
            s.push_str(&cols.join(","));
            s.push('\n');
        }
        s
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let max_dev = self.rows.iter().fold(0.0, |m: f64, r| {
            m.max((r.mean_a - r.v_a).norm()).max((r.mean_b - r.v_b).norm())
        });
        let _ = write!(
            s,
            "{} samples to t = {}; max |oracle mean - analytic amplitude| = {:.3e}",
            self.rows.len(),
            self.rows.last().map_or(0.0, |r| r.t),
            max_dev
        );
        s
    }
}

/// Analytic counterpart of one oracle sample.
pub(crate) struct Analytic {
    pub v_a: C64,
    pub v_b: C64,
    pub purity: Option<f64>,
    pub delta: Option<f64>,
    pub cat: Option<(CatState, CatComponents)>,
}

pub(crate) fn analytic_at(
    init: &InitialState,
    pc: &PropagatorConstants,
    t: f64,
    dim_a: usize,
    dim_b: usize,
) -> Result<Analytic, HarnessError> {
    let aux = aux_functions(t, pc);
    match init {
        InitialState::Coherent(p) => {
            let v = evolve_coherent_pair(p, pc, &aux);
            Ok(Analytic { v_a: v.v_a, v_b: v.v_b, purity: Some(1.0), delta: Some(0.0), cat: None })
        }
        InitialState::Cat(cat) => {
            let comps = cat_components(cat, pc, &aux);
            let delta = if cat.phi == 0.0 {
                linear_entropy(cat, &comps).map_err(|e| HarnessError::state("linear entropy", e))?.delta
            } else {
                // No closed form off φ = 0: use the projected state.
                let cd = cat_density_matrix(cat, &comps, dim_a, dim_b)
                    .map_err(|e| HarnessError::state("cat projection", e))?;
                1.0 - cd.rho.purity()
            };
            Ok(Analytic {
                v_a: comps.mean_a(cat),
                v_b: comps.mean_b(cat),
                purity: Some(1.0 - delta),
                delta: Some(delta),
                cat: Some((*cat, comps)),
            })
        }
    }
}

/// Evolves `init` with the oracle and evaluates the analytic solution at
/// every sample. `observer` sees each oracle state with its row; its first
/// error aborts the run.
pub fn run_trajectory(
    model: &ResolvedModel,
    init: &InitialState,
    cfg: &RunConfig,
    mut observer: impl FnMut(&DensityMatrix, &TrajectoryRow) -> Result<(), HarnessError>,
) -> Result<Trajectory, HarnessError> {
    let (da, db) = (cfg.dim_a, cfg.dim_b);
    let rho0 = init.density(da, db)?;
    let pc = model.propagator_constants();
    let spec = LiouvillianSpec::new(model.params, model.coeffs);
    let opts = EvolveOptions {
        t_max: cfg.t_max,
        dt: cfg.dt,
        sample_every: cfg.sample_every,
        allow_large_step: cfg.allow_large_step,
    };
    let mut rows = Vec::new();
    let mut failure: Option<HarnessError> = None;
    let evolution = evolve(&rho0, &spec, &opts, |rho, d| {
        if failure.is_some() {
            return;
        }
        let step = analytic_at(init, &pc, d.t, da, db).and_then(|a| {
            let row = TrajectoryRow {
                t: d.t,
                v_a: a.v_a,
                v_b: a.v_b,
                mean_a: d.mean_a,
                mean_b: d.mean_b,
                purity_analytic: a.purity,
                purity_oracle: d.purity,
                delta_analytic: a.delta,
                n_total: d.n_total,
                min_eig: d.min_eig,
                trace_err: (d.trace - 1.0).norm(),
                herm_residual: d.herm_residual,
            };
            observer(rho, &row)?;
            rows.push(row);
            Ok(())
        });
        if let Err(e) = step {
            failure = Some(e);
        }
    })
    .map_err(|e| HarnessError::oracle("oracle evolution", e))?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Trajectory { rows, final_state: evolution.final_state, warnings: evolution.warnings })
}
