// Copyright 2026 The cavityduo Authors
// SPDX-License-Identifier: Apache-2.0

//! Analytic-versus-oracle comparison report.

use std::fmt::Write as _;

use serde_json::Value;

use super::trajectory::analytic_at;
use super::{load_spectrum, resolve_model, run_trajectory, HarnessError, InitialState, Reservoir, ResolvedModel, RunConfig, Trajectory};
use crate::coefficients::{physicality_screen, ModelParams, ReservoirSpectrum};
use crate::lindblad_oracle::build_coherent;
use crate::propagator::PropagatorConstants;
use crate::states::{cat_density_matrix, weak_coupling_rates};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyTolerances {
    /// `|⟨a⟩_oracle − v_a(t)|`, same for b.
    pub amplitude: f64,
    /// Trace distance between oracle and analytic states.
    pub trace_distance: f64,
    /// `|δ_analytic − Tr(ρ−ρ²)_oracle|`.
    pub entropy: f64,
    pub trace_drift: f64,
    pub herm_residual: f64,
    /// Lowest acceptable oracle eigenvalue.
    pub min_eig: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        Self {
            amplitude: 1e-6,
            trace_distance: 1e-5,
            entropy: 1e-5,
            trace_drift: 1e-9,
            herm_residual: 1e-10,
            min_eig: -1e-7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub text: String,
    /// One line per failed check; empty when everything passed.
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
    pub coherent: Trajectory,
    pub cat: Trajectory,
}

struct Checks {
    lines: Vec<(String, f64, f64, bool)>,
}

impl Checks {
    /// Records `value <= limit` (or `value >= limit` with `at_least`).
    fn push(&mut self, name: &str, value: f64, limit: f64, at_least: bool) {
        let ok = if at_least { value >= limit } else { value <= limit };
        self.lines.push((name.to_string(), value, limit, ok && !value.is_nan()));
    }
}

fn sanity(checks: &mut Checks, label: &str, traj: &Trajectory, tol: &VerifyTolerances, screened: bool) {
    let max = |f: &dyn Fn(&super::TrajectoryRow) -> f64| traj.rows.iter().map(f).fold(0.0, f64::max);
    checks.push(&format!("{label}: trace drift"), max(&|r| r.trace_err), tol.trace_drift, false);
    checks.push(&format!("{label}: hermiticity residual"), max(&|r| r.herm_residual), tol.herm_residual, false);
    let min_eig = traj.rows.iter().map(|r| r.min_eig).fold(f64::INFINITY, f64::min);
    checks.push(&format!("{label}: min eigenvalue"), min_eig, tol.min_eig, true);
    if screened {
        // Largest single-sample increase of the photon number.
        let rise = traj
            .rows
            .windows(2)
            .map(|w| w[1].n_total - w[0].n_total)
            .fold(0.0, f64::max);
        let scale = traj.rows.first().map_or(1.0, |r| r.n_total.max(1.0));
        checks.push(&format!("{label}: photon number increase"), rise, 1e-10 * scale, false);
    }
}

/// Runs the coherent pair `(v_a, v_b)` and the cat `(w, φ)` through both
/// solvers and compares them.
pub fn run_verify(cfg: &RunConfig, tol: &VerifyTolerances) -> Result<VerifyReport, HarnessError> {
    let model = resolve_model(cfg)?;
    let pc = model.propagator_constants();
    let screened = physicality_screen(&model.coeffs).is_positive_semidefinite();
    let (da, db) = (cfg.dim_a, cfg.dim_b);
    let mut checks = Checks { lines: Vec::new() };

    let coherent_init = InitialState::coherent(cfg.v_a, cfg.v_b);
    let mut td_coherent: f64 = 0.0;
    let coherent = run_trajectory(&model, &coherent_init, cfg, |rho, row| {
        let analytic = build_coherent(row.v_a, row.v_b, da, db)
            .map_err(|e| HarnessError::oracle("analytic coherent state", e))?;
        let d = rho.trace_distance(&analytic).map_err(|e| HarnessError::oracle("trace distance", e))?;
        td_coherent = td_coherent.max(d);
        Ok(())
    })?;
    let dev_a = coherent.rows.iter().fold(0.0, |m: f64, r| m.max((r.mean_a - r.v_a).norm()));
    let dev_b = coherent.rows.iter().fold(0.0, |m: f64, r| m.max((r.mean_b - r.v_b).norm()));
    checks.push("coherent: max |<a> - v_a(t)|", dev_a, tol.amplitude, false);
    checks.push("coherent: max |<b> - v_b(t)|", dev_b, tol.amplitude, false);
    checks.push("coherent: max trace distance", td_coherent, tol.trace_distance, false);
    sanity(&mut checks, "coherent", &coherent, tol, screened);

    let cat_init = InitialState::cat(cfg.w, cfg.phi)?;
    let mut td_cat: f64 = 0.0;
    let cat = run_trajectory(&model, &cat_init, cfg, |rho, row| {
        let a = analytic_at(&cat_init, &pc, row.t, da, db)?;
        let (state, comps) = a.cat.expect("cat initial state");
        let projected =
            cat_density_matrix(&state, &comps, da, db).map_err(|e| HarnessError::state("cat projection", e))?;
        let d = rho.trace_distance(&projected.rho).map_err(|e| HarnessError::oracle("trace distance", e))?;
        td_cat = td_cat.max(d);
        Ok(())
    })?;
    let dev_means = cat.rows.iter().fold(0.0, |m: f64, r| {
        m.max((r.mean_a - r.v_a).norm()).max((r.mean_b - r.v_b).norm())
    });
    let entropy_dev = cat.rows.iter().fold(0.0, |m: f64, r| {
        m.max((r.delta_analytic.unwrap_or(f64::NAN) - (1.0 - r.purity_oracle)).abs())
    });
    checks.push("cat: max |oracle mean - analytic mean|", dev_means, tol.amplitude, false);
    checks.push("cat: max trace distance", td_cat, tol.trace_distance, false);
    checks.push("cat: max |delta analytic - delta oracle|", entropy_dev, tol.entropy, false);
    sanity(&mut checks, "cat", &cat, tol, screened);

    let mut text = String::new();
    let _ = writeln!(
        text,
        "verify: omega_a = {}, omega_b = {}, g = {}; cutoff {} x {}; dt = {}, t_max = {}",
        model.params.omega_a, model.params.omega_b, model.params.g, da, db, cfg.dt, cfg.t_max
    );
    let c = &model.coeffs;
    let _ = writeln!(
        text,
        "coefficients: k = [{}, {}, {}, {}], Delta = [{}, {}, {}, {}]",
        c.k_aa, c.k_ab, c.k_ba, c.k_bb, c.d_aa, c.d_ab, c.d_ba, c.d_bb
    );
    let _ = writeln!(
        text,
        "initial states: v_a = {}, v_b = {}; cat w = {}, phi = {}",
        cfg.v_a, cfg.v_b, cfg.w, cfg.phi
    );
    if !screened {
        let _ = writeln!(text, "dissipation matrix not positive semidefinite: photon-number check skipped");
    }
    let _ = writeln!(text);
    let _ = writeln!(text, "{:<48} {:>12} {:>12}  result", "check", "value", "limit");
    let mut failures = Vec::new();
    for (name, value, limit, ok) in &checks.lines {
        let _ = writeln!(text, "{name:<48} {value:>12.3e} {limit:>12.1e}  {}", if *ok { "PASS" } else { "FAIL" });
        if !ok {
            failures.push(format!("{name}: {value:.3e} (limit {limit:.1e})"));
        }
    }
    let max_delta = cat.rows.iter().filter_map(|r| r.delta_analytic).fold(0.0, f64::max);
    let max_delta_oracle = cat.rows.iter().map(|r| 1.0 - r.purity_oracle).fold(0.0, f64::max);
    let _ = writeln!(text);
    let _ = writeln!(text, "max analytic linear entropy: {max_delta:.3e}");
    let _ = writeln!(text, "max oracle linear entropy:   {max_delta_oracle:.3e}");
    rates_section(&mut text, &model, &pc);

    let mut warnings = model.warnings.clone();
    warnings.extend(coherent.warnings.iter().cloned());
    warnings.extend(cat.warnings.iter().cloned());
    if let Some(Reservoir::Spectrum { path, tau_c }) = &cfg.reservoir {
        let spectrum = load_spectrum(path, *tau_c)?;
        let _ = writeln!(text);
        let _ = writeln!(text, "tau_c sensitivity:");
        let _ = writeln!(text, "{}", sensitivity_table(&model.params, &spectrum, &mut Vec::new()));
    }
    let _ = writeln!(text);
    let _ = writeln!(text, "result: {}", if failures.is_empty() { "PASS" } else { "FAIL" });
    Ok(VerifyReport { text, failures, warnings, coherent, cat })
}

/// Exact normal-mode decay rates `Re(R ∓ r)`, slow first.
pub(crate) fn exact_rates(pc: &PropagatorConstants) -> (f64, f64) {
    let a = (pc.common_rate - pc.root).re;
    let b = (pc.common_rate + pc.root).re;
    (a.min(b), a.max(b))
}

fn rates_section(text: &mut String, model: &ResolvedModel, pc: &PropagatorConstants) {
    let (slow, fast) = exact_rates(pc);
    let _ = writeln!(text, "exact decay rates: slow {slow:.10e}, fast {fast:.10e}");
    let c = &model.coeffs;
    let p = &model.params;
    let direct_only = c.k_ab == 0.0 && c.k_ba == 0.0 && c.d_ab == 0.0 && c.d_ba == 0.0;
    if !direct_only {
        return;
    }
    if let Ok(w) = weak_coupling_rates(c.k_aa, c.k_bb, p.g) {
        let _ = writeln!(
            text,
            "weak-coupling rates (g/dk = {:.4}): slow {:.10e} ({:+.3e} rel), fast {:.10e} ({:+.3e} rel)",
            w.ratio,
            w.k_plus,
            (w.k_plus - slow) / slow,
            w.k_minus,
            (w.k_minus - fast) / fast
        );
        let same_frequency = p.omega_a - c.d_aa == p.omega_b - c.d_bb;
        if same_frequency {
            let dk = c.k_bb - c.k_aa;
            let ratio = (pc.asymmetry / pc.root).norm();
            let formula = dk / (dk * dk - 4.0 * p.g * p.g).sqrt();
            let _ = writeln!(text, "|c/r| = {ratio:.12}; dk/sqrt(dk^2 - 4g^2) = {formula:.12}");
        }
    }
}

/// Constants at `tau_c` scaled by 0.5, 1 and 2. Rows are also appended to
/// `rows` as JSON objects.
pub(crate) fn sensitivity_table(params: &ModelParams, spectrum: &ReservoirSpectrum, rows: &mut Vec<Value>) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "{:>12} {:>14} {:>14} {:>14} {:>14} {:>14} {:>14} {:>14} {:>14}",
        "tau_c", "k_aa", "k_ab", "k_ba", "k_bb", "d_aa", "d_ab", "d_ba", "d_bb"
    );
    for factor in [0.5, 1.0, 2.0] {
        let tau = spectrum.tau_c() * factor;
        let resolved = spectrum
            .with_tau_c(tau)
            .map_err(|e| HarnessError::coefficient("spectrum", e))
            .and_then(|sp| ResolvedModel::from_spectrum(*params, &sp));
        match resolved {
            Ok(m) => {
                let c = m.coeffs;
                let _ = write!(
                    s,
                    "\n{tau:>12.5e} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e}",
                    c.k_aa, c.k_ab, c.k_ba, c.k_bb, c.d_aa, c.d_ab, c.d_ba, c.d_bb
                );
                rows.push(serde_json::json!({ "tau_c": tau, "coefficients": c }));
            }
            Err(e) => {
                let _ = write!(s, "\n{tau:>12.5e} {e}");
                rows.push(serde_json::json!({ "tau_c": tau, "error": e.to_string() }));
            }
        }
    }
    s
}
