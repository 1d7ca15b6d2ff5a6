// Copyright 2026 The cavityduo Authors
// SPDX-License-Identifier: Apache-2.0

//! Scenario runners behind the `cavityduo` binary.
//!
//! [`run`] executes one validated [`RunConfig`] and writes its artifacts into
//! an output directory: `trajectory.csv` for the evolve scenarios,
//! `report.txt` for `verify`, `coefficients` and `algebra-check`, and
//! `sweep.csv` for sweeps. Every error maps to one process exit code, see
//! [`HarnessError::exit_code`].

pub mod config;
pub mod fit;
mod sweep;
mod trajectory;
mod verify;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::coefficients::{
    coefficients_from_spectrum_with, effective_detunings, normal_modes, physicality_screen, CoefficientError,
    LabCoefficients, ModelParams, QuadratureOptions, QuadratureReport, ReservoirSpectrum,
};
use crate::lindblad_oracle::{check_commutator_table, OracleError};
use crate::propagator::{constants, PropagatorConstants};
use crate::states::StateError;

pub use config::{
    parse_config, parse_config_str, parse_config_with_overrides, ConfigError, Reservoir, RunConfig, Scenario,
    SweepSpec,
};
pub use sweep::{run_sweep, SweepRow, SWEEP_HEADER};
pub use trajectory::{run_trajectory, InitialState, Trajectory, TrajectoryRow, TRAJECTORY_HEADER};
pub use verify::{run_verify, VerifyReport, VerifyTolerances};

/// Process exit codes.
pub mod exit_code {
    pub const IO: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const TOLERANCE: i32 = 3;
    pub const NUMERICAL: i32 = 4;
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// Input that parses but cannot be run (cutoff too small, step too
    /// large, spectrum not covering the modes...).
    #[error("{context}: {message}")]
    Input { context: String, message: String },
    #[error("tolerance exceeded ({} check{} failed):\n  {}", .0.len(), if .0.len() == 1 { "" } else { "s" }, .0.join("\n  "))]
    Tolerance(Vec<String>),
    #[error("{context}: {message}")]
    Numerical { context: String, message: String },
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Io { .. } => exit_code::IO,
            HarnessError::Config(_) | HarnessError::Input { .. } => exit_code::CONFIG,
            HarnessError::Tolerance(_) => exit_code::TOLERANCE,
            HarnessError::Numerical { .. } => exit_code::NUMERICAL,
        }
    }

    pub(crate) fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        HarnessError::Io { path: path.to_path_buf(), message: err.to_string() }
    }

    pub(crate) fn oracle(context: &str, err: OracleError) -> Self {
        let (context, message) = (context.to_string(), err.to_string());
        match err {
            OracleError::CutoffTooSmall { .. }
            | OracleError::StepTooLarge { .. }
            | OracleError::InvalidDimension(_)
            | OracleError::InvalidOptions(_)
            | OracleError::DegenerateCat => HarnessError::Input { context, message },
            OracleError::PositivityViolation { .. }
            | OracleError::DimensionMismatch(_)
            | OracleError::TableMismatch { .. } => HarnessError::Numerical { context, message },
        }
    }

    pub(crate) fn state(context: &str, err: StateError) -> Self {
        match err {
            StateError::Oracle(e) => Self::oracle(context, e),
            other => HarnessError::Input { context: context.to_string(), message: other.to_string() },
        }
    }

    pub(crate) fn coefficient(context: &str, err: CoefficientError) -> Self {
        let (context, message) = (context.to_string(), err.to_string());
        match err {
            CoefficientError::GridTooCoarse { .. } => HarnessError::Numerical { context, message },
            _ => HarnessError::Input { context, message },
        }
    }
}

/// Model parameters and master-equation constants for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedModel {
    pub params: ModelParams,
    pub coeffs: LabCoefficients,
    /// Present when the constants came from a spectrum.
    pub quadrature: Option<QuadratureReport>,
    pub warnings: Vec<String>,
}

impl ResolvedModel {
    pub fn direct(params: ModelParams, coeffs: LabCoefficients) -> Self {
        let warnings = physicality_screen(&coeffs).warning().into_iter().collect();
        Self { params, coeffs, quadrature: None, warnings }
    }

    pub fn from_spectrum(params: ModelParams, spectrum: &ReservoirSpectrum) -> Result<Self, HarnessError> {
        let report = coefficients_from_spectrum_with(spectrum, &normal_modes(&params), &QuadratureOptions::default())
            .map_err(|e| HarnessError::coefficient("spectrum quadrature", e))?;
        let warnings = physicality_screen(&report.coefficients).warning().into_iter().collect();
        Ok(Self { params, coeffs: report.coefficients, quadrature: Some(report), warnings })
    }

    pub fn propagator_constants(&self) -> PropagatorConstants {
        constants(&effective_detunings(&self.params, &self.coeffs), &self.coeffs)
    }
}

pub fn load_spectrum(path: &Path, tau_c: f64) -> Result<ReservoirSpectrum, HarnessError> {
    ReservoirSpectrum::from_csv_path(path, tau_c).map_err(|e| match e {
        CoefficientError::Io(io) => HarnessError::io(path, io),
        other => HarnessError::coefficient(&format!("spectrum {}", path.display()), other),
    })
}

/// Resolves the reservoir of a configuration into the eight constants.
pub fn resolve_model(cfg: &RunConfig) -> Result<ResolvedModel, HarnessError> {
    let params = cfg.params.ok_or_else(|| ConfigError::Validation(vec!["`params` is required".into()]))?;
    match &cfg.reservoir {
        Some(Reservoir::Direct(c)) => Ok(ResolvedModel::direct(params, *c)),
        Some(Reservoir::Spectrum { path, tau_c }) => {
            ResolvedModel::from_spectrum(params, &load_spectrum(path, *tau_c)?)
        }
        None => Err(ConfigError::Validation(vec!["one of `coeffs` or `spectrum` is required".into()]).into()),
    }
}

/// Runner knobs that are not part of the physics configuration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    /// Worker threads for sweeps; `None` uses the rayon default.
    pub jobs: Option<usize>,
    /// Also write the final oracle density matrix (`final_state.csv`).
    pub snapshot: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub scenario: Scenario,
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
    /// One-paragraph human summary.
    pub summary: String,
}

/// `{:.16e}`: 17 significant digits.
pub(crate) fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}

/// Executes `cfg` and writes its artifacts below `out_dir`.
pub fn run(cfg: &RunConfig, out_dir: &Path, opts: &RunOptions) -> Result<RunOutcome, HarnessError> {
    fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let mut warnings = cfg.warnings.clone();
    let mut files = Vec::new();
    let summary = match cfg.scenario {
        Scenario::EvolveCoherent | Scenario::EvolveCat => {
            let model = resolve_model(cfg)?;
            warnings.extend(model.warnings.iter().cloned());
            let init = if cfg.scenario == Scenario::EvolveCoherent {
                InitialState::coherent(cfg.v_a, cfg.v_b)
            } else {
                InitialState::cat(cfg.w, cfg.phi)?
            };
            let traj = run_trajectory(&model, &init, cfg, |_, _| Ok(()))?;
            warnings.extend(traj.warnings.iter().cloned());
            let path = out_dir.join("trajectory.csv");
            write_file(&path, &traj.to_csv())?;
            files.push(path);
            if opts.snapshot {
                files.push(write_snapshot(out_dir, &traj)?);
            }
            traj.summary()
        }
        Scenario::Verify => {
            let report = run_verify(cfg, &VerifyTolerances::default())?;
            warnings.extend(report.warnings.iter().cloned());
            for (name, traj) in [("trajectory.csv", &report.coherent), ("trajectory_cat.csv", &report.cat)] {
                let path = out_dir.join(name);
                write_file(&path, &traj.to_csv())?;
                files.push(path);
            }
            let path = out_dir.join("report.txt");
            write_file(&path, &report.text)?;
            files.push(path);
            if !report.failures.is_empty() {
                return Err(HarnessError::Tolerance(report.failures));
            }
            "verify: all checks passed".to_string()
        }
        Scenario::Sweep => {
            let rows = run_sweep(cfg, opts.jobs)?;
            let path = out_dir.join("sweep.csv");
            write_file(&path, &sweep::to_csv(&rows))?;
            files.push(path);
            for r in &rows {
                warnings.extend(r.warnings.iter().map(|w| format!("{} = {}: {w}", cfg.sweep.as_ref().map_or("", |s| &s.parameter), r.value)));
            }
            format!("sweep: {} points", rows.len())
        }
        Scenario::Coefficients => {
            let (text, json, model_warnings) = coefficients_report(cfg)?;
            warnings.extend(model_warnings);
            let path = out_dir.join("report.txt");
            write_file(&path, &text)?;
            files.push(path);
            let path = out_dir.join("coefficients.json");
            write_file(&path, &json)?;
            files.push(path);
            "coefficients: report written".to_string()
        }
        Scenario::AlgebraCheck => {
            let report = check_commutator_table(cfg.dim_a, cfg.trials, cfg.seed)
                .map_err(|e| HarnessError::oracle("algebra-check", e))?;
            let path = out_dir.join("report.txt");
            write_file(&path, &report.render())?;
            files.push(path);
            if !report.passed() {
                let worst = report.max_corrected();
                return Err(HarnessError::Tolerance(vec![format!(
                    "commutator table: max discrepancy {worst:.3e} > 1e-10"
                )]));
            }
            format!("algebra-check: 144 pairs, max discrepancy {:.3e}", report.max_corrected())
        }
    };
    Ok(RunOutcome { scenario: cfg.scenario, files, warnings, summary })
}

fn write_snapshot(out_dir: &Path, traj: &Trajectory) -> Result<PathBuf, HarnessError> {
    let path = out_dir.join("final_state.csv");
    let file = fs::File::create(&path).map_err(|e| HarnessError::io(&path, e))?;
    traj.final_state
        .write_csv(std::io::BufWriter::new(file))
        .map_err(|e| HarnessError::io(&path, e))?;
    Ok(path)
}

/// Text report and JSON dump of the resolved constants.
fn coefficients_report(cfg: &RunConfig) -> Result<(String, String, Vec<String>), HarnessError> {
    let model = resolve_model(cfg)?;
    let params = model.params;
    let nm = normal_modes(&params);
    let c = model.coeffs;
    let screen = physicality_screen(&c);
    let dets = effective_detunings(&params, &c);
    let pc = model.propagator_constants();

    let mut s = String::new();
    let _ = writeln!(s, "model: omega_a = {}, omega_b = {}, g = {}", params.omega_a, params.omega_b, params.g);
    let _ = writeln!(
        s,
        "normal modes: omega_1 = {:.12}, omega_2 = {:.12}, cos(theta) = {:.12}, sin(theta) = {:.12}",
        nm.omega_1, nm.omega_2, nm.cos_theta, nm.sin_theta
    );
    let source = match &cfg.reservoir {
        Some(Reservoir::Spectrum { path, tau_c }) => format!("spectrum {} (tau_c = {tau_c})", path.display()),
        _ => "direct coefficients".to_string(),
    };
    let _ = writeln!(s, "source: {source}");
    let _ = writeln!(s);
    let _ = writeln!(s, "{:>6}  {:>22}  {:>22}", "pair", "k", "Delta");
    for (name, k, d) in [
        ("aa", c.k_aa, c.d_aa),
        ("ab", c.k_ab, c.d_ab),
        ("ba", c.k_ba, c.d_ba),
        ("bb", c.k_bb, c.d_bb),
    ] {
        let _ = writeln!(s, "{name:>6}  {k:>22.15e}  {d:>22.15e}");
    }
    if let Some(q) = &model.quadrature {
        let _ = writeln!(
            s,
            "quadrature: refinement change {:.3e} relative to scale {:.3e}",
            q.refinement_change, q.scale
        );
    }
    let _ = writeln!(
        s,
        "dissipation matrix eigenvalues: {:.6e}, {:.6e} ({})",
        screen.eigenvalues[0],
        screen.eigenvalues[1],
        if screen.is_positive_semidefinite() { "positive semidefinite" } else { "NOT positive semidefinite" }
    );
    let _ = writeln!(
        s,
        "effective detunings: Omega_aa = {:.12}, Omega_bb = {:.12}, Omega_ab = {:.12}, Omega_ba = {:.12}",
        dets.omega_aa, dets.omega_bb, dets.omega_ab, dets.omega_ba
    );
    let _ = writeln!(
        s,
        "propagator constants: c = {:.12} {:+.12}i, r = {:.12} {:+.12}i, R = {:.12} {:+.12}i",
        pc.asymmetry.re, pc.asymmetry.im, pc.root.re, pc.root.im, pc.common_rate.re, pc.common_rate.im
    );

    let mut sensitivity = Vec::new();
    if let Some(Reservoir::Spectrum { path, tau_c }) = &cfg.reservoir {
        let spectrum = load_spectrum(path, *tau_c)?;
        let _ = writeln!(s);
        let _ = writeln!(s, "tau_c sensitivity:");
        let _ = writeln!(s, "{}", verify::sensitivity_table(&params, &spectrum, &mut sensitivity));
    }

    let json = serde_json::json!({
        "params": params,
        "coefficients": c,
        "normal_modes": {
            "omega_1": nm.omega_1, "omega_2": nm.omega_2,
            "cos_theta": nm.cos_theta, "sin_theta": nm.sin_theta,
        },
        "tau_c": match &cfg.reservoir { Some(Reservoir::Spectrum { tau_c, .. }) => Some(*tau_c), _ => None },
        "refinement_change": model.quadrature.map(|q| q.refinement_change),
        "coefficient_scale": model.quadrature.map(|q| q.scale),
        "dissipation_eigenvalues": screen.eigenvalues,
        "tau_c_sensitivity": sensitivity,
    });
    let json = serde_json::to_string_pretty(&json).expect("JSON value serializes") + "\n";
    Ok((s, json, model.warnings))
}
