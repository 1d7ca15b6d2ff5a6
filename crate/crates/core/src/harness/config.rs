// Copyright 2026 The cavityduo Authors
// SPDX-License-Identifier: Apache-2.0

//! JSON run configuration.
//!
//! The file mirrors [`RawConfig`]; unknown keys are rejected. Complex numbers
//! are written as `[re, im]`. Overrides use dotted paths (`params.g=0.1`) and
//! are applied to the JSON tree before it is typed, so any field can be set.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::coefficients::{physicality_screen, LabCoefficients, ModelParams};
use crate::C64;

/// Defaults filled in for omitted fields.
pub mod defaults {
    pub const T_MAX: f64 = 10.0;
    pub const DT: f64 = 1e-3;
    pub const SAMPLE_EVERY: usize = 100;
    pub const DIM: usize = 15;
    pub const SEED: u64 = 0;
    pub const V_A: [f64; 2] = [1.0, 0.0];
    pub const V_B: [f64; 2] = [0.0, 0.0];
    pub const W: [f64; 2] = [1.0, 0.0];
    pub const PHI: f64 = 0.0;
    pub const TRIALS: usize = 20;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    EvolveCoherent,
    EvolveCat,
    Sweep,
    Verify,
    Coefficients,
    AlgebraCheck,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::EvolveCoherent,
        Scenario::EvolveCat,
        Scenario::Sweep,
        Scenario::Verify,
        Scenario::Coefficients,
        Scenario::AlgebraCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::EvolveCoherent => "evolve-coherent",
            Scenario::EvolveCat => "evolve-cat",
            Scenario::Sweep => "sweep",
            Scenario::Verify => "verify",
            Scenario::Coefficients => "coefficients",
            Scenario::AlgebraCheck => "algebra-check",
        }
    }

    fn needs_model(self) -> bool {
        self != Scenario::AlgebraCheck
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Scenario::ALL.iter().map(|s| s.name()).collect();
                format!("unknown scenario `{s}` (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumRef {
    pub path: PathBuf,
    pub tau_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

/// Parameters a sweep may vary.
pub const SWEEP_PARAMETERS: [&str; 12] = [
    "g", "omega_a", "omega_b", "k_aa", "k_ab", "k_ba", "k_bb", "d_aa", "d_ab", "d_ba", "d_bb", "tau_c",
];

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.steps <= 1 {
            return vec![self.start];
        }
        (0..self.steps)
            .map(|i| self.start + (self.stop - self.start) * i as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

/// The file format, field for field.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub scenario: Option<String>,
    pub params: Option<ModelParams>,
    pub coeffs: Option<LabCoefficients>,
    pub spectrum: Option<SpectrumRef>,
    pub v_a: Option<[f64; 2]>,
    pub v_b: Option<[f64; 2]>,
    pub w: Option<[f64; 2]>,
    pub phi: Option<f64>,
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
    pub sample_every: Option<usize>,
    pub dim_a: Option<usize>,
    pub dim_b: Option<usize>,
    pub allow_large_step: Option<bool>,
    pub sweep: Option<SweepSpec>,
    pub trials: Option<usize>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Where the eight master-equation constants come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Reservoir {
    Direct(LabCoefficients),
    Spectrum { path: PathBuf, tau_c: f64 },
}

/// Validated configuration with defaults filled.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    /// `None` only for `algebra-check`.
    pub params: Option<ModelParams>,
    pub reservoir: Option<Reservoir>,
    pub v_a: C64,
    pub v_b: C64,
    pub w: C64,
    pub phi: f64,
    pub t_max: f64,
    pub dt: f64,
    pub sample_every: usize,
    pub dim_a: usize,
    pub dim_b: usize,
    pub allow_large_step: bool,
    pub sweep: Option<SweepSpec>,
    pub trials: usize,
    pub output: Option<PathBuf>,
    pub seed: u64,
    /// Non-fatal findings, such as a failed physicality screen.
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Io { path: PathBuf, message: String },
    Parse { line: usize, column: usize, message: String },
    Override(String),
    Validation(Vec<String>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, message } => write!(f, "cannot read {}: {message}", path.display()),
            ConfigError::Parse { line, column, message } => {
                write!(f, "config parse error at line {line}, column {column}: {message}")
            }
            ConfigError::Override(m) => write!(f, "bad override: {m}"),
            ConfigError::Validation(v) => {
                writeln!(f, "invalid configuration ({} problem{}):", v.len(), if v.len() == 1 { "" } else { "s" })?;
                for p in v {
                    writeln!(f, "  - {p}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

/// Sets `path` (dot-separated) in a JSON tree. The value is read as JSON
/// when possible and as a string otherwise.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), ConfigError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| ConfigError::Override(format!("`{assignment}` is not key=value")))?;
    let path = path.trim();
    if path.is_empty() {
        return Err(ConfigError::Override(format!("empty key in `{assignment}`")));
    }
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
    let mut node = root;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        let obj = match node {
            Value::Object(map) => map,
            other => {
                if other.is_null() {
                    *other = Value::Object(Default::default());
                    other.as_object_mut().unwrap()
                } else {
                    return Err(ConfigError::Override(format!(
                        "`{}` is not an object",
                        keys[..i].join(".")
                    )));
                }
            }
        };
        if i + 1 == keys.len() {
            obj.insert(key.to_string(), value);
            return Ok(());
        }
        node = obj.entry(key.to_string()).or_insert(Value::Null);
    }
    unreachable!()
}

/// Parses JSON text with overrides applied. Relative spectrum paths are
/// resolved against `base_dir`.
pub fn parse_config_str(text: &str, overrides: &[String], base_dir: &Path) -> Result<RunConfig, ConfigError> {
    let mut tree: Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    for o in overrides {
        apply_override(&mut tree, o)?;
    }
    // Re-serialize so type errors point at a position in the merged tree.
    let merged = serde_json::to_string_pretty(&tree).expect("JSON value serializes");
    let raw: RawConfig = serde_json::from_str(&merged).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: if overrides.is_empty() {
            e.to_string()
        } else {
            format!("{e} (after applying overrides)")
        },
    })?;
    validate(raw, base_dir)
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    parse_config_with_overrides(path, &[])
}

pub fn parse_config_with_overrides(path: &Path, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config_str(&text, overrides, base)
}

fn complex(v: [f64; 2]) -> C64 {
    C64::new(v[0], v[1])
}

fn validate(raw: RawConfig, base_dir: &Path) -> Result<RunConfig, ConfigError> {
    let mut problems = Vec::new();
    let mut warnings = Vec::new();

    let scenario = match raw.scenario.as_deref() {
        None => {
            problems.push("`scenario` is required".to_string());
            None
        }
        Some(s) => match s.parse::<Scenario>() {
            Ok(sc) => Some(sc),
            Err(e) => {
                problems.push(e);
                None
            }
        },
    };
    let needs_model = scenario.map_or(true, Scenario::needs_model);

    if let Some(p) = &raw.params {
        if let Err(e) = p.validate() {
            problems.push(e.to_string());
        }
    } else if needs_model {
        problems.push("`params` (omega_a, omega_b, g) is required".into());
    }

    let reservoir = match (&raw.coeffs, &raw.spectrum) {
        (Some(_), Some(_)) => {
            problems.push("give exactly one of `coeffs` and `spectrum`, not both".into());
            None
        }
        (None, None) => {
            if needs_model {
                problems.push("one of `coeffs` or `spectrum` is required".into());
            }
            None
        }
        (Some(c), None) => {
            if let Err(e) = c.validate() {
                problems.push(format!("coeffs: {e}"));
            }
            let screen = physicality_screen(c);
            if let Some(w) = screen.warning() {
                warnings.push(w);
            }
            Some(Reservoir::Direct(*c))
        }
        (None, Some(s)) => {
            if !(s.tau_c.is_finite() && s.tau_c > 0.0) {
                problems.push(format!("spectrum.tau_c must be finite and > 0 (got {})", s.tau_c));
            }
            let path = if s.path.is_absolute() { s.path.clone() } else { base_dir.join(&s.path) };
            Some(Reservoir::Spectrum { path, tau_c: s.tau_c })
        }
    };

    for (name, v) in [("v_a", raw.v_a), ("v_b", raw.v_b), ("w", raw.w)] {
        if let Some(v) = v {
            if !(v[0].is_finite() && v[1].is_finite()) {
                problems.push(format!("`{name}` must be finite"));
            }
        }
    }
    let w = complex(raw.w.unwrap_or(defaults::W));
    if scenario.is_some_and(|s| matches!(s, Scenario::EvolveCat | Scenario::Verify | Scenario::Sweep)) && w.norm() == 0.0 {
        problems.push("`w` must be nonzero (the cat collapses)".into());
    }
    let phi = raw.phi.unwrap_or(defaults::PHI);
    if !phi.is_finite() {
        problems.push("`phi` must be finite".into());
    }

    let t_max = raw.t_max.unwrap_or(defaults::T_MAX);
    if !(t_max.is_finite() && t_max > 0.0) {
        problems.push(format!("`t_max` must be > 0 (got {t_max})"));
    }
    let dt = raw.dt.unwrap_or(defaults::DT);
    if !(dt.is_finite() && dt > 0.0) {
        problems.push(format!("`dt` must be > 0 (got {dt})"));
    } else if dt > t_max {
        problems.push(format!("`dt` ({dt}) exceeds `t_max` ({t_max})"));
    }
    let sample_every = raw.sample_every.unwrap_or(defaults::SAMPLE_EVERY);
    if sample_every == 0 {
        problems.push("`sample_every` must be >= 1".into());
    }
    let dim_a = raw.dim_a.unwrap_or(defaults::DIM);
    let dim_b = raw.dim_b.unwrap_or(dim_a);
    let min_dim = if scenario == Some(Scenario::AlgebraCheck) { 4 } else { 1 };
    if dim_a < min_dim || dim_b < min_dim {
        problems.push(format!("Fock dimensions must be >= {min_dim} (got {dim_a} x {dim_b})"));
    }
    if scenario == Some(Scenario::AlgebraCheck) && dim_a != dim_b {
        problems.push("algebra-check uses a single dimension: set dim_a = dim_b".into());
    }
    let trials = raw.trials.unwrap_or(defaults::TRIALS);
    if trials == 0 {
        problems.push("`trials` must be >= 1".into());
    }

    match (scenario, &raw.sweep) {
        (Some(Scenario::Sweep), None) => problems.push("scenario `sweep` needs a `sweep` descriptor".into()),
        (Some(s), Some(_)) if s != Scenario::Sweep => {
            problems.push(format!("`sweep` descriptor given but scenario is `{s}`"))
        }
        (_, Some(sw)) => {
            if !SWEEP_PARAMETERS.contains(&sw.parameter.as_str()) {
                problems.push(format!(
                    "unknown sweep parameter `{}` (expected one of {})",
                    sw.parameter,
                    SWEEP_PARAMETERS.join(", ")
                ));
            }
            if sw.steps == 0 {
                problems.push("`sweep.steps` must be >= 1".into());
            }
            if !(sw.start.is_finite() && sw.stop.is_finite()) {
                problems.push("sweep bounds must be finite".into());
            }
            if sw.parameter == "tau_c" && !matches!(reservoir, Some(Reservoir::Spectrum { .. })) {
                problems.push("sweeping `tau_c` requires a `spectrum`".into());
            }
        }
        _ => {}
    }
    if scenario == Some(Scenario::Coefficients) && !matches!(reservoir, Some(Reservoir::Spectrum { .. }) | None) {
        warnings.push("coefficients scenario with direct `coeffs`: no quadrature is performed".into());
    }

    if !problems.is_empty() {
        return Err(ConfigError::Validation(problems));
    }
    Ok(RunConfig {
        scenario: scenario.expect("validated"),
        params: raw.params,
        reservoir,
        v_a: complex(raw.v_a.unwrap_or(defaults::V_A)),
        v_b: complex(raw.v_b.unwrap_or(defaults::V_B)),
        w,
        phi,
        t_max,
        dt,
        sample_every,
        dim_a,
        dim_b,
        allow_large_step: raw.allow_large_step.unwrap_or(false),
        sweep: raw.sweep,
        trials,
        output: raw.output,
        seed: raw.seed.unwrap_or(defaults::SEED),
        warnings,
    })
}
