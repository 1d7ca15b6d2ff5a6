// Copyright 2026 The cavityduo Authors
// SPDX-License-Identifier: Apache-2.0

//! Normal modes and laboratory-frame master-equation coefficients.
//!
//! The reservoir enters only through eight real numbers: the decay and
//! cross-damping rates `k_xy` and the frequency shifts `Δ_xy`, with
//! `x, y ∈ {a, b}`. They can be supplied verbatim or obtained by quadrature
//! from a sampled reservoir spectrum (mode density `D(ω)` and complex
//! couplings `α(ω)`, `β(ω)` to the two cavity modes).
//!
//! Quadrature is composite trapezoid on the sampled grid plus one
//! refinement in which every interval is split at its midpoint (spectral
//! data linearly interpolated, the kernels `ξ_j` evaluated exactly). The
//! refinement gives both the error estimate and the Richardson-extrapolated
//! value that is returned.

use std::f64::consts::FRAC_1_SQRT_2;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::C64;

/// Below this value of `|ω − ω_j|·τ_c` the kernel `ξ_j` is evaluated by its
/// Taylor series.
pub const XI_SERIES_THRESHOLD: f64 = 1e-6;

/// Column header of a spectrum CSV file.
pub const SPECTRUM_CSV_HEADER: [&str; 6] = ["omega", "D", "re_alpha", "im_alpha", "re_beta", "im_beta"];

#[derive(Debug, Error)]
pub enum CoefficientError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("invalid reservoir spectrum: {0}")]
    InvalidSpectrum(String),
    #[error(
        "spectrum grid [{lo}, {hi}] does not cover the normal-mode frequencies [{omega_2}, {omega_1}]"
    )]
    GridDoesNotCover { lo: f64, hi: f64, omega_1: f64, omega_2: f64 },
    #[error(
        "spectrum grid too coarse: midpoint refinement changed {coefficient} by {change:.3e} \
         (allowed {tolerance:.1e} relative to coefficient scale {scale:.3e})"
    )]
    GridTooCoarse { coefficient: &'static str, change: f64, scale: f64, tolerance: f64 },
    #[error("negative diagonal decay rate {name} = {value:.6e}")]
    NegativeDiagonalRate { name: &'static str, value: f64 },
    #[error("coefficient {0} is not a finite number")]
    NonFinite(&'static str),
    #[error("spectrum CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("spectrum file: {0}")]
    Io(#[from] std::io::Error),
}

/// Bare mode frequencies and the direct (wire) coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub omega_a: f64,
    pub omega_b: f64,
    pub g: f64,
}

impl ModelParams {
    pub fn new(omega_a: f64, omega_b: f64, g: f64) -> Result<Self, CoefficientError> {
        let params = Self { omega_a, omega_b, g };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), CoefficientError> {
        let mut problems = Vec::new();
        if !(self.omega_a.is_finite() && self.omega_a > 0.0) {
            problems.push(format!("omega_a must be finite and > 0 (got {})", self.omega_a));
        }
        if !(self.omega_b.is_finite() && self.omega_b > 0.0) {
            problems.push(format!("omega_b must be finite and > 0 (got {})", self.omega_b));
        }
        if !(self.g.is_finite() && self.g >= 0.0) {
            problems.push(format!("g must be finite and >= 0 (got {})", self.g));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CoefficientError::InvalidParams(problems.join("; ")))
        }
    }
}

/// Normal-mode frequencies and mixing angle of the coupled two-mode
/// Hamiltonian. `a1 = a cosθ + b sinθ`, `a2 = −a sinθ + b cosθ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalModeData {
    pub omega_1: f64,
    pub omega_2: f64,
    pub cos_theta: f64,
    pub sin_theta: f64,
}

/// Diagonalizes `[[ω_a, g], [g, ω_b]]`.
///
/// When the modes are exactly degenerate and uncoupled the angle is
/// undefined; θ = π/4 is returned in that case.
pub fn normal_modes(params: &ModelParams) -> NormalModeData {
    let sum = params.omega_a + params.omega_b;
    let diff = params.omega_a - params.omega_b;
    let split = diff.hypot(2.0 * params.g);
    let (cos_theta, sin_theta) = if split == 0.0 {
        (FRAC_1_SQRT_2, FRAC_1_SQRT_2)
    } else if diff >= 0.0 {
        // sinθ cosθ = g / split; take the larger component from the square
        // root and the smaller one from this product to avoid cancellation.
        let c = (0.5 * (1.0 + diff / split)).sqrt();
        (c, params.g / (split * c))
    } else {
        let s = (0.5 * (1.0 - diff / split)).sqrt();
        (params.g / (split * s), s)
    };
    NormalModeData {
        omega_1: 0.5 * (sum + split),
        omega_2: 0.5 * (sum - split),
        cos_theta,
        sin_theta,
    }
}

/// `ξ_j(ω) = ∫₀^{τ_c} e^{i(ω−ω_j)τ} dτ`.
pub fn xi(omega: f64, omega_j: f64, tau_c: f64) -> C64 {
    let detuning = omega - omega_j;
    let x = detuning * tau_c;
    if x.abs() < XI_SERIES_THRESHOLD {
        return C64::new(tau_c * (1.0 - x * x / 6.0), tau_c * x / 2.0);
    }
    let half_sin = (0.5 * x).sin();
    C64::new(x.sin() / detuning, 2.0 * half_sin * half_sin / detuning)
}

/// Reservoir data sampled on a strictly increasing frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirSpectrum {
    grid: Vec<f64>,
    density: Vec<f64>,
    alpha: Vec<C64>,
    beta: Vec<C64>,
    tau_c: f64,
}

impl ReservoirSpectrum {
    pub fn new(
        grid: Vec<f64>,
        density: Vec<f64>,
        alpha: Vec<C64>,
        beta: Vec<C64>,
        tau_c: f64,
    ) -> Result<Self, CoefficientError> {
        let n = grid.len();
        if n < 2 {
            return Err(CoefficientError::InvalidSpectrum(format!(
                "grid needs at least 2 points, got {n}"
            )));
        }
        if density.len() != n || alpha.len() != n || beta.len() != n {
            return Err(CoefficientError::InvalidSpectrum(format!(
                "column lengths differ: grid {n}, D {}, alpha {}, beta {}",
                density.len(),
                alpha.len(),
                beta.len()
            )));
        }
        if !(tau_c.is_finite() && tau_c > 0.0) {
            return Err(CoefficientError::InvalidSpectrum(format!(
                "tau_c must be finite and > 0 (got {tau_c})"
            )));
        }
        for (i, w) in grid.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(CoefficientError::InvalidSpectrum(format!(
                    "grid not strictly increasing at row {}: {} then {}",
                    i + 1,
                    w[0],
                    w[1]
                )));
            }
        }
        for i in 0..n {
            let finite = grid[i].is_finite()
                && density[i].is_finite()
                && alpha[i].re.is_finite()
                && alpha[i].im.is_finite()
                && beta[i].re.is_finite()
                && beta[i].im.is_finite();
            if !finite {
                return Err(CoefficientError::InvalidSpectrum(format!(
                    "non-finite value at row {i}"
                )));
            }
            if density[i] < 0.0 {
                return Err(CoefficientError::InvalidSpectrum(format!(
                    "negative mode density {} at row {i}",
                    density[i]
                )));
            }
        }
        Ok(Self { grid, density, alpha, beta, tau_c })
    }

    /// Reads the six-column CSV format. `τ_c` is not part of the file.
    pub fn from_csv_reader<R: Read>(reader: R, tau_c: f64) -> Result<Self, CoefficientError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let found: Vec<&str> = headers.iter().collect();
        if found != SPECTRUM_CSV_HEADER {
            return Err(CoefficientError::InvalidSpectrum(format!(
                "expected header `{}`, found `{}`",
                SPECTRUM_CSV_HEADER.join(","),
                found.join(",")
            )));
        }
        let (mut grid, mut density, mut alpha, mut beta) = (vec![], vec![], vec![], vec![]);
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            let mut vals = [0.0f64; 6];
            for (k, v) in vals.iter_mut().enumerate() {
                let field = record.get(k).ok_or_else(|| {
                    CoefficientError::InvalidSpectrum(format!("row {}: missing column {k}", row + 1))
                })?;
                *v = field.parse().map_err(|e| {
                    CoefficientError::InvalidSpectrum(format!(
                        "row {}, column {}: cannot parse `{field}`: {e}",
                        row + 1,
                        SPECTRUM_CSV_HEADER[k]
                    ))
                })?;
            }
            grid.push(vals[0]);
            density.push(vals[1]);
            alpha.push(C64::new(vals[2], vals[3]));
            beta.push(C64::new(vals[4], vals[5]));
        }
        Self::new(grid, density, alpha, beta, tau_c)
    }

    pub fn from_csv_path(path: impl AsRef<Path>, tau_c: f64) -> Result<Self, CoefficientError> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(std::io::BufReader::new(file), tau_c)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), CoefficientError> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(SPECTRUM_CSV_HEADER)?;
        for i in 0..self.grid.len() {
            wtr.write_record([
                format!("{:.16e}", self.grid[i]),
                format!("{:.16e}", self.density[i]),
                format!("{:.16e}", self.alpha[i].re),
                format!("{:.16e}", self.alpha[i].im),
                format!("{:.16e}", self.beta[i].re),
                format!("{:.16e}", self.beta[i].im),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Keeps every `factor`-th sample (the last sample is always kept).
    pub fn decimated(&self, factor: usize) -> Result<Self, CoefficientError> {
        let factor = factor.max(1);
        let n = self.grid.len();
        let mut idx: Vec<usize> = (0..n).step_by(factor).collect();
        if *idx.last().unwrap() != n - 1 {
            idx.push(n - 1);
        }
        Self::new(
            idx.iter().map(|&i| self.grid[i]).collect(),
            idx.iter().map(|&i| self.density[i]).collect(),
            idx.iter().map(|&i| self.alpha[i]).collect(),
            idx.iter().map(|&i| self.beta[i]).collect(),
            self.tau_c,
        )
    }

    pub fn with_tau_c(&self, tau_c: f64) -> Result<Self, CoefficientError> {
        Self::new(
            self.grid.clone(),
            self.density.clone(),
            self.alpha.clone(),
            self.beta.clone(),
            tau_c,
        )
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }
    pub fn density(&self) -> &[f64] {
        &self.density
    }
    pub fn alpha(&self) -> &[C64] {
        &self.alpha
    }
    pub fn beta(&self) -> &[C64] {
        &self.beta
    }
    pub fn tau_c(&self) -> f64 {
        self.tau_c
    }
}

/// The eight real master-equation constants in the laboratory frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabCoefficients {
    pub k_aa: f64,
    pub k_ab: f64,
    pub k_ba: f64,
    pub k_bb: f64,
    pub d_aa: f64,
    pub d_ab: f64,
    pub d_ba: f64,
    pub d_bb: f64,
}

impl LabCoefficients {
    /// Independent damping of the two modes, no cross terms, no shifts.
    pub fn diagonal(k_aa: f64, k_bb: f64) -> Self {
        Self { k_aa, k_bb, ..Self::default() }
    }

    fn named(&self) -> [(&'static str, f64); 8] {
        [
            ("k_aa", self.k_aa),
            ("k_ab", self.k_ab),
            ("k_ba", self.k_ba),
            ("k_bb", self.k_bb),
            ("d_aa", self.d_aa),
            ("d_ab", self.d_ab),
            ("d_ba", self.d_ba),
            ("d_bb", self.d_bb),
        ]
    }

    /// Checks finiteness and non-negative diagonal rates.
    pub fn validate(&self) -> Result<(), CoefficientError> {
        for (name, v) in self.named() {
            if !v.is_finite() {
                return Err(CoefficientError::NonFinite(name));
            }
        }
        if self.k_aa < 0.0 {
            return Err(CoefficientError::NegativeDiagonalRate { name: "k_aa", value: self.k_aa });
        }
        if self.k_bb < 0.0 {
            return Err(CoefficientError::NegativeDiagonalRate { name: "k_bb", value: self.k_bb });
        }
        Ok(())
    }

    /// Largest absolute value among the eight constants.
    pub fn max_abs(&self) -> f64 {
        self.named().iter().fold(0.0, |m, (_, v)| m.max(v.abs()))
    }
}

/// Dissipation matrix of the master equation written in canonical form,
/// `Γ = [[2k_aa, (k_ab+k_ba) + i(Δ_ab−Δ_ba)], [c.c., 2k_bb]]`.
///
/// The generator is completely positive iff `Γ` is positive semidefinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalityScreen {
    pub gamma: [[C64; 2]; 2],
    pub eigenvalues: [f64; 2],
}

impl PhysicalityScreen {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// PSD up to a relative round-off allowance.
    pub fn is_positive_semidefinite(&self) -> bool {
        let scale = self.eigenvalues[0].abs().max(self.eigenvalues[1].abs());
        self.eigenvalues[0] >= -1e-12 * scale.max(f64::MIN_POSITIVE)
    }

    /// Human-readable warning when the screen fails.
    pub fn warning(&self) -> Option<String> {
        (!self.is_positive_semidefinite()).then(|| {
            format!(
                "dissipation matrix Γ is not positive semidefinite (eigenvalues {:.6e}, {:.6e}); \
                 dynamics may not be completely positive",
                self.eigenvalues[0], self.eigenvalues[1]
            )
        })
    }
}

pub fn physicality_screen(coeffs: &LabCoefficients) -> PhysicalityScreen {
    let p = 2.0 * coeffs.k_aa;
    let q = 2.0 * coeffs.k_bb;
    let off = C64::new(coeffs.k_ab + coeffs.k_ba, coeffs.d_ab - coeffs.d_ba);
    let mean = 0.5 * (p + q);
    let radius = (0.5 * (p - q)).hypot(off.norm());
    PhysicalityScreen {
        gamma: [[C64::new(p, 0.0), off], [off.conj(), C64::new(q, 0.0)]],
        eigenvalues: [mean - radius, mean + radius],
    }
}

/// Options for [`coefficients_from_spectrum_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Largest allowed change under midpoint refinement, relative to the
    /// largest coefficient magnitude.
    pub rel_tol: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-6 }
    }
}

/// The four complex integrands `k_xy + iΔ_xy` at one frequency.
fn integrands(
    omega: f64,
    density: f64,
    alpha: C64,
    beta: C64,
    nm: &NormalModeData,
    tau_c: f64,
) -> [C64; 4] {
    let xi1 = xi(omega, nm.omega_1, tau_c);
    let xi2 = xi(omega, nm.omega_2, tau_c);
    let c2 = nm.cos_theta * nm.cos_theta;
    let s2 = nm.sin_theta * nm.sin_theta;
    let sc = nm.sin_theta * nm.cos_theta;
    let eta = xi1 * c2 + xi2 * s2;
    let mu = xi2 * c2 + xi1 * s2;
    let nu = (xi1 - xi2) * sc;
    let aa_ = alpha.norm_sqr();
    let bb_ = beta.norm_sqr();
    let ab_ = alpha * beta.conj();
    let ba_ = beta * alpha.conj();
    [
        (eta * aa_ + ab_ * nu) * density,
        (nu * aa_ + ab_ * mu) * density,
        (ba_ * eta + nu * bb_) * density,
        (ba_ * nu + mu * bb_) * density,
    ]
}

/// Result of the spectrum quadrature with its refinement error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureReport {
    pub coefficients: LabCoefficients,
    /// Largest change of any complex coefficient under midpoint refinement.
    pub refinement_change: f64,
    /// Largest coefficient magnitude (the scale for `rel_tol`).
    pub scale: f64,
}

pub fn coefficients_from_spectrum(
    spectrum: &ReservoirSpectrum,
    nm: &NormalModeData,
) -> Result<LabCoefficients, CoefficientError> {
    coefficients_from_spectrum_with(spectrum, nm, &QuadratureOptions::default())
        .map(|r| r.coefficients)
}

pub fn coefficients_from_spectrum_with(
    spectrum: &ReservoirSpectrum,
    nm: &NormalModeData,
    opts: &QuadratureOptions,
) -> Result<QuadratureReport, CoefficientError> {
    const NAMES: [&str; 4] = ["k_aa + iΔ_aa", "k_ab + iΔ_ab", "k_ba + iΔ_ba", "k_bb + iΔ_bb"];
    let grid = spectrum.grid();
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    if lo > nm.omega_2 || hi < nm.omega_1 {
        return Err(CoefficientError::GridDoesNotCover {
            lo,
            hi,
            omega_1: nm.omega_1,
            omega_2: nm.omega_2,
        });
    }
    let tau = spectrum.tau_c();
    let at = |i: usize| {
        integrands(grid[i], spectrum.density[i], spectrum.alpha[i], spectrum.beta[i], nm, tau)
    };

    let mut coarse = [C64::new(0.0, 0.0); 4];
    let mut fine = [C64::new(0.0, 0.0); 4];
    let mut left = at(0);
    for i in 0..grid.len() - 1 {
        let right = at(i + 1);
        let h = grid[i + 1] - grid[i];
        let mid = integrands(
            0.5 * (grid[i] + grid[i + 1]),
            0.5 * (spectrum.density[i] + spectrum.density[i + 1]),
            0.5 * (spectrum.alpha[i] + spectrum.alpha[i + 1]),
            0.5 * (spectrum.beta[i] + spectrum.beta[i + 1]),
            nm,
            tau,
        );
        for k in 0..4 {
            coarse[k] += (left[k] + right[k]) * (0.5 * h);
            fine[k] += (left[k] + mid[k] * 2.0 + right[k]) * (0.25 * h);
        }
        left = right;
    }

    let extrapolated: Vec<C64> = (0..4).map(|k| (fine[k] * 4.0 - coarse[k]) / 3.0).collect();
    let scale = fine.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let mut refinement_change = 0.0f64;
    let mut worst = 0;
    for k in 0..4 {
        let change = (fine[k] - coarse[k]).norm();
        if change > refinement_change {
            refinement_change = change;
            worst = k;
        }
    }
    if scale > 0.0 && refinement_change > opts.rel_tol * scale {
        return Err(CoefficientError::GridTooCoarse {
            coefficient: NAMES[worst],
            change: refinement_change,
            scale,
            tolerance: opts.rel_tol,
        });
    }

    let coefficients = LabCoefficients {
        k_aa: extrapolated[0].re,
        k_ab: extrapolated[1].re,
        k_ba: extrapolated[2].re,
        k_bb: extrapolated[3].re,
        d_aa: extrapolated[0].im,
        d_ab: extrapolated[1].im,
        d_ba: extrapolated[2].im,
        d_bb: extrapolated[3].im,
    };
    let floor = -opts.rel_tol * scale;
    if coefficients.k_aa < floor {
        return Err(CoefficientError::NegativeDiagonalRate { name: "k_aa", value: coefficients.k_aa });
    }
    if coefficients.k_bb < floor {
        return Err(CoefficientError::NegativeDiagonalRate { name: "k_bb", value: coefficients.k_bb });
    }
    Ok(QuadratureReport { coefficients, refinement_change, scale })
}

/// Reservoir-shifted frequencies and couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveDetunings {
    pub omega_aa: f64,
    pub omega_bb: f64,
    pub omega_ab: f64,
    pub omega_ba: f64,
}

pub fn effective_detunings(params: &ModelParams, coeffs: &LabCoefficients) -> EffectiveDetunings {
    EffectiveDetunings {
        omega_aa: params.omega_a - coeffs.d_aa,
        omega_bb: params.omega_b - coeffs.d_bb,
        omega_ab: params.g - coeffs.d_ab,
        omega_ba: params.g - coeffs.d_ba,
    }
}
