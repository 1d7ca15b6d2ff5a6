// Copyright 2026 The cavityduo Authors
// SPDX-License-Identifier: Apache-2.0

//! Analytic state evolution: coherent pairs, weak-coupling rates and the
//! entangled cat `|w, 0⟩ − e^{iφ}|0, w⟩`.
//!
//! At zero temperature a product of coherent states stays a product of
//! coherent states, with amplitudes moved by the 2×2 amplitude map. A cat is
//! a sum of two such branches; its coherence term is carried by the dyad
//! rule `|α⟩⟨β| → (⟨β|α⟩ / ⟨β(t)|α(t)⟩) |α(t)⟩⟨β(t)|`.

use thiserror::Error;

use crate::lindblad_oracle::{coherent_fock, product_state, DensityMatrix, OracleError};
use crate::propagator::{amplitude_map, AuxFunctions, PropagatorConstants};
use crate::C64;

/// Lower clamp for `y` in the entropy formula.
pub const Y_FLOOR: f64 = 1e-300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("cat amplitude must be finite and nonzero (got {0})")]
    DegenerateCat(C64),
    #[error(
        "weak-coupling expansion invalid: need k_bb > k_aa and g < Δk/2 (k_aa = {k_aa}, k_bb = {k_bb}, g = {g})"
    )]
    WeakCouplingInvalid { k_aa: f64, k_bb: f64, g: f64 },
    #[error("closed-form linear entropy is only available for φ = 0 (got φ = {0})")]
    UnsupportedPhase(f64),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// `e^{−|α|²/2 − |β|²/2 + α*β}`.
pub fn coherent_overlap(alpha: C64, beta: C64) -> C64 {
    (alpha.conj() * beta - 0.5 * (alpha.norm_sqr() + beta.norm_sqr())).exp()
}

/// Amplitudes of the product coherent state `|v_a⟩ ⊗ |v_b⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentPair {
    pub v_a: C64,
    pub v_b: C64,
}

impl CoherentPair {
    pub fn new(v_a: C64, v_b: C64) -> Self {
        Self { v_a, v_b }
    }
}

pub fn evolve_coherent_pair(init: &CoherentPair, pc: &PropagatorConstants, aux: &AuxFunctions) -> CoherentPair {
    let m = amplitude_map(pc, aux);
    CoherentPair {
        v_a: m[0][0] * init.v_a + m[0][1] * init.v_b,
        v_b: m[1][0] * init.v_a + m[1][1] * init.v_b,
    }
}

/// Split decay rates of the slow (mostly a) and fast (mostly b) modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakRates {
    pub k_plus: f64,
    pub k_minus: f64,
    /// Expansion parameter `g/Δk`.
    pub ratio: f64,
}

pub fn weak_coupling_rates(k_aa: f64, k_bb: f64, g: f64) -> Result<WeakRates, StateError> {
    let dk = k_bb - k_aa;
    if !(dk > 0.0) || !(g >= 0.0) || g >= 0.5 * dk {
        return Err(StateError::WeakCouplingInvalid { k_aa, k_bb, g });
    }
    let shift = g * g / dk;
    Ok(WeakRates { k_plus: k_aa + shift, k_minus: k_bb - shift, ratio: g / dk })
}

/// First-order amplitudes for degenerate modes (`ω_a = ω_b = ω`) with only
/// direct coupling.
pub fn evolve_coherent_weak(
    init: &CoherentPair,
    t: f64,
    omega: f64,
    k_aa: f64,
    k_bb: f64,
    g: f64,
) -> Result<CoherentPair, StateError> {
    let rates = weak_coupling_rates(k_aa, k_bb, g)?;
    let dk = k_bb - k_aa;
    let rot = C64::new(0.0, -omega * t).exp();
    let slow = (-rates.k_plus * t).exp();
    let fast = (-rates.k_minus * t).exp();
    let feed = C64::new(0.0, g / dk) * (fast - slow);
    Ok(CoherentPair {
        v_a: rot * (init.v_a * slow + feed * init.v_b),
        v_b: rot * (init.v_b * fast + feed * init.v_a),
    })
}

/// The cat `N_φ^{1/2}(|w, 0⟩ − e^{iφ}|0, w⟩)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatState {
    pub w: C64,
    pub phi: f64,
}

impl CatState {
    pub fn new(w: C64, phi: f64) -> Result<Self, StateError> {
        if !(w.re.is_finite() && w.im.is_finite()) || w.norm() == 0.0 || !phi.is_finite() {
            return Err(StateError::DegenerateCat(w));
        }
        Ok(Self { w, phi })
    }

    /// `|⟨0|w⟩|² = e^{−|w|²}`.
    pub fn vacuum_overlap(&self) -> f64 {
        (-self.w.norm_sqr()).exp()
    }

    pub fn normalization(&self) -> f64 {
        1.0 / (2.0 - 2.0 * self.vacuum_overlap() * self.phi.cos())
    }
}

/// Branch amplitudes: `|w,0⟩ → |σ1, ε2⟩`, `|0,w⟩ → |ε1, σ2⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatComponents {
    pub t: f64,
    pub sigma_1: C64,
    pub sigma_2: C64,
    pub eps_1: C64,
    pub eps_2: C64,
}

impl CatComponents {
    /// `⟨ε1|σ1⟩⟨σ2|ε2⟩`: overlap of the second branch with the first.
    pub fn branch_overlap(&self) -> C64 {
        coherent_overlap(self.eps_1, self.sigma_1) * coherent_overlap(self.sigma_2, self.eps_2)
    }

    /// Coefficient of `|A(t)⟩⟨B(t)|` relative to `−N_φ`.
    fn coherence(&self, cat: &CatState) -> C64 {
        let q = self.branch_overlap();
        let q = if q.norm() < Y_FLOOR { C64::new(Y_FLOOR, 0.0) } else { q };
        C64::from_polar(1.0, -cat.phi) * cat.vacuum_overlap() / q
    }

    /// `⟨a⟩` of the evolved cat.
    pub fn mean_a(&self, cat: &CatState) -> C64 {
        let x = cat.vacuum_overlap();
        let e = C64::from_polar(1.0, cat.phi);
        (self.sigma_1 + self.eps_1 - e.conj() * x * self.sigma_1 - e * x * self.eps_1) * cat.normalization()
    }

    /// `⟨b⟩` of the evolved cat.
    pub fn mean_b(&self, cat: &CatState) -> C64 {
        let x = cat.vacuum_overlap();
        let e = C64::from_polar(1.0, cat.phi);
        (self.eps_2 + self.sigma_2 - e.conj() * x * self.eps_2 - e * x * self.sigma_2) * cat.normalization()
    }
}

pub fn cat_components(cat: &CatState, pc: &PropagatorConstants, aux: &AuxFunctions) -> CatComponents {
    let m = amplitude_map(pc, aux);
    CatComponents {
        t: aux.t,
        sigma_1: m[0][0] * cat.w,
        sigma_2: m[1][1] * cat.w,
        eps_1: m[0][1] * cat.w,
        eps_2: m[1][0] * cat.w,
    }
}

/// Projected cat state with the size of the trace renormalization.
#[derive(Debug, Clone, PartialEq)]
pub struct CatDensity {
    pub rho: DensityMatrix,
    /// `|Tr ρ − 1|` before renormalization (truncation loss only).
    pub trace_correction: f64,
}

/// `N_φ(|A⟩⟨A| + |B⟩⟨B| − κ|A⟩⟨B| − κ*|B⟩⟨A|)` on the truncated Fock
/// space, `κ = e^{−iφ} x / ⟨B(t)|A(t)⟩`.
pub fn cat_density_matrix(
    cat: &CatState,
    comps: &CatComponents,
    dim_a: usize,
    dim_b: usize,
) -> Result<CatDensity, StateError> {
    let first = product_state(&coherent_fock(comps.sigma_1, dim_a)?, &coherent_fock(comps.eps_2, dim_b)?);
    let second = product_state(&coherent_fock(comps.eps_1, dim_a)?, &coherent_fock(comps.sigma_2, dim_b)?);
    let kappa = comps.coherence(cat);
    let norm = cat.normalization();
    let d = dim_a * dim_b;
    let mut data = Vec::with_capacity(d * d);
    for i in 0..d {
        let (ai, bi) = (first[i], second[i]);
        for j in 0..d {
            let (aj, bj) = (first[j].conj(), second[j].conj());
            data.push((ai * aj + bi * bj - kappa * ai * bj - kappa.conj() * bi * aj) * norm);
        }
    }
    let mut rho = DensityMatrix::from_raw(dim_a, dim_b, data)?;
    let tr = rho.trace().re;
    rho.scale(C64::new(1.0 / tr, 0.0));
    Ok(CatDensity { rho, trace_correction: (tr - 1.0).abs() })
}

/// Linear entropy of the evolved cat.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyPoint {
    pub t: f64,
    /// `e^{−|w|²}`.
    pub x: f64,
    /// `|⟨ε1|σ1⟩| |⟨σ2|ε2⟩|`.
    pub y: f64,
    pub delta: f64,
}

pub fn linear_entropy(cat: &CatState, comps: &CatComponents) -> Result<EntropyPoint, StateError> {
    if cat.phi != 0.0 {
        return Err(StateError::UnsupportedPhase(cat.phi));
    }
    let x = cat.vacuum_overlap();
    let y = comps.branch_overlap().norm().max(Y_FLOOR);
    let delta = (y * y - 1.0) * (x * x - y * y) / (2.0 * y * y * (1.0 - x) * (1.0 - x));
    Ok(EntropyPoint { t: comps.t, x, y, delta })
}

/// `|x − ⟨ε1|σ1⟩⟨σ2|ε2⟩|`; zero when the branch coherence is untouched.
pub fn coherence_preservation_residual(cat: &CatState, comps: &CatComponents) -> f64 {
    (C64::new(cat.vacuum_overlap(), 0.0) - comps.branch_overlap()).norm()
}
