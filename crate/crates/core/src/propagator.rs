// Copyright 2026 The cavityduo Authors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form propagator of the two-mode master equation.
//!
//! The mode amplitudes obey a linear 2×2 system whose generator splits into
//! a common complex rate `R = k_m + iω_m` times the identity plus a traceless
//! part `[[c, −γ_ab], [−γ_ba, −c]]`, with `γ_ab = iΩ_ab + k_ab` and
//! `γ_ba = iΩ_ba + k_ba`. The exponential of the traceless part is the
//! unimodular matrix `[[f1, l1], [l2, f2]]`.
//!
//! Everything is written through `cosh(rt)` and `sinh(rt)/r`, both even in
//! `r`, so the sign of the square root never matters.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::coefficients::{EffectiveDetunings, LabCoefficients};
use crate::lindblad_oracle::{ladder_a, ladder_b, DensityMatrix};
use crate::C64;

/// `sinh(z)/z` switches to its Taylor series below this `|z|`.
pub const SINHC_SERIES_THRESHOLD: f64 = 1e-4;

/// `|f1|` below this makes the ordered factorization singular.
pub const SINGULAR_F1: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PropagatorError {
    #[error("ordered factorization is singular at t = {t}: |f1| = {f1_abs:.3e}")]
    FactorizationSingular { t: f64, f1_abs: f64 },
}

/// Time-independent constants of the solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorConstants {
    /// Half the difference of the two diagonal complex rates, `c`.
    pub asymmetry: C64,
    /// Principal root `r` of `c² + γ_ba γ_ab`.
    pub root: C64,
    /// Common complex rate `R = k_m + iω_m`.
    pub common_rate: C64,
    pub k_m: f64,
    pub omega_m: f64,
    /// `iΩ_ab + k_ab`: feeds mode a from mode b.
    pub coupling_ab: C64,
    /// `iΩ_ba + k_ba`: feeds mode b from mode a.
    pub coupling_ba: C64,
}

impl PropagatorConstants {
    /// Same constants with the root replaced (used to check branch
    /// independence and small-root continuity).
    pub fn with_root(&self, root: C64) -> Self {
        Self { root, ..*self }
    }
}

pub fn constants(dets: &EffectiveDetunings, coeffs: &LabCoefficients) -> PropagatorConstants {
    let asymmetry = C64::new(
        0.5 * (coeffs.k_bb - coeffs.k_aa),
        0.5 * (dets.omega_bb - dets.omega_aa),
    );
    let coupling_ab = C64::new(coeffs.k_ab, dets.omega_ab);
    let coupling_ba = C64::new(coeffs.k_ba, dets.omega_ba);
    let root = (asymmetry * asymmetry + coupling_ba * coupling_ab).sqrt();
    let k_m = 0.5 * (coeffs.k_aa + coeffs.k_bb);
    let omega_m = 0.5 * (dets.omega_aa + dets.omega_bb);
    PropagatorConstants {
        asymmetry,
        root,
        common_rate: C64::new(k_m, omega_m),
        k_m,
        omega_m,
        coupling_ab,
        coupling_ba,
    }
}

/// Entries of the unimodular transfer matrix `[[f1, l1], [l2, f2]]` at `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxFunctions {
    pub t: f64,
    pub f1: C64,
    pub f2: C64,
    pub l1: C64,
    pub l2: C64,
}

impl AuxFunctions {
    pub fn determinant(&self) -> C64 {
        self.f1 * self.f2 - self.l1 * self.l2
    }
}

/// `sinh(r t)/r`, even in `r`.
fn sinh_over_root(root: C64, t: f64) -> C64 {
    let z = root * t;
    if z.norm() < SINHC_SERIES_THRESHOLD {
        let z2 = z * z;
        (C64::new(1.0, 0.0) + z2 / 6.0 + z2 * z2 / 120.0) * t
    } else {
        z.sinh() / root
    }
}

pub fn aux_functions(t: f64, pc: &PropagatorConstants) -> AuxFunctions {
    if t == 0.0 {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        return AuxFunctions { t, f1: one, f2: one, l1: zero, l2: zero };
    }
    let s = sinh_over_root(pc.root, t);
    let ch = (pc.root * t).cosh();
    AuxFunctions {
        t,
        f1: ch + pc.asymmetry * s,
        f2: ch - pc.asymmetry * s,
        l1: -pc.coupling_ab * s,
        l2: -pc.coupling_ba * s,
    }
}

/// `e^{−Rt}[[f1, l1], [l2, f2]]`: maps initial amplitudes `(v_a, v_b)` to
/// their values at `aux.t`.
pub fn amplitude_map(pc: &PropagatorConstants, aux: &AuxFunctions) -> [[C64; 2]; 2] {
    let t = aux.t;
    if (pc.root * t).re.abs() <= 1.0 {
        let e = (-pc.common_rate * t).exp();
        return [[e * aux.f1, e * aux.l1], [e * aux.l2, e * aux.f2]];
    }
    // Fold the common decay into each branch so cosh/sinh cannot overflow
    // at late times.
    let up = ((pc.root - pc.common_rate) * t).exp();
    let down = ((-pc.root - pc.common_rate) * t).exp();
    let ch = (up + down) * 0.5;
    let s = (up - down) / (pc.root * 2.0);
    [
        [ch + pc.asymmetry * s, -pc.coupling_ab * s],
        [-pc.coupling_ba * s, ch - pc.asymmetry * s],
    ]
}

/// Exponents of the twelve-factor ordered product
///
/// `ρ(t) = e^{h1 a•a†} e^{h2 b•b†} e^{z_l a•b†} e^{z b•a†} e^{n_l •a†b}
///         e^{n b†a•} e^{m2 b†b•} e^{p2 •b†b} e^{m1 a†a•} e^{p1 •a†a}
///         e^{q a†b•} e^{q_l •b†a} ρ(0)`.
///
/// The number-operator exponents are stored as exponentials (`exp_m1` is
/// `e^{m1}` and so on).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorizationExponents {
    pub t: f64,
    pub exp_m1: C64,
    pub exp_m2: C64,
    pub h1: C64,
    pub h2: C64,
    pub z: C64,
    pub z_l: C64,
    pub n: C64,
    pub n_l: C64,
    pub q: C64,
    pub q_l: C64,
    pub exp_p1: C64,
    pub exp_p2: C64,
}

pub fn factor_exponents(
    pc: &PropagatorConstants,
    aux: &AuxFunctions,
) -> Result<FactorizationExponents, PropagatorError> {
    let t = aux.t;
    let f1_abs = aux.f1.norm();
    if f1_abs < SINGULAR_F1 {
        return Err(PropagatorError::FactorizationSingular { t, f1_abs });
    }
    let n = aux.l2 / aux.f1;
    let q = aux.l1 / aux.f1;
    let exp_m1 = (-pc.common_rate * t).exp() * aux.f1;
    let exp_m2 = (-pc.common_rate * (2.0 * t)).exp() / exp_m1;
    let grow = (2.0 * pc.k_m * t).exp();
    let h1 = C64::new((aux.f2.norm_sqr() + aux.l2.norm_sqr()) * grow - 1.0, 0.0);
    let h2 = C64::new((aux.f1.norm_sqr() + aux.l1.norm_sqr()) * grow - 1.0, 0.0);
    let z = (-aux.l1 * aux.f2.conj() - aux.l2.conj() * aux.f1) * grow;
    Ok(FactorizationExponents {
        t,
        exp_m1,
        exp_m2,
        h1,
        h2,
        z,
        z_l: z.conj(),
        n,
        n_l: n.conj(),
        q,
        q_l: q.conj(),
        exp_p1: exp_m1.conj(),
        exp_p2: exp_m2.conj(),
    })
}

/// `e^{sX}` for a nilpotent ladder product `X`, by its terminating series.
fn exp_nilpotent(x: &DMatrix<C64>, s: C64, max_order: usize) -> DMatrix<C64> {
    let d = x.nrows();
    let mut out = DMatrix::<C64>::identity(d, d);
    let mut term = out.clone();
    for k in 1..=max_order {
        term = (&term * x) * (s / k as f64);
        if term.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            break;
        }
        out += &term;
    }
    out
}

/// `Σ_k s^k/k! X^k ρ Y^k` for nilpotent `X`, `Y`.
fn exp_sandwich(
    left: &DMatrix<C64>,
    right: &DMatrix<C64>,
    s: C64,
    rho: &DMatrix<C64>,
    max_order: usize,
) -> DMatrix<C64> {
    let mut out = rho.clone();
    let mut term = rho.clone();
    for k in 1..=max_order {
        term = (left * &term * right) * (s / k as f64);
        if term.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            break;
        }
        out += &term;
    }
    out
}

/// Applies the ordered product to `rho` on its truncated Fock space.
pub fn apply_factored(fe: &FactorizationExponents, rho: &DensityMatrix) -> DensityMatrix {
    let (da, db) = (rho.dim_a(), rho.dim_b());
    let order = da.max(db);
    let a = ladder_a(da, db);
    let b = ladder_b(da, db);
    let ad = a.adjoint();
    let bd = b.adjoint();
    let mut m = rho.to_dmatrix();

    // Rightmost factor first.
    m = &m * exp_nilpotent(&(&bd * &a), fe.q_l, order);
    m = exp_nilpotent(&(&ad * &b), fe.q, order) * &m;
    let d = da * db;
    for i in 0..d {
        let (na, nb) = (i / db, i % db);
        for j in 0..d {
            let (ma, mb) = (j / db, j % db);
            m[(i, j)] *= fe.exp_m1.powu(na as u32)
                * fe.exp_p1.powu(ma as u32)
                * fe.exp_m2.powu(nb as u32)
                * fe.exp_p2.powu(mb as u32);
        }
    }
    m = exp_nilpotent(&(&bd * &a), fe.n, order) * &m;
    m = &m * exp_nilpotent(&(&ad * &b), fe.n_l, order);
    m = exp_sandwich(&b, &ad, fe.z, &m, order);
    m = exp_sandwich(&a, &bd, fe.z_l, &m, order);
    m = exp_sandwich(&b, &bd, fe.h2, &m, order);
    m = exp_sandwich(&a, &ad, fe.h1, &m, order);
    DensityMatrix::from_dmatrix(da, db, &m)
}
