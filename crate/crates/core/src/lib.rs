// Copyright 2026 The cavityduo Authors
// SPDX-License-Identifier: Apache-2.0

//! Two linearly coupled dissipative bosonic modes sharing a zero-temperature
//! reservoir.
//!
//! The crate evaluates the closed-form Lie-algebraic solution of the
//! two-mode master equation (coherent pairs, entangled cat states, linear
//! entropy) and checks it against an independent fixed-step integrator on a
//! truncated two-mode Fock space.
//!
//! Layout:
//!
//! * [`coefficients`]: normal modes, reservoir quadrature and the eight
//!   laboratory-frame master-equation constants.
//! * [`propagator`]: the constants `c`, `r`, `R`, the auxiliary functions
//!   `f1, f2, l1, l2` and the twelve factorization exponents.
//! * [`states`]: coherent-pair and cat-state evolution, weak-coupling rates,
//!   linear entropy.
//! * [`lindblad_oracle`]: brute-force RK4 integration of the master equation
//!   and the numerical superoperator commutator table.
//! * [`harness`]: run configuration, scenario runners and CSV output used by
//!   the `cavityduo` binary.

pub mod coefficients;
pub mod harness;
pub mod lindblad_oracle;
pub mod propagator;
pub mod states;

/// Complex double used throughout.
pub type C64 = num_complex::Complex64;

pub use coefficients::{
    EffectiveDetunings, LabCoefficients, ModelParams, NormalModeData, ReservoirSpectrum,
};
pub use lindblad_oracle::{DensityMatrix, Diagnostics, LiouvillianSpec};
pub use propagator::{AuxFunctions, FactorizationExponents, PropagatorConstants};
pub use states::{CatComponents, CatState, CoherentPair, EntropyPoint};
