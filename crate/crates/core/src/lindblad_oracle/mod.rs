// Copyright 2026 The cavityduo Authors
// SPDX-License-Identifier: Apache-2.0

//! Brute-force reference for the two-mode master equation.
//!
//! States are dense density matrices on the truncated product space
//! `{0..dim_a} ⊗ {0..dim_b}`, stored row-major with basis index
//! `n_a·dim_b + n_b`. The Liouvillian is applied matrix-free and integrated
//! with fixed-step RK4. The [`algebra`] submodule checks the commutator
//! table of the twelve superoperators numerically.

use std::io::Write;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::states::coherent_overlap;
use crate::C64;

pub mod algebra;
pub mod evolve;
pub mod liouvillian;

pub use algebra::{check_commutator_table, verify_commutator_table, AlgebraReport, CommutatorTable};
pub use evolve::{evolve, EvolveOptions, Evolution};
pub use liouvillian::{apply_liouvillian, CompiledLiouvillian, LiouvillianSpec, Superop};

/// Largest discarded Poisson mass allowed when expanding a coherent state.
pub const TAIL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("Fock cutoff {dim} too small for amplitude |v| = {amplitude:.4}: discarded mass {tail:.3e}")]
    CutoffTooSmall { amplitude: f64, dim: usize, tail: f64 },
    #[error("cat amplitude w must be nonzero")]
    DegenerateCat,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid Fock dimension: {0}")]
    InvalidDimension(String),
    #[error("time step {dt:e} exceeds the stability bound {bound:e}")]
    StepTooLarge { dt: f64, bound: f64 },
    #[error("positivity violated at t = {t}: minimum eigenvalue {min_eig:.3e}")]
    PositivityViolation { t: f64, min_eig: f64 },
    #[error("commutator table mismatch: [{row}, {col}] off by {discrepancy:.3e}")]
    TableMismatch { row: &'static str, col: &'static str, discrepancy: f64 },
    #[error("invalid evolution options: {0}")]
    InvalidOptions(String),
}

/// Annihilation operator of mode a on the product space.
pub fn ladder_a(dim_a: usize, dim_b: usize) -> DMatrix<C64> {
    let d = dim_a * dim_b;
    let mut m = DMatrix::zeros(d, d);
    for na in 1..dim_a {
        for nb in 0..dim_b {
            m[((na - 1) * dim_b + nb, na * dim_b + nb)] = C64::new((na as f64).sqrt(), 0.0);
        }
    }
    m
}

/// Annihilation operator of mode b on the product space.
pub fn ladder_b(dim_a: usize, dim_b: usize) -> DMatrix<C64> {
    let d = dim_a * dim_b;
    let mut m = DMatrix::zeros(d, d);
    for na in 0..dim_a {
        for nb in 1..dim_b {
            m[(na * dim_b + nb - 1, na * dim_b + nb)] = C64::new((nb as f64).sqrt(), 0.0);
        }
    }
    m
}

/// Fock coefficients `e^{−|v|²/2} vⁿ/√n!` for `n < dim`.
///
/// Fails if the Poisson mass beyond the cutoff exceeds [`TAIL_TOLERANCE`].
pub fn coherent_fock(v: C64, dim: usize) -> Result<Vec<C64>, OracleError> {
    let mean = v.norm_sqr();
    let mut coeffs = Vec::with_capacity(dim);
    let mut c = C64::new((-0.5 * mean).exp(), 0.0);
    for n in 0..dim {
        if n > 0 {
            c = c * v / (n as f64).sqrt();
        }
        coeffs.push(c);
    }
    // Poisson probabilities from n = dim upward.
    let mut p = coeffs.last().map_or(0.0, |c| c.norm_sqr());
    let mut tail = 0.0;
    for n in dim..dim + 10_000 {
        p *= mean / n as f64;
        tail += p;
        if p < 1e-30 * tail.max(1e-300) || p == 0.0 {
            break;
        }
    }
    // Guards against underflow of the starting term for huge amplitudes.
    let kept: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    let tail = tail.max(1.0 - kept);
    if tail > TAIL_TOLERANCE {
        return Err(OracleError::CutoffTooSmall { amplitude: v.norm(), dim, tail });
    }
    Ok(coeffs)
}

fn check_dims(dim_a: usize, dim_b: usize) -> Result<(), OracleError> {
    if dim_a == 0 || dim_b == 0 {
        return Err(OracleError::InvalidDimension(format!("{dim_a} x {dim_b}")));
    }
    Ok(())
}

/// Hermitian, unit-trace matrix on the truncated two-mode Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim_a: usize,
    dim_b: usize,
    data: Vec<C64>,
}

impl DensityMatrix {
    pub fn zeros(dim_a: usize, dim_b: usize) -> Self {
        let d = dim_a * dim_b;
        Self { dim_a, dim_b, data: vec![C64::new(0.0, 0.0); d * d] }
    }

    pub fn from_raw(dim_a: usize, dim_b: usize, data: Vec<C64>) -> Result<Self, OracleError> {
        let d = dim_a * dim_b;
        if data.len() != d * d {
            return Err(OracleError::DimensionMismatch(format!(
                "{} entries for a {d}x{d} matrix",
                data.len()
            )));
        }
        Ok(Self { dim_a, dim_b, data })
    }

    pub fn vacuum(dim_a: usize, dim_b: usize) -> Self {
        let mut rho = Self::zeros(dim_a, dim_b);
        rho.data[0] = C64::new(1.0, 0.0);
        rho
    }

    pub fn maximally_mixed(dim_a: usize, dim_b: usize) -> Self {
        let d = dim_a * dim_b;
        let mut rho = Self::zeros(dim_a, dim_b);
        for i in 0..d {
            rho.data[i * d + i] = C64::new(1.0 / d as f64, 0.0);
        }
        rho
    }

    /// `|ψ⟩⟨ψ|` for a state vector in the product basis (not normalized).
    pub fn from_pure(dim_a: usize, dim_b: usize, psi: &[C64]) -> Result<Self, OracleError> {
        let d = dim_a * dim_b;
        if psi.len() != d {
            return Err(OracleError::DimensionMismatch(format!("vector of length {} for d = {d}", psi.len())));
        }
        let mut data = Vec::with_capacity(d * d);
        for x in psi {
            for y in psi {
                data.push(x * y.conj());
            }
        }
        Ok(Self { dim_a, dim_b, data })
    }

    pub fn from_dmatrix(dim_a: usize, dim_b: usize, m: &DMatrix<C64>) -> Self {
        let d = dim_a * dim_b;
        assert_eq!((m.nrows(), m.ncols()), (d, d));
        let mut data = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                data.push(m[(i, j)]);
            }
        }
        Self { dim_a, dim_b, data }
    }

    pub fn to_dmatrix(&self) -> DMatrix<C64> {
        let d = self.dim();
        DMatrix::from_row_slice(d, d, &self.data)
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }
    pub fn dim_b(&self) -> usize {
        self.dim_b
    }
    /// Dimension of the product space.
    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }
    pub fn data(&self) -> &[C64] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim() + j]
    }

    pub fn scale(&mut self, s: C64) {
        for z in &mut self.data {
            *z *= s;
        }
    }

    pub fn trace(&self) -> C64 {
        let d = self.dim();
        (0..d).map(|i| self.data[i * d + i]).sum()
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        let d = self.dim();
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += (self.data[i * d + j] * self.data[j * d + i]).re;
            }
        }
        s
    }

    /// `max |ρ − ρ†|` over entries.
    pub fn herm_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.data[i * d + j] - self.data[j * d + i].conj()).norm());
            }
        }
        worst
    }

    /// Ascending eigenvalues of the Hermitian part.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let d = self.dim();
        let h = faer::Mat::<C64>::from_fn(d, d, |i, j| {
            (self.data[i * d + j] + self.data[j * d + i].conj()) * 0.5
        });
        h.self_adjoint_eigenvalues(faer::Side::Lower)
            .unwrap_or_else(|_| vec![f64::NAN; d])
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// `½ Σ |λ(ρ − σ)|`.
    pub fn trace_distance(&self, other: &Self) -> Result<f64, OracleError> {
        if (self.dim_a, self.dim_b) != (other.dim_a, other.dim_b) {
            return Err(OracleError::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.dim_a, self.dim_b, other.dim_a, other.dim_b
            )));
        }
        let diff = Self {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            data: self.data.iter().zip(&other.data).map(|(x, y)| x - y).collect(),
        };
        Ok(0.5 * diff.eigenvalues().iter().map(|l| l.abs()).sum::<f64>())
    }

    /// `Tr(a ρ)`.
    pub fn mean_a(&self) -> C64 {
        let (d, db) = (self.dim(), self.dim_b);
        let mut s = C64::new(0.0, 0.0);
        for k in db..d {
            s += self.data[k * d + k - db] * ((k / db) as f64).sqrt();
        }
        s
    }

    /// `Tr(b ρ)`.
    pub fn mean_b(&self) -> C64 {
        let (d, db) = (self.dim(), self.dim_b);
        let mut s = C64::new(0.0, 0.0);
        for k in 0..d {
            let nb = k % db;
            if nb > 0 {
                s += self.data[k * d + k - 1] * (nb as f64).sqrt();
            }
        }
        s
    }

    /// `⟨a†a + b†b⟩`.
    pub fn n_total(&self) -> f64 {
        let (d, db) = (self.dim(), self.dim_b);
        (0..d).map(|k| self.data[k * d + k].re * ((k / db + k % db) as f64)).sum()
    }

    /// Snapshot as CSV with header `row,col,re,im`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let d = self.dim();
        writeln!(w, "row,col,re,im")?;
        for i in 0..d {
            for j in 0..d {
                let z = self.data[i * d + j];
                writeln!(w, "{i},{j},{:.16e},{:.16e}", z.re, z.im)?;
            }
        }
        Ok(())
    }
}

/// `|v_a⟩⟨v_a| ⊗ |v_b⟩⟨v_b|`, truncated and renormalized.
pub fn build_coherent(v_a: C64, v_b: C64, dim_a: usize, dim_b: usize) -> Result<DensityMatrix, OracleError> {
    check_dims(dim_a, dim_b)?;
    let ca = coherent_fock(v_a, dim_a)?;
    let cb = coherent_fock(v_b, dim_b)?;
    let psi = product_state(&ca, &cb);
    normalized_projector(dim_a, dim_b, psi)
}

/// Projector onto `|w, 0⟩ − e^{iφ}|0, w⟩`, normalized.
pub fn build_cat(w: C64, phi: f64, dim_a: usize, dim_b: usize) -> Result<DensityMatrix, OracleError> {
    check_dims(dim_a, dim_b)?;
    if w.norm() == 0.0 {
        return Err(OracleError::DegenerateCat);
    }
    let zero = C64::new(0.0, 0.0);
    let first = product_state(&coherent_fock(w, dim_a)?, &coherent_fock(zero, dim_b)?);
    let second = product_state(&coherent_fock(zero, dim_a)?, &coherent_fock(w, dim_b)?);
    let phase = C64::from_polar(1.0, phi);
    let psi = first.iter().zip(&second).map(|(x, y)| x - phase * y).collect();
    normalized_projector(dim_a, dim_b, psi)
}

pub(crate) fn product_state(ca: &[C64], cb: &[C64]) -> Vec<C64> {
    let mut psi = Vec::with_capacity(ca.len() * cb.len());
    for x in ca {
        for y in cb {
            psi.push(x * y);
        }
    }
    psi
}

fn normalized_projector(dim_a: usize, dim_b: usize, mut psi: Vec<C64>) -> Result<DensityMatrix, OracleError> {
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut psi {
        *z /= norm;
    }
    DensityMatrix::from_pure(dim_a, dim_b, &psi)
}

/// Snapshot observables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub t: f64,
    pub trace: C64,
    pub herm_residual: f64,
    pub min_eig: f64,
    pub purity: f64,
    pub mean_a: C64,
    pub mean_b: C64,
    pub n_total: f64,
}

impl Diagnostics {
    /// `Tr(ρ − ρ²)`.
    pub fn linear_entropy(&self) -> f64 {
        self.trace.re - self.purity
    }
}

pub fn diagnostics(t: f64, rho: &DensityMatrix) -> Diagnostics {
    Diagnostics {
        t,
        trace: rho.trace(),
        herm_residual: rho.herm_residual(),
        min_eig: rho.min_eigenvalue(),
        purity: rho.purity(),
        mean_a: rho.mean_a(),
        mean_b: rho.mean_b(),
        n_total: rho.n_total(),
    }
}

/// `|⟨ψ_cat(φ=0)|ψ_cat(φ)⟩|` from coherent overlaps alone.
pub fn cat_overlap(w: C64, phi: f64) -> f64 {
    let x = coherent_overlap(C64::new(0.0, 0.0), w).norm_sqr();
    let n0 = 1.0 / (2.0 - 2.0 * x);
    let n_phi = 1.0 / (2.0 - 2.0 * x * phi.cos());
    let e = C64::from_polar(1.0, phi);
    // ⟨A − B | A − e^{iφ}B⟩ with ⟨A|A⟩ = ⟨B|B⟩ = 1, ⟨A|B⟩ = ⟨B|A⟩ = x.
    let inner = C64::new(1.0, 0.0) - e * x - x + e;
    (n0 * n_phi).sqrt() * inner.norm()
}
