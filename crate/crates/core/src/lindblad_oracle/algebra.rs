// Copyright 2026 The cavityduo Authors
// SPDX-License-Identifier: Apache-2.0

//! Numerical check of the closed commutator algebra of the twelve
//! superoperators.
//!
//! The reference table is transcribed verbatim in [`PRINTED`]. One entry is
//! known to be wrong and is listed in [`ERRATA`]; the corrected table is the
//! printed one with that entry replaced.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::liouvillian::{CompiledLiouvillian, Superop};
use super::{DensityMatrix, OracleError};
use crate::C64;

/// Largest acceptable discrepancy of a table entry.
pub const TABLE_TOLERANCE: f64 = 1e-10;

/// Right-hand side of one commutator: `Σ coefficient · superop`.
pub type Entry = &'static [(usize, f64)];

const O: Entry = &[];

/// `PRINTED[i][j]` is `[χ_i, χ_j]` as transcribed, superoperators indexed as
/// in [`Superop::ALL`].
#[rustfmt::skip]
pub const PRINTED: [[Entry; 12]; 12] = [
    [O, O, &[(2, -1.0)], O, O, O, &[(6, 1.0)], O, O, &[(9, -1.0)], O, &[(11, -1.0)]],
    [O, O, &[(2, -1.0)], O, O, O, O, &[(7, -1.0)], &[(8, -1.0)], O, &[(10, 1.0)], O],
    [&[(2, 1.0)], &[(2, 1.0)], O, O, O, O, &[(8, 1.0)], O, O, O, &[(11, 1.0)], O],
    [O, O, O, O, O, &[(5, -1.0)], &[(6, -1.0)], O, &[(8, -1.0)], &[(9, 1.0)], O, O],
    [O, O, O, O, O, &[(5, -1.0)], O, &[(7, 1.0)], O, O, &[(10, -1.0)], &[(11, -1.0)]],
    [O, O, O, &[(5, 1.0)], &[(5, 1.0)], O, O, &[(8, 1.0)], O, &[(11, 1.0)], O, O],
    [&[(6, -1.0)], O, &[(8, -1.0)], &[(6, 1.0)], O, O, O, O, O, &[(0, 1.0), (3, -1.0)], O, &[(5, -1.0)]],
    [O, &[(7, 1.0)], O, O, &[(7, -1.0)], &[(8, -1.0)], O, O, O, O, &[(4, 1.0), (1, -1.0)], &[(2, -1.0)]],
    [O, &[(8, 1.0)], O, &[(8, 1.0)], &[(7, -1.0)], O, O, O, O, &[(2, 1.0)], &[(5, 1.0)], O],
    [&[(9, 1.0)], O, O, &[(9, -1.0)], O, &[(11, -1.0)], &[(3, 1.0), (0, -1.0)], O, &[(2, -1.0)], O, O, O],
    [O, &[(10, -1.0)], &[(11, -1.0)], O, &[(10, 1.0)], O, O, &[(1, 1.0), (4, -1.0)], &[(5, -1.0)], O, O, O],
    [&[(11, 1.0)], O, O, O, &[(11, 1.0)], O, &[(5, 1.0)], &[(2, 1.0)], O, O, O, O],
];

/// Known misprints: `(row, col, correct entry)`.
pub const ERRATA: [(usize, usize, Entry); 1] = [(8, 4, O)];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorTable {
    pub entries: [[Entry; 12]; 12],
}

impl CommutatorTable {
    pub fn printed() -> Self {
        Self { entries: PRINTED }
    }

    pub fn corrected() -> Self {
        let mut entries = PRINTED;
        for (i, j, e) in ERRATA {
            entries[i][j] = e;
        }
        Self { entries }
    }

    pub fn format_entry(entry: Entry) -> String {
        if entry.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (k, &(idx, c)) in entry.iter().enumerate() {
            let sym = Superop::ALL[idx].symbol();
            match (k, c < 0.0) {
                (0, true) => s.push('-'),
                (0, false) => {}
                (_, true) => s.push_str(" - "),
                (_, false) => s.push_str(" + "),
            }
            if c.abs() != 1.0 {
                let _ = write!(s, "{}", c.abs());
            }
            s.push_str(sym);
        }
        s
    }
}

/// `ρ = G†G / Tr(G†G)` with `G` standard complex normal on the levels
/// `n_a, n_b < levels` and zero elsewhere.
pub fn random_density<R: Rng>(dim_a: usize, dim_b: usize, levels: usize, rng: &mut R) -> DensityMatrix {
    let d = dim_a * dim_b;
    let inside = |i: usize| i / dim_b < levels && i % dim_b < levels;
    let mut g = DMatrix::<C64>::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            if inside(j) {
                g[(i, j)] = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            }
        }
    }
    let m = g.adjoint() * g;
    let tr = m.trace();
    DensityMatrix::from_dmatrix(dim_a, dim_b, &(m / tr))
}

/// Discrepancies of a table against the numerical commutators.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraReport {
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    /// Max-entry discrepancy per pair against the corrected table.
    pub corrected: [[f64; 12]; 12],
    /// Same against the table as printed.
    pub printed: [[f64; 12]; 12],
}

impl AlgebraReport {
    pub fn max_corrected(&self) -> f64 {
        self.corrected.iter().flatten().fold(0.0, |m, &x| m.max(x))
    }

    /// Pairs whose printed entry disagrees with the numerics.
    pub fn printed_mismatches(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..12 {
            for j in 0..12 {
                if self.printed[i][j] > TABLE_TOLERANCE {
                    out.push((i, j, self.printed[i][j]));
                }
            }
        }
        out
    }

    pub fn passed(&self) -> bool {
        self.max_corrected() <= TABLE_TOLERANCE
    }

    pub fn render(&self) -> String {
        let printed = CommutatorTable::printed();
        let corrected = CommutatorTable::corrected();
        let mut s = String::new();
        let _ = writeln!(s, "commutator table check: dim {}, {} random states, seed {}", self.dim, self.trials, self.seed);
        let _ = writeln!(s, "pairs checked: 144");
        let _ = writeln!(s, "max discrepancy (corrected table): {:.3e}", self.max_corrected());
        let mismatches = self.printed_mismatches();
        let _ = writeln!(s, "printed entries contradicted: {}", mismatches.len());
        for (i, j, err) in mismatches {
            let _ = writeln!(
                s,
                "  [{}, {}]: printed {}, numerically {} (discrepancy {:.3e})",
                Superop::ALL[i].symbol(),
                Superop::ALL[j].symbol(),
                CommutatorTable::format_entry(printed.entries[i][j]),
                CommutatorTable::format_entry(corrected.entries[i][j]),
                err
            );
        }
        let _ = writeln!(s, "result: {}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }
}

fn unit_kernels(dim: usize) -> Vec<CompiledLiouvillian> {
    Superop::ALL
        .iter()
        .map(|op| {
            let mut w = [C64::new(0.0, 0.0); 12];
            w[op.index()] = C64::new(1.0, 0.0);
            CompiledLiouvillian::from_weights(w, dim, dim)
        })
        .collect()
}

fn max_diff(x: &DensityMatrix, y: &DensityMatrix) -> f64 {
    x.data().iter().zip(y.data()).fold(0.0, |m, (p, q)| m.max((p - q).norm()))
}

fn combine(entry: Entry, applied: &[DensityMatrix]) -> DensityMatrix {
    let mut out = DensityMatrix::zeros(applied[0].dim_a(), applied[0].dim_b());
    for &(idx, c) in entry {
        for (o, x) in out.data_mut().iter_mut().zip(applied[idx].data()) {
            *o += x * c;
        }
    }
    out
}

/// Evaluates every `[χ_i, χ_j]ρ` on `trials` random states and compares it
/// with both tables.
pub fn check_commutator_table(dim: usize, trials: usize, seed: u64) -> Result<AlgebraReport, OracleError> {
    if dim < 4 {
        return Err(OracleError::InvalidDimension(format!("commutator check needs dim >= 4, got {dim}")));
    }
    let kernels = unit_kernels(dim);
    let printed = CommutatorTable::printed();
    let corrected = CommutatorTable::corrected();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = AlgebraReport {
        dim,
        trials,
        seed,
        corrected: [[0.0; 12]; 12],
        printed: [[0.0; 12]; 12],
    };
    for _ in 0..trials {
        let rho = random_density(dim, dim, dim - 1, &mut rng);
        let once: Vec<DensityMatrix> = kernels.iter().map(|k| k.apply(&rho)).collect();
        let twice: Vec<Vec<DensityMatrix>> =
            kernels.iter().map(|k| once.iter().map(|x| k.apply(x)).collect()).collect();
        for i in 0..12 {
            for j in 0..12 {
                // χ_i χ_j ρ − χ_j χ_i ρ
                let mut lhs = twice[i][j].clone();
                for (o, x) in lhs.data_mut().iter_mut().zip(twice[j][i].data()) {
                    *o -= x;
                }
                let e_c = max_diff(&lhs, &combine(corrected.entries[i][j], &once));
                let e_p = max_diff(&lhs, &combine(printed.entries[i][j], &once));
                report.corrected[i][j] = report.corrected[i][j].max(e_c);
                report.printed[i][j] = report.printed[i][j].max(e_p);
            }
        }
    }
    Ok(report)
}

/// Like [`check_commutator_table`] but fails with `TableMismatch` when any
/// corrected entry is off by more than [`TABLE_TOLERANCE`].
pub fn verify_commutator_table(dim: usize, trials: usize, seed: u64) -> Result<AlgebraReport, OracleError> {
    let report = check_commutator_table(dim, trials, seed)?;
    let mut worst = (0, 0, 0.0);
    for i in 0..12 {
        for j in 0..12 {
            if report.corrected[i][j] > worst.2 {
                worst = (i, j, report.corrected[i][j]);
            }
        }
    }
    if worst.2 > TABLE_TOLERANCE {
        return Err(OracleError::TableMismatch {
            row: Superop::ALL[worst.0].symbol(),
            col: Superop::ALL[worst.1].symbol(),
            discrepancy: worst.2,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_is_antisymmetric_after_correction() {
        let t = CommutatorTable::corrected();
        for i in 0..12 {
            for j in 0..12 {
                let mut a: Vec<(usize, f64)> = t.entries[i][j].to_vec();
                let mut b: Vec<(usize, f64)> = t.entries[j][i].iter().map(|&(k, c)| (k, -c)).collect();
                a.sort_by_key(|x| x.0);
                b.sort_by_key(|x| x.0);
                assert_eq!(a, b, "({i}, {j})");
            }
        }
    }

    #[test]
    fn spot_entries() {
        let t = CommutatorTable::printed();
        assert_eq!(CommutatorTable::format_entry(t.entries[0][1]), "0");
        assert_eq!(CommutatorTable::format_entry(t.entries[0][2]), "-a•a†");
        assert_eq!(CommutatorTable::format_entry(t.entries[6][9]), "a†a• - b†b•");
    }

    #[test]
    fn corrected_table_holds_numerically() {
        let report = verify_commutator_table(5, 3, 42).unwrap();
        assert!(report.max_corrected() < TABLE_TOLERANCE);
        let bad = report.printed_mismatches();
        assert_eq!(bad.len(), 1);
        assert_eq!((bad[0].0, bad[0].1), (8, 4));
    }

    #[test]
    fn random_density_is_a_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rho = random_density(4, 4, 3, &mut rng);
        assert!((rho.trace().re - 1.0).abs() < 1e-14);
        assert!(rho.herm_residual() < 1e-15);
        assert!(rho.min_eigenvalue() > -1e-14);
        // Nothing on the top level.
        assert_eq!(rho.get(15, 15), C64::new(0.0, 0.0));
    }

    #[test]
    fn small_dimension_rejected() {
        assert!(matches!(check_commutator_table(3, 1, 0), Err(OracleError::InvalidDimension(_))));
    }
}
