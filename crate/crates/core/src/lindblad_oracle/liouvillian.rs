// Copyright 2026 The cavityduo Authors
// SPDX-License-Identifier: Apache-2.0

//! Matrix-free Liouvillian.
//!
//! The generator is kept as the list of displayed terms (coefficient times
//! one of twelve elementary superoperators). Terms are summed per
//! superoperator once, then applied with precomputed ladder factors.

use nalgebra::DMatrix;

use super::{ladder_a, ladder_b, DensityMatrix};
use crate::coefficients::{effective_detunings, LabCoefficients, ModelParams};
use crate::C64;

/// The twelve elementary superoperators. `•` marks the operand slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Superop {
    /// `a†a•`
    NumALeft,
    /// `•a†a`
    NumARight,
    /// `a•a†`
    JumpA,
    /// `b†b•`
    NumBLeft,
    /// `•b†b`
    NumBRight,
    /// `b•b†`
    JumpB,
    /// `a†b•`
    HopToALeft,
    /// `•a†b`
    HopToARight,
    /// `b•a†`
    CrossBA,
    /// `b†a•`
    HopToBLeft,
    /// `•b†a`
    HopToBRight,
    /// `a•b†`
    CrossAB,
}

impl Superop {
    pub const ALL: [Superop; 12] = [
        Superop::NumALeft,
        Superop::NumARight,
        Superop::JumpA,
        Superop::NumBLeft,
        Superop::NumBRight,
        Superop::JumpB,
        Superop::HopToALeft,
        Superop::HopToARight,
        Superop::CrossBA,
        Superop::HopToBLeft,
        Superop::HopToBRight,
        Superop::CrossAB,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn symbol(self) -> &'static str {
        const SYMBOLS: [&str; 12] = [
            "a†a•", "•a†a", "a•a†", "b†b•", "•b†b", "b•b†", "a†b•", "•a†b", "b•a†", "b†a•", "•b†a",
            "a•b†",
        ];
        SYMBOLS[self.index()]
    }

    /// Dense reference action, built from explicit ladder matrices.
    pub fn apply_dense(self, rho: &DMatrix<C64>, dim_a: usize, dim_b: usize) -> DMatrix<C64> {
        let a = ladder_a(dim_a, dim_b);
        let b = ladder_b(dim_a, dim_b);
        let (ad, bd) = (a.adjoint(), b.adjoint());
        match self {
            Superop::NumALeft => &ad * &a * rho,
            Superop::NumARight => rho * &ad * &a,
            Superop::JumpA => &a * rho * &ad,
            Superop::NumBLeft => &bd * &b * rho,
            Superop::NumBRight => rho * &bd * &b,
            Superop::JumpB => &b * rho * &bd,
            Superop::HopToALeft => &ad * &b * rho,
            Superop::HopToARight => rho * &ad * &b,
            Superop::CrossBA => &b * rho * &ad,
            Superop::HopToBLeft => &bd * &a * rho,
            Superop::HopToBRight => rho * &bd * &a,
            Superop::CrossAB => &a * rho * &bd,
        }
    }
}

/// Model and reservoir constants defining the generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiouvillianSpec {
    pub params: ModelParams,
    pub coeffs: LabCoefficients,
}

impl LiouvillianSpec {
    pub fn new(params: ModelParams, coeffs: LabCoefficients) -> Self {
        Self { params, coeffs }
    }

    /// Every term of the generator as displayed: damping blocks for each
    /// mode, both cross-damping lines, the two antisymmetric shift lines and
    /// the commutator with the shifted direct coupling.
    pub fn terms(&self) -> Vec<(C64, Superop)> {
        use Superop::*;
        let k = &self.coeffs;
        let p = &self.params;
        let re = |x: f64| C64::new(x, 0.0);
        let im = |x: f64| C64::new(0.0, x);
        let mut t = Vec::with_capacity(32);

        // k_aa(2a•a† − •a†a − a†a•) + i(Δ_aa − ω_a)[a†a, •]
        t.push((re(2.0 * k.k_aa), JumpA));
        t.push((re(-k.k_aa), NumARight));
        t.push((re(-k.k_aa), NumALeft));
        t.push((im(k.d_aa - p.omega_a), NumALeft));
        t.push((im(-(k.d_aa - p.omega_a)), NumARight));

        t.push((re(2.0 * k.k_bb), JumpB));
        t.push((re(-k.k_bb), NumBRight));
        t.push((re(-k.k_bb), NumBLeft));
        t.push((im(k.d_bb - p.omega_b), NumBLeft));
        t.push((im(-(k.d_bb - p.omega_b)), NumBRight));

        // k_ab(a•b† + b•a† − •b†a − a†b•)
        t.push((re(k.k_ab), CrossAB));
        t.push((re(k.k_ab), CrossBA));
        t.push((re(-k.k_ab), HopToBRight));
        t.push((re(-k.k_ab), HopToALeft));
        // k_ba(b•a† + a•b† − •a†b − b†a•)
        t.push((re(k.k_ba), CrossBA));
        t.push((re(k.k_ba), CrossAB));
        t.push((re(-k.k_ba), HopToARight));
        t.push((re(-k.k_ba), HopToBLeft));

        // i(Δ_ab − Δ_ba)/2 (a•b† − b•a† − •b†a + a†b•)
        let s = 0.5 * (k.d_ab - k.d_ba);
        t.push((im(s), CrossAB));
        t.push((im(-s), CrossBA));
        t.push((im(-s), HopToBRight));
        t.push((im(s), HopToALeft));
        // i(Δ_ba − Δ_ab)/2 (b•a† − a•b† − •a†b + b†a•)
        let s = 0.5 * (k.d_ba - k.d_ab);
        t.push((im(s), CrossBA));
        t.push((im(-s), CrossAB));
        t.push((im(-s), HopToARight));
        t.push((im(s), HopToBLeft));

        // i((Δ_ab + Δ_ba)/2 − g)[b†a + a†b, •]
        let s = 0.5 * (k.d_ab + k.d_ba) - p.g;
        t.push((im(s), HopToBLeft));
        t.push((im(s), HopToALeft));
        t.push((im(-s), HopToBRight));
        t.push((im(-s), HopToARight));
        t
    }

    /// Total weight of each superoperator, indexed by [`Superop::index`].
    pub fn weights(&self) -> [C64; 12] {
        let mut w = [C64::new(0.0, 0.0); 12];
        for (c, op) in self.terms() {
            w[op.index()] += c;
        }
        w
    }

    /// Largest rate or frequency entering the generator.
    pub fn max_rate(&self) -> f64 {
        let e = effective_detunings(&self.params, &self.coeffs);
        [
            self.coeffs.k_aa,
            self.coeffs.k_ab,
            self.coeffs.k_ba,
            self.coeffs.k_bb,
            e.omega_aa,
            e.omega_bb,
            e.omega_ab,
            e.omega_ba,
        ]
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn compile(&self, dim_a: usize, dim_b: usize) -> CompiledLiouvillian {
        CompiledLiouvillian::from_weights(self.weights(), dim_a, dim_b)
    }
}

/// Weighted sum of the twelve superoperators with all ladder factors
/// precomputed for one pair of cutoffs.
#[derive(Debug, Clone)]
pub struct CompiledLiouvillian {
    dim_a: usize,
    dim_b: usize,
    weights: [C64; 12],
    left_diag: Vec<C64>,
    right_diag: Vec<C64>,
    hop_to_a_left: Vec<C64>,
    hop_to_b_left: Vec<C64>,
    hop_to_a_right: Vec<C64>,
    hop_to_b_right: Vec<C64>,
    // √(n_a+1), √(n_b+1), zero at the top level.
    raise_a: Vec<f64>,
    raise_b: Vec<f64>,
    jump_a_col: Vec<C64>,
    jump_b_col: Vec<C64>,
    cross_ba_col: Vec<C64>,
    cross_ab_col: Vec<C64>,
}

impl CompiledLiouvillian {
    pub fn from_weights(weights: [C64; 12], dim_a: usize, dim_b: usize) -> Self {
        let d = dim_a * dim_b;
        let sq = |n: usize| (n as f64).sqrt();
        let w = |op: Superop| weights[op.index()];
        let mut s = Self {
            dim_a,
            dim_b,
            weights,
            left_diag: Vec::with_capacity(d),
            right_diag: Vec::with_capacity(d),
            hop_to_a_left: Vec::with_capacity(d),
            hop_to_b_left: Vec::with_capacity(d),
            hop_to_a_right: Vec::with_capacity(d),
            hop_to_b_right: Vec::with_capacity(d),
            raise_a: Vec::with_capacity(d),
            raise_b: Vec::with_capacity(d),
            jump_a_col: Vec::with_capacity(d),
            jump_b_col: Vec::with_capacity(d),
            cross_ba_col: Vec::with_capacity(d),
            cross_ab_col: Vec::with_capacity(d),
        };
        let zero = C64::new(0.0, 0.0);
        for i in 0..d {
            let (na, nb) = (i / dim_b, i % dim_b);
            let top_a = na + 1 == dim_a;
            let top_b = nb + 1 == dim_b;
            s.left_diag.push(w(Superop::NumALeft) * na as f64 + w(Superop::NumBLeft) * nb as f64);
            s.right_diag.push(w(Superop::NumARight) * na as f64 + w(Superop::NumBRight) * nb as f64);
            // Row i of a†bρ reads row (n_a−1, n_b+1).
            s.hop_to_a_left.push(if na >= 1 && !top_b {
                w(Superop::HopToALeft) * (sq(na) * sq(nb + 1))
            } else {
                zero
            });
            // Row i of b†aρ reads row (n_a+1, n_b−1).
            s.hop_to_b_left.push(if nb >= 1 && !top_a {
                w(Superop::HopToBLeft) * (sq(nb) * sq(na + 1))
            } else {
                zero
            });
            // Column j of ρa†b reads column (m_a+1, m_b−1).
            s.hop_to_a_right.push(if nb >= 1 && !top_a {
                w(Superop::HopToARight) * (sq(na + 1) * sq(nb))
            } else {
                zero
            });
            // Column j of ρb†a reads column (m_a−1, m_b+1).
            s.hop_to_b_right.push(if na >= 1 && !top_b {
                w(Superop::HopToBRight) * (sq(na) * sq(nb + 1))
            } else {
                zero
            });
            let ra = if top_a { 0.0 } else { sq(na + 1) };
            let rb = if top_b { 0.0 } else { sq(nb + 1) };
            s.raise_a.push(ra);
            s.raise_b.push(rb);
            s.jump_a_col.push(w(Superop::JumpA) * ra);
            s.jump_b_col.push(w(Superop::JumpB) * rb);
            s.cross_ba_col.push(w(Superop::CrossBA) * ra);
            s.cross_ab_col.push(w(Superop::CrossAB) * rb);
        }
        s
    }

    pub fn weights(&self) -> &[C64; 12] {
        &self.weights
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    /// Whether the generator maps Hermitian operators to Hermitian ones,
    /// i.e. every right-acting weight is the conjugate of its left partner
    /// and the jump weights pair up the same way.
    pub fn preserves_hermiticity(&self) -> bool {
        use Superop::*;
        let w = |op: Superop| self.weights[op.index()];
        let close = |x: C64, y: C64| (x - y).norm() <= 1e-15 * (1.0 + x.norm().max(y.norm()));
        close(w(NumARight), w(NumALeft).conj())
            && close(w(NumBRight), w(NumBLeft).conj())
            && close(w(HopToARight), w(HopToBLeft).conj())
            && close(w(HopToBRight), w(HopToALeft).conj())
            && close(w(CrossAB), w(CrossBA).conj())
            && w(JumpA).im == 0.0
            && w(JumpB).im == 0.0
    }

    /// Writes `Lρ` into `out` (overwritten). Both slices are row-major
    /// `d×d` with `d = dim_a·dim_b`.
    pub fn apply_into(&self, rho: &[C64], out: &mut [C64]) {
        self.apply_rows(rho, out, false);
    }

    /// Like [`apply_into`](Self::apply_into) for Hermitian `rho` and a
    /// generator with [`preserves_hermiticity`](Self::preserves_hermiticity):
    /// only the upper triangle is computed and the rest mirrored.
    pub fn apply_hermitian_into(&self, rho: &[C64], out: &mut [C64]) {
        debug_assert!(self.preserves_hermiticity());
        self.apply_rows(rho, out, true);
        let d = self.dim_a * self.dim_b;
        for i in 0..d {
            for j in i + 1..d {
                out[j * d + i] = out[i * d + j].conj();
            }
        }
    }

    fn apply_rows(&self, rho: &[C64], out: &mut [C64], upper: bool) {
        let db = self.dim_b;
        let d = self.dim_a * db;
        assert_eq!(rho.len(), d * d);
        assert_eq!(out.len(), d * d);
        let zero = C64::new(0.0, 0.0);
        let w = |op: Superop| self.weights[op.index()] != zero;
        let (right_a, right_b) = (w(Superop::HopToARight), w(Superop::HopToBRight));
        let (jump_a, jump_b) = (w(Superop::JumpA), w(Superop::JumpB));
        let (cross_ab, cross_ba) = (w(Superop::CrossAB), w(Superop::CrossBA));
        let hop = db - 1;
        for (i, row) in out.chunks_exact_mut(d).enumerate() {
            let lo = if upper { i } else { 0 };
            let own = &rho[i * d..(i + 1) * d];
            let li = self.left_diag[i];
            for ((o, &x), &r) in row[lo..].iter_mut().zip(&own[lo..]).zip(&self.right_diag[lo..]) {
                *o = (li + r) * x;
            }
            if hop > 0 {
                // row[j] += w[j] ρ[i][j+hop] for j < d−hop
                if right_a && lo < d - hop {
                    axpy_weighted(&mut row[lo..d - hop], &self.hop_to_a_right[lo..d - hop], &own[lo + hop..]);
                }
                // row[j] += w[j] ρ[i][j−hop] for j ≥ hop
                if right_b {
                    let s = lo.max(hop);
                    axpy_weighted(&mut row[s..], &self.hop_to_b_right[s..], &own[s - hop..d - hop]);
                }
            }
            let ha = self.hop_to_a_left[i];
            if ha != zero {
                let src = &rho[(i - hop) * d..(i - hop + 1) * d];
                axpy(&mut row[lo..], ha, &src[lo..]);
            }
            let hb = self.hop_to_b_left[i];
            if hb != zero {
                let src = &rho[(i + hop) * d..(i + hop + 1) * d];
                axpy(&mut row[lo..], hb, &src[lo..]);
            }
            let ra = self.raise_a[i];
            if ra != 0.0 {
                let src = &rho[(i + db) * d..(i + db + 1) * d];
                if jump_a && lo < d - db {
                    axpy_scaled(&mut row[lo..d - db], ra, &self.jump_a_col[lo..d - db], &src[lo + db..]);
                }
                if cross_ab && lo < d - 1 {
                    axpy_scaled(&mut row[lo..d - 1], ra, &self.cross_ab_col[lo..d - 1], &src[lo + 1..]);
                }
            }
            let rb = self.raise_b[i];
            if rb != 0.0 {
                let src = &rho[(i + 1) * d..(i + 2) * d];
                if jump_b && lo < d - 1 {
                    axpy_scaled(&mut row[lo..d - 1], rb, &self.jump_b_col[lo..d - 1], &src[lo + 1..]);
                }
                if cross_ba && lo < d - db {
                    axpy_scaled(&mut row[lo..d - db], rb, &self.cross_ba_col[lo..d - db], &src[lo + db..]);
                }
            }
        }
    }

    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        assert_eq!((rho.dim_a(), rho.dim_b()), (self.dim_a, self.dim_b));
        let mut out = DensityMatrix::zeros(self.dim_a, self.dim_b);
        self.apply_into(rho.data(), out.data_mut());
        out
    }
}

#[inline]
fn axpy(out: &mut [C64], s: C64, x: &[C64]) {
    for (o, &v) in out.iter_mut().zip(x) {
        *o += s * v;
    }
}

#[inline]
fn axpy_weighted(out: &mut [C64], w: &[C64], x: &[C64]) {
    for ((o, &c), &v) in out.iter_mut().zip(w).zip(x) {
        *o += c * v;
    }
}

#[inline]
fn axpy_scaled(out: &mut [C64], s: f64, w: &[C64], x: &[C64]) {
    for ((o, &c), &v) in out.iter_mut().zip(w).zip(x) {
        *o += (c * s) * v;
    }
}

/// `dρ/dt` for the given generator.
pub fn apply_liouvillian(rho: &DensityMatrix, spec: &LiouvillianSpec) -> DensityMatrix {
    spec.compile(rho.dim_a(), rho.dim_b()).apply(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad_oracle::algebra::random_density;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spec(rng: &mut ChaCha8Rng) -> LiouvillianSpec {
        let mut u = |lo: f64, hi: f64| rng.random_range(lo..hi);
        LiouvillianSpec::new(
            ModelParams { omega_a: u(0.5, 2.0), omega_b: u(0.5, 2.0), g: u(0.0, 0.3) },
            LabCoefficients {
                k_aa: u(0.0, 0.5),
                k_ab: u(-0.2, 0.2),
                k_ba: u(-0.2, 0.2),
                k_bb: u(0.0, 0.5),
                d_aa: u(-0.1, 0.1),
                d_ab: u(-0.1, 0.1),
                d_ba: u(-0.1, 0.1),
                d_bb: u(-0.1, 0.1),
            },
        )
    }

    /// Independent dense form `Kρ + ρK† + Σ J_xy xρy†`.
    fn dense_generator(spec: &LiouvillianSpec, rho: &DMatrix<C64>, da: usize, db: usize) -> DMatrix<C64> {
        let e = effective_detunings(&spec.params, &spec.coeffs);
        let k = &spec.coeffs;
        let a = ladder_a(da, db);
        let b = ladder_b(da, db);
        let (ad, bd) = (a.adjoint(), b.adjoint());
        let kk = (&ad * &a) * -C64::new(k.k_aa, e.omega_aa)
            + (&bd * &b) * -C64::new(k.k_bb, e.omega_bb)
            + (&ad * &b) * -C64::new(k.k_ab, e.omega_ab)
            + (&bd * &a) * -C64::new(k.k_ba, e.omega_ba);
        let j_ab = C64::new(k.k_ab + k.k_ba, k.d_ab - k.d_ba);
        &kk * rho
            + rho * kk.adjoint()
            + (&a * rho * &ad) * C64::new(2.0 * k.k_aa, 0.0)
            + (&b * rho * &bd) * C64::new(2.0 * k.k_bb, 0.0)
            + (&a * rho * &bd) * j_ab
            + (&b * rho * &ad) * j_ab.conj()
    }

    #[test]
    fn kernel_matches_dense_generator() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (da, db) in [(4, 5), (5, 3), (1, 4), (3, 1)] {
            let spec = random_spec(&mut rng);
            // Arbitrary (non-Hermitian) operand to exercise every entry.
            let d = da * db;
            let data: Vec<C64> = (0..d * d).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let rho = DensityMatrix::from_raw(da, db, data).unwrap();
            let fast = apply_liouvillian(&rho, &spec).to_dmatrix();
            let dense = dense_generator(&spec, &rho.to_dmatrix(), da, db);
            assert!((fast - dense).camax() < 1e-13, "dims {da}x{db}");
        }
    }

    #[test]
    fn each_superop_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (da, db) = (4, 3);
        let d = da * db;
        let data: Vec<C64> = (0..d * d).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let rho = DensityMatrix::from_raw(da, db, data).unwrap();
        for op in Superop::ALL {
            let mut w = [C64::new(0.0, 0.0); 12];
            w[op.index()] = C64::new(1.0, 0.0);
            let fast = CompiledLiouvillian::from_weights(w, da, db).apply(&rho).to_dmatrix();
            let dense = op.apply_dense(&rho.to_dmatrix(), da, db);
            assert!((fast - dense).camax() < 1e-14, "{}", op.symbol());
        }
    }

    #[test]
    fn vacuum_is_stationary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spec = random_spec(&mut rng);
        let out = apply_liouvillian(&DensityMatrix::vacuum(5, 5), &spec);
        assert!(out.data().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn single_photon_decay() {
        let k_aa = 0.3;
        let spec = LiouvillianSpec::new(
            ModelParams { omega_a: 1.0, omega_b: 1.0, g: 0.0 },
            LabCoefficients::diagonal(k_aa, 0.0),
        );
        let (da, db) = (3, 3);
        let mut psi = vec![C64::new(0.0, 0.0); 9];
        psi[db] = C64::new(1.0, 0.0);
        let rho = DensityMatrix::from_pure(da, db, &psi).unwrap();
        let out = apply_liouvillian(&rho, &spec);
        for i in 0..9 {
            for j in 0..9 {
                let want = match (i, j) {
                    (0, 0) => 2.0 * k_aa,
                    (3, 3) => -2.0 * k_aa,
                    _ => 0.0,
                };
                assert!((out.get(i, j) - C64::new(want, 0.0)).norm() < 1e-15, "({i},{j})");
            }
        }
    }

    #[test]
    fn trace_and_hermiticity_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..100 {
            let spec = random_spec(&mut rng);
            let rho = random_density(4, 4, 4, &mut rng);
            let scale = rho.data().iter().map(|z| z.norm()).fold(0.0, f64::max);
            let out = apply_liouvillian(&rho, &spec);
            assert!(out.trace().norm() <= 1e-12 * scale.max(1.0), "trial {trial}");
            assert!(out.herm_residual() <= 1e-12, "trial {trial}");
        }
    }

    #[test]
    fn hermitian_path_matches_general() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let spec = random_spec(&mut rng);
            let gen = spec.compile(4, 5);
            assert!(gen.preserves_hermiticity());
            let mut rho = random_density(4, 5, 4, &mut rng).to_dmatrix();
            rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
            let rho = DensityMatrix::from_dmatrix(4, 5, &rho);
            let mut fast = vec![C64::new(0.0, 0.0); rho.data().len()];
            gen.apply_hermitian_into(rho.data(), &mut fast);
            let slow = gen.apply(&rho);
            let err = fast.iter().zip(slow.data()).fold(0.0, |m: f64, (x, y)| m.max((x - y).norm()));
            assert!(err < 1e-14, "{err}");
        }
        let mut w = [C64::new(0.0, 0.0); 12];
        w[Superop::HopToALeft.index()] = C64::new(1.0, 0.0);
        assert!(!CompiledLiouvillian::from_weights(w, 3, 3).preserves_hermiticity());
    }

    #[test]
    fn weights_collect_to_effective_rates() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let spec = random_spec(&mut rng);
        let e = effective_detunings(&spec.params, &spec.coeffs);
        let w = spec.weights();
        let k = &spec.coeffs;
        assert!((w[Superop::NumALeft.index()] + C64::new(k.k_aa, e.omega_aa)).norm() < 1e-15);
        assert!((w[Superop::HopToALeft.index()] + C64::new(k.k_ab, e.omega_ab)).norm() < 1e-15);
        assert!((w[Superop::HopToBRight.index()] + C64::new(k.k_ab, -e.omega_ab)).norm() < 1e-15);
        assert!((w[Superop::CrossAB.index()] - C64::new(k.k_ab + k.k_ba, k.d_ab - k.d_ba)).norm() < 1e-15);
    }
}
