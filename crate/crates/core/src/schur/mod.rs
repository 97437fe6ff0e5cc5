//! Projectors on `(C^d)^{(x)n}` from Schur-Weyl duality: isotypic projectors
//! `P_lambda`, frequency projectors `P_f`, their products, the A-sets and the
//! decoding projectors `P(u^n)`.
//!
//! Central projectors are real in the computational basis and invariant under
//! `U^{(x)n}`, so frame-level work happens in the chosen single-site basis and
//! states are rotated into it instead of rotating projectors out.

pub mod partition;

use std::collections::HashMap;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::budget::Budget;
use crate::channel::digits;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, RMatrix};
use crate::quantum::{kl_divergence, DensityOperator};
use crate::types::{enumerate_types, TypeVector, DEFAULT_ENUMERATION_CAP};

pub use partition::{
    character, class_size, dimension_bounds, enumerate_frames, irrep_dimension, kostka_nonzero,
    kostka_number, multiplicity, partitions, CharacterTable, DimensionBounds, YoungFrame,
};

/// Idempotency and commutation tolerance for assembled projectors.
pub const TOL_PROJECTOR: f64 = 1e-8;
/// Default cap on `d^n`.
pub const DEFAULT_DIM_CAP: usize = 6561;
/// Largest symmetric group whose elements are enumerated.
pub const PERMUTATION_CAP: u128 = 3_628_800;
/// Tolerance on basis orthonormality.
pub const TOL_BASIS: f64 = 1e-9;

/// Size limits for projector assembly.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub dim_cap: usize,
    pub budget: Budget,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            dim_cap: DEFAULT_DIM_CAP,
            budget: Budget::default(),
        }
    }
}

impl Limits {
    /// `d^n`, checked against the cap and the memory budget for `copies` dense matrices.
    pub fn tensor_dim(&self, d: usize, n: usize, copies: usize) -> Result<usize> {
        let dim = (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if dim > self.dim_cap as u128 {
            return Err(Error::CapExceeded {
                required: dim,
                cap: self.dim_cap as u128,
            });
        }
        let dim = dim as usize;
        self.budget
            .check(Budget::matrix_bytes(dim).saturating_mul(copies.max(1) as u128))?;
        Ok(dim)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectorKind {
    Frequency,
    Central,
    Joint,
    Decode,
}

/// A Hermitian idempotent on `(C^d)^{(x)n}`.
#[derive(Debug, Clone)]
pub struct ProjectorOperator {
    kind: ProjectorKind,
    d: usize,
    n: usize,
    matrix: CMatrix,
}

impl ProjectorOperator {
    fn new(kind: ProjectorKind, d: usize, n: usize, matrix: CMatrix) -> Self {
        Self {
            kind,
            d,
            n,
            matrix: linalg::hermitian_part(&matrix),
        }
    }

    pub fn kind(&self) -> ProjectorKind {
        self.kind
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    /// Rank read off the trace.
    pub fn rank(&self) -> usize {
        self.trace().round().max(0.0) as usize
    }

    /// `max |P^2 - P|`.
    pub fn idempotency_residual(&self) -> f64 {
        linalg::max_abs(&(&self.matrix * &self.matrix - &self.matrix))
    }

    /// Fails with `NotProjection` when `P^2 != P` within `TOL_PROJECTOR`.
    pub fn check(&self) -> Result<()> {
        let residual = self.idempotency_residual().max(linalg::hermiticity_deviation(&self.matrix));
        if residual > TOL_PROJECTOR {
            return Err(Error::NotProjection { residual });
        }
        Ok(())
    }
}

/// Letter counts of the tensor index `i` in base `d` over `n` sites.
pub fn index_type(i: usize, d: usize, n: usize) -> Vec<u64> {
    let mut counts = vec![0u64; d];
    for x in digits(i, d, n) {
        counts[x] += 1;
    }
    counts
}

/// Elements of `S_n` tagged by conjugacy class.
struct SymmetricGroup {
    perms: Vec<Vec<usize>>,
    class_of: Vec<usize>,
    classes: Vec<YoungFrame>,
}

impl SymmetricGroup {
    fn new(n: usize) -> Result<Self> {
        let order: u128 = (1..=n as u128).product();
        if order > PERMUTATION_CAP {
            return Err(Error::CapExceeded {
                required: order,
                cap: PERMUTATION_CAP,
            });
        }
        let mut classes = partitions(n);
        classes.sort();
        let index: HashMap<Vec<usize>, usize> = classes
            .iter()
            .enumerate()
            .map(|(k, c)| (c.rows().to_vec(), k))
            .collect();
        let mut perms = Vec::with_capacity(order as usize);
        let mut class_of = Vec::with_capacity(order as usize);
        let mut p: Vec<usize> = (0..n).collect();
        loop {
            class_of.push(index[&cycle_type(&p)]);
            perms.push(p.clone());
            if !next_permutation(&mut p) {
                break;
            }
        }
        Ok(Self {
            perms,
            class_of,
            classes,
        })
    }
}

fn cycle_type(p: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; p.len()];
    let mut lengths = Vec::new();
    for start in 0..p.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut k = start;
        while !seen[k] {
            seen[k] = true;
            k = p[k];
            len += 1;
        }
        lengths.push(len);
    }
    lengths.sort_unstable_by(|a, b| b.cmp(a));
    lengths
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// `P_lambda = (dim F_lambda / n!) sum_tau chi_lambda(tau) U(tau)` for each frame,
/// as real matrices in the computational basis.
///
/// Character sums are accumulated in integers, so the result does not depend
/// on the order in which columns are processed.
pub fn central_projectors(d: usize, frames: &[YoungFrame], n: usize, limits: &Limits) -> Result<Vec<RMatrix>> {
    if d == 0 {
        return Err(Error::PreconditionViolated("local dimension must be positive".into()));
    }
    if let Some(bad) = frames.iter().find(|l| l.n() != n) {
        return Err(Error::ShapeMismatch(format!("frame {bad} does not have {n} boxes")));
    }
    let dim = limits.tensor_dim(d, n, frames.len())?;
    if n == 0 {
        return Ok(frames.iter().map(|_| RMatrix::identity(1, 1)).collect());
    }
    let group = SymmetricGroup::new(n)?;
    let mut table = CharacterTable::new();
    let chars: Vec<Vec<i64>> = frames
        .iter()
        .map(|l| group.classes.iter().map(|mu| table.character(l, mu)).collect())
        .collect::<Result<_>>()?;
    let scales: Vec<f64> = frames
        .iter()
        .map(|l| {
            let dim_l = irrep_dimension(l).to_f64().unwrap_or(f64::INFINITY);
            dim_l / group.perms.len() as f64
        })
        .collect();
    let weights: Vec<u128> = (0..n).map(|k| (d as u128).pow((n - 1 - k) as u32)).collect();
    let columns: Vec<Vec<Vec<i64>>> = (0..dim)
        .into_par_iter()
        .map(|i| {
            let dig = digits(i, d, n);
            let mut cols = vec![vec![0i64; dim]; frames.len()];
            for (perm, &class) in group.perms.iter().zip(&group.class_of) {
                let j: u128 = perm.iter().zip(&weights).map(|(&k, &w)| dig[k] as u128 * w).sum();
                for (col, ch) in cols.iter_mut().zip(&chars) {
                    col[j as usize] += ch[class];
                }
            }
            cols
        })
        .collect();
    Ok((0..frames.len())
        .map(|l| {
            let m = RMatrix::from_fn(dim, dim, |r, c| columns[c][l][r] as f64 * scales[l]);
            (&m + m.transpose()).scale(0.5)
        })
        .collect())
}

/// `P_lambda` on `(C^d)^{(x)n}`.
pub fn central_projector(lambda: &YoungFrame, d: usize, n: usize, limits: &Limits) -> Result<ProjectorOperator> {
    let m = central_projectors(d, std::slice::from_ref(lambda), n, limits)?.remove(0);
    Ok(ProjectorOperator::new(ProjectorKind::Central, d, n, linalg::to_complex(&m)))
}

/// `B^{(x)n}` for a single-site basis whose columns are the basis vectors.
fn basis_power(basis: &CMatrix, n: usize) -> CMatrix {
    linalg::kron_all(std::iter::repeat_n(basis, n))
}

fn check_basis(basis: &CMatrix, d: usize) -> Result<()> {
    if basis.nrows() != d || basis.ncols() != d {
        return Err(Error::DimensionMismatch {
            left: d,
            right: basis.nrows().max(basis.ncols()),
        });
    }
    let deviation = linalg::orthonormality_deviation(basis);
    if deviation > TOL_BASIS {
        return Err(Error::BasisNotOrthonormal { deviation });
    }
    Ok(())
}

/// Moves a computational-frame operator into the frame of `basis`: `B^n M B^n*`.
fn rotate_out(m: &CMatrix, basis: Option<&CMatrix>, n: usize) -> CMatrix {
    match basis {
        None => m.clone(),
        Some(b) => {
            let bn = basis_power(b, n);
            &bn * m * bn.adjoint()
        }
    }
}

/// Projector onto the span of basis tensors whose index sequence has type `f`.
pub fn frequency_projector(f: &TypeVector, basis: Option<&CMatrix>, limits: &Limits) -> Result<ProjectorOperator> {
    let d = f.alphabet_size();
    let n = f.n() as usize;
    if let Some(b) = basis {
        check_basis(b, d)?;
    }
    let dim = limits.tensor_dim(d, n, 2)?;
    let mut diag = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        if index_type(i, d, n) == f.counts() {
            diag[(i, i)] = linalg::ONE;
        }
    }
    Ok(ProjectorOperator::new(ProjectorKind::Frequency, d, n, rotate_out(&diag, basis, n)))
}

/// `max |[P_f, P_lambda]|` entrywise, read off the computational frame.
pub fn commutator_residual(p_lambda: &RMatrix, f: &TypeVector) -> f64 {
    let d = f.alphabet_size();
    let n = f.n() as usize;
    let inside: Vec<bool> = (0..p_lambda.nrows()).map(|i| index_type(i, d, n) == f.counts()).collect();
    let mut worst: f64 = 0.0;
    for c in 0..p_lambda.ncols() {
        for r in 0..p_lambda.nrows() {
            if inside[r] != inside[c] {
                worst = worst.max(p_lambda[(r, c)].abs());
            }
        }
    }
    worst
}

/// `tr P_f P_lambda`, the rank of the joint projector.
pub fn joint_rank(p_lambda: &RMatrix, f: &TypeVector) -> f64 {
    let d = f.alphabet_size();
    let n = f.n() as usize;
    (0..p_lambda.nrows())
        .filter(|&i| index_type(i, d, n) == f.counts())
        .map(|i| p_lambda[(i, i)])
        .sum()
}

/// `P_{f,lambda} = P_f P_lambda`.
pub fn joint_projector(
    f: &TypeVector,
    lambda: &YoungFrame,
    basis: Option<&CMatrix>,
    limits: &Limits,
) -> Result<ProjectorOperator> {
    let d = f.alphabet_size();
    let n = f.n() as usize;
    if let Some(b) = basis {
        check_basis(b, d)?;
    }
    let p_lambda = central_projectors(d, std::slice::from_ref(lambda), n, limits)?.remove(0);
    let residual = commutator_residual(&p_lambda, f);
    if residual > TOL_PROJECTOR {
        return Err(Error::CommutatorNonzero { residual });
    }
    let dim = p_lambda.nrows();
    let inside: Vec<bool> = (0..dim).map(|i| index_type(i, d, n) == f.counts()).collect();
    let joint = CMatrix::from_fn(dim, dim, |r, c| {
        if inside[r] && inside[c] {
            p_lambda[(r, c)].into()
        } else {
            linalg::ZERO
        }
    });
    Ok(ProjectorOperator::new(ProjectorKind::Joint, d, n, rotate_out(&joint, basis, n)))
}

/// Both ways of deciding whether `K_{f,lambda}` vanishes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KostkaTest {
    /// `lambda` dominates sorted `f`.
    pub combinatorial: bool,
    /// Number of semistandard tableaux of shape `lambda` and content `f`.
    pub tableaux: u64,
    /// `tr P_f P_lambda`.
    pub rank: f64,
    pub spectral: bool,
}

impl KostkaTest {
    pub fn agree(&self) -> bool {
        self.combinatorial == self.spectral && self.combinatorial == (self.tableaux > 0)
    }
}

/// Kostka test against a precomputed `P_lambda`.
pub fn kostka_test_with(p_lambda: &RMatrix, f: &TypeVector, lambda: &YoungFrame) -> KostkaTest {
    let content: Vec<usize> = f.counts().iter().map(|&c| c as usize).collect();
    let rank = joint_rank(p_lambda, f);
    KostkaTest {
        combinatorial: kostka_nonzero(lambda, &content),
        tableaux: kostka_number(lambda, &content),
        rank,
        spectral: rank > 0.5,
    }
}

pub fn kostka_zero_test(f: &TypeVector, lambda: &YoungFrame, limits: &Limits) -> Result<KostkaTest> {
    let p_lambda = central_projectors(f.alphabet_size(), std::slice::from_ref(lambda), f.n() as usize, limits)?.remove(0);
    Ok(kostka_test_with(&p_lambda, f, lambda))
}

/// `tr P_lambda sigma^{(x)m}` against `(2m)^{d^2} 2^{-m D(lambda/m || s)}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralEstimate {
    pub trace: f64,
    pub bound: f64,
    pub holds: bool,
}

/// The trace only depends on the spectrum `s` of `sigma`, so it is evaluated
/// with `sigma` diagonal.
pub fn spectral_estimate(p_lambda: &RMatrix, lambda: &YoungFrame, spectrum: &[f64]) -> SpectralEstimate {
    let d = spectrum.len();
    let m = lambda.n();
    let trace: f64 = (0..p_lambda.nrows())
        .map(|i| {
            let w: f64 = digits(i, d, m).iter().map(|&x| spectrum[x]).product();
            p_lambda[(i, i)] * w
        })
        .sum();
    let mut sorted = spectrum.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let div = kl_divergence(&lambda.normalized(d), &sorted);
    let bound = (2.0 * m as f64).powi((d * d) as i32) * (-(m as f64) * div).exp2();
    SpectralEstimate {
        trace,
        bound,
        holds: trace <= bound * (1.0 + 1e-9) + 1e-12,
    }
}

/// Eigenvectors of `rho` as columns, eigenvalues non-increasing.
pub fn eigenbasis(rho: &DensityOperator) -> CMatrix {
    rho.eigen().vectors
}

/// `B* rho B`.
fn rotate_in(rho: &CMatrix, basis: &CMatrix) -> CMatrix {
    basis.adjoint() * rho * basis
}

/// Pairs `(f, lambda)` over `m` sites with `D(f/m || r~) <= delta` and
/// `D(lambda/m || r) <= delta`, where `r` is the sorted spectrum of `rho`
/// and `r~` its diagonal in `basis`.
pub fn a_set(rho: &DensityOperator, basis: &CMatrix, delta: f64, m: usize) -> Result<Vec<(TypeVector, YoungFrame)>> {
    if !(delta > 0.0) {
        return Err(Error::PreconditionViolated(format!("delta must be positive, got {delta}")));
    }
    let d = rho.dim();
    check_basis(basis, d)?;
    let r = rho.spectrum().values().to_vec();
    let rotated = rotate_in(rho.matrix(), basis);
    let pinched: Vec<f64> = (0..d).map(|i| rotated[(i, i)].re.max(0.0)).collect();
    a_set_from_spectra(&r, &pinched, delta, m)
}

fn a_set_from_spectra(r: &[f64], pinched: &[f64], delta: f64, m: usize) -> Result<Vec<(TypeVector, YoungFrame)>> {
    let d = r.len();
    let frames: Vec<YoungFrame> = enumerate_frames(d, m)
        .into_iter()
        .filter(|l| kl_divergence(&l.normalized(d), r) <= delta)
        .collect();
    let mut out = Vec::new();
    for f in enumerate_types(d, m, DEFAULT_ENUMERATION_CAP)? {
        if kl_divergence(&f.normalized(), pinched) <= delta {
            out.extend(frames.iter().map(|l| (f.clone(), l.clone())));
        }
    }
    Ok(out)
}

/// A decoding projector and the letters whose A-set came out empty.
#[derive(Debug, Clone)]
pub struct DecodeProjector {
    pub projector: ProjectorOperator,
    pub empty_letters: Vec<usize>,
}

/// Block projectors `P(u | u^n)` for every letter and block length up to `n`,
/// precomputed so that many decoding projectors can share them.
///
/// Everything lives in the frame of `basis` (the eigenbasis of the average
/// state); use [`DecodeFamily::rotate`] to bring states into that frame.
#[derive(Debug, Clone)]
pub struct DecodeFamily {
    d: usize,
    n: usize,
    basis: CMatrix,
    /// `blocks[u][t]`, `None` when the A-set is empty.
    blocks: Vec<Vec<Option<RMatrix>>>,
}

impl DecodeFamily {
    pub fn new(ensemble: &[DensityOperator], basis: &CMatrix, delta: f64, n: usize, limits: &Limits) -> Result<Self> {
        let d = basis.nrows();
        check_basis(basis, d)?;
        if let Some(bad) = ensemble.iter().find(|r| r.dim() != d) {
            return Err(Error::DimensionMismatch { left: d, right: bad.dim() });
        }
        if !(delta > 0.0) {
            return Err(Error::PreconditionViolated(format!("delta must be positive, got {delta}")));
        }
        limits.tensor_dim(d, n, 2)?;
        let spectra: Vec<(Vec<f64>, Vec<f64>)> = ensemble
            .iter()
            .map(|rho| {
                let rotated = rotate_in(rho.matrix(), basis);
                let pinched = (0..d).map(|i| rotated[(i, i)].re.max(0.0)).collect();
                (rho.spectrum().values().to_vec(), pinched)
            })
            .collect();
        let mut blocks = vec![vec![None; n + 1]; ensemble.len()];
        for row in blocks.iter_mut() {
            row[0] = Some(RMatrix::identity(1, 1));
        }
        for t in 1..=n {
            let frames = enumerate_frames(d, t);
            let projectors = central_projectors(d, &frames, t, limits)?;
            let types: Vec<Vec<u64>> = (0..d.pow(t as u32)).map(|i| index_type(i, d, t)).collect();
            let delta_t = n as f64 * delta / t as f64;
            for (u, (r, pinched)) in spectra.iter().enumerate() {
                let members = a_set_from_spectra(r, pinched, delta_t, t)?;
                if members.is_empty() {
                    continue;
                }
                let dim = types.len();
                let mut q = RMatrix::zeros(dim, dim);
                for (f, lambda) in &members {
                    let l = frames.iter().position(|x| x == lambda).expect("frame enumerated");
                    let p = &projectors[l];
                    for c in 0..dim {
                        if types[c] != f.counts() {
                            continue;
                        }
                        for r in 0..dim {
                            if types[r] == f.counts() {
                                q[(r, c)] += p[(r, c)];
                            }
                        }
                    }
                }
                blocks[u][t] = Some(q);
            }
        }
        Ok(Self {
            d,
            n,
            basis: basis.clone(),
            blocks,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    /// Single-site operator moved into the family's frame.
    pub fn rotate(&self, m: &CMatrix) -> CMatrix {
        rotate_in(m, &self.basis)
    }

    /// `P(u | u^n)` on a block of `t` sites, `None` when its A-set is empty.
    pub fn block(&self, u: usize, t: usize) -> Option<&RMatrix> {
        self.blocks.get(u).and_then(|row| row.get(t)).and_then(|b| b.as_ref())
    }

    /// Letters of `u_seq` whose block projector vanishes.
    pub fn empty_letters(&self, u_seq: &[usize]) -> Vec<usize> {
        let mut counts = vec![0usize; self.blocks.len()];
        for &u in u_seq {
            counts[u] += 1;
        }
        (0..counts.len()).filter(|&u| self.block(u, counts[u]).is_none()).collect()
    }

    /// `P(u^n)` in the family's frame: the tensor product of block projectors,
    /// with sites grouped by letter in declaration order.
    pub fn frame_projector(&self, u_seq: &[usize]) -> Result<(RMatrix, Vec<usize>)> {
        if u_seq.len() != self.n {
            return Err(Error::LengthMismatch {
                left: u_seq.len(),
                right: self.n,
            });
        }
        if let Some(&u) = u_seq.iter().find(|&&u| u >= self.blocks.len()) {
            return Err(Error::AlphabetMismatch(format!("letter {u} outside an alphabet of {}", self.blocks.len())));
        }
        let d = self.d;
        let n = self.n;
        let dim = d.pow(n as u32);
        let empty = self.empty_letters(u_seq);
        if !empty.is_empty() {
            return Ok((RMatrix::zeros(dim, dim), empty));
        }
        let letters: Vec<usize> = (0..self.blocks.len()).filter(|u| u_seq.contains(u)).collect();
        let positions: Vec<Vec<usize>> = letters
            .iter()
            .map(|&u| (0..n).filter(|&k| u_seq[k] == u).collect())
            .collect();
        // Sub-index of every full index within each block.
        let sub: Vec<Vec<usize>> = positions
            .iter()
            .map(|pos| {
                (0..dim)
                    .map(|i| {
                        let dig = digits(i, d, n);
                        pos.iter().fold(0, |acc, &k| acc * d + dig[k])
                    })
                    .collect()
            })
            .collect();
        let blocks: Vec<&RMatrix> = letters
            .iter()
            .zip(&positions)
            .map(|(&u, pos)| self.block(u, pos.len()).expect("non-empty block"))
            .collect();
        let m = RMatrix::from_fn(dim, dim, |r, c| {
            let mut v = 1.0;
            for (b, s) in blocks.iter().zip(&sub) {
                v *= b[(s[r], s[c])];
                if v == 0.0 {
                    break;
                }
            }
            v
        });
        Ok((m, empty))
    }

    /// `P(u^n)` in the computational frame.
    pub fn projector(&self, u_seq: &[usize]) -> Result<DecodeProjector> {
        let (m, empty_letters) = self.frame_projector(u_seq)?;
        let out = rotate_out(&linalg::to_complex(&m), Some(&self.basis), self.n);
        if !empty_letters.is_empty() {
            tracing::warn!(?empty_letters, "empty A-set; decoding block set to zero");
        }
        Ok(DecodeProjector {
            projector: ProjectorOperator::new(ProjectorKind::Decode, self.d, self.n, out),
            empty_letters,
        })
    }
}

/// `P(u^n)` for one sequence; `ensemble[u]` is the output state of letter `u`.
pub fn decode_projector(
    u_seq: &[usize],
    ensemble: &[DensityOperator],
    delta: f64,
    basis: &CMatrix,
    limits: &Limits,
) -> Result<DecodeProjector> {
    DecodeFamily::new(ensemble, basis, delta, u_seq.len(), limits)?.projector(u_seq)
}

/// `tr M A` for a real `M` and complex `A` of equal size.
pub fn trace_real_complex(m: &RMatrix, a: &CMatrix) -> f64 {
    let mut acc = 0.0;
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            let v = m[(r, c)];
            if v != 0.0 {
                acc += v * a[(c, r)].re;
            }
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn frame(rows: &[usize]) -> YoungFrame {
        YoungFrame::new(rows.to_vec()).unwrap()
    }

    fn limits() -> Limits {
        Limits::default()
    }

    #[test]
    fn two_qubit_central_projectors() {
        let frames = enumerate_frames(2, 2);
        let ps = central_projectors(2, &frames, 2, &limits()).unwrap();
        assert!((ps[0].trace() - 3.0).abs() < 1e-12);
        assert!((ps[1].trace() - 1.0).abs() < 1e-12);
        let sum = &ps[0] + &ps[1];
        assert!((sum - RMatrix::identity(4, 4)).abs().max() < 1e-12);
    }

    #[test]
    fn trace_is_multiplicity_times_dimension() {
        for n in 1..=6 {
            let frames = enumerate_frames(2, n);
            let ps = central_projectors(2, &frames, n, &limits()).unwrap();
            for (l, p) in frames.iter().zip(&ps) {
                let m = multiplicity(l, 2).to_f64().unwrap();
                let dim = irrep_dimension(l).to_f64().unwrap();
                assert!((p.trace() - m * dim).abs() < 1e-8);
                assert!(m <= (2.0 * n as f64).powi(4));
            }
        }
    }

    #[test]
    fn frequency_projector_examples() {
        let f = TypeVector::new(vec![2, 2]);
        let p = frequency_projector(&f, None, &limits()).unwrap();
        assert_eq!(p.rank(), 6);
        let top = frequency_projector(&TypeVector::new(vec![3, 0]), None, &limits()).unwrap();
        assert_eq!(top.rank(), 1);
        assert!((top.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let hadamard = CMatrix::from_row_slice(
            2,
            2,
            &[h, h, h, -h].map(|x| Complex64::new(x, 0.0)),
        );
        let rotated = frequency_projector(&f, Some(&hadamard), &limits()).unwrap();
        rotated.check().unwrap();
        assert_eq!(rotated.rank(), 6);
    }

    #[test]
    fn joint_projector_examples() {
        let l = limits();
        let sym = joint_projector(&TypeVector::new(vec![3, 0]), &frame(&[3]), None, &l).unwrap();
        assert_eq!(sym.rank(), 1);
        let anti = joint_projector(&TypeVector::new(vec![2, 0]), &frame(&[1, 1]), None, &l).unwrap();
        assert_eq!(anti.rank(), 0);
        let mixed = joint_projector(&TypeVector::new(vec![2, 1]), &frame(&[2, 1]), None, &l).unwrap();
        assert_eq!(mixed.rank(), 2);
        mixed.check().unwrap();
    }

    #[test]
    fn kostka_paths_agree_on_qutrits() {
        for n in 1..=4 {
            let frames = enumerate_frames(3, n);
            let ps = central_projectors(3, &frames, n, &limits()).unwrap();
            for f in enumerate_types(3, n, DEFAULT_ENUMERATION_CAP).unwrap() {
                for (l, p) in frames.iter().zip(&ps) {
                    assert!(kostka_test_with(p, &f, l).agree(), "f={f:?} lambda={l}");
                }
            }
        }
    }

    #[test]
    fn a_set_for_biased_qubit() {
        let rho = DensityOperator::from_diagonal(&[0.75, 0.25]).unwrap();
        let basis = CMatrix::identity(2, 2);
        let members = a_set(&rho, &basis, 0.05, 8).unwrap();
        // Oracle: both divergences evaluated directly.
        let mut expected = Vec::new();
        for k in 0..=8u64 {
            let f = [k as f64 / 8.0, (8 - k) as f64 / 8.0];
            if kl_divergence(&f, &[0.75, 0.25]) > 0.05 {
                continue;
            }
            for l in enumerate_frames(2, 8) {
                if kl_divergence(&l.normalized(2), &[0.75, 0.25]) <= 0.05 {
                    expected.push((TypeVector::new(vec![k, 8 - k]), l));
                }
            }
        }
        assert_eq!(members.len(), expected.len());
        for e in &expected {
            assert!(members.contains(e));
        }
        let everything = a_set(&rho, &basis, 1e9, 3).unwrap();
        assert_eq!(everything.len(), 4 * 2);
    }

    #[test]
    fn constant_sequence_uses_one_block() {
        let rho = DensityOperator::from_diagonal(&[0.9, 0.1]).unwrap();
        let basis = CMatrix::identity(2, 2);
        let family = DecodeFamily::new(std::slice::from_ref(&rho), &basis, 0.2, 3, &limits()).unwrap();
        let (m, empty) = family.frame_projector(&[0, 0, 0]).unwrap();
        assert!(empty.is_empty());
        assert!((&m - family.block(0, 3).unwrap()).abs().max() < 1e-15);
    }

    #[test]
    fn decode_projector_is_covariant() {
        let a = DensityOperator::from_diagonal(&[0.9, 0.1]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let b = DensityOperator::pure(&[Complex64::new(h, 0.0), Complex64::new(h, 0.0)]).unwrap();
        let avg = DensityOperator::mixture(&[0.5, 0.5], &[&a, &b]).unwrap();
        let basis = eigenbasis(&avg);
        let ens = vec![a.clone(), b.clone()];
        let family = DecodeFamily::new(&ens, &basis, 0.3, 4, &limits()).unwrap();
        let u = [0, 1, 0, 1];
        let v = [1, 0, 0, 1];
        let pu = family.projector(&u).unwrap().projector;
        let pv = family.projector(&v).unwrap().projector;
        pu.check().unwrap();
        let states = |seq: &[usize]| {
            linalg::kron_all(seq.iter().map(|&x| ens[x].matrix()).collect::<Vec<_>>())
        };
        let tu = linalg::trace_product(pu.matrix(), &states(&u)).re;
        let tv = linalg::trace_product(pv.matrix(), &states(&v)).re;
        assert!((tu - tv).abs() < 1e-10);
    }

    #[test]
    fn spectral_estimate_holds() {
        for m in 1..=6 {
            let frames = enumerate_frames(2, m);
            let ps = central_projectors(2, &frames, m, &limits()).unwrap();
            for (l, p) in frames.iter().zip(&ps) {
                assert!(spectral_estimate(p, l, &[0.8, 0.2]).holds);
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let l = Limits {
            dim_cap: 16,
            budget: Budget::default(),
        };
        assert!(matches!(
            central_projector(&frame(&[5]), 2, 5, &l),
            Err(Error::CapExceeded { .. })
        ));
    }
}
