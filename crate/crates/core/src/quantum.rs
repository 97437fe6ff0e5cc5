//! Density operators, probability vectors and the entropic functionals.
//!
//! All logarithms are base two and `0 log 0 = 0`. Relative entropies return
//! `f64::INFINITY` when the support condition fails.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, HermitianEigen};

/// Tolerance on `|m(i,j) - conj(m(j,i))|`.
pub const TOL_HERMITIAN: f64 = 1e-9;
/// Tolerance on `|tr m - 1|`.
pub const TOL_TRACE: f64 = 1e-9;
/// Eigenvalues in `[-TOL_EIGEN, 0)` are clipped to zero.
pub const TOL_EIGEN: f64 = 1e-9;
/// Eigenvalues at or below this value are outside the support.
pub const TOL_SUPPORT: f64 = 1e-10;

/// `-x log2 x` with the `0 log 0 = 0` convention.
#[inline]
pub fn neg_xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

/// Shannon entropy in bits. Entries are treated as masses, no normalization.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    p.iter().map(|&x| neg_xlogx(x)).sum()
}

/// Classical relative entropy `D(p||q)` in bits.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a <= 0.0 {
            continue;
        }
        if b <= 0.0 {
            return f64::INFINITY;
        }
        acc += a * (a / b).log2();
    }
    acc.max(0.0)
}

/// L1 distance between two probability vectors.
pub fn l1_distance(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum()
}

/// A probability vector over `0..len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates non-negativity and normalization. Entries in
    /// `[-TOL_TRACE, 0)` are clipped to zero.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        let mut probs = probs;
        for p in probs.iter_mut() {
            if !p.is_finite() || *p < -TOL_TRACE {
                return Err(Error::InvalidDistribution(format!("mass {p} is negative or not finite")));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > TOL_TRACE {
            return Err(Error::InvalidDistribution(format!("masses sum to {total}")));
        }
        Ok(Self { probs })
    }

    pub fn uniform(len: usize) -> Self {
        Self {
            probs: vec![1.0 / len as f64; len],
        }
    }

    pub fn point(len: usize, at: usize) -> Self {
        let mut probs = vec![0.0; len];
        probs[at] = 1.0;
        Self { probs }
    }

    /// Renormalizes non-negative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.probs)
    }

    /// Smallest positive mass.
    pub fn min_positive(&self) -> f64 {
        self.probs
            .iter()
            .copied()
            .filter(|&p| p > 0.0)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }
}

/// Eigenvalues of a state, sorted non-increasing and clipped at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.values)
    }
}

/// A validated density operator: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    /// Checks the three state invariants and reports the first violation.
    pub fn validate(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let deviation = linalg::hermiticity_deviation(&m);
        if deviation > TOL_HERMITIAN {
            return Err(Error::NotHermitian { deviation });
        }
        let m = linalg::hermitian_part(&m);
        let trace = linalg::trace(&m).re;
        if (trace - 1.0).abs() > TOL_TRACE {
            return Err(Error::TraceNotOne { trace });
        }
        let min_eigenvalue = linalg::eigenvalues_hermitian(&m).last().copied().unwrap_or(0.0);
        if min_eigenvalue < -TOL_EIGEN {
            return Err(Error::NotPsd { min_eigenvalue });
        }
        Ok(Self { matrix: m })
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let d = diag.len();
        Self::validate(CMatrix::from_fn(d, d, |r, c| {
            if r == c {
                Complex64::new(diag[r], 0.0)
            } else {
                linalg::ZERO
            }
        }))
    }

    /// `|v><v| / <v,v>`.
    pub fn pure(v: &[Complex64]) -> Result<Self> {
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if !(norm > 0.0) {
            return Err(Error::TraceNotOne { trace: 0.0 });
        }
        let d = v.len();
        Self::validate(CMatrix::from_fn(d, d, |r, c| v[r] * v[c].conj() / norm))
    }

    /// `|i><i|` in dimension `d`.
    pub fn basis_state(d: usize, i: usize) -> Self {
        let mut m = CMatrix::zeros(d, d);
        m[(i, i)] = linalg::ONE;
        Self { matrix: m }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            matrix: CMatrix::identity(d, d).scale(1.0 / d as f64),
        }
    }

    /// Convex combination of states. Weights must be non-negative and sum to one.
    pub fn mixture(weights: &[f64], states: &[&DensityOperator]) -> Result<Self> {
        let d = states.first().map(|s| s.dim()).unwrap_or(0);
        if states.is_empty() || weights.len() != states.len() {
            return Err(Error::ShapeMismatch("mixture needs one weight per state".into()));
        }
        let mut m = CMatrix::zeros(d, d);
        for (w, s) in weights.iter().zip(states) {
            if s.dim() != d {
                return Err(Error::DimensionMismatch { left: d, right: s.dim() });
            }
            if *w != 0.0 {
                m += s.matrix.scale(*w);
            }
        }
        Self::validate(m)
    }

    /// Wraps a matrix that is a state by construction (e.g. a mixture or
    /// tensor product of states). Only the Hermitian part is kept.
    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self {
            matrix: linalg::hermitian_part(&m),
        }
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        Self {
            matrix: linalg::kron(&self.matrix, &other.matrix),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn spectrum(&self) -> Spectrum {
        let values = linalg::eigenvalues_hermitian(&self.matrix)
            .into_iter()
            .map(|v| v.max(0.0))
            .collect();
        Spectrum { values }
    }

    pub fn eigen(&self) -> HermitianEigen {
        HermitianEigen::new(&self.matrix)
    }

    /// `U rho U*`.
    pub fn conjugate(&self, u: &CMatrix) -> DensityOperator {
        Self::from_matrix_unchecked(u * &self.matrix * u.adjoint())
    }
}

fn check_dims(a: &DensityOperator, b: &DensityOperator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(())
}

/// `S(rho) = -tr rho log rho`, in bits.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    rho.spectrum().entropy()
}

/// `D(rho||sigma) = tr rho (log rho - log sigma)`, or `+inf` when the support
/// of `rho` is not contained in the support of `sigma`.
pub fn relative_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_dims(rho, sigma)?;
    let eig = sigma.eigen();
    // Weight of rho on the kernel of sigma.
    let kernel_weight: f64 = eig
        .diagonal_of(rho.matrix())
        .iter()
        .zip(&eig.values)
        .filter(|(_, &t)| t <= TOL_SUPPORT)
        .map(|(w, _)| *w)
        .sum();
    if kernel_weight > TOL_SUPPORT {
        return Ok(f64::INFINITY);
    }
    let log_sigma = eig.apply(|t| if t > TOL_SUPPORT { t.log2() } else { 0.0 });
    let cross = linalg::trace_product(rho.matrix(), &log_sigma).re;
    Ok((-von_neumann_entropy(rho) - cross).max(0.0))
}

/// `||rho - sigma||_1`, the sum of absolute eigenvalues of the difference.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_dims(rho, sigma)?;
    let diff = rho.matrix() - sigma.matrix();
    Ok(linalg::eigenvalues_hermitian(&diff).iter().map(|v| v.abs()).sum())
}

fn check_ensemble(q: &Distribution, ensemble: &[DensityOperator]) -> Result<usize> {
    if q.len() != ensemble.len() {
        return Err(Error::ShapeMismatch(format!(
            "distribution over {} letters, ensemble of {} states",
            q.len(),
            ensemble.len()
        )));
    }
    let d = ensemble[0].dim();
    for s in ensemble {
        if s.dim() != d {
            return Err(Error::DimensionMismatch { left: d, right: s.dim() });
        }
    }
    Ok(d)
}

/// Average state `sum_u q(u) rho_u`.
pub fn average_state(q: &Distribution, ensemble: &[DensityOperator]) -> Result<DensityOperator> {
    let d = check_ensemble(q, ensemble)?;
    let mut m = CMatrix::zeros(d, d);
    for (w, s) in q.probs().iter().zip(ensemble) {
        if *w > 0.0 {
            m += s.matrix().scale(*w);
        }
    }
    Ok(DensityOperator::from_matrix_unchecked(m))
}

/// Holevo quantity `S(sum q rho_u) - sum q S(rho_u)`.
pub fn holevo_quantity(q: &Distribution, ensemble: &[DensityOperator]) -> Result<f64> {
    let avg = average_state(q, ensemble)?;
    let inner: f64 = q
        .probs()
        .iter()
        .zip(ensemble)
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, s)| w * von_neumann_entropy(s))
        .sum();
    Ok((von_neumann_entropy(&avg) - inner).max(0.0))
}

/// Holevo quantity through the divergence form `sum q D(rho_u||rho_bar)`.
pub fn holevo_quantity_divergence(q: &Distribution, ensemble: &[DensityOperator]) -> Result<f64> {
    let avg = average_state(q, ensemble)?;
    let mut acc = 0.0;
    for (w, s) in q.probs().iter().zip(ensemble) {
        if *w > 0.0 {
            acc += w * relative_entropy(s, &avg)?;
        }
    }
    Ok(acc)
}

/// Diagonal of `rho` in the orthonormal basis given by the columns of `basis`.
pub fn pinch(rho: &DensityOperator, basis: &CMatrix) -> Result<Distribution> {
    if basis.nrows() != rho.dim() || basis.ncols() != rho.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: basis.nrows(),
        });
    }
    let deviation = linalg::orthonormality_deviation(basis);
    if deviation > TOL_HERMITIAN {
        return Err(Error::BasisNotOrthonormal { deviation });
    }
    let rotated = basis.adjoint() * rho.matrix() * basis;
    let diag: Vec<f64> = (0..rho.dim()).map(|i| rotated[(i, i)].re.max(0.0)).collect();
    let total: f64 = diag.iter().sum();
    Distribution::new(diag.into_iter().map(|x| x / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plus() -> DensityOperator {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        DensityOperator::pure(&[Complex64::new(h, 0.0), Complex64::new(h, 0.0)]).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(DensityOperator::validate(CMatrix::identity(2, 2).scale(0.5)).is_ok());
        assert!(matches!(
            DensityOperator::from_diagonal(&[1.1, -0.1]),
            Err(Error::NotPsd { min_eigenvalue }) if (min_eigenvalue + 0.1).abs() < 1e-12
        ));
        assert!(matches!(
            DensityOperator::from_diagonal(&[0.6, 0.6]),
            Err(Error::TraceNotOne { trace }) if (trace - 1.2).abs() < 1e-12
        ));
        let mut m = CMatrix::identity(2, 2).scale(0.5);
        m[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(matches!(DensityOperator::validate(m), Err(Error::NotHermitian { .. })));
        assert!(matches!(
            DensityOperator::validate(CMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn entropy_examples() {
        assert!((von_neumann_entropy(&DensityOperator::maximally_mixed(2)) - 1.0).abs() < 1e-12);
        assert!(von_neumann_entropy(&DensityOperator::basis_state(2, 0)).abs() < 1e-12);
        let rho = DensityOperator::from_diagonal(&[0.75, 0.25]).unwrap();
        assert!((von_neumann_entropy(&rho) - 0.811278).abs() < 1e-6);
    }

    #[test]
    fn relative_entropy_examples() {
        let rho = DensityOperator::from_diagonal(&[0.75, 0.25]).unwrap();
        assert!(relative_entropy(&rho, &rho).unwrap().abs() < 1e-12);
        let zero = DensityOperator::basis_state(2, 0);
        let one = DensityOperator::basis_state(2, 1);
        assert_eq!(relative_entropy(&zero, &one).unwrap(), f64::INFINITY);
        let mixed = DensityOperator::maximally_mixed(2);
        assert!((relative_entropy(&rho, &mixed).unwrap() - 0.188722).abs() < 1e-6);
        let qutrit = DensityOperator::maximally_mixed(3);
        assert!(matches!(
            relative_entropy(&rho, &qutrit),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn trace_distance_examples() {
        let rho = DensityOperator::from_diagonal(&[0.75, 0.25]).unwrap();
        assert!(trace_distance(&rho, &rho).unwrap().abs() < 1e-12);
        let zero = DensityOperator::basis_state(2, 0);
        let one = DensityOperator::basis_state(2, 1);
        assert!((trace_distance(&zero, &one).unwrap() - 2.0).abs() < 1e-12);
        let mixed = DensityOperator::maximally_mixed(2);
        assert!((trace_distance(&rho, &mixed).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn holevo_examples() {
        let rho = DensityOperator::from_diagonal(&[0.75, 0.25]).unwrap();
        let q = Distribution::uniform(2);
        assert!(holevo_quantity(&q, &[rho.clone(), rho]).unwrap().abs() < 1e-12);
        let ortho = [DensityOperator::basis_state(2, 0), DensityOperator::basis_state(2, 1)];
        assert!((holevo_quantity(&q, &ortho).unwrap() - 1.0).abs() < 1e-12);
        let ens = [DensityOperator::basis_state(2, 0), plus()];
        // eigenvalues (1 +- 1/sqrt 2)/2 of the average, then binary entropy
        let a = (1.0 + std::f64::consts::FRAC_1_SQRT_2) / 2.0;
        let expected = neg_xlogx(a) + neg_xlogx(1.0 - a);
        let chi = holevo_quantity(&q, &ens).unwrap();
        assert!((chi - expected).abs() < 1e-12);
        assert!((chi - 0.600876).abs() < 1e-6);
        assert!((holevo_quantity_divergence(&q, &ens).unwrap() - chi).abs() < 1e-9);
    }

    #[test]
    fn pinch_examples() {
        let rho = DensityOperator::from_diagonal(&[0.3, 0.7]).unwrap();
        let id = CMatrix::identity(2, 2);
        assert_eq!(pinch(&rho, &id).unwrap().probs(), &[0.3, 0.7]);
        let p = pinch(&plus(), &id).unwrap();
        assert!((p.get(0) - 0.5).abs() < 1e-12 && (p.get(1) - 0.5).abs() < 1e-12);
        let mut bad = id.clone();
        bad[(0, 1)] = Complex64::new(0.5, 0.0);
        assert!(matches!(pinch(&rho, &bad), Err(Error::BasisNotOrthonormal { .. })));
    }

    #[test]
    fn distribution_validation() {
        assert!(Distribution::new(vec![0.5, 0.6]).is_err());
        assert!(Distribution::new(vec![-0.1, 1.1]).is_err());
        assert!(Distribution::new(vec![]).is_err());
        let p = Distribution::new(vec![1.0 + 1e-12, -1e-12]).unwrap();
        assert_eq!(p.get(1), 0.0);
        assert_eq!(Distribution::new(vec![0.25, 0.75]).unwrap().min_positive(), 0.25);
    }
}
