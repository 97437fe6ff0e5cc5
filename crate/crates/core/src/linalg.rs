//! Dense complex matrix helpers built on `nalgebra`.
//!
//! Hermitian eigendecomposition is the only spectral primitive; matrix
//! functions (logarithms, inverse square roots) are evaluated through it.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Eigenpairs of a Hermitian matrix, eigenvalues sorted non-increasing.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors stored as columns, in the order of `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(m: &CMatrix) -> Self {
        let h = hermitian_part(m);
        let dim = h.nrows();
        let eig = h.symmetric_eigen();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = CMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
        Self { values, vectors }
    }

    /// Rebuild `V f(Λ) V*`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let dim = self.values.len();
        let mut out = CMatrix::zeros(dim, dim);
        for (k, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            if w == 0.0 {
                continue;
            }
            let v = self.vectors.column(k);
            for c in 0..dim {
                let vc = v[c].conj() * w;
                for r in 0..dim {
                    out[(r, c)] += v[r] * vc;
                }
            }
        }
        out
    }

    /// `<v_k, m v_k>` for every eigenvector (real part).
    pub fn diagonal_of(&self, m: &CMatrix) -> Vec<f64> {
        (0..self.values.len())
            .map(|k| {
                let v = self.vectors.column(k);
                let mv = m * v;
                v.iter().zip(mv.iter()).map(|(a, b)| (a.conj() * b).re).sum()
            })
            .collect()
    }
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn eigenvalues_hermitian(m: &CMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// Largest absolute entry of `m - m*`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..m.nrows() {
        for c in r..m.ncols() {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

pub fn trace(m: &CMatrix) -> Complex64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

/// `tr(a b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for f in factors {
        out = out.kronecker(f);
    }
    out
}

pub fn to_complex(m: &RMatrix) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Spectral norm of a Hermitian or anti-Hermitian matrix.
pub fn normal_spectral_norm(m: &CMatrix) -> f64 {
    // i*m is Hermitian when m is anti-Hermitian; m*m is always PSD.
    let gram = m.adjoint() * m;
    eigenvalues_hermitian(&gram)
        .first()
        .map(|v| v.max(0.0).sqrt())
        .unwrap_or(0.0)
}

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// Largest deviation of `b* b` from the identity.
pub fn orthonormality_deviation(basis: &CMatrix) -> f64 {
    let gram = basis.adjoint() * basis;
    let id = CMatrix::identity(gram.nrows(), gram.ncols());
    max_abs(&(gram - id))
}
