//! Dense Hermitian kernels over real or complex entries.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::{Entry, Scalar};

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct Eigh<T: Scalar, F: Entry<T>> {
    pub values: Vec<T>,
    /// Orthonormal eigenvectors stored as columns, in the order of `values`.
    pub vectors: DMatrix<F>,
}

impl<T: Scalar, F: Entry<T>> Eigh<T, F> {
    /// Rebuilds `Σ f(λ_k) v_k v_k†`.
    pub fn map(&self, mut f: impl FnMut(T) -> T) -> DMatrix<F> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            let w = F::from_real(f(lambda));
            for r in 0..n {
                scaled[(r, k)] *= w;
            }
        }
        let out = scaled * self.vectors.adjoint();
        hermitian_part(&out)
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    pub fn min(&self) -> T {
        self.values.last().copied().unwrap_or_else(T::zero)
    }

    pub fn max(&self) -> T {
        self.values.first().copied().unwrap_or_else(T::zero)
    }
}

/// `(M + M†)/2`.
pub fn hermitian_part<T: Scalar, F: Entry<T>>(m: &DMatrix<F>) -> DMatrix<F> {
    let half = F::real_lit(0.5);
    (m + m.adjoint()) * half
}

/// Largest deviation `|m_jk − conj(m_kj)|` and where it occurs.
pub fn hermiticity_defect<T: Scalar, F: Entry<T>>(m: &DMatrix<F>) -> (T, usize, usize) {
    let n = m.nrows();
    let mut worst = (T::zero(), 0, 0);
    for j in 0..n {
        for k in j..n {
            let dev = (m[(j, k)] - m[(k, j)].conjugate()).modulus();
            if dev > worst.0 {
                worst = (dev, j, k);
            }
        }
    }
    worst
}

pub fn max_abs_entry<T: Scalar, F: Entry<T>>(m: &DMatrix<F>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

/// Hermitian eigen-decomposition; the input is symmetrized before use.
pub fn eigh<T: Scalar, F: Entry<T>>(m: &DMatrix<F>) -> Eigh<T, F> {
    let n = m.nrows();
    if n == 0 {
        return Eigh { values: Vec::new(), vectors: DMatrix::zeros(0, 0) };
    }
    let sym = hermitian_part(m);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Eigh { values, vectors }
}

pub fn eigenvalues<T: Scalar, F: Entry<T>>(m: &DMatrix<F>) -> Vec<T> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let sym = hermitian_part(m);
    let mut vals: Vec<T> = sym.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    vals
}

pub fn min_eigenvalue<T: Scalar, F: Entry<T>>(m: &DMatrix<F>) -> T {
    eigenvalues(m).last().copied().unwrap_or_else(T::zero)
}

/// Spectral norm of a Hermitian matrix.
pub fn op_norm_hermitian<T: Scalar, F: Entry<T>>(m: &DMatrix<F>) -> T {
    eigenvalues(m).iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
}

/// Real Hilbert–Schmidt inner product `Re tr(A† B)`.
pub fn hs_inner<T: Scalar, F: Entry<T>>(a: &DMatrix<F>, b: &DMatrix<F>) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (x, y)| acc + (x.conjugate() * *y).real())
}

pub fn frobenius<T: Scalar, F: Entry<T>>(m: &DMatrix<F>) -> T {
    hs_inner(m, m).sqrt()
}

pub fn trace_real<T: Scalar, F: Entry<T>>(m: &DMatrix<F>) -> T {
    (0..m.nrows()).fold(T::zero(), |acc, k| acc + m[(k, k)].real())
}

/// Square root, Moore–Penrose inverse and inverse square root of a PSD matrix.
#[derive(Debug, Clone)]
pub struct PsdFunctions<T: Scalar, F: Entry<T>> {
    pub sqrt: DMatrix<F>,
    pub pinv: DMatrix<F>,
    pub inv_sqrt_pinv: DMatrix<F>,
    /// Projector onto the numerical support.
    pub support: DMatrix<F>,
    pub rank: usize,
    /// Eigenvalues at or below this magnitude were treated as zero.
    pub cutoff: T,
}

/// Cutoff used to decide which eigenvalues count as zero: `tol` relative to
/// the largest eigenvalue magnitude (absolute when the matrix vanishes).
pub fn relative_cutoff<T: Scalar>(tol: T, largest: T) -> T {
    if largest > T::zero() {
        tol * largest.max(T::one())
    } else {
        tol
    }
}

pub fn psd_functions<T: Scalar, F: Entry<T>>(m: &DMatrix<F>, tol: T) -> Result<PsdFunctions<T, F>> {
    let eig = eigh(m);
    let cutoff = relative_cutoff(tol, eig.max_abs());
    if let Some(&low) = eig.values.iter().find(|&&v| v < -cutoff) {
        return Err(Error::NotPsd { eigenvalue: low.as_f64() });
    }
    let on = |v: T| v > cutoff;
    let rank = eig.values.iter().filter(|&&v| on(v)).count();
    Ok(PsdFunctions {
        sqrt: eig.map(|v| if on(v) { v.sqrt() } else { T::zero() }),
        pinv: eig.map(|v| if on(v) { T::one() / v } else { T::zero() }),
        inv_sqrt_pinv: eig.map(|v| if on(v) { T::one() / v.sqrt() } else { T::zero() }),
        support: eig.map(|v| if on(v) { T::one() } else { T::zero() }),
        rank,
        cutoff,
    })
}

/// `Σ|λ_k|`.
pub fn trace_norm<T: Scalar, F: Entry<T>>(m: &DMatrix<F>) -> T {
    eigenvalues(m).iter().fold(T::zero(), |acc, v| acc + v.abs())
}

/// Absolute value `|M| = √(M²)` of a Hermitian matrix.
pub fn abs_hermitian<T: Scalar, F: Entry<T>>(m: &DMatrix<F>) -> DMatrix<F> {
    eigh(m).map(|v| v.abs())
}

/// Lift a real matrix to the entry field.
pub fn lift<T: Scalar, F: Entry<T>>(m: &DMatrix<T>) -> DMatrix<F> {
    m.map(F::from_real)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, Complex};

    #[test]
    fn eigh_sorts_descending_and_reconstructs() {
        let m = dmatrix![1.0, 2.0, 0.0; 2.0, -3.0, 1.0; 0.0, 1.0, 0.5];
        let e = eigh::<f64, f64>(&m);
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        let back = e.map(|v| v);
        assert!((back - m).norm() < 1e-12);
    }

    #[test]
    fn complex_trace_norm() {
        // σx − σz has eigenvalues ±√2.
        let z = |r: f64, i: f64| Complex::new(r, i);
        let m = dmatrix![z(-1.0, 0.0), z(1.0, 0.0); z(1.0, 0.0), z(1.0, 0.0)];
        assert!((trace_norm::<f64, Complex<f64>>(&m) - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn psd_functions_reject_negative() {
        let m = dmatrix![1.0, 0.0; 0.0, -0.5];
        assert!(matches!(psd_functions::<f64, f64>(&m, 1e-9), Err(Error::NotPsd { .. })));
    }
}
