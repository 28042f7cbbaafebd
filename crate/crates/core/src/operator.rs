//! Dense Hermitian operators, the generalized Gell-Mann operator basis and
//! superoperators expressed in that basis.
//!
//! Operators on a `d`-level system are treated as vectors of the real
//! Hilbert–Schmidt space through [`OperatorBasis::vectorize`]; with an
//! orthonormal Hermitian basis every coordinate is real, so every
//! superoperator in this crate is a real symmetric `d²×d²` matrix.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, Eigh};
use crate::scalar::Scalar;

pub type CMatrix<T> = DMatrix<Complex<T>>;

/// Relative Hermiticity tolerance applied by [`HermitianOperator::new`].
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Default eigenvalue tolerance, relative to the largest eigenvalue.
pub const PSD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator<T: Scalar> {
    matrix: CMatrix<T>,
}

/// Square root, pseudo-inverse and pseudo-inverse square root of a PSD operator.
#[derive(Debug, Clone)]
pub struct PsdOperators<T: Scalar> {
    pub sqrt: HermitianOperator<T>,
    pub pinv: HermitianOperator<T>,
    pub inv_sqrt_pinv: HermitianOperator<T>,
    pub rank: usize,
}

impl<T: Scalar> HermitianOperator<T> {
    /// Validates Hermiticity to `1e-12` of the largest entry magnitude.
    pub fn new(matrix: CMatrix<T>) -> Result<Self> {
        Self::with_tolerance(matrix, T::lit(HERMITICITY_TOL))
    }

    pub fn with_tolerance(matrix: CMatrix<T>, rel_tol: T) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        if matrix.nrows() == 0 {
            return Err(Error::InvalidParameter("operator dimension must be positive".into()));
        }
        let scale = linalg::max_abs_entry(&matrix);
        let (dev, row, col) = linalg::hermiticity_defect(&matrix);
        if dev > rel_tol * scale {
            return Err(Error::NotHermitian { row, col, deviation: dev.as_f64() });
        }
        Ok(Self::from_matrix_symmetrized(matrix))
    }

    /// Takes the Hermitian part of `matrix` without validation.
    pub fn from_matrix_symmetrized(matrix: CMatrix<T>) -> Self {
        Self { matrix: linalg::hermitian_part(&matrix) }
    }

    pub fn from_real(matrix: &DMatrix<T>) -> Result<Self> {
        Self::new(matrix.map(|x| Complex::new(x, T::zero())))
    }

    pub fn identity(d: usize) -> Self {
        Self { matrix: CMatrix::identity(d, d) }
    }

    pub fn zeros(d: usize) -> Self {
        Self { matrix: CMatrix::zeros(d, d) }
    }

    pub fn diagonal(values: &[T]) -> Self {
        let n = values.len();
        let mut m = CMatrix::zeros(n, n);
        for (k, &v) in values.iter().enumerate() {
            m[(k, k)] = Complex::new(v, T::zero());
        }
        Self { matrix: m }
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) vector.
    pub fn projector(psi: &DVector<Complex<T>>) -> Self {
        Self::from_matrix_symmetrized(psi * psi.adjoint())
    }

    pub fn pauli_x() -> Self {
        let (o, l) = (Complex::new(T::zero(), T::zero()), Complex::new(T::one(), T::zero()));
        Self { matrix: CMatrix::from_row_slice(2, 2, &[o, l, l, o]) }
    }

    pub fn pauli_y() -> Self {
        let o = Complex::new(T::zero(), T::zero());
        let i = Complex::new(T::zero(), T::one());
        Self { matrix: CMatrix::from_row_slice(2, 2, &[o, -i, i, o]) }
    }

    pub fn pauli_z() -> Self {
        Self::diagonal(&[T::one(), -T::one()])
    }

    /// `a·σ` for a three-vector `a`.
    pub fn bloch(a: [T; 3]) -> Self {
        &(&(&Self::pauli_x() * a[0]) + &(&Self::pauli_y() * a[1])) + &(&Self::pauli_z() * a[2])
    }

    /// Qubit density operator `(1 + s·σ)/2`.
    pub fn qubit_state(s: [T; 3]) -> Self {
        &(&Self::identity(2) + &Self::bloch(s)) * T::lit(0.5)
    }

    /// Maximally mixed state `1/d`.
    pub fn maximally_mixed(d: usize) -> Self {
        &Self::identity(d) * (T::one() / T::count(d))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.matrix
    }

    pub fn trace(&self) -> T {
        linalg::trace_real(&self.matrix)
    }

    /// Real Hilbert–Schmidt inner product `tr(A B)`.
    pub fn hs_inner(&self, other: &Self) -> T {
        linalg::hs_inner(&self.matrix, &other.matrix)
    }

    pub fn frobenius_norm(&self) -> T {
        linalg::frobenius(&self.matrix)
    }

    /// Commutator `[A, B]` as a plain (anti-Hermitian) matrix.
    pub fn commutator(&self, other: &Self) -> CMatrix<T> {
        &self.matrix * &other.matrix - &other.matrix * &self.matrix
    }

    /// Product `A B` as a plain matrix.
    pub fn product(&self, other: &Self) -> CMatrix<T> {
        &self.matrix * &other.matrix
    }

    /// Anticommutator half `(AB + BA)/2`, Hermitian.
    pub fn jordan_product(&self, other: &Self) -> Self {
        Self::from_matrix_symmetrized(self.product(other))
    }

    /// `U H U†`.
    pub fn conjugate_by(&self, unitary: &CMatrix<T>) -> Self {
        Self::from_matrix_symmetrized(unitary * &self.matrix * unitary.adjoint())
    }

    pub fn max_abs_entry(&self) -> T {
        linalg::max_abs_entry(&self.matrix)
    }

    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.dim() == other.dim() && linalg::max_abs_entry(&(&self.matrix - &other.matrix)) <= tol
    }

    pub fn spectral_decompose(&self) -> Eigh<T, Complex<T>> {
        linalg::eigh(&self.matrix)
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        linalg::eigenvalues(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> T {
        linalg::min_eigenvalue(&self.matrix)
    }

    pub fn op_norm(&self) -> T {
        linalg::op_norm_hermitian(&self.matrix)
    }

    pub fn trace_norm(&self) -> T {
        linalg::trace_norm(&self.matrix)
    }

    /// PSD square root, Moore–Penrose inverse and inverse square root.
    ///
    /// Eigenvalues within `tol` (relative to the largest) of zero count as
    /// zero; anything below `-tol` is rejected.
    pub fn psd_functions(&self, tol: T) -> Result<PsdOperators<T>> {
        let f = linalg::psd_functions(&self.matrix, tol)?;
        Ok(PsdOperators {
            sqrt: Self { matrix: f.sqrt },
            pinv: Self { matrix: f.pinv },
            inv_sqrt_pinv: Self { matrix: f.inv_sqrt_pinv },
            rank: f.rank,
        })
    }

    pub fn map_spectrum(&self, f: impl FnMut(T) -> T) -> Self {
        Self { matrix: self.spectral_decompose().map(f) }
    }
}

impl<T: Scalar> Add for &HermitianOperator<T> {
    type Output = HermitianOperator<T>;
    fn add(self, rhs: Self) -> HermitianOperator<T> {
        HermitianOperator { matrix: &self.matrix + &rhs.matrix }
    }
}

impl<T: Scalar> Sub for &HermitianOperator<T> {
    type Output = HermitianOperator<T>;
    fn sub(self, rhs: Self) -> HermitianOperator<T> {
        HermitianOperator { matrix: &self.matrix - &rhs.matrix }
    }
}

impl<T: Scalar> Mul<T> for &HermitianOperator<T> {
    type Output = HermitianOperator<T>;
    fn mul(self, rhs: T) -> HermitianOperator<T> {
        HermitianOperator { matrix: self.matrix.map(|z| z * rhs) }
    }
}

impl<T: Scalar> Neg for &HermitianOperator<T> {
    type Output = HermitianOperator<T>;
    fn neg(self) -> HermitianOperator<T> {
        HermitianOperator { matrix: -&self.matrix }
    }
}

/// Orthonormal Hermitian operator basis: `1/√d` followed by `d²−1`
/// traceless elements.
#[derive(Debug, Clone)]
pub struct OperatorBasis<T: Scalar> {
    dim: usize,
    elements: Vec<HermitianOperator<T>>,
}

impl<T: Scalar> OperatorBasis<T> {
    /// Normalized identity plus the generalized Gell-Mann matrices scaled to
    /// unit Hilbert–Schmidt norm.
    ///
    /// Ordering: for every pair `j < k` the symmetric then the antisymmetric
    /// element, followed by the `d−1` diagonal elements. For `d = 2` this is
    /// `(1, σx, σy, σz)/√2`.
    pub fn gell_mann(d: usize) -> Self {
        assert!(d >= 1, "dimension must be positive");
        let zero = Complex::new(T::zero(), T::zero());
        let inv_sqrt2 = T::one() / T::lit(2.0).sqrt();
        let mut elements = Vec::with_capacity(d * d);
        elements.push(&HermitianOperator::identity(d) * (T::one() / T::count(d).sqrt()));
        for j in 0..d {
            for k in (j + 1)..d {
                let mut sym = CMatrix::from_element(d, d, zero);
                sym[(j, k)] = Complex::new(inv_sqrt2, T::zero());
                sym[(k, j)] = Complex::new(inv_sqrt2, T::zero());
                elements.push(HermitianOperator { matrix: sym });
                let mut anti = CMatrix::from_element(d, d, zero);
                anti[(j, k)] = Complex::new(T::zero(), -inv_sqrt2);
                anti[(k, j)] = Complex::new(T::zero(), inv_sqrt2);
                elements.push(HermitianOperator { matrix: anti });
            }
        }
        for l in 1..d {
            let norm = T::one() / T::count(l * (l + 1)).sqrt();
            let mut diag = vec![T::zero(); d];
            for v in diag.iter_mut().take(l) {
                *v = norm;
            }
            diag[l] = -T::count(l) * norm;
            elements.push(HermitianOperator::diagonal(&diag));
        }
        Self { dim: d, elements }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of basis elements, `d²`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[HermitianOperator<T>] {
        &self.elements
    }

    /// The `d²−1` traceless elements.
    pub fn traceless(&self) -> &[HermitianOperator<T>] {
        &self.elements[1..]
    }

    /// Coordinates `c_k = tr(B_k H)`.
    pub fn vectorize(&self, h: &HermitianOperator<T>) -> Result<DVector<T>> {
        if h.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: h.dim() });
        }
        Ok(DVector::from_iterator(
            self.elements.len(),
            self.elements.iter().map(|b| b.hs_inner(h)),
        ))
    }

    /// Inverse of [`vectorize`](Self::vectorize).
    pub fn from_coordinates(&self, coords: &DVector<T>) -> Result<HermitianOperator<T>> {
        if coords.len() != self.elements.len() {
            return Err(Error::DimensionMismatch { expected: self.elements.len(), found: coords.len() });
        }
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (b, &c) in self.elements.iter().zip(coords.iter()) {
            m += b.matrix.map(|z| z * c);
        }
        Ok(HermitianOperator { matrix: m })
    }
}

/// Real symmetric superoperator in [`OperatorBasis`] coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator<T: Scalar> {
    dim: usize,
    matrix: DMatrix<T>,
}

impl<T: Scalar> Superoperator<T> {
    pub fn new(dim: usize, matrix: DMatrix<T>) -> Result<Self> {
        let n = dim * dim;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.nrows() });
        }
        let (dev, row, col) = linalg::hermiticity_defect(&matrix);
        if dev > T::lit(1e-10) {
            return Err(Error::NotHermitian { row, col, deviation: dev.as_f64() });
        }
        Ok(Self { dim, matrix: linalg::hermitian_part(&matrix) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn trace(&self) -> T {
        self.matrix.trace()
    }

    /// Restriction to the traceless subspace (drops the identity coordinate).
    pub fn traceless_block(&self) -> DMatrix<T> {
        let n = self.matrix.nrows();
        self.matrix.view((1, 1), (n - 1, n - 1)).into_owned()
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        linalg::eigenvalues(&self.matrix)
    }
}

/// Sorted eigen-decomposition of a Hermitian operator.
pub fn spectral_decompose<T: Scalar>(h: &HermitianOperator<T>) -> Eigh<T, Complex<T>> {
    h.spectral_decompose()
}

pub fn psd_functions<T: Scalar>(h: &HermitianOperator<T>, tol: T) -> Result<PsdOperators<T>> {
    h.psd_functions(tol)
}

pub fn trace_norm<T: Scalar>(h: &HermitianOperator<T>) -> T {
    h.trace_norm()
}

pub fn vectorize<T: Scalar>(h: &HermitianOperator<T>, basis: &OperatorBasis<T>) -> Result<DVector<T>> {
    basis.vectorize(h)
}
