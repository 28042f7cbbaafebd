//! Classical and quantum Fisher information: SLDs, the SLD quantum Fisher
//! matrix, measurement Fisher matrices, metric adjustment, Gill–Massar traces
//! and the frame superoperators of a POVM.
//!
//! Only necessary conditions on realizable Fisher matrices (the SLD bound and
//! the Gill–Massar trace) are available here; beyond the qubit they do not
//! characterize the set of achievable Fisher matrices.

use nalgebra::{Complex, ComplexField, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::operator::{CMatrix, HermitianOperator, OperatorBasis, Superoperator};
use crate::povm::Povm;
use crate::scalar::Scalar;

/// State plus tangent directions `∂_j ρ`.
#[derive(Debug, Clone)]
pub struct ParamPoint<T: Scalar> {
    rho: HermitianOperator<T>,
    tangents: Vec<HermitianOperator<T>>,
}

impl<T: Scalar> ParamPoint<T> {
    pub fn new(rho: HermitianOperator<T>, tangents: Vec<HermitianOperator<T>>) -> Result<Self> {
        let d = rho.dim();
        if (rho.trace() - T::one()).abs() > T::lit(1e-10) {
            return Err(Error::InvalidParameter(format!("state trace {} is not 1", rho.trace().as_f64())));
        }
        let low = rho.min_eigenvalue();
        if low < -T::lit(1e-9) {
            return Err(Error::NotPsd { eigenvalue: low.as_f64() });
        }
        for (k, t) in tangents.iter().enumerate() {
            if t.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: t.dim() });
            }
            if t.trace().abs() > T::lit(1e-10) {
                return Err(Error::InvalidParameter(format!(
                    "tangent {k} has trace {}",
                    t.trace().as_f64()
                )));
            }
        }
        Ok(Self { rho, tangents })
    }

    pub fn rho(&self) -> &HermitianOperator<T> {
        &self.rho
    }

    pub fn tangents(&self) -> &[HermitianOperator<T>] {
        &self.tangents
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn num_params(&self) -> usize {
        self.tangents.len()
    }

    /// Conjugates the state and every tangent by `unitary`.
    pub fn conjugate_by(&self, unitary: &CMatrix<T>) -> Self {
        Self {
            rho: self.rho.conjugate_by(unitary),
            tangents: self.tangents.iter().map(|t| t.conjugate_by(unitary)).collect(),
        }
    }
}

/// Real symmetric PSD matrix over the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherMatrix<T: Scalar>(DMatrix<T>);

/// SLD quantum Fisher information matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QfiMatrix<T: Scalar>(DMatrix<T>);

fn check_sym_psd<T: Scalar>(m: &DMatrix<T>) -> Result<DMatrix<T>> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    let scale = T::one().max(linalg::max_abs_entry(m));
    let (dev, row, col) = linalg::hermiticity_defect(m);
    if dev > T::lit(1e-10) * scale {
        return Err(Error::NotHermitian { row, col, deviation: dev.as_f64() });
    }
    let sym = linalg::hermitian_part(m);
    let low = linalg::min_eigenvalue(&sym);
    if low < -T::lit(1e-9) * scale {
        return Err(Error::NotPsd { eigenvalue: low.as_f64() });
    }
    Ok(sym)
}

macro_rules! matrix_newtype {
    ($name:ident) => {
        impl<T: Scalar> $name<T> {
            /// Validates symmetry (1e-10) and positivity (−1e-9), both relative
            /// to the largest entry when it exceeds one.
            pub fn new(m: DMatrix<T>) -> Result<Self> {
                check_sym_psd(&m).map(Self)
            }

            pub fn matrix(&self) -> &DMatrix<T> {
                &self.0
            }

            pub fn into_inner(self) -> DMatrix<T> {
                self.0
            }

            pub fn size(&self) -> usize {
                self.0.nrows()
            }

            pub fn trace(&self) -> T {
                self.0.trace()
            }

            pub fn eigenvalues(&self) -> Vec<T> {
                linalg::eigenvalues(&self.0)
            }
        }
    };
}

matrix_newtype!(FisherMatrix);
matrix_newtype!(QfiMatrix);

/// Symmetric logarithmic derivative `L` solving `∂ρ = (ρL + Lρ)/2`.
///
/// Solved in the eigenbasis of `ρ`: `L_jk = 2 (∂ρ)_jk / (p_j + p_k)` when
/// `p_j + p_k > tol`. The kernel–kernel block of `L` is set to zero (it does
/// not affect `ρL + Lρ`); a nonzero kernel–kernel block of `∂ρ` is rejected.
pub fn sld<T: Scalar>(rho: &HermitianOperator<T>, drho: &HermitianOperator<T>, tol: T) -> Result<HermitianOperator<T>> {
    if rho.dim() != drho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: drho.dim() });
    }
    let eig = rho.spectral_decompose();
    let u = &eig.vectors;
    let local = u.adjoint() * drho.matrix() * u;
    let n = rho.dim();
    let mut l = CMatrix::<T>::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            let denom = eig.values[j] + eig.values[k];
            if denom > tol {
                l[(j, k)] = local[(j, k)] * Complex::new(T::lit(2.0) / denom, T::zero());
            } else if local[(j, k)].modulus() > tol {
                return Err(Error::RankDeficient { row: j, col: k, magnitude: local[(j, k)].modulus().as_f64() });
            }
        }
    }
    Ok(HermitianOperator::from_matrix_symmetrized(u * l * u.adjoint()))
}

/// `‖∂ρ − (ρL + Lρ)/2‖_F`.
pub fn sld_residual<T: Scalar>(rho: &HermitianOperator<T>, drho: &HermitianOperator<T>, l: &HermitianOperator<T>) -> T {
    (drho - &rho.jordan_product(l)).frobenius_norm()
}

pub fn slds<T: Scalar>(pt: &ParamPoint<T>, tol: T) -> Result<Vec<HermitianOperator<T>>> {
    pt.tangents.iter().map(|t| sld(&pt.rho, t, tol)).collect()
}

/// `J_jk = tr(ρ (L_j L_k + L_k L_j))/2`.
pub fn qfi_matrix<T: Scalar>(pt: &ParamPoint<T>, tol: T) -> Result<QfiMatrix<T>> {
    let ls = slds(pt, tol)?;
    let n = ls.len();
    let mut j = DMatrix::<T>::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let v = pt.rho.hs_inner(&ls[a].jordan_product(&ls[b]));
            j[(a, b)] = v;
            j[(b, a)] = v;
        }
    }
    QfiMatrix::new(j)
}

/// Knobs for [`fisher_matrix_with`].
#[derive(Debug, Clone, Copy)]
pub struct FisherOptions<T: Scalar> {
    /// Outcomes at or below this probability are candidates for skipping.
    pub prob_floor: T,
    /// A skipped outcome must have every score numerator below this.
    pub numerator_tol: T,
}

impl<T: Scalar> Default for FisherOptions<T> {
    fn default() -> Self {
        Self { prob_floor: T::lit(1e-12), numerator_tol: T::lit(1e-9) }
    }
}

/// `I_jk = Σ_ξ tr(∂_jρ A_ξ) tr(∂_kρ A_ξ) / tr(ρ A_ξ)`.
pub fn fisher_matrix<T: Scalar>(pt: &ParamPoint<T>, p: &Povm<T>) -> Result<FisherMatrix<T>> {
    fisher_matrix_with(pt, p, FisherOptions::default())
}

pub fn fisher_matrix_with<T: Scalar>(pt: &ParamPoint<T>, p: &Povm<T>, opts: FisherOptions<T>) -> Result<FisherMatrix<T>> {
    if p.dim() != pt.dim() {
        return Err(Error::DimensionMismatch { expected: pt.dim(), found: p.dim() });
    }
    let n = pt.num_params();
    let mut info = DMatrix::<T>::zeros(n, n);
    for (outcome, a) in p.operators().enumerate() {
        let prob = pt.rho.hs_inner(a);
        let score = DVector::from_iterator(n, pt.tangents.iter().map(|t| t.hs_inner(a)));
        if prob <= opts.prob_floor {
            let worst = score.amax();
            if worst > opts.numerator_tol {
                return Err(Error::SingularModel {
                    outcome,
                    probability: prob.as_f64(),
                    numerator: worst.as_f64(),
                });
            }
            continue;
        }
        info += &score * score.transpose() * (T::one() / prob);
    }
    Ok(FisherMatrix(linalg::hermitian_part(&info)))
}

fn adjust<T: Scalar>(i: &DMatrix<T>, j: &DMatrix<T>, tol: T) -> Result<linalg::PsdFunctions<T, T>> {
    if i.nrows() != j.nrows() {
        return Err(Error::DimensionMismatch { expected: j.nrows(), found: i.nrows() });
    }
    let f = linalg::psd_functions(j, tol)?;
    let kernel = DMatrix::<T>::identity(j.nrows(), j.nrows()) - &f.support;
    let leak = linalg::op_norm_hermitian(&(&kernel * i * &kernel));
    if leak > tol * T::one().max(linalg::op_norm_hermitian(i)) {
        return Err(Error::InfeasibleAdjustment { leak: leak.as_f64() });
    }
    Ok(f)
}

/// `Ĩ = J^{-1/2} I J^{-1/2}` with the pseudo-inverse square root of `J`.
pub fn metric_adjusted<T: Scalar>(i: &FisherMatrix<T>, j: &QfiMatrix<T>, tol: T) -> Result<FisherMatrix<T>> {
    let f = adjust(&i.0, &j.0, tol)?;
    let adjusted = &f.inv_sqrt_pinv * &i.0 * &f.inv_sqrt_pinv;
    Ok(FisherMatrix(linalg::hermitian_part(&adjusted)))
}

/// Gill–Massar trace `tr(J⁺ I)`.
pub fn gm_trace<T: Scalar>(i: &FisherMatrix<T>, j: &QfiMatrix<T>) -> Result<T> {
    gm_trace_with_tol(i, j, T::lit(1e-9))
}

pub fn gm_trace_with_tol<T: Scalar>(i: &FisherMatrix<T>, j: &QfiMatrix<T>, tol: T) -> Result<T> {
    let f = adjust(&i.0, &j.0, tol)?;
    Ok((&f.pinv * &i.0).trace())
}

/// Frame superoperators `G = Σ |A⟩⟩⟨⟨A| / tr A` and its traceless
/// compression `Ḡ = Ī G Ī`.
#[derive(Debug, Clone)]
pub struct FrameSuperoperators<T: Scalar> {
    pub g: Superoperator<T>,
    pub gbar: Superoperator<T>,
}

impl<T: Scalar> FrameSuperoperators<T> {
    /// `Ḡ` restricted to the `(d²−1)`-dimensional traceless subspace.
    pub fn gbar_traceless(&self) -> DMatrix<T> {
        self.gbar.traceless_block()
    }
}

pub fn frame_superoperators<T: Scalar>(p: &Povm<T>) -> FrameSuperoperators<T> {
    frame_superoperators_in(p, &OperatorBasis::gell_mann(p.dim()))
}

pub fn frame_superoperators_in<T: Scalar>(p: &Povm<T>, basis: &OperatorBasis<T>) -> FrameSuperoperators<T> {
    let n = basis.len();
    let mut g = DMatrix::<T>::zeros(n, n);
    for a in p.operators() {
        let tr = a.trace();
        if tr <= T::lit(1e-14) {
            continue;
        }
        let c = basis.vectorize(a).expect("POVM and basis share a dimension");
        g += &c * c.transpose() * (T::one() / tr);
    }
    let mut gbar = g.clone();
    gbar.row_mut(0).fill(T::zero());
    gbar.column_mut(0).fill(T::zero());
    let d = p.dim();
    FrameSuperoperators {
        g: Superoperator::new(d, linalg::hermitian_part(&g)).expect("symmetric by construction"),
        gbar: Superoperator::new(d, linalg::hermitian_part(&gbar)).expect("symmetric by construction"),
    }
}

/// Parameter point whose tangents are the `d²−1` traceless basis elements.
pub fn full_param_point<T: Scalar>(rho: &HermitianOperator<T>, basis: &OperatorBasis<T>) -> Result<ParamPoint<T>> {
    if rho.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), found: rho.dim() });
    }
    ParamPoint::new(rho.clone(), basis.traceless().to_vec())
}

/// Full traceless point at the maximally mixed state.
pub fn central_point<T: Scalar>(d: usize) -> ParamPoint<T> {
    full_param_point(&HermitianOperator::maximally_mixed(d), &OperatorBasis::gell_mann(d)).expect("valid state")
}

/// Qubit Bloch parametrization `ρ = (1 + s·σ)/2` with tangents `σ_k/2`.
pub fn qubit_bloch_point<T: Scalar>(s: [T; 3]) -> Result<ParamPoint<T>> {
    let half = T::lit(0.5);
    let tangents = vec![
        &HermitianOperator::pauli_x() * half,
        &HermitianOperator::pauli_y() * half,
        &HermitianOperator::pauli_z() * half,
    ];
    ParamPoint::new(HermitianOperator::qubit_state(s), tangents)
}

/// Closed-form inverse QFI of the qubit Bloch parametrization, `1 − s sᵀ`.
pub fn qubit_qfi_inverse<T: Scalar>(s: [T; 3]) -> DMatrix<T> {
    let v = DVector::from_column_slice(&s);
    DMatrix::identity(3, 3) - &v * v.transpose()
}
