//! Maximal CHSH violation for a pair of ±1-valued observables on one side,
//! optimized over the state and the other party's observables.
//!
//! The Bell operator is normalized so that local models satisfy
//! `|⟨𝔹⟩| ≤ 1` and quantum mechanics reaches at most `√2`.

use nalgebra::{Complex, DVector};

use crate::error::{Error, Result};
use crate::incompat;
use crate::linalg;
use crate::operator::{CMatrix, HermitianOperator};
use crate::povm::SharpObservable;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct ChshResult<T: Scalar> {
    /// `√(1 + sin θ₁)`.
    pub max_violation: T,
    /// Orthonormal basis of the span of `ψ₁` and `φ₁`; `None` for commuting pairs.
    pub optimal_subspace: Option<(DVector<Complex<T>>, DVector<Complex<T>>)>,
    /// `θ_j ∈ [0, π]` with `cos(θ_j/2)` the singular values of `A₊B₊`, in SVD order.
    pub angles: Vec<T>,
    /// `θ₁`, the angle maximizing `sin θ_j` (first in SVD order on ties).
    pub theta: T,
    /// `τ` of the two observables restricted to the optimal subspace.
    pub tau_restricted: Option<T>,
}

fn check_unit<T: Scalar>(v: &[T; 3]) -> Result<()> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if (n - T::one()).abs() > T::lit(1e-9) {
        return Err(Error::InvalidParameter(format!("expected a unit vector, norm is {}", n.as_f64())));
    }
    Ok(())
}

/// `√(1 + sin θ)` for the observables `a·σ` and `b·σ`.
pub fn chsh_max_qubit<T: Scalar>(a: [T; 3], b: [T; 3]) -> Result<T> {
    check_unit(&a)?;
    check_unit(&b)?;
    let cross = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt().min(T::one());
    Ok((T::one() + sin).sqrt())
}

/// Orthonormal columns spanning the `+1` eigenspace.
fn plus_space<T: Scalar>(a: &SharpObservable<T>) -> CMatrix<T> {
    let eig = a.operator().spectral_decompose();
    let cols: Vec<usize> = (0..a.dim()).filter(|&k| eig.values[k] > T::zero()).collect();
    CMatrix::from_fn(a.dim(), cols.len(), |r, c| eig.vectors[(r, cols[c])])
}

/// General-dimension maximum from the singular value decomposition of `A₊B₊`.
pub fn chsh_max_general<T: Scalar>(a: &SharpObservable<T>, b: &SharpObservable<T>) -> Result<ChshResult<T>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let tol = T::lit(1e-9);
    if !a.is_pm_one(tol) || !b.is_pm_one(tol) {
        return Err(Error::InvalidParameter("observables must have spectrum in {+1, -1}".into()));
    }
    let ua = plus_space(a);
    let ub = plus_space(b);
    let none = ChshResult { max_violation: T::one(), optimal_subspace: None, angles: Vec::new(), theta: T::zero(), tau_restricted: None };
    if ua.ncols() == 0 || ub.ncols() == 0 {
        return Ok(none);
    }
    let svd = (ua.adjoint() * &ub).svd(true, true);
    let (w, vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j].partial_cmp(&svd.singular_values[i]).unwrap_or(std::cmp::Ordering::Equal)
    });
    let two = T::lit(2.0);
    let angles: Vec<T> = order.iter().map(|&k| two * svd.singular_values[k].min(T::one()).acos()).collect();
    let mut best = 0;
    for (j, th) in angles.iter().enumerate() {
        if th.sin() > angles[best].sin() + T::lit(1e-14) {
            best = j;
        }
    }
    let theta = angles[best];
    let sin = theta.sin().max(T::zero());
    if sin <= T::lit(1e-12) {
        return Ok(ChshResult { angles, ..none });
    }
    let k = order[best];
    let psi = &ua * w.column(k);
    let phi = &ub * vt.row(k).adjoint();
    let overlap = psi.dotc(&phi);
    let rest = &phi - &psi * overlap;
    let e2 = &rest / Complex::new(rest.norm(), T::zero());
    let basis = CMatrix::from_columns(&[psi.clone(), e2.clone()]);
    let restrict = |h: &HermitianOperator<T>| {
        HermitianOperator::from_matrix_symmetrized(basis.adjoint() * h.matrix() * &basis)
    };
    let ar = SharpObservable::new(restrict(a.operator()));
    let br = SharpObservable::new(restrict(b.operator()));
    let tau_restricted = incompat::tau_von_neumann(&ar, &br).ok();
    Ok(ChshResult {
        max_violation: (T::one() + sin).sqrt(),
        optimal_subspace: Some((psi, e2)),
        angles,
        theta,
        tau_restricted,
    })
}

/// `√(1 + ½‖[A, B]‖)` with the spectral norm.
pub fn chsh_commutator_bound<T: Scalar>(a: &HermitianOperator<T>, b: &HermitianOperator<T>) -> T {
    // i[A, B] is Hermitian
    let c = a.commutator(b) * Complex::new(T::zero(), T::one());
    let norm = linalg::op_norm_hermitian(&linalg::hermitian_part(&c));
    (T::one() + T::lit(0.5) * norm).sqrt()
}

/// Direct sum of Hermitian blocks.
pub fn direct_sum<T: Scalar>(blocks: &[HermitianOperator<T>]) -> HermitianOperator<T> {
    let n: usize = blocks.iter().map(HermitianOperator::dim).sum();
    let mut m = CMatrix::<T>::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        m.view_mut((at, at), (b.dim(), b.dim())).copy_from(b.matrix());
        at += b.dim();
    }
    HermitianOperator::from_matrix_symmetrized(m)
}
