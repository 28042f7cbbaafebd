//! Semidefinite programs: the minimum-trace dominating matrix `t({M_j})` and
//! joint measurability of POVMs.

pub mod ipm;
mod joint;

pub use joint::{
    joint_feasibility, joint_feasibility_with, outcome_tuple, InfeasibilityWitness, JointOptions, JointSolution,
    JointStatus, DEFAULT_OUTCOME_CAP,
};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;
use ipm::{BlockSdp, IpmOptions, Iterate, SparseHermitian};

pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy)]
pub struct SdpOptions<T: Scalar> {
    /// Absolute target for the duality gap and residuals.
    pub tol: T,
    pub max_iter: usize,
    /// Use the exact one- and two-matrix solutions instead of iterating.
    pub closed_forms: bool,
}

impl<T: Scalar> Default for SdpOptions<T> {
    fn default() -> Self {
        Self { tol: T::lit(DEFAULT_TOL), max_iter: DEFAULT_MAX_ITER, closed_forms: true }
    }
}

impl<T: Scalar> SdpOptions<T> {
    pub fn with_tol(tol: T) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Trivial,
    ClosedForm,
    InteriorPoint,
}

impl SolveMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveMethod::Trivial => "trivial",
            SolveMethod::ClosedForm => "closed-form",
            SolveMethod::InteriorPoint => "interior-point",
        }
    }
}

/// Solution of `min tr X  s.t.  X ⪰ M_j` with its dual
/// `max Σ_j tr(M_j Y_j)  s.t.  Y_j ⪰ 0, Σ_j Y_j = 1`.
#[derive(Debug, Clone)]
pub struct SdpSolution<T: Scalar> {
    /// `tr X` of the returned (feasible) primal matrix.
    pub value: T,
    pub primal: DMatrix<T>,
    /// Dual multipliers `Y_j`, one per input matrix.
    pub duals: Vec<DMatrix<T>>,
    /// Dual objective `Σ_j tr(M_j Y_j)`.
    pub lower_bound: T,
    /// Largest violation of `X ⪰ M_j` before the final identity shift.
    pub primal_infeasibility: T,
    /// `‖Σ_j Y_j − 1‖_F`.
    pub dual_infeasibility: T,
    /// `value − lower_bound`.
    pub gap: T,
    pub iterations: usize,
    pub method: SolveMethod,
    pub tolerance: T,
    /// `(tr X, Σ_j tr(M_j Y_j))` at every interior-point iterate.
    pub history: Vec<(T, T)>,
}

fn validate_inputs<T: Scalar>(ms: &[DMatrix<T>], tol: T) -> Result<usize> {
    let Some(first) = ms.first() else {
        return Err(Error::InvalidParameter("empty matrix list".into()));
    };
    let n = first.nrows();
    for m in ms {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m.nrows().max(m.ncols()) });
        }
        let scale = T::one().max(linalg::max_abs_entry(m));
        let (dev, row, col) = linalg::hermiticity_defect(m);
        if dev > T::lit(1e-10) * scale {
            return Err(Error::NotHermitian { row, col, deviation: dev.as_f64() });
        }
        let low = linalg::min_eigenvalue(&linalg::hermitian_part(m));
        if low < -tol.max(T::lit(1e-9)) * scale {
            return Err(Error::NotPsd { eigenvalue: low.as_f64() });
        }
    }
    Ok(n)
}

/// `t({M_j}) = min{tr X : X ⪰ M_j for all j}` with default options.
pub fn min_trace_dominating<T: Scalar>(ms: &[DMatrix<T>], tol: T) -> Result<SdpSolution<T>> {
    min_trace_dominating_with(ms, &SdpOptions::with_tol(tol))
}

pub fn min_trace_dominating_with<T: Scalar>(ms: &[DMatrix<T>], opts: &SdpOptions<T>) -> Result<SdpSolution<T>> {
    let n = validate_inputs(ms, opts.tol)?;
    let ms: Vec<DMatrix<T>> = ms.iter().map(linalg::hermitian_part).collect();
    let m = ms.len();
    let eye = DMatrix::<T>::identity(n, n);

    if ms.iter().all(|x| x.iter().all(|v| *v == T::zero())) {
        let duals = vec![&eye * (T::one() / T::count(m)); m];
        return Ok(finish(&ms, DMatrix::zeros(n, n), duals, 0, SolveMethod::Trivial, opts.tol, Vec::new()));
    }
    if m == 1 {
        return Ok(finish(&ms, ms[0].clone(), vec![eye], 0, SolveMethod::Trivial, opts.tol, Vec::new()));
    }
    if m == 2 && opts.closed_forms {
        let diff = &ms[0] - &ms[1];
        let eig = linalg::eigh(&diff);
        let half = T::lit(0.5);
        let x = (&ms[0] + &ms[1]) * half + eig.map(|v| v.abs()) * half;
        let y0 = eig.map(|v| if v > T::zero() { T::one() } else { T::zero() });
        let y1 = &eye - &y0;
        return Ok(finish(&ms, x, vec![y0, y1], 0, SolveMethod::ClosedForm, opts.tol, Vec::new()));
    }

    let basis = SparseHermitian::<T>::hermitian_basis::<T>(n);
    let constraints = basis.iter().map(|e| (0..m).map(|j| (j, e.clone())).collect()).collect();
    let rhs = DVector::from_iterator(basis.len(), basis.iter().map(|e| e.inner(&eye)));
    let sdp = BlockSdp { block_sizes: vec![n; m], cost: ms.iter().map(|x| -x).collect(), constraints, rhs };

    // feasible start: Y_j = 1/m and X = Σ M_j + 1
    let x0 = ms.iter().fold(eye.clone(), |acc, x| acc + x);
    let y0 = DVector::from_iterator(basis.len(), basis.iter().map(|e| -e.inner(&x0)));
    let start = Iterate {
        x: vec![&eye * (T::one() / T::count(m)); m],
        s: ms.iter().map(|mj| &x0 - mj).collect(),
        y: y0,
    };
    // the IPM gap is relative to 1 + |p| + |d|; Σ tr M_j bounds both objectives,
    // so this makes `tol` an absolute bound on the gap
    let scale = T::one() + T::lit(2.0) * ms.iter().fold(T::zero(), |acc, mj| acc + mj.trace().abs());
    let floor = T::default_epsilon().sqrt() * T::lit(1e-3);
    let ipm_tol = (opts.tol / scale).max(floor.min(opts.tol));
    let res = sdp.solve_from(start, &IpmOptions { tol: ipm_tol, max_iter: opts.max_iter, ..IpmOptions::default() });
    if !res.converged && res.relative_gap.max(res.primal_infeasibility).max(res.dual_infeasibility) > ipm_tol * T::lit(1e3) {
        return Err(Error::NonConvergence {
            iterations: res.iterations,
            primal_objective: -res.dual_objective.as_f64(),
            dual_objective: -res.primal_objective.as_f64(),
            gap: res.relative_gap.as_f64(),
        });
    }
    let x = -sdp.adjoint(&res.point.y).swap_remove(0);
    let history = res.history.iter().map(|&(p, d)| (-d, -p)).collect();
    let duals = res.point.x.iter().map(linalg::hermitian_part).collect();
    Ok(finish(&ms, x, duals, res.iterations, SolveMethod::InteriorPoint, opts.tol, history))
}

fn finish<T: Scalar>(
    ms: &[DMatrix<T>],
    x: DMatrix<T>,
    duals: Vec<DMatrix<T>>,
    iterations: usize,
    method: SolveMethod,
    tolerance: T,
    history: Vec<(T, T)>,
) -> SdpSolution<T> {
    let n = x.nrows();
    let x = linalg::hermitian_part(&x);
    let shortfall = ms
        .iter()
        .map(|mj| -linalg::min_eigenvalue(&(&x - mj)))
        .fold(T::zero(), |a, b| a.max(b));
    let primal = &x + DMatrix::identity(n, n) * shortfall;
    let value = primal.trace();
    let lower_bound = ms.iter().zip(&duals).fold(T::zero(), |acc, (m, y)| acc + linalg::hs_inner(m, y));
    let sum = duals.iter().fold(DMatrix::zeros(n, n), |acc, y| acc + y);
    let dual_infeasibility = linalg::frobenius(&(sum - DMatrix::identity(n, n)));
    SdpSolution {
        value,
        primal,
        duals,
        lower_bound,
        primal_infeasibility: shortfall,
        dual_infeasibility,
        gap: value - lower_bound,
        iterations,
        method,
        tolerance,
        history,
    }
}

/// Independent recomputation of the certificate behind an [`SdpSolution`].
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport<T: Scalar> {
    /// `min_j λ_min(X − M_j)`; negative means `X` is not dominating.
    pub primal_margin: T,
    /// `min_j λ_min(Y_j)`.
    pub dual_margin: T,
    /// `‖Σ_j Y_j − 1‖_F`.
    pub dual_residual: T,
    /// `tr X − Σ_j tr(M_j Y_j)`.
    pub gap: T,
    /// `|tr X − value|`.
    pub value_residual: T,
    pub tolerance: T,
    pub pass: bool,
}

/// Checks primal and dual feasibility and the duality gap, each against
/// `10·tol` scaled by `max(1, |value|)`.
pub fn verify_solution<T: Scalar>(sol: &SdpSolution<T>, ms: &[DMatrix<T>]) -> CertificateReport<T> {
    let n = sol.primal.nrows();
    let shape_ok = ms.len() == sol.duals.len()
        && ms.iter().chain(&sol.duals).all(|m| m.nrows() == n && m.ncols() == n);
    let bad = T::lit(f64::NAN);
    if !shape_ok {
        return CertificateReport {
            primal_margin: bad,
            dual_margin: bad,
            dual_residual: bad,
            gap: bad,
            value_residual: bad,
            tolerance: sol.tolerance,
            pass: false,
        };
    }
    let x = linalg::hermitian_part(&sol.primal);
    let primal_margin = ms
        .iter()
        .map(|m| linalg::min_eigenvalue(&(&x - linalg::hermitian_part(m))))
        .fold(T::max_value().unwrap_or(T::lit(f64::MAX)), |a, b| a.min(b));
    let dual_margin = sol
        .duals
        .iter()
        .map(|y| linalg::min_eigenvalue(&linalg::hermitian_part(y)))
        .fold(T::max_value().unwrap_or(T::lit(f64::MAX)), |a, b| a.min(b));
    let sum = sol.duals.iter().fold(DMatrix::zeros(n, n), |acc, y| acc + y);
    let dual_residual = linalg::frobenius(&(sum - DMatrix::identity(n, n)));
    let lower = ms.iter().zip(&sol.duals).fold(T::zero(), |acc, (m, y)| acc + linalg::hs_inner(m, y));
    let gap = x.trace() - lower;
    let value_residual = (x.trace() - sol.value).abs();
    let limit = T::lit(10.0) * sol.tolerance * T::one().max(sol.value.abs());
    let pass = primal_margin >= -limit
        && dual_margin >= -limit
        && dual_residual <= limit
        && gap.abs() <= limit
        && value_residual <= limit;
    CertificateReport { primal_margin, dual_margin, dual_residual, gap, value_residual, tolerance: sol.tolerance, pass }
}
