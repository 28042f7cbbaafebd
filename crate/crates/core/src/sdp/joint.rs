//! Joint measurability as a phase-I semidefinite program.
//!
//! For POVMs `A_1, …, A_J` with `n_j` outcomes the joint effects `M_k` are
//! indexed by tuples `k = (k_1, …, k_J)` in row-major order (first index most
//! significant). The program maximizes `λ` subject to the marginal equations
//! and `M_k − λ·1 ⪰ 0`; the set is compatible iff `λ* ≥ 0`.
//!
//! `λ` is written as `μ + shift` with `μ ≥ 0` and `shift` below the value
//! attained by the product construction
//! `M_k = Σ_j A_{j,k_j} Π_{i≠j} n_i⁻¹ − (J−1)/K`, which satisfies every
//! marginal and has smallest eigenvalue at least `−(J−1)/K`. That construction
//! also gives a strictly feasible starting point.

use nalgebra::{Complex, DVector};

use super::ipm::{BlockSdp, IpmOptions, Iterate, SparseHermitian};
use super::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::linalg;
use crate::operator::{CMatrix, HermitianOperator};
use crate::povm::{Effect, Povm};
use crate::scalar::Scalar;

pub const DEFAULT_OUTCOME_CAP: usize = 4096;

#[derive(Debug, Clone, Copy)]
pub struct JointOptions<T: Scalar> {
    /// Decision band: `|λ*| < tol` is inconclusive.
    pub tol: T,
    /// Interior-point stopping tolerance; defaults to `tol / 10`.
    pub solver_tol: Option<T>,
    pub max_iter: usize,
    /// Largest allowed product of outcome counts.
    pub outcome_cap: usize,
}

impl<T: Scalar> Default for JointOptions<T> {
    fn default() -> Self {
        Self { tol: T::lit(DEFAULT_TOL), solver_tol: None, max_iter: DEFAULT_MAX_ITER, outcome_cap: DEFAULT_OUTCOME_CAP }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointStatus {
    Feasible,
    Infeasible,
    Inconclusive,
}

impl JointStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            JointStatus::Feasible => "feasible",
            JointStatus::Infeasible => "infeasible",
            JointStatus::Inconclusive => "inconclusive",
        }
    }
}

/// Dual witness `W_{jξ}` with `Σ_j W_{j,k_j} ⪰ 0` for every tuple `k` and
/// `Σ_{j,ξ} tr(A_{jξ} W_{jξ}) < 0`, which no joint observable can satisfy.
#[derive(Debug, Clone)]
pub struct InfeasibilityWitness<T: Scalar> {
    /// `operators[j][ξ]`.
    pub operators: Vec<Vec<HermitianOperator<T>>>,
    /// `Σ_{j,ξ} tr(A_{jξ} W_{jξ})`.
    pub value: T,
    /// `max(0, −min_k λ_min(Σ_j W_{j,k_j}))`.
    pub psd_violation: T,
    /// `value + d·psd_violation < 0`.
    pub certified: bool,
}

#[derive(Debug, Clone)]
pub struct JointSolution<T: Scalar> {
    pub status: JointStatus,
    pub feasible: bool,
    /// Candidate joint observable (present unless infeasible).
    pub joint: Option<Povm<T>>,
    pub certificate: Option<InfeasibilityWitness<T>>,
    /// Primal estimate of `λ*`: the smallest eigenvalue over the joint effects.
    pub slack: T,
    /// Dual upper bound on `λ*`.
    pub upper_bound: T,
    /// Largest entrywise deviation of a marginal from its input effect.
    pub marginal_residual: T,
    pub iterations: usize,
    pub tolerance: T,
}

/// Row-major decoding of a joint outcome index.
pub fn outcome_tuple(mut index: usize, counts: &[usize]) -> Vec<usize> {
    let mut out = vec![0; counts.len()];
    for (slot, &n) in out.iter_mut().zip(counts).rev() {
        *slot = index % n;
        index /= n;
    }
    out
}

pub fn joint_feasibility<T: Scalar>(ps: &[Povm<T>], tol: T, max_iter: usize) -> Result<JointSolution<T>> {
    joint_feasibility_with(ps, &JointOptions { tol, max_iter, ..JointOptions::default() })
}

pub fn joint_feasibility_with<T: Scalar>(ps: &[Povm<T>], opts: &JointOptions<T>) -> Result<JointSolution<T>> {
    let Some(first) = ps.first() else {
        return Err(Error::InvalidParameter("no POVMs given".into()));
    };
    let d = first.dim();
    for p in ps {
        if p.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: p.dim() });
        }
        if p.is_empty() {
            return Err(Error::InvalidPovm("POVM without effects".into()));
        }
    }
    let counts: Vec<usize> = ps.iter().map(Povm::len).collect();
    let mut k_total: usize = 1;
    for &n in &counts {
        k_total = k_total.saturating_mul(n);
    }
    if k_total > opts.outcome_cap {
        return Err(Error::OutcomeCap { product: k_total, cap: opts.outcome_cap });
    }

    if ps.len() == 1 || effects_commute(ps) {
        return Ok(product_joint(ps, &counts, k_total, opts.tol));
    }
    phase_one(ps, &counts, k_total, opts)
}

fn effects_commute<T: Scalar>(ps: &[Povm<T>]) -> bool {
    let tol = T::lit(1e-12);
    ps.iter().enumerate().all(|(j, p)| {
        ps[j + 1..].iter().all(|q| {
            p.operators().all(|a| q.operators().all(|b| linalg::max_abs_entry(&a.commutator(b)) <= tol))
        })
    })
}

fn label<T: Scalar>(ps: &[Povm<T>], tuple: &[usize]) -> String {
    tuple.iter().zip(ps).map(|(&k, p)| p.effects()[k].label.as_str()).collect::<Vec<_>>().join("|")
}

fn marginal_residual<T: Scalar>(ps: &[Povm<T>], counts: &[usize], effects: &[CMatrix<T>]) -> T {
    let d = ps[0].dim();
    let mut worst = T::zero();
    for (j, p) in ps.iter().enumerate() {
        let mut sums = vec![CMatrix::<T>::zeros(d, d); counts[j]];
        for (k, m) in effects.iter().enumerate() {
            sums[outcome_tuple(k, counts)[j]] += m;
        }
        for (s, a) in sums.iter().zip(p.operators()) {
            worst = worst.max(linalg::max_abs_entry(&(s - a.matrix())));
        }
    }
    worst
}

/// Adds the least-norm correction making every marginal of `effects` equal to
/// its target effect: `ΔP_k = Σ_j (n_j/K) R_{j,k_j} − (J−1) T / K` with
/// `R_{jξ}` the marginal residuals and `T` their common total.
fn restore_marginals<T: Scalar>(ps: &[Povm<T>], counts: &[usize], tuples: &[Vec<usize>], effects: &mut [CMatrix<T>]) {
    let d = ps[0].dim();
    let kk = T::count(effects.len());
    let mut residuals: Vec<Vec<CMatrix<T>>> = ps.iter().map(|p| p.operators().map(|a| a.matrix().clone()).collect()).collect();
    for (m, t) in effects.iter().zip(tuples) {
        for (j, &xi) in t.iter().enumerate() {
            residuals[j][xi] -= m;
        }
    }
    let total = residuals
        .iter()
        .map(|rs| rs.iter().fold(CMatrix::<T>::zeros(d, d), |acc, r| acc + r))
        .fold(CMatrix::<T>::zeros(d, d), |acc, t| acc + t)
        * Complex::new(T::one() / T::count(ps.len()), T::zero());
    let common = total * Complex::new(-T::count(ps.len() - 1) / kk, T::zero());
    for (m, t) in effects.iter_mut().zip(tuples) {
        *m += &common;
        for (j, &xi) in t.iter().enumerate() {
            *m += &residuals[j][xi] * Complex::new(T::count(counts[j]) / kk, T::zero());
        }
    }
}

fn assemble<T: Scalar>(ps: &[Povm<T>], counts: &[usize], effects: Vec<CMatrix<T>>) -> (Povm<T>, T, T) {
    let residual = marginal_residual(ps, counts, &effects);
    let mut low = T::max_value().unwrap_or(T::lit(f64::MAX));
    let list = effects
        .into_iter()
        .enumerate()
        .map(|(k, m)| {
            let op = HermitianOperator::from_matrix_symmetrized(m);
            low = low.min(op.min_eigenvalue());
            Effect::new(label(ps, &outcome_tuple(k, counts)), op)
        })
        .collect();
    (Povm::new_unchecked(ps[0].dim(), list), low, residual)
}

/// Joint observable by ordered products; exact when all effects commute.
fn product_joint<T: Scalar>(ps: &[Povm<T>], counts: &[usize], k_total: usize, tol: T) -> JointSolution<T> {
    let d = ps[0].dim();
    let effects = (0..k_total)
        .map(|k| {
            outcome_tuple(k, counts)
                .iter()
                .zip(ps)
                .fold(CMatrix::<T>::identity(d, d), |acc, (&x, p)| acc * p.effects()[x].operator.matrix())
        })
        .collect();
    let (joint, slack, residual) = assemble(ps, counts, effects);
    JointSolution {
        status: JointStatus::Feasible,
        feasible: true,
        joint: Some(joint),
        certificate: None,
        slack,
        upper_bound: slack,
        marginal_residual: residual,
        iterations: 0,
        tolerance: tol,
    }
}

fn phase_one<T: Scalar>(ps: &[Povm<T>], counts: &[usize], k_total: usize, opts: &JointOptions<T>) -> Result<JointSolution<T>> {
    type C<T> = Complex<T>;
    let d = ps[0].dim();
    let nj = ps.len();
    let kk = T::count(k_total);
    let shift = -T::count(nj - 1) / kk - T::one();
    let mu_block = k_total;
    let coef: Vec<T> = counts.iter().map(|&n| kk / T::count(n)).collect();
    let tuples: Vec<Vec<usize>> = (0..k_total).map(|k| outcome_tuple(k, counts)).collect();
    let basis = SparseHermitian::<C<T>>::hermitian_basis::<T>(d);
    let traces: Vec<T> = basis.iter().map(|b| b.entries.iter().filter(|e| e.0 == e.1).fold(T::zero(), |a, e| a + e.2.re)).collect();

    // (povm, outcome, basis index) for each retained constraint
    let mut keys = Vec::new();
    let mut constraints = Vec::new();
    let mut rhs = Vec::new();
    for (j, p) in ps.iter().enumerate() {
        let keep = if j == 0 { counts[0] } else { counts[j] - 1 };
        for (xi, eff) in p.effects().iter().enumerate().take(keep) {
            let a = eff.operator.matrix();
            for (bi, b) in basis.iter().enumerate() {
                let mut terms: Vec<(usize, SparseHermitian<C<T>>)> =
                    (0..k_total).filter(|&k| tuples[k][j] == xi).map(|k| (k, b.clone())).collect();
                if traces[bi] != T::zero() {
                    let v = C::new(coef[j] * traces[bi], T::zero());
                    terms.push((mu_block, SparseHermitian::new(1, vec![(0, 0, v)])));
                }
                constraints.push(terms);
                rhs.push(b.inner(a) - coef[j] * shift * traces[bi]);
                keys.push((j, xi, bi));
            }
        }
    }
    let mut block_sizes = vec![d; k_total];
    block_sizes.push(1);
    let mut cost = vec![CMatrix::<T>::zeros(d, d); k_total];
    cost.push(CMatrix::from_element(1, 1, C::new(-T::one(), T::zero())));
    let sdp = BlockSdp { block_sizes, cost, constraints, rhs: DVector::from_vec(rhs) };

    // strictly feasible start from the product construction, μ = 1/2
    let half = T::lit(0.5);
    let eye = CMatrix::<T>::identity(d, d);
    let mut x0 = Vec::with_capacity(k_total + 1);
    for t in &tuples {
        let mut m = &eye * C::new(-T::count(nj - 1) / kk - shift - half, T::zero());
        for (j, &xi) in t.iter().enumerate() {
            m += ps[j].effects()[xi].operator.matrix() * C::new(coef[j] / kk, T::zero());
        }
        x0.push(m);
    }
    x0.push(CMatrix::from_element(1, 1, C::new(half, T::zero())));
    let s_scale = T::lit(2.0);
    let y0 = DVector::from_iterator(
        keys.len(),
        keys.iter().map(|&(j, _, bi)| if j == 0 { -s_scale * traces[bi] } else { T::zero() }),
    );
    let mut s0 = vec![&eye * C::new(s_scale, T::zero()); k_total];
    s0.push(CMatrix::from_element(1, 1, C::new(s_scale * kk * T::count(d) - T::one(), T::zero())));
    let start = Iterate { x: x0, y: y0, s: s0 };

    let solver_tol = opts.solver_tol.unwrap_or(opts.tol * T::lit(0.1));
    let res = sdp.solve_from(start, &IpmOptions { tol: solver_tol, max_iter: opts.max_iter, ..IpmOptions::default() });
    let lambda = -res.primal_objective + shift;
    let upper = -res.dual_objective + shift;

    // dual witness W = −Z, normalized so that Σ c_j tr W_{jξ} = 1
    let mut w: Vec<Vec<CMatrix<T>>> = counts.iter().map(|&n| vec![CMatrix::<T>::zeros(d, d); n]).collect();
    for (i, &(j, xi, bi)) in keys.iter().enumerate() {
        basis[bi].add_scaled_to(&mut w[j][xi], -res.point.y[i]);
    }
    let norm = w
        .iter()
        .enumerate()
        .fold(T::zero(), |acc, (j, ws)| acc + ws.iter().fold(T::zero(), |a, m| a + linalg::trace_real(m)) * coef[j]);
    if norm > T::zero() {
        for m in w.iter_mut().flatten() {
            *m *= C::new(T::one() / norm, T::zero());
        }
    }
    let witness = certify(ps, &tuples, w);

    let mut p_eff: Vec<CMatrix<T>> = res.point.x[..k_total].iter().map(|p| p + &eye * C::new(lambda, T::zero())).collect();
    restore_marginals(ps, counts, &tuples, &mut p_eff);
    let (joint, slack, residual) = assemble(ps, counts, p_eff);
    let status = if slack >= opts.tol && residual <= opts.tol {
        JointStatus::Feasible
    } else if witness.certified && witness.value <= -opts.tol {
        JointStatus::Infeasible
    } else {
        JointStatus::Inconclusive
    };
    if status == JointStatus::Inconclusive && !res.converged {
        return Err(Error::NonConvergence {
            iterations: res.iterations,
            primal_objective: lambda.as_f64(),
            dual_objective: upper.as_f64(),
            gap: res.relative_gap.as_f64(),
        });
    }
    Ok(JointSolution {
        status,
        feasible: status == JointStatus::Feasible,
        joint: (status != JointStatus::Infeasible).then_some(joint),
        certificate: (status != JointStatus::Feasible).then_some(witness),
        slack,
        upper_bound: upper,
        marginal_residual: residual,
        iterations: res.iterations,
        tolerance: opts.tol,
    })
}

fn certify<T: Scalar>(ps: &[Povm<T>], tuples: &[Vec<usize>], w: Vec<Vec<CMatrix<T>>>) -> InfeasibilityWitness<T> {
    let d = ps[0].dim();
    let operators: Vec<Vec<HermitianOperator<T>>> = w
        .into_iter()
        .map(|ws| ws.into_iter().map(HermitianOperator::from_matrix_symmetrized).collect())
        .collect();
    let value = ps.iter().zip(&operators).fold(T::zero(), |acc, (p, ws)| {
        acc + p.operators().zip(ws).fold(T::zero(), |a, (x, y)| a + x.hs_inner(y))
    });
    let mut low = T::zero();
    for t in tuples {
        let sum = t.iter().enumerate().fold(CMatrix::<T>::zeros(d, d), |acc, (j, &xi)| acc + operators[j][xi].matrix());
        low = low.min(linalg::min_eigenvalue(&linalg::hermitian_part(&sum)));
    }
    let psd_violation = -low;
    let certified = value + T::count(d) * psd_violation < T::zero();
    InfeasibilityWitness { operators, value, psd_violation, certified }
}
