//! Incompatibility measure `τ`, detection criteria at parameter points,
//! measurement uncertainty relations, noise thresholds and robustness, plus
//! the closed forms available for qubits, von Neumann pairs and complementary
//! families.
//!
//! For `d > 2` the criterion `τ > d − 1` is one-sided: it certifies
//! incompatibility but `τ ≤ d − 1` does not certify compatibility, hence the
//! verdict vocabulary `Incompatible` / `Undetected`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::estimation::{self, frame_superoperators, ParamPoint};
use crate::linalg;
use crate::povm::{self, Povm, SharpObservable, StochasticMatrix};
use crate::scalar::Scalar;
use crate::sdp::{self, CertificateReport, JointOptions, JointStatus, SdpOptions, SolveMethod};

/// Half-width of the band around a threshold reported as `boundary`.
pub const BOUNDARY_BAND: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Incompatible,
    Undetected,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Incompatible => "incompatible",
            Verdict::Undetected => "undetected",
        }
    }

    fn decide<T: Scalar>(value: T, threshold: T, tol: T) -> Self {
        if value > threshold + tol {
            Verdict::Incompatible
        } else {
            Verdict::Undetected
        }
    }
}

fn near<T: Scalar>(value: T, threshold: T) -> bool {
    (value - threshold).abs() <= T::lit(BOUNDARY_BAND)
}

#[derive(Debug, Clone, Copy)]
pub struct TauOptions<T: Scalar> {
    /// Decision tolerance for the verdict.
    pub tol: T,
    /// Tolerance handed to the SDP solver.
    pub solver_tol: T,
    pub max_iter: usize,
    pub closed_forms: bool,
}

impl<T: Scalar> Default for TauOptions<T> {
    fn default() -> Self {
        Self { tol: T::lit(sdp::DEFAULT_TOL), solver_tol: T::lit(1e-10), max_iter: sdp::DEFAULT_MAX_ITER, closed_forms: true }
    }
}

impl<T: Scalar> TauOptions<T> {
    pub fn with_tol(tol: T) -> Self {
        Self { tol, ..Self::default() }
    }

    fn sdp(&self) -> SdpOptions<T> {
        SdpOptions { tol: self.solver_tol, max_iter: self.max_iter, closed_forms: self.closed_forms }
    }
}

#[derive(Debug, Clone)]
pub struct IncompatReport<T: Scalar> {
    pub tau: T,
    /// `d − 1`.
    pub threshold: T,
    pub verdict: Verdict,
    /// `|τ − (d−1)|` within [`BOUNDARY_BAND`].
    pub boundary: bool,
    /// `τ / (d−1)`.
    pub normalized: T,
    /// `max(τ − (d−1), 0)`.
    pub excess: T,
    /// `t({G}) − 1`, the second route to `τ`.
    pub tau_full: T,
    pub method: SolveMethod,
    pub certificate: CertificateReport<T>,
    pub tolerance: T,
}

impl<T: Scalar> IncompatReport<T> {
    /// `|t({Ḡ}) − (t({G}) − 1)|`.
    pub fn route_discrepancy(&self) -> T {
        (self.tau - self.tau_full).abs()
    }
}

fn common_dim<T: Scalar>(ps: &[Povm<T>]) -> Result<usize> {
    let Some(first) = ps.first() else {
        return Err(Error::InvalidParameter("no POVMs given".into()));
    };
    for p in ps {
        if p.dim() != first.dim() {
            return Err(Error::DimensionMismatch { expected: first.dim(), found: p.dim() });
        }
    }
    Ok(first.dim())
}

/// `τ({A_j}) = t({Ḡ_{A_j}})`, cross-checked against `t({G_{A_j}}) − 1`.
pub fn tau<T: Scalar>(ps: &[Povm<T>]) -> Result<IncompatReport<T>> {
    tau_with(ps, &TauOptions::default())
}

pub fn tau_with<T: Scalar>(ps: &[Povm<T>], opts: &TauOptions<T>) -> Result<IncompatReport<T>> {
    let d = common_dim(ps)?;
    let frames: Vec<_> = ps.iter().map(frame_superoperators).collect();
    let gbar: Vec<DMatrix<T>> = frames.iter().map(|f| f.gbar_traceless()).collect();
    let full: Vec<DMatrix<T>> = frames.iter().map(|f| f.g.matrix().clone()).collect();
    let sdp_opts = opts.sdp();
    let sol = sdp::min_trace_dominating_with(&gbar, &sdp_opts)?;
    let certificate = sdp::verify_solution(&sol, &gbar);
    let tau_full = sdp::min_trace_dominating_with(&full, &sdp_opts)?.value - T::one();
    let threshold = T::count(d - 1);
    let tau = sol.value;
    Ok(IncompatReport {
        tau,
        threshold,
        verdict: Verdict::decide(tau, threshold, opts.tol),
        boundary: near(tau, threshold),
        normalized: if threshold > T::zero() { tau / threshold } else { T::zero() },
        excess: (tau - threshold).max(T::zero()),
        tau_full,
        method: sol.method,
        certificate,
        tolerance: opts.tol,
    })
}

#[derive(Debug, Clone)]
pub struct PointCriterion<T: Scalar> {
    /// `t({Ĩ_{A_j}})` at the parameter point.
    pub t_value: T,
    pub threshold: T,
    pub verdict: Verdict,
    pub boundary: bool,
}

/// `t({Ĩ_{A_j}}) ≤ d − 1` at a parameter point, `Ĩ = J^{-1/2} I J^{-1/2}`.
pub fn criterion_at_point<T: Scalar>(ps: &[Povm<T>], pt: &ParamPoint<T>) -> Result<PointCriterion<T>> {
    criterion_at_point_with(ps, pt, &TauOptions::default())
}

pub fn criterion_at_point_with<T: Scalar>(ps: &[Povm<T>], pt: &ParamPoint<T>, opts: &TauOptions<T>) -> Result<PointCriterion<T>> {
    let d = common_dim(ps)?;
    if pt.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: pt.dim() });
    }
    let qfi = estimation::qfi_matrix(pt, T::lit(1e-12))?;
    let adjusted = ps
        .iter()
        .map(|p| {
            let i = estimation::fisher_matrix(pt, p)?;
            Ok(estimation::metric_adjusted(&i, &qfi, T::lit(1e-9))?.into_inner())
        })
        .collect::<Result<Vec<_>>>()?;
    let t_value = sdp::min_trace_dominating_with(&adjusted, &opts.sdp())?.value;
    let threshold = T::count(d - 1);
    Ok(PointCriterion {
        t_value,
        threshold,
        verdict: Verdict::decide(t_value, threshold, opts.tol),
        boundary: near(t_value, threshold),
    })
}

/// Evaluates the criterion at each point; no ordering between points is implied.
pub fn criterion_scan<T: Scalar>(ps: &[Povm<T>], points: &[ParamPoint<T>]) -> Result<Vec<PointCriterion<T>>> {
    points.iter().map(|pt| criterion_at_point(ps, pt)).collect()
}

fn check_bloch<T: Scalar>(v: &[T; 3]) -> Result<T> {
    let n = v.iter().fold(T::zero(), |a, x| a + *x * *x).sqrt();
    if n > T::one() + T::lit(1e-12) {
        return Err(Error::InvalidParameter(format!("Bloch vector norm {} exceeds 1", n.as_f64())));
    }
    Ok(n)
}

fn dot<T: Scalar>(a: &[T; 3], b: &[T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `½[a² + b² + √((a² + b²)² − 4(a·b)²)]` for the binary POVMs `(1 ± a·σ)/2`, `(1 ± b·σ)/2`.
pub fn tau_qubit_pair<T: Scalar>(a: [T; 3], b: [T; 3]) -> Result<T> {
    let na = check_bloch(&a)?;
    let nb = check_bloch(&b)?;
    let s = na * na + nb * nb;
    let ab = dot(&a, &b);
    let disc = (s * s - T::lit(4.0) * ab * ab).max(T::zero());
    Ok(T::lit(0.5) * (s + disc.sqrt()))
}

/// `‖a + b‖ + ‖a − b‖`.
pub fn busch_sum<T: Scalar>(a: [T; 3], b: [T; 3]) -> Result<T> {
    check_bloch(&a)?;
    check_bloch(&b)?;
    let plus = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
    let minus = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    Ok(dot(&plus, &plus).sqrt() + dot(&minus, &minus).sqrt())
}

/// Coexistence of `(1 ± a·σ)/2` and `(1 ± b·σ)/2`: `‖a + b‖ + ‖a − b‖ ≤ 2`.
pub fn busch_criterion<T: Scalar>(a: [T; 3], b: [T; 3]) -> Result<bool> {
    Ok(busch_sum(a, b)? <= T::lit(2.0) + T::lit(1e-12))
}

fn von_neumann_frames<T: Scalar>(a: &SharpObservable<T>, b: &SharpObservable<T>) -> Result<(DMatrix<T>, DMatrix<T>)> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    if !a.is_nondegenerate() || !b.is_nondegenerate() {
        return Err(Error::Unsupported(
            "degenerate spectrum: the singular-value formula needs von Neumann observables; use tau".into(),
        ));
    }
    Ok((
        frame_superoperators(&a.to_povm()).gbar_traceless(),
        frame_superoperators(&b.to_povm()).gbar_traceless(),
    ))
}

/// Singular values `s_j` of `Ḡ_A Ḡ_B`, descending, first `d − 1` of them.
pub fn von_neumann_overlaps<T: Scalar>(a: &SharpObservable<T>, b: &SharpObservable<T>) -> Result<Vec<T>> {
    let (ga, gb) = von_neumann_frames(a, b)?;
    let mut s: Vec<T> = (ga * gb).singular_values().iter().map(|v| v.min(T::one())).collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    s.truncate(a.dim() - 1);
    Ok(s)
}

/// `√(1 − s_j²)` in ascending order, read off as the `d − 1` largest
/// eigenvalues of `Ḡ_A − Ḡ_B`. Both frames are rank-`(d−1)` projectors, whose
/// difference has eigenvalues `±√(1 − s_j²)`; this avoids the cancellation in
/// `1 − s_j²` when `s_j ≈ 1`.
fn von_neumann_sines<T: Scalar>(a: &SharpObservable<T>, b: &SharpObservable<T>) -> Result<Vec<T>> {
    let (ga, gb) = von_neumann_frames(a, b)?;
    let mut sines: Vec<T> = linalg::eigenvalues(&linalg::hermitian_part(&(ga - gb)))
        .into_iter()
        .take(a.dim() - 1)
        .map(|v| v.max(T::zero()).min(T::one()))
        .collect();
    sines.reverse();
    Ok(sines)
}

/// `Σ_{j<d} (1 + √(1 − s_j²))`.
pub fn tau_von_neumann<T: Scalar>(a: &SharpObservable<T>, b: &SharpObservable<T>) -> Result<T> {
    tau_von_neumann_noisy(a, b, T::one(), T::one())
}

/// `Σ_{j<d} ½[λ² + μ² + √((λ² + μ²)² − 4λ²μ² s_j²)]` for visibilities `λ`, `μ`.
pub fn tau_von_neumann_noisy<T: Scalar>(a: &SharpObservable<T>, b: &SharpObservable<T>, lambda: T, mu: T) -> Result<T> {
    for v in [lambda, mu] {
        if !(v >= T::zero() && v <= T::one()) {
            return Err(Error::InvalidParameter(format!("visibility {} outside [0, 1]", v.as_f64())));
        }
    }
    let (l2, m2) = (lambda * lambda, mu * mu);
    let sines = von_neumann_sines(a, b)?;
    // (λ² + μ²)² − 4λ²μ²s² = (λ² − μ²)² + 4λ²μ²(1 − s²)
    Ok(sines.iter().fold(T::zero(), |acc, &c| {
        let disc = (l2 - m2) * (l2 - m2) + T::lit(4.0) * l2 * m2 * c * c;
        acc + T::lit(0.5) * (l2 + m2 + disc.sqrt())
    }))
}

/// `(d − 1) Σ_j η_j²` for unsharp versions of mutually complementary observables.
pub fn tau_complementary<T: Scalar>(etas: &[T], d: usize) -> Result<T> {
    if d < 1 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    let mut sum = T::zero();
    for &e in etas {
        if !(e >= T::zero() && e <= T::one()) {
            return Err(Error::InvalidParameter(format!("visibility {} outside [0, 1]", e.as_f64())));
        }
        sum += e * e;
    }
    Ok(T::count(d - 1) * sum)
}

/// `Σ_j ‖Λ_j − K/d‖_F²` for complementary observables coarse-grained by doubly
/// stochastic `Λ_j`; equals `Σ_j tr(Λ_j − K/d)²` when the `Λ_j` are symmetric.
pub fn tau_doubly_stochastic<T: Scalar>(lambdas: &[StochasticMatrix<T>], d: usize) -> Result<T> {
    let k = DMatrix::from_element(d, d, T::one() / T::count(d));
    let mut sum = T::zero();
    for l in lambdas {
        if l.rows() != d || l.cols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: l.rows().max(l.cols()) });
        }
        if !l.is_doubly_stochastic(T::lit(1e-10)) {
            return Err(Error::InvalidStochastic("matrix is not doubly stochastic".into()));
        }
        sum += (l.entries() - &k).norm_squared();
    }
    Ok(sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UncertaintyVerdict {
    WithinBound,
    /// The noisy family cannot be jointly measured.
    ViolatesQuantumBound,
}

impl UncertaintyVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            UncertaintyVerdict::WithinBound => "within-bound",
            UncertaintyVerdict::ViolatesQuantumBound => "violates-QM-bound",
        }
    }
}

#[derive(Debug, Clone)]
pub struct UncertaintyReport<T: Scalar> {
    pub t_value: T,
    pub threshold: T,
    pub verdict: UncertaintyVerdict,
    pub boundary: bool,
}

impl<T: Scalar> From<PointCriterion<T>> for UncertaintyReport<T> {
    fn from(c: PointCriterion<T>) -> Self {
        let verdict = match c.verdict {
            Verdict::Incompatible => UncertaintyVerdict::ViolatesQuantumBound,
            Verdict::Undetected => UncertaintyVerdict::WithinBound,
        };
        Self { t_value: c.t_value, threshold: c.threshold, verdict, boundary: c.boundary }
    }
}

/// Coarse-grains each POVM by its stochastic matrix and evaluates the
/// criterion at `pt`.
pub fn uncertainty_check<T: Scalar>(
    ps: &[Povm<T>],
    lambdas: &[StochasticMatrix<T>],
    pt: &ParamPoint<T>,
) -> Result<UncertaintyReport<T>> {
    if ps.len() != lambdas.len() {
        return Err(Error::DimensionMismatch { expected: ps.len(), found: lambdas.len() });
    }
    let noisy = ps
        .iter()
        .zip(lambdas)
        .map(|(p, l)| povm::coarse_grain(p, l))
        .collect::<Result<Vec<_>>>()?;
    criterion_at_point(&noisy, pt).map(Into::into)
}

/// Same as [`uncertainty_check`] with uniform depolarizing noise of visibility `eta`.
pub fn uncertainty_check_eta<T: Scalar>(ps: &[Povm<T>], eta: T, pt: &ParamPoint<T>) -> Result<UncertaintyReport<T>> {
    let noisy = ps.iter().map(|p| povm::depolarize(p, eta)).collect::<Result<Vec<_>>>()?;
    criterion_at_point(&noisy, pt).map(Into::into)
}

/// `√((d − 1)/τ)` clamped to `[0, 1]`; `1` when `τ = 0`.
pub fn noise_threshold<T: Scalar>(ps: &[Povm<T>]) -> Result<T> {
    let report = tau(ps)?;
    if report.tau <= T::lit(1e-15) {
        return Ok(T::one());
    }
    Ok((report.threshold / report.tau).sqrt().min(T::one()).max(T::zero()))
}

#[derive(Debug, Clone)]
pub struct RobustnessResult<T: Scalar> {
    pub epsilon: T,
    /// `ln(1 + ε)`.
    pub log_robustness: T,
    /// `max(0, √(τ/(d−1)) − 1)`.
    pub lower_bound: T,
    /// Final bisection bracket; the set is compatible at `bracket.1`.
    pub bracket: (T, T),
    pub tau: T,
    pub evaluations: usize,
    pub warnings: Vec<String>,
}

/// Decision band for the feasibility sign used by [`robustness`].
const ROBUSTNESS_DECISION_TOL: f64 = 1e-9;

/// Smallest `ε ≥ 0` making the `ε`-smoothed family jointly measurable, found
/// by bisection to bracket width `tol`.
pub fn robustness<T: Scalar>(ps: &[Povm<T>], tol: T) -> Result<RobustnessResult<T>> {
    let d = common_dim(ps)?;
    if !(tol > T::zero()) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let tau_value = tau(ps)?.tau;
    let lower_bound = if d > 1 { ((tau_value / T::count(d - 1)).sqrt() - T::one()).max(T::zero()) } else { T::zero() };
    let jopts = JointOptions { tol: T::lit(ROBUSTNESS_DECISION_TOL), ..JointOptions::default() };
    let mut warnings = Vec::new();
    let mut evaluations = 0;
    let mut compatible_at = |eps: T, warnings: &mut Vec<String>| -> Result<bool> {
        evaluations += 1;
        let smoothed = ps.iter().map(|p| povm::epsilon_smooth(p, eps)).collect::<Result<Vec<_>>>()?;
        match sdp::joint_feasibility_with(&smoothed, &jopts) {
            Ok(sol) => {
                if sol.status == JointStatus::Inconclusive {
                    warnings.push(format!(
                        "inconclusive feasibility at epsilon = {:.12e} (slack {:.3e}); counted as compatible",
                        eps.as_f64(),
                        sol.slack.as_f64()
                    ));
                }
                Ok(sol.status != JointStatus::Infeasible)
            }
            Err(Error::NonConvergence { primal_objective, .. }) => {
                warnings.push(format!("solver did not converge at epsilon = {:.12e}", eps.as_f64()));
                Ok(primal_objective >= -ROBUSTNESS_DECISION_TOL)
            }
            Err(e) => Err(e),
        }
    };

    let zero = T::zero();
    if compatible_at(zero, &mut warnings)? {
        return Ok(RobustnessResult {
            epsilon: zero,
            log_robustness: zero,
            lower_bound,
            bracket: (zero, zero),
            tau: tau_value,
            evaluations,
            warnings,
        });
    }
    // visibility 1/J is always compatible, i.e. ε = J − 1
    let mut hi = T::count(d.max(ps.len() - 1));
    let mut lo = lower_bound.min(hi);
    if lo > zero && compatible_at(lo, &mut warnings)? {
        lo = zero;
    }
    if !compatible_at(hi, &mut warnings)? {
        warnings.push("upper end of the bracket reported incompatible".into());
    }
    while hi - lo > tol {
        let mid = T::lit(0.5) * (lo + hi);
        if compatible_at(mid, &mut warnings)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if lower_bound > hi + tol {
        warnings.push(format!(
            "lower bound {:.12e} exceeds the bracket {:.12e}",
            lower_bound.as_f64(),
            hi.as_f64()
        ));
    }
    Ok(RobustnessResult {
        epsilon: hi,
        log_robustness: hi.ln_1p(),
        lower_bound,
        bracket: (lo, hi),
        tau: tau_value,
        evaluations,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::HermitianOperator;
    use crate::povm::PauliAxis;
    use crate::random;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sx() -> Povm<f64> {
        povm::pauli_povm(PauliAxis::X)
    }

    fn sz() -> Povm<f64> {
        povm::pauli_povm(PauliAxis::Z)
    }

    const R2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn tau_examples() {
        let (a, b) = povm::fourier_pair::<f64>(3).unwrap();
        let one = tau(std::slice::from_ref(&a)).unwrap();
        assert!((one.tau - 2.0).abs() < 1e-10);
        assert_eq!(one.verdict, Verdict::Undetected);

        let xz = tau(&[sx(), sz()]).unwrap();
        assert!((xz.tau - 2.0).abs() < 1e-10);
        assert_eq!(xz.verdict, Verdict::Incompatible);
        assert!((xz.normalized - 2.0).abs() < 1e-10);
        assert!((xz.excess - 1.0).abs() < 1e-10);
        assert!(xz.certificate.pass);

        let f = tau(&[a, b]).unwrap();
        assert!((f.tau - 4.0).abs() < 1e-8);
        assert!(f.route_discrepancy() < 1e-7);
    }

    #[test]
    fn mub_triple_boundary() {
        let eta = 1.0 / 3f64.sqrt();
        let ps: Vec<_> = povm::qubit_mub_triple::<f64>().iter().map(|p| povm::depolarize(p, eta).unwrap()).collect();
        let r = tau(&ps).unwrap();
        assert!((r.tau - 1.0).abs() < 1e-8);
        assert!(r.boundary);
        assert_eq!(r.verdict, Verdict::Undetected);
        assert!(r.route_discrepancy() < 1e-7);
        assert!(r.certificate.pass);
    }

    #[test]
    fn qubit_pair_formula() {
        assert!((tau_qubit_pair::<f64>([1.0, 0.0, 0.0], [1.0, 0.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((tau_qubit_pair::<f64>([1.0, 0.0, 0.0], [0.0, 0.0, 1.0]).unwrap() - 2.0).abs() < 1e-15);
        let eta: f64 = 0.6;
        assert!((tau_qubit_pair([eta, 0.0, 0.0], [0.0, 0.0, eta]).unwrap() - 2.0 * eta * eta).abs() < 1e-15);
        assert!(tau_qubit_pair([1.1, 0.0, 0.0], [0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn busch_examples() {
        assert!(busch_criterion([0.0; 3], [0.0; 3]).unwrap());
        assert!(!busch_criterion([1.0, 0.0, 0.0], [0.0, 0.0, 1.0]).unwrap());
        let h = 1.0 / R2;
        assert!(busch_criterion([h, 0.0, 0.0], [0.0, 0.0, h]).unwrap());
        assert!(busch_criterion([0.0, 2.0, 0.0], [0.0; 3]).is_err());
    }

    #[test]
    fn von_neumann_examples() {
        let (a, b) = povm::fourier_pair::<f64>(3).unwrap();
        let oa = SharpObservable::new(observable_from(&a));
        let ob = SharpObservable::new(observable_from(&b));
        assert!((tau_von_neumann(&oa, &oa).unwrap() - 2.0).abs() < 1e-10);
        assert!((tau_von_neumann(&oa, &ob).unwrap() - 4.0).abs() < 1e-10);
        assert!((tau_von_neumann_noisy(&oa, &ob, 1.0, 1.0).unwrap() - tau_von_neumann(&oa, &ob).unwrap()).abs() < 1e-15);
        assert!(von_neumann_overlaps(&oa, &oa).unwrap().iter().all(|s| (s - 1.0).abs() < 1e-12));
        assert!(von_neumann_overlaps(&oa, &ob).unwrap().iter().all(|s| s.abs() < 1e-12));

        let theta: f64 = 0.7;
        let qa = SharpObservable::new(HermitianOperator::pauli_z());
        let qb = SharpObservable::new(HermitianOperator::bloch([theta.sin(), 0.0, theta.cos()]));
        assert!((tau_von_neumann(&qa, &qb).unwrap() - (1.0 + theta.sin())).abs() < 1e-10);

        let degenerate = SharpObservable::new(HermitianOperator::diagonal(&[1.0, 1.0, -1.0]));
        assert!(matches!(tau_von_neumann(&degenerate, &oa), Err(Error::Unsupported(_))));
    }

    fn observable_from(p: &Povm<f64>) -> HermitianOperator<f64> {
        p.operators().enumerate().fold(HermitianOperator::zeros(p.dim()), |acc, (k, a)| &acc + &(a * (k as f64 + 1.0)))
    }

    #[test]
    fn complementary_examples() {
        let eta = 1.0 / 3f64.sqrt();
        assert!((tau_complementary(&[eta; 3], 2).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(tau_complementary(&[0.0; 4], 3).unwrap(), 0.0);
        let id = StochasticMatrix::<f64>::identity(2);
        assert!((tau_doubly_stochastic(&[id.clone(), id], 2).unwrap() - 2.0).abs() < 1e-15);
        let not_ds = StochasticMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 0.0])).unwrap();
        assert!(matches!(tau_doubly_stochastic(&[not_ds], 2), Err(Error::InvalidStochastic(_))));
    }

    #[test]
    fn doubly_stochastic_matches_sdp_for_asymmetric_noise() {
        // a cyclic-shift mixture is doubly stochastic but not symmetric
        let d = 3;
        let mut m = DMatrix::<f64>::zeros(d, d);
        for k in 0..d {
            m[(k, k)] = 0.7;
            m[((k + 1) % d, k)] = 0.3;
        }
        let l = StochasticMatrix::new(m).unwrap();
        let (a, b) = povm::fourier_pair::<f64>(d).unwrap();
        let noisy = [povm::coarse_grain(&a, &l).unwrap(), povm::coarse_grain(&b, &l).unwrap()];
        let sdp_tau = tau(&noisy).unwrap().tau;
        let closed = tau_doubly_stochastic(&[l.clone(), l], d).unwrap();
        assert!((sdp_tau - closed).abs() < 1e-7, "{sdp_tau} vs {closed}");
    }

    #[test]
    fn criterion_at_point_examples() {
        let pt = estimation::central_point::<f64>(2);
        let trivial = Povm::from_operators(vec![HermitianOperator::identity(2)]).unwrap();
        let c = criterion_at_point(&[trivial.clone(), trivial], &pt).unwrap();
        assert!(c.t_value.abs() < 1e-12);
        assert_eq!(c.verdict, Verdict::Undetected);

        let c = criterion_at_point(&[sx(), sz()], &pt).unwrap();
        assert!((c.t_value - 2.0).abs() < 1e-9);
        assert_eq!(c.verdict, Verdict::Incompatible);

        let off = estimation::qubit_bloch_point([0.3, 0.2, 0.1]).unwrap();
        let scan = criterion_scan(&[sx(), sz()], &[pt, off]).unwrap();
        assert_eq!(scan.len(), 2);
        assert!(scan[1].t_value > 1.0);
    }

    #[test]
    fn uncertainty_examples() {
        let pt = estimation::central_point::<f64>(2);
        let r = uncertainty_check_eta(&[sx(), sz()], 0.8, &pt).unwrap();
        assert!((r.t_value - 1.28).abs() < 1e-9);
        assert_eq!(r.verdict, UncertaintyVerdict::ViolatesQuantumBound);
        let r = uncertainty_check_eta(&[sx(), sz()], 0.7, &pt).unwrap();
        assert!((r.t_value - 0.98).abs() < 1e-9);
        assert_eq!(r.verdict, UncertaintyVerdict::WithinBound);

        let id = StochasticMatrix::identity(2);
        let r = uncertainty_check(&[sz(), sz()], &[id.clone(), id], &pt).unwrap();
        assert_eq!(r.verdict, UncertaintyVerdict::WithinBound);
    }

    #[test]
    fn noise_threshold_examples() {
        assert!((noise_threshold(&[sx(), sz()]).unwrap() - 1.0 / R2).abs() < 1e-9);
        let mubs = povm::qubit_mub_triple::<f64>();
        assert!((noise_threshold(&mubs).unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-9);
        assert!((noise_threshold(&[sz()]).unwrap() - 1.0).abs() < 1e-12);
        let trivial = Povm::<f64>::from_operators(vec![HermitianOperator::identity(2)]).unwrap();
        assert_eq!(noise_threshold(&[trivial]).unwrap(), 1.0);
    }

    #[test]
    fn robustness_examples() {
        let r = robustness(&[sx(), sz()], 1e-6).unwrap();
        assert!((r.epsilon - (R2 - 1.0)).abs() < 1e-4, "{r:?}");
        assert!((r.lower_bound - (R2 - 1.0)).abs() < 1e-7);
        assert!((r.log_robustness - (1.0 + r.epsilon).ln()).abs() < 1e-15);

        let half = [povm::depolarize(&sx(), 0.5).unwrap(), povm::depolarize(&sz(), 0.5).unwrap()];
        let r = robustness(&half, 1e-6).unwrap();
        assert_eq!(r.epsilon, 0.0);
    }

    #[test]
    fn one_way_implication_in_higher_dimension() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let a = random::povm::<f64, _>(&mut rng, 3, 3);
            let b = random::von_neumann::<f64, _>(&mut rng, 3);
            let r = tau(&[a.clone(), b.clone()]).unwrap();
            let j = sdp::joint_feasibility(&[a, b], 1e-7, 200).unwrap();
            if r.verdict == Verdict::Incompatible {
                assert_eq!(j.status, JointStatus::Infeasible);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn unitary_invariance(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ps = [random::povm::<f64, _>(&mut rng, 3, 3), random::povm::<f64, _>(&mut rng, 3, 4)];
            let u = random::unitary::<f64, _>(&mut rng, 3);
            let rotated: Vec<_> = ps.iter().map(|p| p.conjugate_by(&u)).collect();
            prop_assert!((tau(&ps).unwrap().tau - tau(&rotated).unwrap().tau).abs() < 1e-8);
        }

        #[test]
        fn coarse_graining_monotone(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ps = [random::povm::<f64, _>(&mut rng, 2, 4), random::povm::<f64, _>(&mut rng, 2, 3)];
            let l1 = random::stochastic::<f64, _>(&mut rng, 2, 4);
            let l2 = random::stochastic::<f64, _>(&mut rng, 3, 3);
            let coarse = [povm::coarse_grain(&ps[0], &l1).unwrap(), povm::coarse_grain(&ps[1], &l2).unwrap()];
            prop_assert!(tau(&coarse).unwrap().tau <= tau(&ps).unwrap().tau + 1e-8);
        }

        #[test]
        fn depolarization_scaling(seed in any::<u64>(), eta in 0.0f64..1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ps = [random::povm::<f64, _>(&mut rng, 3, 3), random::rank_one_povm::<f64, _>(&mut rng, 3, 4), random::povm::<f64, _>(&mut rng, 3, 2)];
            let noisy: Vec<_> = ps.iter().map(|p| povm::depolarize(p, eta).unwrap()).collect();
            let (t, tn) = (tau(&ps).unwrap(), tau(&noisy).unwrap());
            prop_assert!((tn.tau - eta * eta * t.tau).abs() < 1e-8);
            prop_assert!(t.route_discrepancy() < 1e-7);
        }

        #[test]
        fn smoothing_scaling(seed in any::<u64>(), eps in 0.0f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ps = [random::povm::<f64, _>(&mut rng, 2, 3), random::povm::<f64, _>(&mut rng, 2, 2)];
            let smooth: Vec<_> = ps.iter().map(|p| povm::epsilon_smooth(p, eps).unwrap()).collect();
            let t = tau(&ps).unwrap().tau;
            prop_assert!((tau(&smooth).unwrap().tau * (1.0 + eps).powi(2) - t).abs() < 1e-7);
        }

        #[test]
        fn von_neumann_sines_match_singular_values(seed in any::<u64>(), d in 2usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = SharpObservable::new(random::hermitian::<f64, _>(&mut rng, d));
            let b = SharpObservable::new(random::hermitian::<f64, _>(&mut rng, d));
            let s = von_neumann_overlaps(&a, &b).unwrap();
            let direct: f64 = s.iter().map(|x| 1.0 + (1.0 - x * x).max(0.0).sqrt()).sum();
            prop_assert!((tau_von_neumann(&a, &b).unwrap() - direct).abs() < 1e-6);
            let (l, m) = (0.8, 0.3);
            let noisy: f64 = s.iter().map(|x| {
                let t = l * l + m * m;
                0.5 * (t + (t * t - 4.0 * l * l * m * m * x * x).sqrt())
            }).sum();
            prop_assert!((tau_von_neumann_noisy(&a, &b, l, m).unwrap() - noisy).abs() < 1e-9);
        }

        #[test]
        fn qubit_formulas_agree(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random::ball3::<f64, _>(&mut rng);
            let b = random::ball3::<f64, _>(&mut rng);
            let sdp_tau = tau(&[povm::qubit_binary(a).unwrap(), povm::qubit_binary(b).unwrap()]).unwrap().tau;
            let closed = tau_qubit_pair(a, b).unwrap();
            prop_assert!((sdp_tau - closed).abs() < 1e-9);
            let s = busch_sum(a, b).unwrap();
            if (s - 2.0).abs() > 1e-6 {
                prop_assert_eq!(s <= 2.0, closed <= 1.0);
            }
        }
    }
}
