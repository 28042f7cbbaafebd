//! Complementarity-chamber queries: qubit membership, the Gill–Massar bound on
//! the weighted mean square error, the Fisher matrix attaining it, and its
//! realization by measurements along three orthogonal axes.
//!
//! Only the qubit chamber is characterized exactly; for `d > 2` the GM
//! relaxation is what is available.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::estimation::{FisherMatrix, QfiMatrix};
use crate::linalg;
use crate::operator::HermitianOperator;
use crate::povm::{Effect, Povm};
use crate::random;
use crate::scalar::Scalar;

/// Symmetric PSD weighting matrix of a weighted mean square error.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightingMatrix<T: Scalar>(DMatrix<T>);

impl<T: Scalar> WeightingMatrix<T> {
    pub fn new(w: DMatrix<T>) -> Result<Self> {
        FisherMatrix::new(w).map(|f| Self(f.into_inner()))
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleEntry<T: Scalar> {
    /// Unit Bloch axis `r` of the projective measurement `r·σ`.
    pub axis: [T; 3],
    pub probability: T,
}

/// Random choice among projective qubit measurements, plus an optional
/// trivial (uninformative) measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSchedule<T: Scalar> {
    pub entries: Vec<ScheduleEntry<T>>,
    pub trivial_weight: T,
}

impl<T: Scalar> MeasurementSchedule<T> {
    pub fn new(entries: Vec<ScheduleEntry<T>>, trivial_weight: T) -> Result<Self> {
        let mut total = trivial_weight;
        for e in &entries {
            if e.probability < -T::lit(1e-12) {
                return Err(Error::InvalidParameter("negative schedule probability".into()));
            }
            total += e.probability;
        }
        if trivial_weight < -T::lit(1e-12) || (total - T::one()).abs() > T::lit(1e-9) {
            return Err(Error::InvalidParameter(format!("schedule probabilities sum to {}", total.as_f64())));
        }
        Ok(Self { entries, trivial_weight })
    }

    pub fn total_probability(&self) -> T {
        self.entries.iter().fold(self.trivial_weight, |acc, e| acc + e.probability)
    }

    /// `Σ_j p_j r_j r_jᵀ / (1 − (r_j·s)²)` in the Bloch parametrization.
    pub fn fisher_matrix(&self, s: [T; 3]) -> DMatrix<T> {
        let sv = DVector::from_column_slice(&s);
        self.entries.iter().fold(DMatrix::zeros(3, 3), |acc, e| {
            let r = DVector::from_column_slice(&e.axis);
            let x = r.dot(&sv);
            acc + &r * r.transpose() * (e.probability / (T::one() - x * x))
        })
    }

    /// The schedule as a single POVM with effects `p_j(1 ± r_j·σ)/2` and `p₀·1`.
    pub fn to_povm(&self) -> Povm<T> {
        let half = T::lit(0.5);
        let mut effects = Vec::new();
        for (j, e) in self.entries.iter().enumerate() {
            let r = HermitianOperator::bloch(e.axis);
            let id = HermitianOperator::identity(2);
            effects.push(Effect::new(format!("{j}+"), &(&id + &r) * (half * e.probability)));
            effects.push(Effect::new(format!("{j}-"), &(&id - &r) * (half * e.probability)));
        }
        if self.trivial_weight > T::zero() {
            effects.push(Effect::new("trivial", &HermitianOperator::identity(2) * self.trivial_weight));
        }
        Povm::new_unchecked(2, effects)
    }
}

fn check_interior<T: Scalar>(s: &[T; 3]) -> Result<DVector<T>> {
    let v = DVector::from_column_slice(s);
    if v.norm() >= T::one() {
        return Err(Error::InvalidParameter(format!("Bloch vector norm {} is not below 1", v.norm().as_f64())));
    }
    Ok(v)
}

fn check_three<T: Scalar>(m: &DMatrix<T>) -> Result<()> {
    if m.nrows() != 3 || m.ncols() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: m.nrows() });
    }
    Ok(())
}

/// `tr((1 − s sᵀ) I)`, the GM trace of a qubit Fisher matrix.
pub fn qubit_gm_trace<T: Scalar>(i: &DMatrix<T>, s: [T; 3]) -> Result<T> {
    check_three(i)?;
    let v = check_interior(&s)?;
    Ok(i.trace() - (v.transpose() * i * &v)[(0, 0)])
}

/// Qubit chamber membership: `I ⪰ 0` and `tr((1 − s sᵀ) I) ≤ 1`, both within `tol`.
pub fn membership_qubit<T: Scalar>(i: &FisherMatrix<T>, s: [T; 3], tol: T) -> Result<bool> {
    membership_qubit_matrix(i.matrix(), s, tol)
}

pub fn membership_qubit_matrix<T: Scalar>(i: &DMatrix<T>, s: [T; 3], tol: T) -> Result<bool> {
    let gm = qubit_gm_trace(i, s)?;
    Ok(linalg::min_eigenvalue(&linalg::hermitian_part(i)) >= -tol && gm <= T::one() + tol)
}

/// `K = J^{-1/2} W J^{-1/2}` and `√K` after checking `supp W ⊆ supp J`.
fn whitened<T: Scalar>(w: &WeightingMatrix<T>, j: &QfiMatrix<T>) -> Result<(linalg::PsdFunctions<T, T>, DMatrix<T>)> {
    if w.0.nrows() != j.size() {
        return Err(Error::DimensionMismatch { expected: j.size(), found: w.0.nrows() });
    }
    let tol = T::lit(1e-9);
    let f = linalg::psd_functions(j.matrix(), tol)?;
    let n = j.size();
    let kernel = DMatrix::<T>::identity(n, n) - &f.support;
    let leak = linalg::op_norm_hermitian(&(&kernel * &w.0 * &kernel));
    if leak > tol * T::one().max(linalg::op_norm_hermitian(&w.0)) {
        return Err(Error::InfeasibleAdjustment { leak: leak.as_f64() });
    }
    let k = linalg::hermitian_part(&(&f.inv_sqrt_pinv * &w.0 * &f.inv_sqrt_pinv));
    let root = linalg::eigh(&k).map(|v| v.max(T::zero()).sqrt());
    Ok((f, root))
}

/// `(tr √(J^{-1/2} W J^{-1/2}))² / (d − 1)`.
pub fn gm_wmse_bound<T: Scalar>(w: &WeightingMatrix<T>, j: &QfiMatrix<T>, d: usize) -> Result<T> {
    if d < 2 {
        return Err(Error::InvalidParameter("dimension must be at least 2".into()));
    }
    let (_, root) = whitened(w, j)?;
    let t = root.trace();
    Ok(t * t / T::count(d - 1))
}

/// `I_W = (d−1) J^{1/2} √K J^{1/2} / tr √K`, the Fisher matrix attaining the bound.
pub fn optimal_fisher<T: Scalar>(w: &WeightingMatrix<T>, j: &QfiMatrix<T>, d: usize) -> Result<FisherMatrix<T>> {
    if d < 2 {
        return Err(Error::InvalidParameter("dimension must be at least 2".into()));
    }
    let (f, root) = whitened(w, j)?;
    let t = root.trace();
    if t <= T::lit(1e-14) {
        return Err(Error::InvalidParameter("zero weighting matrix: optimal direction undefined".into()));
    }
    let i = &f.sqrt * root * &f.sqrt * (T::count(d - 1) / t);
    FisherMatrix::new(linalg::hermitian_part(&i))
}

/// Measurement schedule for a qubit Fisher matrix saturating the GM bound:
/// measure `r_j·σ` with probability `a_j(1 − s_j²)`, where `a_j`, `r_j` is the
/// eigensystem of `I` and `s_j = r_j·s`.
pub fn realize_qubit<T: Scalar>(i: &FisherMatrix<T>, s: [T; 3], tol: T) -> Result<MeasurementSchedule<T>> {
    let gm = qubit_gm_trace(i.matrix(), s)?;
    if !membership_qubit(i, s, tol)? {
        return Err(Error::InvalidParameter("Fisher matrix lies outside the qubit chamber".into()));
    }
    if (gm - T::one()).abs() > tol {
        return Err(Error::Unsupported(format!(
            "GM trace {} does not saturate the bound; use realize_qubit_interior",
            gm.as_f64()
        )));
    }
    realize_qubit_interior(i, s, tol)
}

/// As [`realize_qubit`], topping up any missing probability with the trivial
/// measurement so that interior points are realized too.
pub fn realize_qubit_interior<T: Scalar>(i: &FisherMatrix<T>, s: [T; 3], tol: T) -> Result<MeasurementSchedule<T>> {
    let sv = check_interior(&s)?;
    if !membership_qubit(i, s, tol)? {
        return Err(Error::InvalidParameter("Fisher matrix lies outside the qubit chamber".into()));
    }
    let eig = linalg::eigh(i.matrix());
    let mut entries = Vec::new();
    let mut total = T::zero();
    for k in 0..3 {
        let a = eig.values[k].max(T::zero());
        let r = eig.vectors.column(k);
        let sj = r.dot(&sv);
        let p = a * (T::one() - sj * sj);
        if p > T::lit(1e-14) {
            entries.push(ScheduleEntry { axis: [r[0], r[1], r[2]], probability: p });
            total += p;
        }
    }
    if total > T::one() {
        for e in &mut entries {
            e.probability /= total;
        }
        total = T::one();
    }
    MeasurementSchedule::new(entries, (T::one() - total).max(T::zero()))
}

/// `(1 − s sᵀ)^{-1/2}`, the square root of the qubit QFI.
fn qfi_sqrt<T: Scalar>(s: &DVector<T>) -> DMatrix<T> {
    let inv = DMatrix::identity(3, 3) - s * s.transpose();
    linalg::eigh(&inv).map(|v| T::one() / v.sqrt())
}

/// Boundary point cloud of the qubit chamber at Bloch vector `s`.
#[derive(Debug, Clone)]
pub struct ChamberCloud<T: Scalar> {
    pub s: [T; 3],
    pub seed: u64,
    /// `(i11, i12, i13, i22, i23, i33)` per sample.
    pub points: Vec<[T; 6]>,
}

pub const CHAMBER_CSV_HEADER: &str = "i11,i12,i13,i22,i23,i33";

/// Samples `I = J^{1/2} O diag(a) Oᵀ J^{1/2}` with `a` a uniformly random
/// point of the probability simplex sorted in decreasing order and `O` a
/// Haar-random rotation, so that `I ⪰ 0` and `tr(J⁻¹ I) = 1`.
pub fn chamber_export<T: Scalar, R: Rng + ?Sized>(s: [T; 3], n: usize, rng: &mut R) -> Result<Vec<[T; 6]>> {
    let sv = check_interior(&s)?;
    let root = qfi_sqrt(&sv);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut a: Vec<f64> = (0..3).map(|_| Exp1.sample(rng)).collect();
        let sum: f64 = a.iter().sum();
        a.iter_mut().for_each(|x| *x /= sum);
        a.sort_by(|x, y| y.total_cmp(x));
        let o = random::orthogonal::<T, R>(rng, 3);
        let diag = DMatrix::from_diagonal(&DVector::from_iterator(3, a.iter().map(|&x| T::lit(x))));
        let i = linalg::hermitian_part(&(&root * &o * diag * o.transpose() * &root));
        out.push([i[(0, 0)], i[(0, 1)], i[(0, 2)], i[(1, 1)], i[(1, 2)], i[(2, 2)]]);
    }
    Ok(out)
}

/// Seeded wrapper around [`chamber_export`].
pub fn chamber_export_seeded<T: Scalar>(s: [T; 3], n: usize, seed: u64) -> Result<ChamberCloud<T>> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    Ok(ChamberCloud { s, seed, points: chamber_export(s, n, &mut rng)? })
}

/// Rebuilds the symmetric matrix from its six upper-triangle coordinates.
pub fn from_coordinates<T: Scalar>(c: &[T; 6]) -> DMatrix<T> {
    DMatrix::from_row_slice(3, 3, &[c[0], c[1], c[2], c[1], c[3], c[4], c[2], c[4], c[5]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::{self, qubit_bloch_point};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fm(m: DMatrix<f64>) -> FisherMatrix<f64> {
        FisherMatrix::new(m).unwrap()
    }

    fn zz() -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 0.0, 1.0]))
    }

    fn qfi(s: [f64; 3]) -> QfiMatrix<f64> {
        estimation::qfi_matrix(&qubit_bloch_point(s).unwrap(), 1e-12).unwrap()
    }

    #[test]
    fn membership_examples() {
        let z = [0.0; 3];
        assert!(membership_qubit(&fm(DMatrix::zeros(3, 3)), z, 1e-9).unwrap());
        assert!(!membership_qubit(&fm(DMatrix::identity(3, 3)), z, 1e-9).unwrap());
        assert!(membership_qubit(&fm(zz()), z, 1e-9).unwrap());
        assert!(membership_qubit(&fm(zz()), [0.0, 0.0, 1.0], 1e-9).is_err());
    }

    #[test]
    fn wmse_examples() {
        let j = qfi([0.0; 3]);
        let w = WeightingMatrix::new(j.matrix() / 4.0).unwrap();
        assert!((gm_wmse_bound(&w, &j, 2).unwrap() - 2.25).abs() < 1e-12);
        assert_eq!(gm_wmse_bound(&WeightingMatrix::new(DMatrix::zeros(3, 3)).unwrap(), &j, 2).unwrap(), 0.0);
        let w = WeightingMatrix::new(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0, 0.0]))).unwrap();
        assert!((gm_wmse_bound(&w, &j, 2).unwrap() - 1.0).abs() < 1e-12);

        let j3 = estimation::qfi_matrix(&estimation::central_point::<f64>(3), 1e-12).unwrap();
        let w3 = WeightingMatrix::new(j3.matrix() / 4.0).unwrap();
        assert!((gm_wmse_bound(&w3, &j3, 3).unwrap() - 16.0 * 2.0 / 4.0).abs() < 1e-9);
    }

    #[test]
    fn optimal_fisher_examples() {
        let j = qfi([0.0; 3]);
        let i = optimal_fisher(&WeightingMatrix::new(j.matrix() / 4.0).unwrap(), &j, 2).unwrap();
        assert!((i.matrix() - j.matrix() / 3.0).amax() < 1e-12);
        let i = optimal_fisher(&WeightingMatrix::new(DMatrix::identity(3, 3)).unwrap(), &j, 2).unwrap();
        assert!((i.matrix() - DMatrix::identity(3, 3) / 3.0).amax() < 1e-12);
        assert!(optimal_fisher(&WeightingMatrix::new(DMatrix::zeros(3, 3)).unwrap(), &j, 2).is_err());
    }

    #[test]
    fn realization_examples() {
        let z = [0.0; 3];
        let sched = realize_qubit(&fm(DMatrix::identity(3, 3) / 3.0), z, 1e-9).unwrap();
        assert_eq!(sched.entries.len(), 3);
        for e in &sched.entries {
            assert!((e.probability - 1.0 / 3.0).abs() < 1e-12);
        }
        let sched = realize_qubit(&fm(zz()), z, 1e-9).unwrap();
        assert_eq!(sched.entries.len(), 1);
        assert!((sched.entries[0].probability - 1.0).abs() < 1e-12);
        assert!((sched.entries[0].axis[2].abs() - 1.0).abs() < 1e-12);

        let s = [0.6, 0.0, 0.0];
        let j = qfi(s);
        let i = optimal_fisher(&WeightingMatrix::new(DMatrix::identity(3, 3)).unwrap(), &j, 2).unwrap();
        let sched = realize_qubit(&i, s, 1e-9).unwrap();
        assert!((sched.total_probability() - 1.0).abs() < 1e-8);
        assert!((sched.fisher_matrix(s) - i.matrix()).amax() < 1e-7);
    }

    #[test]
    fn interior_points_mix_in_the_trivial_measurement() {
        let half = fm(DMatrix::identity(3, 3) / 6.0);
        assert!(matches!(realize_qubit(&half, [0.0; 3], 1e-9), Err(Error::Unsupported(_))));
        let sched = realize_qubit_interior(&half, [0.0; 3], 1e-9).unwrap();
        assert!((sched.trivial_weight - 0.5).abs() < 1e-12);
        assert!((sched.fisher_matrix([0.0; 3]) - half.matrix()).amax() < 1e-12);
    }

    #[test]
    fn schedule_povm_has_the_schedule_fisher_matrix() {
        let s = [0.2, -0.3, 0.4];
        let i = optimal_fisher(&WeightingMatrix::new(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 0.5]))).unwrap(), &qfi(s), 2).unwrap();
        let sched = realize_qubit(&i, s, 1e-9).unwrap();
        let p = sched.to_povm();
        assert!(crate::povm::validate(&p, 1e-9).pass());
        let direct = estimation::fisher_matrix(&qubit_bloch_point(s).unwrap(), &p).unwrap();
        assert!((direct.matrix() - i.matrix()).amax() < 1e-9);
    }

    #[test]
    fn export_points_are_boundary_members() {
        for s in [[0.0; 3], [0.3, -0.4, 0.5]] {
            let cloud = chamber_export_seeded(s, 200, 7).unwrap();
            assert_eq!(cloud.points.len(), 200);
            for c in &cloud.points {
                let m = from_coordinates(c);
                assert!(membership_qubit_matrix(&m, s, 1e-9).unwrap());
                assert!((qubit_gm_trace::<f64>(&m, s).unwrap() - 1.0).abs() < 1e-9);
            }
        }
        let one = chamber_export_seeded([0.0; 3], 1, 3).unwrap();
        assert_eq!(one.points.len(), 1);
        let again = chamber_export_seeded([0.0; 3], 1, 3).unwrap();
        assert_eq!(one.points, again.points);
    }

    #[test]
    fn central_export_is_rotation_invariant_in_distribution() {
        let cloud = chamber_export_seeded([0.0; 3], 20_000, 11).unwrap();
        let n = cloud.points.len() as f64;
        let mean = cloud.points.iter().fold(DMatrix::<f64>::zeros(3, 3), |acc, c| acc + from_coordinates(c)) / n;
        // an invariant distribution has mean tr/3 · 1
        assert!((&mean - DMatrix::identity(3, 3) / 3.0).amax() < 0.01, "{mean}");
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let o = random::orthogonal::<f64, _>(&mut rng, 3);
        let second = |m: &DMatrix<f64>| m[(0, 0)] * m[(0, 0)];
        let plain: f64 = cloud.points.iter().map(|c| second(&from_coordinates(c))).sum::<f64>() / n;
        let rotated: f64 = cloud.points.iter().map(|c| second(&(&o * from_coordinates(c) * o.transpose()))).sum::<f64>() / n;
        assert!((plain - rotated).abs() < 0.01);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn attains_the_bound(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s: [f64; 3] = random::ball3::<f64, _>(&mut rng).map(|x| 0.9 * x);
            let g = DMatrix::<f64>::from_fn(3, 3, |_, _| rand::Rng::random::<f64>(&mut rng) - 0.5);
            let w = WeightingMatrix::new(&g * g.transpose() + DMatrix::identity(3, 3) * 0.05).unwrap();
            let j = qfi(s);
            let bound = gm_wmse_bound(&w, &j, 2).unwrap();
            let i = optimal_fisher(&w, &j, 2).unwrap();
            prop_assert!((estimation::gm_trace(&i, &j).unwrap() - 1.0).abs() < 1e-9);
            let sched = realize_qubit(&i, s, 1e-9).unwrap();
            let m = sched.fisher_matrix(s);
            let inv = m.clone().try_inverse().unwrap();
            prop_assert!(((w.matrix() * inv).trace() - bound).abs() < 1e-6 * (1.0 + bound));
        }

        #[test]
        fn membership_is_convex(seed in any::<u64>(), t in 0.0f64..1.0) {
            let cloud = chamber_export_seeded([0.1, 0.2, -0.3], 2, seed).unwrap();
            let (a, b) = (from_coordinates(&cloud.points[0]), from_coordinates(&cloud.points[1]));
            let scale = 0.7;
            let mix = (a * t + b * (1.0 - t)) * scale;
            prop_assert!(membership_qubit_matrix(&mix, [0.1, 0.2, -0.3], 1e-9).unwrap());
        }
    }
}
