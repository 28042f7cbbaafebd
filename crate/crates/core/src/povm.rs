//! Generalized observables: POVMs, stochastic post-processing, noise models,
//! sharp observables and the canonical measurement families.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::operator::{CMatrix, HermitianOperator};
use crate::scalar::Scalar;

/// Tolerance used by [`Povm::new`] for positivity and completeness.
pub const POVM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Effect<T: Scalar> {
    pub label: String,
    pub operator: HermitianOperator<T>,
}

impl<T: Scalar> Effect<T> {
    pub fn new(label: impl Into<String>, operator: HermitianOperator<T>) -> Self {
        Self { label: label.into(), operator }
    }
}

/// Ordered list of effects summing to the identity.
///
/// Order matters: two POVMs that differ only by a relabeling are distinct
/// values; use [`Povm::equivalent_up_to_relabeling`] to compare them.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm<T: Scalar> {
    dim: usize,
    effects: Vec<Effect<T>>,
}

/// Outcome of [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport<T: Scalar> {
    pub tolerance: T,
    /// Smallest eigenvalue over all effects.
    pub min_eigenvalue: T,
    /// Largest entrywise deviation of `Σ A_ξ` from the identity.
    pub completeness_residual: T,
    pub dimensions_consistent: bool,
    pub positivity: bool,
    pub completeness: bool,
}

impl<T: Scalar> ValidationReport<T> {
    pub fn pass(&self) -> bool {
        self.dimensions_consistent && self.positivity && self.completeness
    }
}

impl<T: Scalar> Povm<T> {
    pub fn new(dim: usize, effects: Vec<Effect<T>>) -> Result<Self> {
        let p = Self { dim, effects };
        let report = validate(&p, T::lit(POVM_TOL));
        if !report.dimensions_consistent {
            return Err(Error::InvalidPovm(format!("effects do not all have dimension {dim}")));
        }
        if !report.positivity {
            return Err(Error::InvalidPovm(format!(
                "effect eigenvalue {:e} is negative",
                report.min_eigenvalue.as_f64()
            )));
        }
        if !report.completeness {
            return Err(Error::InvalidPovm(format!(
                "effects sum to identity only within {:e}",
                report.completeness_residual.as_f64()
            )));
        }
        Ok(p)
    }

    pub fn new_unchecked(dim: usize, effects: Vec<Effect<T>>) -> Self {
        Self { dim, effects }
    }

    pub fn from_operators(ops: Vec<HermitianOperator<T>>) -> Result<Self> {
        let dim = ops.first().map(|o| o.dim()).ok_or_else(|| Error::InvalidPovm("no effects".into()))?;
        let effects = ops.into_iter().enumerate().map(|(k, o)| Effect::new(k.to_string(), o)).collect();
        Self::new(dim, effects)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[Effect<T>] {
        &self.effects
    }

    pub fn operators(&self) -> impl Iterator<Item = &HermitianOperator<T>> {
        self.effects.iter().map(|e| &e.operator)
    }

    /// Born-rule probabilities `tr(ρ A_ξ)`.
    pub fn probabilities(&self, rho: &HermitianOperator<T>) -> Vec<T> {
        self.operators().map(|a| rho.hs_inner(a)).collect()
    }

    /// `U A_ξ U†` for every effect.
    pub fn conjugate_by(&self, unitary: &CMatrix<T>) -> Self {
        let effects = self
            .effects
            .iter()
            .map(|e| Effect::new(e.label.clone(), e.operator.conjugate_by(unitary)))
            .collect();
        Self { dim: self.dim, effects }
    }

    /// Replaces outcome `index` by two outcomes carrying half the effect each.
    pub fn split_outcome(&self, index: usize) -> Result<Self> {
        let e = self
            .effects
            .get(index)
            .ok_or_else(|| Error::InvalidParameter(format!("no outcome {index}")))?;
        let half = &e.operator * T::lit(0.5);
        let mut effects = self.effects.clone();
        effects[index] = Effect::new(format!("{}.a", e.label), half.clone());
        effects.insert(index + 1, Effect::new(format!("{}.b", e.label), half));
        Ok(Self { dim: self.dim, effects })
    }

    /// True when the effects agree up to a permutation of outcomes.
    pub fn equivalent_up_to_relabeling(&self, other: &Self, tol: T) -> bool {
        if self.dim != other.dim || self.len() != other.len() {
            return false;
        }
        let mut used = vec![false; other.len()];
        self.operators().all(|a| {
            let hit = other
                .operators()
                .enumerate()
                .position(|(k, b)| !used[k] && a.approx_eq(b, tol));
            match hit {
                Some(k) => {
                    used[k] = true;
                    true
                }
                None => false,
            }
        })
    }
}

/// Reports positivity and completeness of `p` at tolerance `tol`.
pub fn validate<T: Scalar>(p: &Povm<T>, tol: T) -> ValidationReport<T> {
    let d = p.dim;
    let dims_ok = d > 0 && !p.effects.is_empty() && p.operators().all(|a| a.dim() == d);
    if !dims_ok {
        return ValidationReport {
            tolerance: tol,
            min_eigenvalue: T::zero(),
            completeness_residual: T::zero(),
            dimensions_consistent: false,
            positivity: false,
            completeness: false,
        };
    }
    let min_eigenvalue = p
        .operators()
        .map(|a| a.min_eigenvalue())
        .fold(T::max_value().unwrap_or_else(T::one), |acc, v| acc.min(v));
    let mut sum = CMatrix::<T>::zeros(d, d);
    for a in p.operators() {
        sum += a.matrix();
    }
    let residual = linalg::max_abs_entry(&(sum - CMatrix::<T>::identity(d, d)));
    ValidationReport {
        tolerance: tol,
        min_eigenvalue,
        completeness_residual: residual,
        dimensions_consistent: true,
        positivity: min_eigenvalue >= -tol,
        completeness: residual <= tol,
    }
}

/// Column-stochastic matrix: `Λ_{ξζ} ≥ 0` and `Σ_ξ Λ_{ξζ} = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix<T: Scalar> {
    entries: DMatrix<T>,
}

impl<T: Scalar> StochasticMatrix<T> {
    pub fn new(entries: DMatrix<T>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::InvalidStochastic("empty matrix".into()));
        }
        for c in 0..entries.ncols() {
            for r in 0..entries.nrows() {
                if entries[(r, c)] < -T::lit(1e-12) {
                    return Err(Error::InvalidStochastic(format!("negative entry ({r}, {c})")));
                }
            }
        }
        for c in 0..entries.ncols() {
            let s = entries.column(c).sum();
            if (s - T::one()).abs() > T::lit(1e-10) {
                return Err(Error::InvalidStochastic(format!("column {c} sums to {}", s.as_f64())));
            }
        }
        Ok(Self { entries })
    }

    pub fn identity(n: usize) -> Self {
        Self { entries: DMatrix::identity(n, n) }
    }

    /// `η·1 + (1−η)·K/n`, the uniform-noise matrix on `n` outcomes.
    pub fn uniform_noise(n: usize, eta: T) -> Result<Self> {
        let k = DMatrix::from_element(n, n, (T::one() - eta) / T::count(n));
        Self::new(DMatrix::identity(n, n) * eta + k)
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &DMatrix<T> {
        &self.entries
    }

    /// `other ∘ self`, i.e. the matrix product `other · self`.
    pub fn then(&self, other: &Self) -> Result<Self> {
        if other.cols() != self.rows() {
            return Err(Error::DimensionMismatch { expected: self.rows(), found: other.cols() });
        }
        Self::new(&other.entries * &self.entries)
    }

    pub fn is_doubly_stochastic(&self, tol: T) -> bool {
        self.rows() == self.cols()
            && (0..self.rows()).all(|r| (self.entries.row(r).sum() - T::one()).abs() <= tol)
    }
}

/// `C_ξ = Σ_ζ Λ_{ξζ} A_ζ`.
pub fn coarse_grain<T: Scalar>(p: &Povm<T>, lambda: &StochasticMatrix<T>) -> Result<Povm<T>> {
    if lambda.cols() != p.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), found: lambda.cols() });
    }
    let d = p.dim;
    let effects = (0..lambda.rows())
        .map(|xi| {
            let mut m = CMatrix::<T>::zeros(d, d);
            for (zeta, a) in p.operators().enumerate() {
                let w = lambda.entries[(xi, zeta)];
                if w != T::zero() {
                    m += a.matrix().map(|z| z * w);
                }
            }
            Effect::new(format!("c{xi}"), HermitianOperator::from_matrix_symmetrized(m))
        })
        .collect();
    Ok(Povm { dim: d, effects })
}

fn mix_with_trace<T: Scalar>(p: &Povm<T>, keep: T, spread: T) -> Povm<T> {
    let d = p.dim;
    let inv_d = T::one() / T::count(d);
    let effects = p
        .effects
        .iter()
        .map(|e| {
            let flat = &HermitianOperator::identity(d) * (spread * e.operator.trace() * inv_d);
            Effect::new(e.label.clone(), &(&e.operator * keep) + &flat)
        })
        .collect();
    Povm { dim: d, effects }
}

/// `A_ξ(η) = η A_ξ + (1−η) tr(A_ξ)/d`.
pub fn depolarize<T: Scalar>(p: &Povm<T>, eta: T) -> Result<Povm<T>> {
    if !(eta >= T::zero() && eta <= T::one()) {
        return Err(Error::InvalidParameter(format!("visibility {} outside [0, 1]", eta.as_f64())));
    }
    Ok(mix_with_trace(p, eta, T::one() - eta))
}

/// `A_{ξε} = (A_ξ + ε tr(A_ξ)/d)/(1+ε)`.
pub fn epsilon_smooth<T: Scalar>(p: &Povm<T>, epsilon: T) -> Result<Povm<T>> {
    if !(epsilon >= T::zero()) {
        return Err(Error::InvalidParameter(format!("smoothing {} is negative", epsilon.as_f64())));
    }
    let s = T::one() / (T::one() + epsilon);
    Ok(mix_with_trace(p, s, epsilon * s))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProjector<T: Scalar> {
    pub eigenvalue: T,
    pub projector: HermitianOperator<T>,
    pub rank: usize,
}

/// Self-adjoint observable together with its spectral projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SharpObservable<T: Scalar> {
    operator: HermitianOperator<T>,
    projectors: Vec<SpectralProjector<T>>,
}

impl<T: Scalar> SharpObservable<T> {
    /// Uses the default clustering tolerance `1e-8` times the spectral scale.
    pub fn new(h: HermitianOperator<T>) -> Self {
        let vals = h.eigenvalues();
        let range = vals.first().copied().unwrap_or_else(T::zero) - vals.last().copied().unwrap_or_else(T::zero);
        let scale = range.max(h.op_norm());
        from_observable(&h, T::lit(1e-8) * scale)
    }

    pub fn operator(&self) -> &HermitianOperator<T> {
        &self.operator
    }

    pub fn projectors(&self) -> &[SpectralProjector<T>] {
        &self.projectors
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.projectors.iter().all(|p| p.rank == 1)
    }

    /// True when every eigenvalue is `+1` or `−1` within `tol`.
    pub fn is_pm_one(&self, tol: T) -> bool {
        self.projectors
            .iter()
            .all(|p| (p.eigenvalue - T::one()).abs() <= tol || (p.eigenvalue + T::one()).abs() <= tol)
    }

    /// Projector onto the eigenspace with eigenvalue near `value`, or zero.
    pub fn eigenprojector(&self, value: T, tol: T) -> HermitianOperator<T> {
        self.projectors
            .iter()
            .find(|p| (p.eigenvalue - value).abs() <= tol)
            .map(|p| p.projector.clone())
            .unwrap_or_else(|| HermitianOperator::zeros(self.dim()))
    }

    /// The projective POVM of the observable, labeled by eigenvalue.
    pub fn to_povm(&self) -> Povm<T> {
        let effects = self
            .projectors
            .iter()
            .map(|p| Effect::new(format!("{}", p.eigenvalue.as_f64()), p.projector.clone()))
            .collect();
        Povm { dim: self.dim(), effects }
    }
}

/// Clusters the spectrum of `h` (consecutive gaps ≤ `degeneracy_tol`) and
/// builds one projector per cluster.
pub fn from_observable<T: Scalar>(h: &HermitianOperator<T>, degeneracy_tol: T) -> SharpObservable<T> {
    let eig = h.spectral_decompose();
    let d = h.dim();
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for k in 0..d {
        match clusters.last_mut() {
            Some(c) if eig.values[*c.last().unwrap()] - eig.values[k] <= degeneracy_tol => c.push(k),
            _ => clusters.push(vec![k]),
        }
    }
    let projectors = clusters
        .into_iter()
        .map(|c| {
            let mut m = CMatrix::<T>::zeros(d, d);
            let mut mean = T::zero();
            for &k in &c {
                let v = eig.vectors.column(k);
                m += v * v.adjoint();
                mean += eig.values[k];
            }
            SpectralProjector {
                eigenvalue: mean / T::count(c.len()),
                projector: HermitianOperator::from_matrix_symmetrized(m),
                rank: c.len(),
            }
        })
        .collect();
    SharpObservable { operator: h.clone(), projectors }
}

/// True iff every pair of projectors drawn from two different observables
/// commutes to within `tol` in Frobenius norm.
pub fn pairwise_commute<T: Scalar>(ps: &[SharpObservable<T>], tol: T) -> bool {
    ps.iter().enumerate().all(|(i, a)| {
        ps[i + 1..].iter().all(|b| {
            a.projectors.iter().all(|p| {
                b.projectors
                    .iter()
                    .all(|q| linalg::frobenius(&p.projector.commutator(&q.projector)) <= tol)
            })
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub fn unit<T: Scalar>(self) -> [T; 3] {
        let (o, l) = (T::zero(), T::one());
        match self {
            PauliAxis::X => [l, o, o],
            PauliAxis::Y => [o, l, o],
            PauliAxis::Z => [o, o, l],
        }
    }
}

/// Binary qubit POVM `{(1 + a·σ)/2, (1 − a·σ)/2}` for `|a| ≤ 1`.
pub fn qubit_binary<T: Scalar>(a: [T; 3]) -> Result<Povm<T>> {
    let norm = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    if norm > T::one() + T::lit(1e-12) {
        return Err(Error::InvalidParameter(format!("Bloch vector norm {} exceeds 1", norm.as_f64())));
    }
    let half = T::lit(0.5);
    let id = HermitianOperator::identity(2);
    let s = HermitianOperator::bloch(a);
    Ok(Povm {
        dim: 2,
        effects: vec![
            Effect::new("+", &(&id + &s) * half),
            Effect::new("-", &(&id - &s) * half),
        ],
    })
}

/// Sharp Pauli measurement along a coordinate axis.
pub fn pauli_povm<T: Scalar>(axis: PauliAxis) -> Povm<T> {
    qubit_binary(axis.unit()).expect("unit axis")
}

/// The three mutually unbiased qubit measurements σx, σy, σz.
pub fn qubit_mub_triple<T: Scalar>() -> [Povm<T>; 3] {
    [pauli_povm(PauliAxis::X), pauli_povm(PauliAxis::Y), pauli_povm(PauliAxis::Z)]
}

/// Rank-one projective POVM onto the columns of `unitary`.
pub fn von_neumann<T: Scalar>(unitary: &CMatrix<T>) -> Povm<T> {
    let d = unitary.nrows();
    let effects = (0..d)
        .map(|k| {
            let v: DVector<Complex<T>> = unitary.column(k).into_owned();
            Effect::new(k.to_string(), HermitianOperator::projector(&v))
        })
        .collect();
    Povm { dim: d, effects }
}

pub fn computational_basis<T: Scalar>(d: usize) -> Povm<T> {
    von_neumann(&CMatrix::<T>::identity(d, d))
}

/// Unitary discrete Fourier matrix `F_{jk} = ω^{jk}/√d`.
pub fn fourier_matrix<T: Scalar>(d: usize) -> CMatrix<T> {
    let norm = T::one() / T::count(d).sqrt();
    let two_pi = T::two_pi();
    CMatrix::from_fn(d, d, |j, k| {
        let phase = two_pi * T::count((j * k) % d) / T::count(d);
        Complex::new(phase.cos() * norm, phase.sin() * norm)
    })
}

/// Computational-basis measurement and its discrete-Fourier conjugate.
pub fn fourier_pair<T: Scalar>(d: usize) -> Result<(Povm<T>, Povm<T>)> {
    if d < 2 {
        return Err(Error::InvalidParameter("Fourier pair needs d ≥ 2".into()));
    }
    Ok((computational_basis(d), von_neumann(&fourier_matrix(d))))
}

/// Trine POVM: `(1 + n_k·σ)/3` with `n_k` at 120° in the xz-plane.
pub fn trine_qubit<T: Scalar>() -> Povm<T> {
    let third = T::one() / T::lit(3.0);
    let id = HermitianOperator::identity(2);
    let effects = (0..3)
        .map(|k| {
            let angle = T::two_pi() * T::count(k) / T::lit(3.0);
            let n = [angle.sin(), T::zero(), angle.cos()];
            Effect::new(k.to_string(), &(&id + &HermitianOperator::bloch(n)) * third)
        })
        .collect();
    Povm { dim: 2, effects }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type H = HermitianOperator<f64>;

    fn sz_pair(scale: f64) -> Povm<f64> {
        let id = H::identity(2);
        let z = &H::pauli_z() * scale;
        Povm::new_unchecked(
            2,
            vec![Effect::new("+", &(&id + &z) * 0.5), Effect::new("-", &(&id - &z) * 0.5)],
        )
    }

    #[test]
    fn validate_examples() {
        let half = Povm::new_unchecked(
            2,
            vec![Effect::new("a", &H::identity(2) * 0.5), Effect::new("b", &H::identity(2) * 0.5)],
        );
        assert!(validate(&half, 1e-9).pass());
        assert!(validate(&sz_pair(1.0), 1e-9).pass());
        let bad = validate(&sz_pair(1.2), 1e-9);
        assert!(!bad.pass());
        assert!(!bad.positivity && bad.completeness);
        assert!((bad.min_eigenvalue + 0.1).abs() < 1e-12);
        assert!(Povm::new(2, sz_pair(1.2).effects().to_vec()).is_err());
    }

    #[test]
    fn coarse_grain_examples() {
        let p = pauli_povm::<f64>(PauliAxis::X);
        let same = coarse_grain(&p, &StochasticMatrix::identity(2)).unwrap();
        assert!(same.equivalent_up_to_relabeling(&p, 1e-14));

        let all = StochasticMatrix::new(DMatrix::from_element(1, 2, 1.0)).unwrap();
        let trivial = coarse_grain(&p, &all).unwrap();
        assert_eq!(trivial.len(), 1);
        assert!(trivial.effects()[0].operator.approx_eq(&H::identity(2), 1e-14));

        // merge outcomes 0 and 1 of a qutrit von Neumann measurement
        let q = computational_basis::<f64>(3);
        let merge = StochasticMatrix::new(nalgebra::dmatrix![1.0, 1.0, 0.0; 0.0, 0.0, 1.0]).unwrap();
        let c = coarse_grain(&q, &merge).unwrap();
        assert!(validate(&c, 1e-12).pass());
        assert!(c.effects()[0].operator.approx_eq(&H::diagonal(&[1.0, 1.0, 0.0]), 1e-14));
        let sharp = SharpObservable::new(c.effects()[0].operator.clone());
        assert_eq!(sharp.projectors().iter().map(|p| p.rank).max(), Some(2));

        assert!(coarse_grain(&q, &StochasticMatrix::identity(2)).is_err());
    }

    #[test]
    fn stochastic_validation() {
        assert!(StochasticMatrix::new(nalgebra::dmatrix![0.5, 1.0; 0.4, 0.0]).is_err());
        assert!(StochasticMatrix::new(nalgebra::dmatrix![1.1, 1.0; -0.1, 0.0]).is_err());
        let l = StochasticMatrix::new(nalgebra::dmatrix![0.5, 0.5; 0.5, 0.5]).unwrap();
        assert!(l.is_doubly_stochastic(1e-12));
    }

    #[test]
    fn depolarize_examples() {
        let p = pauli_povm::<f64>(PauliAxis::Z);
        assert_eq!(depolarize(&p, 1.0).unwrap(), p);
        let flat = depolarize(&p, 0.0).unwrap();
        assert!(flat.operators().all(|a| a.approx_eq(&(&H::identity(2) * 0.5), 1e-15)));
        let half = depolarize(&p, 0.5).unwrap();
        assert!(half.equivalent_up_to_relabeling(&sz_pair(0.5), 1e-15));
        assert!(depolarize(&p, 1.5).is_err());
        assert!(depolarize(&p, -0.1).is_err());
    }

    #[test]
    fn smoothing_examples() {
        let p = pauli_povm::<f64>(PauliAxis::Z);
        assert!(epsilon_smooth(&p, 0.0).unwrap().equivalent_up_to_relabeling(&p, 1e-15));
        let e = 2f64.sqrt() - 1.0;
        let s = epsilon_smooth(&p, e).unwrap();
        let d = depolarize(&p, 1.0 / 2f64.sqrt()).unwrap();
        assert!(s.equivalent_up_to_relabeling(&d, 1e-14));
        assert!(epsilon_smooth(&p, -1e-3).is_err());
    }

    #[test]
    fn observable_examples() {
        let z = SharpObservable::new(H::pauli_z());
        assert_eq!(z.projectors().len(), 2);
        assert!((z.projectors()[0].eigenvalue - 1.0).abs() < 1e-14);
        assert!(z.projectors()[0].projector.approx_eq(&H::diagonal(&[1.0, 0.0]), 1e-14));

        let id = SharpObservable::new(H::identity(3));
        assert_eq!(id.projectors().len(), 1);
        assert_eq!(id.projectors()[0].rank, 3);

        let r = 1.0 / 2f64.sqrt();
        let a = SharpObservable::new(H::bloch([r, r, 0.0]));
        let plus = &(&H::identity(2) + &H::bloch([r, r, 0.0])) * 0.5;
        assert!(a.eigenprojector(1.0, 1e-9).approx_eq(&plus, 1e-12));
        assert!(a.is_pm_one(1e-12) && a.is_nondegenerate());
    }

    #[test]
    fn commutation_examples() {
        let z = SharpObservable::new(H::pauli_z());
        let x = SharpObservable::new(H::pauli_x());
        assert!(pairwise_commute(&[z.clone(), z.clone()], 1e-10));
        assert!(!pairwise_commute(&[x.clone(), z.clone()], 1e-10));
        assert!(!pairwise_commute(&[z, x], 1e-10));
        let a = SharpObservable::new(H::diagonal(&[1.0, 2.0, 3.0]));
        let b = SharpObservable::new(H::diagonal(&[5.0, -1.0, 5.0]));
        assert!(pairwise_commute(&[a, b], 1e-10));
    }

    #[test]
    fn constructors_validate() {
        for p in qubit_mub_triple::<f64>() {
            assert!(validate(&p, 1e-12).pass());
        }
        let (z, x) = fourier_pair::<f64>(2).unwrap();
        assert!(z.equivalent_up_to_relabeling(&pauli_povm(PauliAxis::Z), 1e-14));
        assert!(x.equivalent_up_to_relabeling(&pauli_povm(PauliAxis::X), 1e-14));
        for d in 2..=5 {
            let (a, b) = fourier_pair::<f64>(d).unwrap();
            assert!(validate(&a, 1e-12).pass() && validate(&b, 1e-12).pass());
            // mutually unbiased: tr(A_j B_k) = 1/d
            for x in a.operators() {
                for y in b.operators() {
                    assert!((x.hs_inner(y) - 1.0 / d as f64).abs() < 1e-12);
                }
            }
        }
        let t = trine_qubit::<f64>();
        assert_eq!(t.len(), 3);
        assert!(validate(&t, 1e-12).pass());
        assert!(fourier_pair::<f64>(1).is_err());
    }

    #[test]
    fn splitting_and_relabeling() {
        let p = trine_qubit::<f64>();
        let s = p.split_outcome(1).unwrap();
        assert_eq!(s.len(), 4);
        assert!(validate(&s, 1e-12).pass());
        let mut rev = p.effects().to_vec();
        rev.reverse();
        assert!(p.equivalent_up_to_relabeling(&Povm::new_unchecked(2, rev), 1e-14));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn coarse_graining_composes(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random::povm::<f64, _>(&mut rng, 3, 4);
            let l1 = random::stochastic::<f64, _>(&mut rng, 3, 4);
            let l2 = random::stochastic::<f64, _>(&mut rng, 2, 3);
            let two_step = coarse_grain(&coarse_grain(&p, &l1).unwrap(), &l2).unwrap();
            let one_step = coarse_grain(&p, &l1.then(&l2).unwrap()).unwrap();
            for (a, b) in two_step.operators().zip(one_step.operators()) {
                prop_assert!(a.approx_eq(b, 1e-12));
            }
        }

        #[test]
        fn depolarizing_composes(seed in any::<u64>(), e1 in 0.0..=1.0f64, e2 in 0.0..=1.0f64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random::povm::<f64, _>(&mut rng, 3, 3);
            let twice = depolarize(&depolarize(&p, e1).unwrap(), e2).unwrap();
            let once = depolarize(&p, e1 * e2).unwrap();
            for (a, b) in twice.operators().zip(once.operators()) {
                prop_assert!(a.approx_eq(b, 1e-12));
            }
        }

        #[test]
        fn smoothing_is_depolarizing(seed in any::<u64>(), eps in 0.0..5.0f64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random::povm::<f64, _>(&mut rng, 2, 3);
            let s = epsilon_smooth(&p, eps).unwrap();
            let d = depolarize(&p, 1.0 / (1.0 + eps)).unwrap();
            for (a, b) in s.operators().zip(d.operators()) {
                prop_assert!(a.approx_eq(b, 1e-12));
            }
        }

        #[test]
        fn validation_is_unitarily_covariant(seed in any::<u64>(), scale in 0.5..1.5f64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = random::unitary::<f64, _>(&mut rng, 2);
            let p = sz_pair(scale);
            prop_assert_eq!(validate(&p, 1e-9).pass(), validate(&p.conjugate_by(&u), 1e-9).pass());
            for q in qubit_mub_triple::<f64>() {
                prop_assert!(validate(&q.conjugate_by(&u), 1e-9).pass());
            }
        }

        #[test]
        fn commutation_is_symmetric(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = SharpObservable::new(random::hermitian::<f64, _>(&mut rng, 3));
            let b = SharpObservable::new(random::hermitian::<f64, _>(&mut rng, 3));
            prop_assert!(pairwise_commute(&[a.clone(), a.clone()], 1e-9));
            prop_assert_eq!(
                pairwise_commute(&[a.clone(), b.clone()], 1e-9),
                pairwise_commute(&[b, a], 1e-9)
            );
        }
    }
}
