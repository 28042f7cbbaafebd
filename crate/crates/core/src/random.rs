//! Seeded random instances: Hermitian matrices, Haar unitaries, states,
//! POVMs and stochastic matrices. Used by the chamber exporter and by tests.

use nalgebra::{Complex, ComplexField, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::operator::{CMatrix, HermitianOperator};
use crate::povm::{Effect, Povm, StochasticMatrix};
use crate::scalar::Scalar;

fn gauss<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}

fn ginibre<T: Scalar, R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix<T> {
    CMatrix::from_fn(rows, cols, |_, _| Complex::new(gauss(rng), gauss(rng)))
}

/// Hermitian matrix from the Gaussian unitary ensemble (unit variance scale).
pub fn hermitian<T: Scalar, R: Rng + ?Sized>(rng: &mut R, d: usize) -> HermitianOperator<T> {
    HermitianOperator::from_matrix_symmetrized(ginibre(rng, d, d))
}

/// Haar-random unitary via QR with phase correction.
pub fn unitary<T: Scalar, R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix<T> {
    let qr = ginibre::<T, R>(rng, d, d).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..d {
        let diag = r[(k, k)];
        let m = diag.modulus();
        if m > T::zero() {
            let phase = diag / Complex::new(m, T::zero());
            for row in 0..d {
                q[(row, k)] *= phase;
            }
        }
    }
    q
}

/// Haar-random real orthogonal matrix.
pub fn orthogonal<T: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<T> {
    let g = DMatrix::<T>::from_fn(n, n, |_, _| gauss(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..n {
        if r[(k, k)] < T::zero() {
            for row in 0..n {
                q[(row, k)] = -q[(row, k)];
            }
        }
    }
    q
}

/// Full-rank density matrix drawn from the Hilbert–Schmidt measure.
pub fn state<T: Scalar, R: Rng + ?Sized>(rng: &mut R, d: usize) -> HermitianOperator<T> {
    let g = ginibre::<T, R>(rng, d, d);
    let rho = HermitianOperator::from_matrix_symmetrized(&g * g.adjoint());
    let tr = rho.trace();
    &rho * (T::one() / tr)
}

/// Random unit vector in ℂ^d.
pub fn ket<T: Scalar, R: Rng + ?Sized>(rng: &mut R, d: usize) -> DVector<Complex<T>> {
    let v: DVector<Complex<T>> = DVector::from_fn(d, |_, _| Complex::new(gauss::<T, R>(rng), gauss::<T, R>(rng)));
    let n = v.norm();
    v.map(|z| z * Complex::new(T::one() / n, T::zero()))
}

/// Uniform point of the closed unit ball in ℝ³.
pub fn ball3<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> [T; 3] {
    let dir = unit3::<T, R>(rng);
    let r = T::lit(rng.random::<f64>().cbrt());
    [dir[0] * r, dir[1] * r, dir[2] * r]
}

pub fn unit3<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> [T; 3] {
    loop {
        let v: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-8 {
            return [T::lit(v[0] / n), T::lit(v[1] / n), T::lit(v[2] / n)];
        }
    }
}

/// Normalizes PSD seeds `G_k` into a POVM `S^{-1/2} G_k S^{-1/2}`, `S = Σ G_k`.
fn normalize_seeds<T: Scalar>(seeds: Vec<CMatrix<T>>, d: usize) -> Povm<T> {
    let mut total = CMatrix::<T>::zeros(d, d);
    for g in &seeds {
        total += g;
    }
    let inv_sqrt = HermitianOperator::from_matrix_symmetrized(total)
        .psd_functions(T::lit(1e-14))
        .expect("sum of PSD seeds is PSD")
        .inv_sqrt_pinv;
    let effects = seeds
        .into_iter()
        .enumerate()
        .map(|(k, g)| {
            let m = inv_sqrt.matrix() * g * inv_sqrt.matrix();
            Effect::new(k.to_string(), HermitianOperator::from_matrix_symmetrized(m))
        })
        .collect();
    Povm::new_unchecked(d, effects)
}

/// Random POVM with `n` full-rank effects.
pub fn povm<T: Scalar, R: Rng + ?Sized>(rng: &mut R, d: usize, n: usize) -> Povm<T> {
    let seeds = (0..n)
        .map(|_| {
            let g = ginibre::<T, R>(rng, d, d);
            &g * g.adjoint()
        })
        .collect();
    normalize_seeds(seeds, d)
}

/// Random rank-one POVM with `n ≥ d` outcomes.
pub fn rank_one_povm<T: Scalar, R: Rng + ?Sized>(rng: &mut R, d: usize, n: usize) -> Povm<T> {
    let seeds = (0..n)
        .map(|_| {
            let v = DVector::from_fn(d, |_, _| Complex::new(gauss::<T, R>(rng), gauss::<T, R>(rng)));
            &v * v.adjoint()
        })
        .collect();
    normalize_seeds(seeds, d)
}

/// Random nondegenerate von Neumann measurement (Haar basis).
pub fn von_neumann<T: Scalar, R: Rng + ?Sized>(rng: &mut R, d: usize) -> Povm<T> {
    crate::povm::von_neumann(&unitary(rng, d))
}

/// Random column-stochastic matrix with i.i.d. exponential weights.
pub fn stochastic<T: Scalar, R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> StochasticMatrix<T> {
    let mut m = DMatrix::<T>::zeros(rows, cols);
    for c in 0..cols {
        let w: Vec<f64> = (0..rows).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let s: f64 = w.iter().sum();
        for r in 0..rows {
            m[(r, c)] = T::lit(w[r] / s);
        }
    }
    StochasticMatrix::new(m).expect("columns normalized")
}
