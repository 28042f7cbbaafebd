//! Dense primal-dual interior-point method for block-diagonal semidefinite
//! programs in standard form
//!
//! ```text
//! minimize   Σ_b ⟨C_b, X_b⟩
//! subject to Σ_b ⟨A_ib, X_b⟩ = b_i,   X_b ⪰ 0
//! ```
//!
//! with dual `maximize bᵀy  s.t.  S_b = C_b − Σ_i y_i A_ib ⪰ 0`.
//!
//! Blocks are real symmetric (`F = T`) or complex Hermitian (`F = Complex<T>`).
//! The search direction is HKM with a Mehrotra predictor-corrector. Starting
//! from a feasible point keeps every iterate feasible, so the recorded
//! objective history then satisfies weak duality at every step.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::linalg;
use crate::scalar::{Entry, Scalar};

/// Sparse Hermitian matrix stored as a full `(row, col, value)` list.
#[derive(Debug, Clone)]
pub struct SparseHermitian<F> {
    pub dim: usize,
    pub entries: Vec<(usize, usize, F)>,
}

impl<F: Copy> SparseHermitian<F> {
    pub fn new(dim: usize, entries: Vec<(usize, usize, F)>) -> Self {
        Self { dim, entries }
    }

    /// Orthonormal basis of the `dim × dim` Hermitian (or real symmetric)
    /// matrices: `E_aa`, then `(E_ab + E_ba)/√2` and, for complex entries,
    /// `i(E_ba − E_ab)/√2` for each `a < b`.
    pub fn hermitian_basis<T: Scalar>(dim: usize) -> Vec<Self>
    where
        F: Entry<T>,
    {
        let r = F::real_lit(std::f64::consts::FRAC_1_SQRT_2);
        let mut out = Vec::with_capacity(dim * dim);
        for a in 0..dim {
            out.push(Self::new(dim, vec![(a, a, F::one())]));
        }
        for a in 0..dim {
            for b in a + 1..dim {
                out.push(Self::new(dim, vec![(a, b, r), (b, a, r)]));
                if let Some(i) = F::imaginary_unit() {
                    let v = i * r;
                    out.push(Self::new(dim, vec![(a, b, -v), (b, a, v)]));
                }
            }
        }
        out
    }

    /// `Re tr(A† X)`.
    pub fn inner<T: Scalar>(&self, x: &DMatrix<F>) -> T
    where
        F: Entry<T>,
    {
        self.entries
            .iter()
            .fold(T::zero(), |acc, &(r, c, v)| acc + (v.conjugate() * x[(r, c)]).real())
    }

    pub fn add_scaled_to<T: Scalar>(&self, out: &mut DMatrix<F>, scale: T)
    where
        F: Entry<T>,
    {
        let s = F::from_real(scale);
        for &(r, c, v) in &self.entries {
            out[(r, c)] += v * s;
        }
    }

    pub fn to_dense<T: Scalar>(&self) -> DMatrix<F>
    where
        F: Entry<T>,
    {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        self.add_scaled_to(&mut m, T::one());
        m
    }

    pub fn scaled<T: Scalar>(&self, s: T) -> Self
    where
        F: Entry<T>,
    {
        let s = F::from_real(s);
        Self::new(self.dim, self.entries.iter().map(|&(r, c, v)| (r, c, v * s)).collect())
    }
}

/// One linear constraint: a sum of sparse terms on individual blocks.
pub type Constraint<F> = Vec<(usize, SparseHermitian<F>)>;

#[derive(Debug, Clone)]
pub struct BlockSdp<T: Scalar, F: Entry<T>> {
    pub block_sizes: Vec<usize>,
    pub cost: Vec<DMatrix<F>>,
    pub constraints: Vec<Constraint<F>>,
    pub rhs: DVector<T>,
}

/// Primal-dual triple.
#[derive(Debug, Clone)]
pub struct Iterate<T: Scalar, F: Entry<T>> {
    pub x: Vec<DMatrix<F>>,
    pub y: DVector<T>,
    pub s: Vec<DMatrix<F>>,
}

#[derive(Debug, Clone, Copy)]
pub struct IpmOptions<T: Scalar> {
    /// Bound on relative primal/dual infeasibility and relative gap.
    pub tol: T,
    pub max_iter: usize,
    /// Fraction of the step to the boundary.
    pub step_fraction: T,
}

impl<T: Scalar> Default for IpmOptions<T> {
    fn default() -> Self {
        Self { tol: T::lit(1e-7), max_iter: 200, step_fraction: T::lit(0.98) }
    }
}

#[derive(Debug, Clone)]
pub struct IpmResult<T: Scalar, F: Entry<T>> {
    pub point: Iterate<T, F>,
    pub primal_objective: T,
    pub dual_objective: T,
    /// `‖b − A(X)‖ / (1 + ‖b‖)`.
    pub primal_infeasibility: T,
    /// `‖C − A*(y) − S‖ / (1 + ‖C‖)`.
    pub dual_infeasibility: T,
    pub relative_gap: T,
    pub iterations: usize,
    pub converged: bool,
    /// `(primal objective, dual objective)` at every iterate.
    pub history: Vec<(T, T)>,
}

struct Layout {
    /// For each block, the `(constraint, term)` pairs acting on it.
    by_block: Vec<Vec<(usize, usize)>>,
}

impl<T: Scalar, F: Entry<T>> BlockSdp<T, F> {
    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    fn layout(&self) -> Layout {
        let mut by_block = vec![Vec::new(); self.block_sizes.len()];
        for (i, con) in self.constraints.iter().enumerate() {
            for (t, (b, _)) in con.iter().enumerate() {
                by_block[*b].push((i, t));
            }
        }
        Layout { by_block }
    }

    /// `A(X)_i = Σ_b ⟨A_ib, X_b⟩`.
    pub fn apply(&self, x: &[DMatrix<F>]) -> DVector<T> {
        DVector::from_iterator(
            self.constraints.len(),
            self.constraints
                .iter()
                .map(|con| con.iter().fold(T::zero(), |acc, (b, a)| acc + a.inner(&x[*b]))),
        )
    }

    /// `A*(y)_b = Σ_i y_i A_ib`.
    pub fn adjoint(&self, y: &DVector<T>) -> Vec<DMatrix<F>> {
        let mut out: Vec<DMatrix<F>> = self.block_sizes.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (i, con) in self.constraints.iter().enumerate() {
            if y[i] != T::zero() {
                for (b, a) in con {
                    a.add_scaled_to(&mut out[*b], y[i]);
                }
            }
        }
        out
    }

    fn objective(&self, x: &[DMatrix<F>]) -> T {
        self.cost.iter().zip(x).fold(T::zero(), |acc, (c, x)| acc + linalg::hs_inner(c, x))
    }

    /// Scaled identity start in the spirit of SDPT3.
    pub fn default_start(&self) -> Iterate<T, F> {
        let nb = self.block_sizes.len();
        let mut norm_a = vec![T::zero(); nb];
        let mut ratio = vec![T::zero(); nb];
        for (i, con) in self.constraints.iter().enumerate() {
            for (b, a) in con {
                let f = a.entries.iter().fold(T::zero(), |acc, e| acc + e.2.modulus_squared()).sqrt();
                norm_a[*b] = norm_a[*b].max(f);
                ratio[*b] = ratio[*b].max((T::one() + self.rhs[i].abs()) / (T::one() + f));
            }
        }
        let mut x = Vec::with_capacity(nb);
        let mut s = Vec::with_capacity(nb);
        for (b, &n) in self.block_sizes.iter().enumerate() {
            let nn = T::count(n);
            let xi = T::lit(10.0).max(nn.sqrt()).max(nn * ratio[b]);
            let eta = T::lit(10.0).max(nn.sqrt()).max(norm_a[b]).max(linalg::frobenius(&self.cost[b]));
            x.push(DMatrix::identity(n, n) * F::from_real(xi));
            s.push(DMatrix::identity(n, n) * F::from_real(eta));
        }
        Iterate { x, y: DVector::zeros(self.constraints.len()), s }
    }

    pub fn solve(&self, opts: &IpmOptions<T>) -> IpmResult<T, F> {
        self.solve_from(self.default_start(), opts)
    }

    pub fn solve_from(&self, start: Iterate<T, F>, opts: &IpmOptions<T>) -> IpmResult<T, F> {
        let layout = self.layout();
        let n_total = T::count(self.block_sizes.iter().sum::<usize>().max(1));
        let norm_b = self.rhs.norm();
        let norm_c = self.cost.iter().fold(T::zero(), |acc, c| acc + linalg::frobenius(c).powi(2)).sqrt();
        let mut pt = start;
        let mut history = Vec::new();
        let mut best: Option<(T, Iterate<T, F>, [T; 5])> = None;
        let mut iterations = 0;
        let mut converged = false;

        loop {
            let ax = self.apply(&pt.x);
            let rp = &self.rhs - &ax;
            let aty = self.adjoint(&pt.y);
            let rd: Vec<DMatrix<F>> = (0..self.block_sizes.len()).map(|b| &self.cost[b] - &aty[b] - &pt.s[b]).collect();
            let pobj = self.objective(&pt.x);
            let dobj = self.rhs.dot(&pt.y);
            history.push((pobj, dobj));
            let pinf = rp.norm() / (T::one() + norm_b);
            let dinf = rd.iter().fold(T::zero(), |acc, r| acc + linalg::frobenius(r).powi(2)).sqrt() / (T::one() + norm_c);
            let rgap = (pobj - dobj).abs() / (T::one() + pobj.abs() + dobj.abs());
            let merit = pinf.max(dinf).max(rgap);
            if best.as_ref().is_none_or(|b| merit < b.0) {
                best = Some((merit, pt.clone(), [pobj, dobj, pinf, dinf, rgap]));
            }
            if merit <= opts.tol {
                converged = true;
                break;
            }
            if iterations >= opts.max_iter {
                break;
            }
            let Some(next) = self.step(&pt, &rp, &rd, n_total, &layout, opts) else {
                break;
            };
            pt = next;
            iterations += 1;
        }

        let (_, point, [pobj, dobj, pinf, dinf, rgap]) = best.expect("at least one iterate");
        IpmResult {
            point,
            primal_objective: pobj,
            dual_objective: dobj,
            primal_infeasibility: pinf,
            dual_infeasibility: dinf,
            relative_gap: rgap,
            iterations,
            converged,
            history,
        }
    }

    fn schur(&self, x: &[DMatrix<F>], sinv: &[DMatrix<F>], layout: &Layout) -> DMatrix<T> {
        let m = self.constraints.len();
        let mut schur = DMatrix::<T>::zeros(m, m);
        for (b, touching) in layout.by_block.iter().enumerate() {
            let n = self.block_sizes[b];
            for &(i, ti) in touching {
                // G = X A_i S⁻¹ as a sum of outer products
                let mut g = DMatrix::<F>::zeros(n, n);
                for &(r, c, v) in &self.constraints[i][ti].1.entries {
                    g.ger(v, &x[b].column(r), &sinv[b].row(c).transpose(), F::one());
                }
                for &(j, tj) in touching {
                    schur[(j, i)] += self.constraints[j][tj].1.inner(&g);
                }
            }
        }
        linalg::hermitian_part(&schur)
    }

    #[allow(clippy::too_many_arguments)]
    fn direction(
        &self,
        pt: &Iterate<T, F>,
        sinv: &[DMatrix<F>],
        solve: &dyn Fn(&DVector<T>) -> DVector<T>,
        rp: &DVector<T>,
        rd: &[DMatrix<F>],
        r: &[DMatrix<F>],
    ) -> (Vec<DMatrix<F>>, DVector<T>, Vec<DMatrix<F>>) {
        let nb = self.block_sizes.len();
        let xrs: Vec<DMatrix<F>> = (0..nb).map(|b| &pt.x[b] * &rd[b] * &sinv[b]).collect();
        let h = rp - self.apply(r) + self.apply(&xrs);
        let dy = solve(&h);
        let atdy = self.adjoint(&dy);
        let ds: Vec<DMatrix<F>> = (0..nb).map(|b| &rd[b] - &atdy[b]).collect();
        let dx: Vec<DMatrix<F>> = (0..nb)
            .map(|b| {
                let t = &pt.x[b] * &ds[b] * &sinv[b];
                &r[b] - linalg::hermitian_part(&t)
            })
            .collect();
        (dx, dy, ds)
    }

    fn step(
        &self,
        pt: &Iterate<T, F>,
        rp: &DVector<T>,
        rd: &[DMatrix<F>],
        n_total: T,
        layout: &Layout,
        opts: &IpmOptions<T>,
    ) -> Option<Iterate<T, F>> {
        let nb = self.block_sizes.len();
        let mut sinv = Vec::with_capacity(nb);
        for s in &pt.s {
            sinv.push(Cholesky::new(linalg::hermitian_part(s))?.inverse());
        }
        let mu = pt.x.iter().zip(&pt.s).fold(T::zero(), |acc, (x, s)| acc + linalg::hs_inner(x, s)) / n_total;
        let schur = self.schur(&pt.x, &sinv, layout);
        let solve = factor(schur)?;

        // predictor
        let r_aff: Vec<DMatrix<F>> = pt.x.iter().map(|x| -x).collect();
        let (dxa, dya, dsa) = self.direction(pt, &sinv, &*solve, rp, rd, &r_aff);
        let ap = max_step(&pt.x, &dxa);
        let ad = max_step(&pt.s, &dsa);
        let ap = T::one().min(opts.step_fraction * ap);
        let ad = T::one().min(opts.step_fraction * ad);
        let mu_aff = (0..nb).fold(T::zero(), |acc, b| {
            let x = &pt.x[b] + &dxa[b] * F::from_real(ap);
            let s = &pt.s[b] + &dsa[b] * F::from_real(ad);
            acc + linalg::hs_inner(&x, &s)
        }) / n_total;
        let sigma = if mu > T::zero() { (mu_aff / mu).max(T::zero()).min(T::one()).powi(3) } else { T::zero() };
        let _ = dya;

        // corrector
        let r_cor: Vec<DMatrix<F>> = (0..nb)
            .map(|b| {
                let cross = &dxa[b] * &dsa[b] * &sinv[b];
                &sinv[b] * F::from_real(sigma * mu) - &pt.x[b] - linalg::hermitian_part(&cross)
            })
            .collect();
        let (dx, dy, ds) = self.direction(pt, &sinv, &*solve, rp, rd, &r_cor);
        let ap = T::one().min(opts.step_fraction * max_step(&pt.x, &dx));
        let ad = T::one().min(opts.step_fraction * max_step(&pt.s, &ds));
        if ap <= T::lit(1e-14) && ad <= T::lit(1e-14) {
            return None;
        }
        let x = (0..nb).map(|b| linalg::hermitian_part(&(&pt.x[b] + &dx[b] * F::from_real(ap)))).collect();
        let s = (0..nb).map(|b| linalg::hermitian_part(&(&pt.s[b] + &ds[b] * F::from_real(ad)))).collect();
        let y = &pt.y + dy * ad;
        Some(Iterate { x, y, s })
    }
}

/// Factorizes the Schur complement, regularizing if Cholesky fails.
fn factor<T: Scalar>(m: DMatrix<T>) -> Option<Box<dyn Fn(&DVector<T>) -> DVector<T>>> {
    if let Some(ch) = Cholesky::new(m.clone()) {
        return Some(Box::new(move |h| ch.solve(h)));
    }
    let scale = m.diagonal().amax().max(T::one());
    let n = m.nrows();
    let reg = &m + DMatrix::identity(n, n) * (scale * T::lit(1e-13));
    if let Some(ch) = Cholesky::new(reg) {
        return Some(Box::new(move |h| ch.solve(h)));
    }
    let lu = m.lu();
    if !lu.is_invertible() {
        return None;
    }
    Some(Box::new(move |h| lu.solve(h).expect("invertible")))
}

/// Largest `α` (capped at a large number) keeping every `Z_b + α Δ_b ⪰ 0`.
fn max_step<T: Scalar, F: Entry<T>>(z: &[DMatrix<F>], dz: &[DMatrix<F>]) -> T {
    let mut alpha = T::lit(1e10);
    for (z, dz) in z.iter().zip(dz) {
        let Some(ch) = Cholesky::new(linalg::hermitian_part(z)) else {
            return T::zero();
        };
        let l = ch.l();
        let Some(w) = l.solve_lower_triangular(dz) else {
            return T::zero();
        };
        let Some(v) = l.solve_lower_triangular(&w.adjoint()) else {
            return T::zero();
        };
        let low = linalg::min_eigenvalue(&linalg::hermitian_part(&v));
        if low < T::zero() {
            alpha = alpha.min(-T::one() / low);
        }
    }
    alpha
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Complex;

    #[test]
    fn hermitian_basis_is_orthonormal() {
        let basis = SparseHermitian::<Complex<f64>>::hermitian_basis::<f64>(3);
        assert_eq!(basis.len(), 9);
        for (a, ea) in basis.iter().enumerate() {
            for (b, eb) in basis.iter().enumerate() {
                let ip: f64 = ea.inner(&eb.to_dense::<f64>());
                assert!((ip - if a == b { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
        assert_eq!(SparseHermitian::<f64>::hermitian_basis::<f64>(3).len(), 6);
    }

    #[test]
    fn solves_a_small_lp() {
        // minimize x1 + 2 x2 subject to x1 + x2 = 1, x ≥ 0 as two 1×1 blocks
        let one = |n| SparseHermitian::<f64>::new(n, vec![(0, 0, 1.0)]);
        let sdp = BlockSdp {
            block_sizes: vec![1, 1],
            cost: vec![DMatrix::from_element(1, 1, 1.0), DMatrix::from_element(1, 1, 2.0)],
            constraints: vec![vec![(0, one(1)), (1, one(1))]],
            rhs: DVector::from_element(1, 1.0),
        };
        let r = sdp.solve(&IpmOptions { tol: 1e-10, ..Default::default() });
        assert!(r.converged);
        assert!((r.primal_objective - 1.0).abs() < 1e-8);
        assert!((r.dual_objective - 1.0).abs() < 1e-8);
    }

    #[test]
    fn max_eigenvalue_as_sdp() {
        // minimize ⟨C, X⟩ s.t. tr X = 1 gives the smallest eigenvalue of C
        let c = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 1.0]);
        let trace = SparseHermitian::new(3, (0..3).map(|k| (k, k, 1.0)).collect());
        let sdp = BlockSdp { block_sizes: vec![3], cost: vec![c.clone()], constraints: vec![vec![(0, trace)]], rhs: DVector::from_element(1, 1.0) };
        let r = sdp.solve(&IpmOptions { tol: 1e-10, ..Default::default() });
        assert!(r.converged);
        assert!((r.primal_objective - linalg::min_eigenvalue::<f64, f64>(&c)).abs() < 1e-8);
    }
}
