//! Minimal symmetric linear algebra: dense/sparse storage, a cyclic Jacobi
//! eigensolver for small dense matrices, and a Lanczos iteration with full
//! reorthogonalization for the leading spectrum of large operators.
//!
//! Everything here is deterministic: the Lanczos start vector comes from a
//! fixed-seed generator and eigenvector signs follow a fixed convention, so
//! repeated runs on the same input produce identical output.

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::scalar::{sc, Scalar};
use crate::{Error, Result};

/// Compressed sparse row matrix; used for symmetric kernels only.
#[derive(Debug, Clone)]
pub struct CsrMatrix<F> {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<F>,
}

impl<F: Scalar> CsrMatrix<F> {
    /// Build from per-row `(column, value)` lists. Columns within a row must
    /// be sorted and unique.
    pub fn from_rows(rows: Vec<Vec<(usize, F)>>) -> Self {
        let n = rows.len();
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in rows {
            debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
            for (j, v) in row {
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            n,
            indptr,
            indices,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, F)> + '_ {
        let lo = self.indptr[i];
        let hi = self.indptr[i + 1];
        self.indices[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    pub fn to_dense(&self) -> Array2<F> {
        let mut a = Array2::zeros((self.n, self.n));
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                a[[i, j]] = v;
            }
        }
        a
    }
}

/// Symmetric matrix storage shared by affinity and Markov operators.
#[derive(Debug, Clone)]
pub enum SymStorage<F> {
    Dense(Array2<F>),
    Sparse(CsrMatrix<F>),
}

impl<F: Scalar> SymStorage<F> {
    pub fn dim(&self) -> usize {
        match self {
            SymStorage::Dense(a) => a.nrows(),
            SymStorage::Sparse(s) => s.dim(),
        }
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[F], y: &mut [F]) {
        match self {
            SymStorage::Dense(a) => {
                for (yi, row) in y.iter_mut().zip(a.rows()) {
                    *yi = dot_view(row, x);
                }
            }
            SymStorage::Sparse(s) => {
                for (i, yi) in y.iter_mut().enumerate() {
                    let mut acc = F::zero();
                    for (j, v) in s.row(i) {
                        acc += v * x[j];
                    }
                    *yi = acc;
                }
            }
        }
    }

    pub fn to_dense(&self) -> Array2<F> {
        match self {
            SymStorage::Dense(a) => a.clone(),
            SymStorage::Sparse(s) => s.to_dense(),
        }
    }

    pub fn row_sums(&self) -> Vec<F> {
        match self {
            SymStorage::Dense(a) => a.rows().into_iter().map(|r| r.sum()).collect(),
            SymStorage::Sparse(s) => (0..s.dim())
                .map(|i| s.row(i).map(|(_, v)| v).sum())
                .collect(),
        }
    }

    /// Entry-wise `A[i,j] * d[i] * d[j]`, preserving the storage layout.
    pub fn scale_sym(&self, d: &[F]) -> SymStorage<F> {
        match self {
            SymStorage::Dense(a) => {
                let n = a.nrows();
                let mut out = a.clone();
                for i in 0..n {
                    for j in 0..n {
                        out[[i, j]] = out[[i, j]] * d[i] * d[j];
                    }
                }
                SymStorage::Dense(out)
            }
            SymStorage::Sparse(s) => {
                let mut out = s.clone();
                for i in 0..out.n {
                    let lo = out.indptr[i];
                    let hi = out.indptr[i + 1];
                    for k in lo..hi {
                        let j = out.indices[k];
                        out.values[k] = out.values[k] * d[i] * d[j];
                    }
                }
                SymStorage::Sparse(out)
            }
        }
    }
}

fn dot_view<F: Scalar>(a: ArrayView1<'_, F>, b: &[F]) -> F {
    match a.as_slice() {
        Some(sa) => dot(sa, b),
        None => a.iter().zip(b).map(|(&x, &y)| x * y).sum(),
    }
}

#[inline]
pub fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = F::zero();
    for (&x, &y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

#[inline]
pub fn norm2<F: Scalar>(a: &[F]) -> F {
    dot(a, a).sqrt()
}

/// Eigenvalues and eigenvectors (as matrix columns) of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEigen<F> {
    pub values: Vec<F>,
    pub vectors: Array2<F>,
}

impl<F: Scalar> SymEigen<F> {
    /// Sort eigenpairs by decreasing magnitude, breaking magnitude ties by
    /// algebraic value (so `+1` sorts before `-1`) and then by original index.
    pub fn sorted_by_magnitude(self) -> SymEigen<F> {
        let n = self.values.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            let (va, vb) = (self.values[a], self.values[b]);
            vb.abs()
                .partial_cmp(&va.abs())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(vb.partial_cmp(&va).unwrap_or(std::cmp::Ordering::Equal))
                .then(a.cmp(&b))
        });
        self.reordered(&order)
    }

    fn reordered(&self, order: &[usize]) -> SymEigen<F> {
        let n = self.vectors.nrows();
        let mut vectors = Array2::zeros((n, order.len()));
        let mut values = Vec::with_capacity(order.len());
        for (dst, &src) in order.iter().enumerate() {
            values.push(self.values[src]);
            for i in 0..n {
                vectors[[i, dst]] = self.vectors[[i, src]];
            }
        }
        SymEigen { values, vectors }
    }

    pub fn truncated(mut self, k: usize) -> SymEigen<F> {
        self.values.truncate(k);
        let n = self.vectors.nrows();
        let mut vectors = Array2::zeros((n, k));
        for j in 0..k {
            for i in 0..n {
                vectors[[i, j]] = self.vectors[[i, j]];
            }
        }
        self.vectors = vectors;
        self
    }
}

/// Make the largest-magnitude entry of each column positive (first index on
/// ties). Pins the sign ambiguity of eigenvectors for reproducible output.
pub fn fix_column_signs<F: Scalar>(m: &mut Array2<F>) {
    let (n, k) = m.dim();
    for j in 0..k {
        let mut best = 0usize;
        let mut best_abs = F::zero();
        for i in 0..n {
            let a = m[[i, j]].abs();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        if m[[best, j]] < F::zero() {
            for i in 0..n {
                m[[i, j]] = -m[[i, j]];
            }
        }
    }
}

const MAX_JACOBI_SWEEPS: usize = 64;

/// Full eigendecomposition of a dense symmetric matrix by cyclic Jacobi
/// rotations. Returns unsorted eigenpairs with the sign convention applied.
pub fn sym_eigen_dense<F: Scalar>(a: &Array2<F>) -> Result<SymEigen<F>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix must be square");
    if n == 0 {
        return Ok(SymEigen {
            values: vec![],
            vectors: Array2::zeros((0, 0)),
        });
    }
    let mut a = a.clone();
    let mut v: Array2<F> = Array2::eye(n);
    let frob = a.iter().map(|&x| x * x).sum::<F>().sqrt();
    let tol = frob * F::epsilon() * sc::<F>(n as f64);

    let mut converged = false;
    for _sweep in 0..MAX_JACOBI_SWEEPS {
        let mut off = F::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[[p, q]] * a[[p, q]];
            }
        }
        if off.sqrt() <= tol {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq == F::zero() {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (sc::<F>(2.0) * apq);
                let t = if theta.abs() > F::one() / F::epsilon() {
                    (sc::<F>(2.0) * theta).recip()
                } else {
                    let sign = if theta >= F::zero() {
                        F::one()
                    } else {
                        -F::one()
                    };
                    sign / (theta.abs() + (theta * theta + F::one()).sqrt())
                };
                let c = (t * t + F::one()).sqrt().recip();
                let s = t * c;
                // A <- Jᵀ A J with the rotation in the (p, q) plane.
                for i in 0..n {
                    let aip = a[[p, i]];
                    let aiq = a[[q, i]];
                    a[[p, i]] = c * aip - s * aiq;
                    a[[q, i]] = s * aip + c * aiq;
                }
                for i in 0..n {
                    let aip = a[[i, p]];
                    let aiq = a[[i, q]];
                    a[[i, p]] = c * aip - s * aiq;
                    a[[i, q]] = s * aip + c * aiq;
                }
                for i in 0..n {
                    let vip = v[[i, p]];
                    let viq = v[[i, q]];
                    v[[i, p]] = c * vip - s * viq;
                    v[[i, q]] = s * vip + c * viq;
                }
            }
        }
    }
    if !converged {
        // One more check: Jacobi converges in practice well before the cap.
        let mut off = F::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[[p, q]] * a[[p, q]];
            }
        }
        if off.sqrt() > tol * sc::<F>(1e3) {
            return Err(Error::EigenNoConvergence(
                off.sqrt().to_f64().unwrap_or(f64::NAN),
            ));
        }
    }
    let values: Vec<F> = (0..n).map(|i| a[[i, i]]).collect();
    fix_column_signs(&mut v);
    Ok(SymEigen { values, vectors: v })
}

/// Below this dimension (or when `k` is a sizable fraction of `n`) the dense
/// Jacobi path is used instead of Lanczos.
const DENSE_CUTOFF: usize = 260;

/// Leading `k` eigenpairs by magnitude of a symmetric operator.
pub fn sym_eigen_topk<F: Scalar>(a: &SymStorage<F>, k: usize) -> Result<SymEigen<F>> {
    let n = a.dim();
    assert!(k <= n, "requested {k} eigenpairs of a {n}-dim operator");
    if k == 0 {
        return Ok(SymEigen {
            values: vec![],
            vectors: Array2::zeros((n, 0)),
        });
    }
    if n <= DENSE_CUTOFF || 3 * k >= n {
        let full = sym_eigen_dense(&a.to_dense())?;
        return Ok(full.sorted_by_magnitude().truncated(k));
    }
    lanczos_topk(a, k)
}

fn lanczos_topk<F: Scalar>(a: &SymStorage<F>, k: usize) -> Result<SymEigen<F>> {
    let n = a.dim();
    let cap = n.min(10 * k + 100);
    let mut target = n.min((4 * k + 20).max(60));

    let mut rng = ChaCha8Rng::seed_from_u64(0x51ced_c0de);
    let mut basis: Vec<Vec<F>> = Vec::new();
    let mut alphas: Vec<F> = Vec::new();
    let mut betas: Vec<F> = Vec::new();

    let mut v = random_unit(&mut rng, n);
    let mut w = vec![F::zero(); n];
    let breakdown = F::epsilon().sqrt() * sc::<F>(1e-3);

    loop {
        while basis.len() < target {
            basis.push(v.clone());
            let j = basis.len() - 1;
            a.matvec(&v, &mut w);
            let alpha = dot(&w, &v);
            alphas.push(alpha);
            for (wi, vi) in w.iter_mut().zip(&basis[j]) {
                *wi -= alpha * *vi;
            }
            if j > 0 {
                let b = betas[j - 1];
                for (wi, vi) in w.iter_mut().zip(&basis[j - 1]) {
                    *wi -= b * *vi;
                }
            }
            // Full reorthogonalization, twice.
            for _ in 0..2 {
                for u in &basis {
                    let proj = dot(&w, u);
                    for (wi, ui) in w.iter_mut().zip(u) {
                        *wi -= proj * *ui;
                    }
                }
            }
            let mut beta = norm2(&w);
            if beta < breakdown {
                // Invariant subspace found; continue in a fresh direction.
                let mut fresh = random_unit(&mut rng, n);
                for u in &basis {
                    let proj = dot(&fresh, u);
                    for (fi, ui) in fresh.iter_mut().zip(u) {
                        *fi -= proj * *ui;
                    }
                }
                let nrm = norm2(&fresh);
                if nrm < breakdown {
                    break; // space exhausted
                }
                for f in fresh.iter_mut() {
                    *f = *f / nrm;
                }
                beta = F::zero();
                v = fresh;
            } else {
                v = w.iter().map(|&x| x / beta).collect();
            }
            betas.push(beta);
        }

        let m = basis.len();
        let tri = tridiagonal(&alphas, &betas[..m.saturating_sub(1)]);
        let eig = sym_eigen_dense(&tri)?.sorted_by_magnitude();
        let scale = eig
            .values
            .first()
            .map(|v| v.abs())
            .unwrap_or(F::one())
            .max(F::epsilon());
        let tol = scale * F::epsilon().sqrt() * sc::<F>(1e-2);
        let last_beta = if m == basis.len() && m >= 1 && betas.len() >= m {
            betas[m - 1]
        } else {
            F::zero()
        };

        let kk = k.min(m);
        let mut worst = F::zero();
        for i in 0..kk {
            let r = (last_beta * eig.vectors[[m - 1, i]]).abs();
            worst = worst.max(r);
        }
        let exhausted = m >= cap || m == n;
        if worst <= tol || exhausted {
            if worst > tol && worst > scale * sc::<F>(1e-6) {
                return Err(Error::EigenNoConvergence(worst.to_f64().unwrap_or(f64::NAN)));
            }
            if worst > tol {
                log::warn!(
                    "lanczos stopped at subspace dim {m} with residual {:e}",
                    worst.to_f64().unwrap_or(f64::NAN)
                );
            }
            // Assemble Ritz vectors for the leading kk pairs.
            let mut vectors = Array2::zeros((n, kk));
            for j in 0..kk {
                for (mi, u) in basis.iter().enumerate() {
                    let smj = eig.vectors[[mi, j]];
                    for i in 0..n {
                        vectors[[i, j]] = vectors[[i, j]] + smj * u[i];
                    }
                }
            }
            fix_column_signs(&mut vectors);
            let values = eig.values[..kk].to_vec();
            return Ok(SymEigen { values, vectors });
        }
        target = cap.min(target + 2 * k + 20);
    }
}

fn tridiagonal<F: Scalar>(alphas: &[F], betas: &[F]) -> Array2<F> {
    let m = alphas.len();
    let mut t = Array2::zeros((m, m));
    for i in 0..m {
        t[[i, i]] = alphas[i];
        if i + 1 < m {
            t[[i, i + 1]] = betas[i];
            t[[i + 1, i]] = betas[i];
        }
    }
    t
}

fn random_unit<F: Scalar>(rng: &mut ChaCha8Rng, n: usize) -> Vec<F> {
    let mut v: Vec<F> = (0..n)
        .map(|_| sc::<F>(rng.random::<f64>() * 2.0 - 1.0))
        .collect();
    let nrm = norm2(&v);
    for x in v.iter_mut() {
        *x = *x / nrm;
    }
    v
}

/// Median of a list of values; the list is consumed. Even lengths average the
/// two middle elements.
pub fn median<F: Scalar>(mut values: Vec<F>) -> Option<F> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = values.len();
    if n % 2 == 1 {
        Some(values[n / 2])
    } else {
        Some((values[n / 2 - 1] + values[n / 2]) / sc::<F>(2.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn jacobi_2x2_closed_form() {
        let a = array![[0.0, 1.0], [1.0, 0.0]];
        let eig = sym_eigen_dense(&a).unwrap().sorted_by_magnitude();
        // |λ| ties broken by algebraic value: +1 first.
        assert_abs_diff_eq!(eig.values[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig.values[1], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn jacobi_reconstructs_random_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 12;
        let mut a = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let v = rng.random::<f64>() - 0.5;
                a[[i, j]] = v;
                a[[j, i]] = v;
            }
        }
        let eig = sym_eigen_dense(&a).unwrap();
        // A v_j = λ_j v_j
        for j in 0..n {
            let mut av = vec![0.0; n];
            let col: Vec<f64> = (0..n).map(|i| eig.vectors[[i, j]]).collect();
            SymStorage::Dense(a.clone()).matvec(&col, &mut av);
            for i in 0..n {
                assert_abs_diff_eq!(av[i], eig.values[j] * col[i], epsilon = 1e-9);
            }
        }
        // Orthonormal columns.
        for j in 0..n {
            for l in j..n {
                let d: f64 = (0..n).map(|i| eig.vectors[[i, j]] * eig.vectors[[i, l]]).sum();
                let expect = if j == l { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(d, expect, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn lanczos_matches_dense_on_sparse_kernel() {
        // Ring graph kernel, large enough to take the Lanczos path.
        let n = 400;
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let prev = (i + n - 1) % n;
            let next = (i + 1) % n;
            let mut entries = vec![(prev, 0.5), (i, 1.0), (next, 0.5)];
            entries.sort_by_key(|e| e.0);
            rows.push(entries);
        }
        let s = SymStorage::Sparse(CsrMatrix::from_rows(rows));
        let top = sym_eigen_topk(&s, 5).unwrap();
        let dense = sym_eigen_dense(&s.to_dense())
            .unwrap()
            .sorted_by_magnitude();
        for j in 0..5 {
            assert_abs_diff_eq!(top.values[j], dense.values[j], epsilon = 1e-8);
        }
        // Ritz residuals.
        for j in 0..5 {
            let col: Vec<f64> = (0..n).map(|i| top.vectors[[i, j]]).collect();
            let mut av = vec![0.0; n];
            s.matvec(&col, &mut av);
            let res: f64 = av
                .iter()
                .zip(&col)
                .map(|(a, c)| (a - top.values[j] * c).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(res < 1e-8, "residual {res} too large for pair {j}");
        }
    }

    #[test]
    fn lanczos_handles_identity_breakdown() {
        let n = 300;
        let rows: Vec<Vec<(usize, f64)>> = (0..n).map(|i| vec![(i, 1.0)]).collect();
        let s = SymStorage::Sparse(CsrMatrix::from_rows(rows));
        let top = sym_eigen_topk(&s, 4).unwrap();
        for v in &top.values {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn sign_convention_is_applied() {
        let a = array![[2.0, 0.0], [0.0, -3.0]];
        let eig = sym_eigen_dense(&a).unwrap().sorted_by_magnitude();
        // Largest-magnitude entry of each column is positive.
        for j in 0..2 {
            let col: Vec<f64> = (0..2).map(|i| eig.vectors[[i, j]]).collect();
            let mx = col.iter().cloned().fold(0.0f64, |m, x| m.max(x.abs()));
            assert!(col.iter().any(|&x| (x.abs() - mx).abs() < 1e-12 && x > 0.0));
        }
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median::<f64>(vec![]), None);
    }
}
