//! Small dense symmetric-matrix kernels: Cholesky, Jacobi eigendecomposition
//! and the spectral pseudo-inverse. Blocks here are D×D with D in the tens to
//! low hundreds, so plain row-major storage is enough.

use crate::scalar::{lit, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> SymMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    /// Builds a matrix from row-major storage. Symmetry is not checked.
    pub fn from_row_major(n: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), n * n, "row-major data must be n*n");
        SymMatrix { n, data }
    }

    /// Inverse of [`SymMatrix::lower_triangle`].
    pub fn from_lower(n: usize, lower: &[T]) -> Self {
        assert_eq!(lower.len(), n * (n + 1) / 2);
        let mut m = Self::zeros(n);
        let mut k = 0;
        for i in 0..n {
            for j in 0..=i {
                m.data[i * n + j] = lower[k];
                m.data[j * n + i] = lower[k];
                k += 1;
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Row-major lower triangle, `(0,0), (1,0), (1,1), (2,0), ...`.
    pub fn lower_triangle(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.n * (self.n + 1) / 2);
        for i in 0..self.n {
            out.extend_from_slice(&self.data[i * self.n..i * self.n + i + 1]);
        }
        out
    }

    /// `self += weight * v vᵀ`
    pub fn add_outer(&mut self, weight: T, v: &[T]) {
        debug_assert_eq!(v.len(), self.n);
        for i in 0..self.n {
            let wi = weight * v[i];
            let row = &mut self.data[i * self.n..(i + 1) * self.n];
            for (r, &vj) in row.iter_mut().zip(v) {
                *r = *r + wi * vj;
            }
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        SymMatrix { n: self.n, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn trace(&self) -> T {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn max_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Replaces both triangles by their average.
    pub fn symmetrize(&mut self) {
        let half = lit::<T>(0.5);
        for i in 0..self.n {
            for j in 0..i {
                let v = (self.get(i, j) + self.get(j, i)) * half;
                self.set(i, j, v);
                self.set(j, i, v);
            }
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n).map(|i| crate::scalar::dot(self.row(i), x)).collect()
    }

    /// `xᵀ A x`
    pub fn quad_form(&self, x: &[T]) -> T {
        crate::scalar::dot(x, &self.mul_vec(x))
    }

    /// General product; the result is only symmetric when the factors commute.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] = out.data[i * n + j] + a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        crate::scalar::all_finite(&self.data)
    }

    /// Lower Cholesky factor, or `None` if a pivot is not positive beyond
    /// rounding level.
    pub fn cholesky(&self) -> Option<Cholesky<T>> {
        let n = self.n;
        let mut l = vec![T::zero(); n * n];
        let max_diag = (0..n).fold(T::zero(), |m, i| m.max(self.get(i, i).abs()));
        // pivots at rounding level mean the matrix is numerically singular
        let floor = T::epsilon() * lit::<T>(n as f64) * max_diag;
        for j in 0..n {
            let mut d = self.get(j, j);
            for k in 0..j {
                d = d - l[j * n + k] * l[j * n + k];
            }
            if !(d > floor) || !d.is_finite() {
                return None;
            }
            let djj = d.sqrt();
            l[j * n + j] = djj;
            for i in j + 1..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s = s - l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / djj;
            }
        }
        Some(Cholesky { n, l })
    }

    /// Symmetric eigendecomposition: Householder reduction to tridiagonal
    /// form followed by the implicit QL algorithm.
    pub fn sym_eigen(&self) -> SymEigen<T> {
        let n = self.n;
        let mut v = self.data.clone();
        let (mut d, mut e) = (vec![T::zero(); n], vec![T::zero(); n]);
        tridiagonalize(n, &mut v, &mut d, &mut e, true);
        tridiagonal_ql(n, &mut d, &mut e, Some(&mut v));

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).unwrap_or(std::cmp::Ordering::Equal));
        let values = order.iter().map(|&i| d[i]).collect();
        let mut vectors = vec![T::zero(); n * n];
        for (col, &src) in order.iter().enumerate() {
            for k in 0..n {
                vectors[k * n + col] = v[k * n + src];
            }
        }
        SymEigen { n, values, vectors }
    }

    /// Eigenvalues only, in descending order. Skips the eigenvector
    /// accumulation, which dominates the cost of [`SymMatrix::sym_eigen`].
    pub fn sym_eigenvalues(&self) -> Vec<T> {
        let n = self.n;
        let mut v = self.data.clone();
        let (mut d, mut e) = (vec![T::zero(); n], vec![T::zero(); n]);
        tridiagonalize(n, &mut v, &mut d, &mut e, false);
        tridiagonal_ql(n, &mut d, &mut e, None);
        d.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        d
    }
}

/// Householder tridiagonalization of the row-major symmetric matrix in `v`
/// (EISPACK `tred2`). On return `d` holds the diagonal and `e[1..]` the
/// subdiagonal; with `accumulate`, `v` holds the orthogonal transform.
fn tridiagonalize<T: Real>(n: usize, v: &mut [T], d: &mut [T], e: &mut [T], accumulate: bool) {
    if n == 0 {
        return;
    }
    let at = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for &dk in &d[..i] {
            scale = scale + dk.abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = T::zero();
                v[at(j, i)] = T::zero();
            }
        } else {
            for dk in &mut d[..i] {
                *dk = *dk / scale;
                h = h + *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h = h - f * g;
            d[i - 1] = f - g;
            for ej in &mut e[..i] {
                *ej = T::zero();
            }
            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in j + 1..i {
                    g = g + v[at(k, j)] * d[k];
                    e[k] = e[k] + v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] = e[j] / h;
                f = f + e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] = e[j] - hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] = v[at(k, j)] - (f * e[k] + g * d[k]);
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = T::zero();
            }
        }
        d[i] = h;
    }

    if !accumulate {
        for j in 0..n {
            d[j] = v[at(j, j)];
        }
        e[0] = T::zero();
        return;
    }
    for i in 0..n - 1 {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g = g + v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] = v[at(k, j)] - g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = T::zero();
    }
    v[at(n - 1, n - 1)] = T::one();
    e[0] = T::zero();
}

/// Implicit QL iteration on a symmetric tridiagonal matrix (EISPACK
/// `tql2`). Eigenvalues are left in `d`; rotations are applied to the
/// columns of `v` when given.
fn tridiagonal_ql<T: Real>(n: usize, d: &mut [T], e: &mut [T], mut v: Option<&mut [T]>) {
    if n == 0 {
        return;
    }
    if !d.iter().chain(e.iter()).all(|x| x.is_finite()) {
        d.iter_mut().for_each(|x| *x = T::nan());
        return;
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();

    let eps = T::epsilon();
    let two = lit::<T>(2.0);
    let mut f = T::zero();
    let mut tst1 = T::zero();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            for _iter in 0..MAX_QL_ITERATIONS {
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in &mut d[l + 2..n] {
                    *di = *di - h;
                }
                f = f + h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(v) = v.as_deref_mut() {
                        for k in 0..n {
                            let h = v[k * n + i + 1];
                            v[k * n + i + 1] = s * v[k * n + i] + c * h;
                            v[k * n + i] = c * v[k * n + i] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] = d[l] + f;
        e[l] = T::zero();
    }
}

const MAX_QL_ITERATIONS: usize = 60;

/// 2-norm condition number of a symmetric matrix from its eigenvalues.
pub fn condition_number<T: Real>(eigenvalues: &[T]) -> T {
    if eigenvalues.iter().any(|x| x.is_nan()) {
        return T::nan();
    }
    let abs = eigenvalues.iter().map(|x| x.abs());
    let max = abs.clone().fold(T::zero(), T::max);
    let min = abs.fold(T::infinity(), T::min);
    match eigenvalues.len() {
        0 => T::one(),
        _ if min > T::zero() => max / min,
        _ => T::infinity(),
    }
}

#[derive(Clone, Debug)]
pub struct Cholesky<T> {
    n: usize,
    l: Vec<T>,
}

impl<T: Real> Cholesky<T> {
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s = s - self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s = s - self.l[k * n + i] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        y
    }

    pub fn inverse(&self) -> SymMatrix<T> {
        let n = self.n;
        let mut inv = SymMatrix::zeros(n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = T::zero());
            e[j] = T::one();
            let col = self.solve(&e);
            for i in 0..n {
                inv.set(i, j, col[i]);
            }
        }
        inv.symmetrize();
        inv
    }
}

/// Eigenvalues in descending order with matching unit eigenvectors stored
/// as the columns of a row-major matrix.
#[derive(Clone, Debug)]
pub struct SymEigen<T> {
    n: usize,
    pub values: Vec<T>,
    vectors: Vec<T>,
}

impl<T: Real> SymEigen<T> {
    #[inline]
    pub fn vector_component(&self, row: usize, col: usize) -> T {
        self.vectors[row * self.n + col]
    }

    pub fn eigenvector(&self, col: usize) -> Vec<T> {
        (0..self.n).map(|r| self.vector_component(r, col)).collect()
    }

    /// Singular values of the (symmetric) source matrix, largest first.
    pub fn singular_values(&self) -> Vec<T> {
        let mut s: Vec<T> = self.values.iter().map(|x| x.abs()).collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        s
    }

    /// 2-norm condition number; infinite when the matrix is singular.
    pub fn condition_number(&self) -> T {
        condition_number(&self.values)
    }

    /// `Σ_k g(λ_k) u_k u_kᵀ` over the kept eigenpairs.
    fn spectral_map(&self, mut g: impl FnMut(T) -> Option<T>) -> SymMatrix<T> {
        let mut out = SymMatrix::zeros(self.n);
        for (k, &lambda) in self.values.iter().enumerate() {
            if let Some(w) = g(lambda) {
                out.add_outer(w, &self.eigenvector(k));
            }
        }
        out.symmetrize();
        out
    }

    /// Moore-Penrose pseudo-inverse keeping singular values above
    /// `rel_cutoff * max singular value`. Returns the inverse and the
    /// number of zeroed singular values.
    pub fn pseudo_inverse(&self, rel_cutoff: T) -> (SymMatrix<T>, usize) {
        let smax = self.singular_values().first().copied().unwrap_or(T::zero());
        let threshold = rel_cutoff * smax;
        let mut dropped = 0;
        let inv = self.spectral_map(|lambda| {
            if lambda.abs() > threshold && lambda != T::zero() {
                Some(T::one() / lambda)
            } else {
                dropped += 1;
                None
            }
        });
        (inv, dropped)
    }

    /// Square-root factor `L = U diag(sqrt(max(λ, 0)))`, so that `L Lᵀ` is
    /// the PSD projection of the source matrix. Row-major `n × n`.
    pub fn sqrt_factor(&self) -> Vec<T> {
        let n = self.n;
        let mut l = vec![T::zero(); n * n];
        for (k, &lambda) in self.values.iter().enumerate() {
            let s = lambda.max(T::zero()).sqrt();
            for r in 0..n {
                l[r * n + k] = self.vector_component(r, k) * s;
            }
        }
        l
    }

    pub fn reconstruct(&self) -> SymMatrix<T> {
        self.spectral_map(Some)
    }
}
