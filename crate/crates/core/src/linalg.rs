//! Dense symmetric eigen-decomposition.
//!
//! The matrix is reduced to tridiagonal form with Householder reflections,
//! eigenvalues of the tridiagonal matrix come from implicit QL iterations with
//! Wilkinson shifts, and eigenvectors are recovered only for the requested
//! eigenvalues by inverse iteration followed by back-transformation. The
//! tridiagonal matrix is split at negligible off-diagonal entries so that
//! repeated eigenvalues (disconnected graphs) get orthogonal eigenvectors.

use thiserror::Error;

use crate::scalar::{cmp_real, Real};

#[derive(Debug, Error, PartialEq)]
pub enum EigenError {
    #[error("QL iteration did not converge")]
    NoConvergence,
    #[error("requested {requested} eigenpairs from a {size}x{size} matrix")]
    TooManyPairs { requested: usize, size: usize },
    #[error("matrix data has length {len}, expected {expected}")]
    Shape { len: usize, expected: usize },
}

/// Dense symmetric matrix, row-major, full storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> SymmetricMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn from_row_major(n: usize, data: Vec<T>) -> Result<Self, EigenError> {
        if data.len() != n * n {
            return Err(EigenError::Shape { len: data.len(), expected: n * n });
        }
        Ok(Self { n, data })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let v = f(i, j);
                m.set(i, j, v);
            }
        }
        m
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(x)
                    .fold(T::zero(), |acc, (a, b)| acc + *a * *b)
            })
            .collect()
    }
}

/// Eigenpairs sorted by ascending eigenvalue.
#[derive(Debug, Clone)]
pub struct EigenPairs<T> {
    pub values: Vec<T>,
    /// `vectors[i]` is the unit eigenvector belonging to `values[i]`.
    pub vectors: Vec<Vec<T>>,
}

/// All eigenpairs of `m`.
pub fn symmetric_eigen<T: Real>(m: &SymmetricMatrix<T>) -> Result<EigenPairs<T>, EigenError> {
    smallest_eigenpairs(m, m.size())
}

/// The `k` eigenpairs with smallest eigenvalues.
pub fn smallest_eigenpairs<T: Real>(
    m: &SymmetricMatrix<T>,
    k: usize,
) -> Result<EigenPairs<T>, EigenError> {
    let n = m.size();
    if k > n {
        return Err(EigenError::TooManyPairs { requested: k, size: n });
    }
    if k == 0 || n == 0 {
        return Ok(EigenPairs { values: Vec::new(), vectors: Vec::new() });
    }
    let tri = Tridiagonal::reduce(m);
    let blocks = tri.unreduced_blocks();

    let mut candidates: Vec<(T, usize, usize)> = Vec::with_capacity(n);
    let mut block_values = Vec::with_capacity(blocks.len());
    for (b, &(lo, hi)) in blocks.iter().enumerate() {
        let mut d = tri.diag[lo..hi].to_vec();
        let mut e = vec![T::zero(); hi - lo];
        e[..hi - lo - 1].copy_from_slice(&tri.off[lo..hi - 1]);
        ql_eigenvalues(&mut d, &mut e)?;
        d.sort_by(cmp_real);
        for (local, v) in d.iter().enumerate() {
            candidates.push((*v, b, local));
        }
        block_values.push(d);
    }
    candidates.sort_by(|a, b| cmp_real(&a.0, &b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    candidates.truncate(k);

    let mut values = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    // Vectors already computed per block, for reorthogonalisation of clusters.
    let mut computed: Vec<Vec<(T, Vec<T>)>> = vec![Vec::new(); blocks.len()];
    for &(lambda, b, _) in &candidates {
        let (lo, hi) = blocks[b];
        let norm = block_norm(&tri.diag[lo..hi], &tri.off[lo..hi.saturating_sub(1).max(lo)]);
        let cluster_gap = T::lit(1e-3) * norm.max(T::epsilon());
        let neighbours: Vec<&Vec<T>> = computed[b]
            .iter()
            .filter(|(mu, _)| (*mu - lambda).abs() <= cluster_gap)
            .map(|(_, v)| v)
            .collect();
        let local = inverse_iteration(
            &tri.diag[lo..hi],
            &tri.off[lo..hi - 1],
            lambda,
            norm,
            &neighbours,
            computed[b].len() as u64 + 1,
        );
        let mut full = vec![T::zero(); n];
        full[lo..hi].copy_from_slice(&local);
        tri.back_transform(&mut full);
        normalize(&mut full);
        computed[b].push((lambda, local));
        values.push(lambda);
        vectors.push(full);
    }
    Ok(EigenPairs { values, vectors })
}

struct Tridiagonal<T> {
    n: usize,
    diag: Vec<T>,
    /// `off[i]` couples rows `i` and `i + 1`.
    off: Vec<T>,
    /// Householder vectors, `reflectors[k]` acts on indices `k + 1..n`.
    reflectors: Vec<(T, Vec<T>)>,
}

impl<T: Real> Tridiagonal<T> {
    /// Householder reduction working on the lower triangle only.
    fn reduce(m: &SymmetricMatrix<T>) -> Self {
        let n = m.size();
        let mut a = m.data.clone();
        let mut off = vec![T::zero(); n.saturating_sub(1)];
        let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
        let mut p = vec![T::zero(); n];
        let mut w = vec![T::zero(); n];
        for k in 0..n.saturating_sub(2) {
            let s = k + 1;
            let len = n - s;
            let mut v: Vec<T> = (s..n).map(|i| a[i * n + k]).collect();
            let tail: T = v[1..].iter().map(|x| *x * *x).sum();
            if tail == T::zero() {
                off[k] = v[0];
                reflectors.push((T::zero(), Vec::new()));
                continue;
            }
            let sigma = (v[0] * v[0] + tail).sqrt();
            let alpha = if v[0] > T::zero() { -sigma } else { sigma };
            v[0] -= alpha;
            let vtv: T = v.iter().map(|x| *x * *x).sum();
            let beta = T::lit(2.0) / vtv;
            off[k] = alpha;

            // p = beta * A22 v using the lower triangle.
            let p = &mut p[..len];
            p.iter_mut().for_each(|x| *x = T::zero());
            for li in 0..len {
                let row = &a[(s + li) * n + s..(s + li) * n + s + li];
                let vi = v[li];
                let mut acc = a[(s + li) * n + s + li] * vi;
                for (pj, (aij, vj)) in p[..li].iter_mut().zip(row.iter().zip(&v[..li])) {
                    acc += *aij * *vj;
                    *pj += *aij * vi;
                }
                p[li] += acc;
            }
            p.iter_mut().for_each(|x| *x *= beta);
            let kk = beta * T::lit(0.5) * p.iter().zip(&v).map(|(a, b)| *a * *b).sum::<T>();
            let w = &mut w[..len];
            for ((wi, pi), vi) in w.iter_mut().zip(p.iter()).zip(&v) {
                *wi = *pi - kk * *vi;
            }
            for li in 0..len {
                let (vi, wi) = (v[li], w[li]);
                let row = &mut a[(s + li) * n + s..(s + li) * n + s + li + 1];
                for (aij, (vj, wj)) in row.iter_mut().zip(v.iter().zip(w.iter())) {
                    *aij -= vi * *wj + wi * *vj;
                }
            }
            reflectors.push((beta, v));
        }
        if n >= 2 {
            off[n - 2] = a[(n - 1) * n + (n - 2)];
        }
        let diag = (0..n).map(|i| a[i * n + i]).collect();
        Self { n, diag, off, reflectors }
    }

    fn unreduced_blocks(&self) -> Vec<(usize, usize)> {
        let mut blocks = Vec::new();
        let mut lo = 0;
        for i in 0..self.n.saturating_sub(1) {
            let scale = self.diag[i].abs() + self.diag[i + 1].abs();
            if self.off[i].abs() <= T::epsilon() * scale || self.off[i] == T::zero() {
                blocks.push((lo, i + 1));
                lo = i + 1;
            }
        }
        blocks.push((lo, self.n));
        blocks
    }

    fn back_transform(&self, x: &mut [T]) {
        for (k, (beta, v)) in self.reflectors.iter().enumerate().rev() {
            if *beta == T::zero() {
                continue;
            }
            let seg = &mut x[k + 1..];
            let s = *beta * seg.iter().zip(v).map(|(a, b)| *a * *b).sum::<T>();
            for (xi, vi) in seg.iter_mut().zip(v) {
                *xi -= s * *vi;
            }
        }
    }
}

fn block_norm<T: Real>(d: &[T], e: &[T]) -> T {
    let mut norm = T::zero();
    for i in 0..d.len() {
        let mut row = d[i].abs();
        if i > 0 && i - 1 < e.len() {
            row += e[i - 1].abs();
        }
        if i < e.len() {
            row += e[i].abs();
        }
        norm = norm.max(row);
    }
    norm
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix.
/// On return `d` holds the (unsorted) eigenvalues; `e` is destroyed.
/// `e[i]` couples `i` and `i + 1`, `e[n - 1]` is ignored.
fn ql_eigenvalues<T: Real>(d: &mut [T], e: &mut [T]) -> Result<(), EigenError> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    e[n - 1] = T::zero();
    let two = T::lit(2.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(EigenError::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            let signed_r = if g >= T::zero() { r.abs() } else { -r.abs() };
            g = d[m] - d[l] + e[l] / (g + signed_r);
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}

/// Eigenvector of an unreduced tridiagonal block by inverse iteration.
fn inverse_iteration<T: Real>(
    d: &[T],
    e: &[T],
    lambda: T,
    norm: T,
    orthogonal_to: &[&Vec<T>],
    salt: u64,
) -> Vec<T> {
    let n = d.len();
    if n == 1 {
        return vec![T::one()];
    }
    let tiny = T::epsilon() * norm.max(T::min_positive_value().sqrt());
    let lu = TridiagonalLu::factor(d, e, lambda, tiny);

    // Deterministic, well-spread start vector.
    let mut state = 0x9E37_79B9_7F4A_7C15u64 ^ salt.wrapping_mul(0xD1B5_4A32_D192_ED03);
    let mut x: Vec<T> = (0..n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            T::lit((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
        })
        .collect();
    orthogonalize(&mut x, orthogonal_to);
    normalize(&mut x);
    for _ in 0..4 {
        lu.solve(&mut x);
        orthogonalize(&mut x, orthogonal_to);
        if !normalize(&mut x) {
            x = vec![T::zero(); n];
            x[0] = T::one();
        }
    }
    x
}

fn orthogonalize<T: Real>(x: &mut [T], basis: &[&Vec<T>]) {
    for _ in 0..2 {
        for b in basis {
            let s: T = x.iter().zip(b.iter()).map(|(a, c)| *a * *c).sum();
            for (xi, bi) in x.iter_mut().zip(b.iter()) {
                *xi -= s * *bi;
            }
        }
    }
}

fn normalize<T: Real>(x: &mut [T]) -> bool {
    let n: T = x.iter().map(|v| *v * *v).sum::<T>().sqrt();
    if n == T::zero() || !n.is_finite() {
        return false;
    }
    x.iter_mut().for_each(|v| *v /= n);
    true
}

/// LU factorisation with partial pivoting of `T - lambda I` for tridiagonal `T`.
struct TridiagonalLu<T> {
    dl: Vec<T>,
    dd: Vec<T>,
    du: Vec<T>,
    du2: Vec<T>,
    swapped: Vec<bool>,
}

impl<T: Real> TridiagonalLu<T> {
    fn factor(d: &[T], e: &[T], lambda: T, tiny: T) -> Self {
        let n = d.len();
        let mut dl = e.to_vec();
        let mut dd: Vec<T> = d.iter().map(|v| *v - lambda).collect();
        let mut du = e.to_vec();
        let mut du2 = vec![T::zero(); n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n - 1 {
            if dd[i].abs() >= dl[i].abs() {
                if dd[i].abs() < tiny {
                    dd[i] = tiny;
                }
                let fact = dl[i] / dd[i];
                dl[i] = fact;
                dd[i + 1] -= fact * du[i];
            } else {
                let fact = dd[i] / dl[i];
                dd[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = dd[i + 1];
                dd[i + 1] = temp - fact * dd[i + 1];
                if i + 1 < n - 1 {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if dd[n - 1].abs() < tiny {
            dd[n - 1] = tiny;
        }
        Self { dl, dd, du, du2, swapped }
    }

    fn solve(&self, b: &mut [T]) {
        let n = self.dd.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.dd[n - 1];
        if n >= 2 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.dd[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.dd[i];
        }
        let scale = b.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if scale > T::zero() && scale.is_finite() {
            b.iter_mut().for_each(|v| *v /= scale);
        }
    }
}

/// Solves a 3x3 linear system by Cramer's rule; `None` for (near) singular systems.
pub fn solve3<T: Real>(m: [[T; 3]; 3], rhs: [T; 3]) -> Option<[T; 3]> {
    let det = det3(&m);
    let scale = m.iter().flatten().fold(T::zero(), |a, v| a.max(v.abs()));
    if det.abs() <= T::epsilon() * T::lit(64.0) * scale * scale * scale {
        return None;
    }
    let mut out = [T::zero(); 3];
    for (c, o) in out.iter_mut().enumerate() {
        let mut mc = m;
        for r in 0..3 {
            mc[r][c] = rhs[r];
        }
        *o = det3(&mc) / det;
    }
    Some(out)
}

pub fn det3<T: Real>(m: &[[T; 3]; 3]) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// 2-norm condition number of a 3x3 matrix.
pub fn condition_number3<T: Real>(m: [[T; 3]; 3]) -> T {
    let gram = SymmetricMatrix::from_fn(3, |i, j| (0..3).map(|r| m[r][i] * m[r][j]).sum::<T>());
    match symmetric_eigen(&gram) {
        Ok(pairs) => {
            let lo = pairs.values[0].max(T::zero());
            let hi = pairs.values[2].max(T::zero());
            if lo <= T::zero() {
                T::infinity()
            } else {
                (hi / lo).sqrt()
            }
        }
        Err(_) => T::infinity(),
    }
}
