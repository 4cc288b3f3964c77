//! Small dense eigen-solvers used by the rest of the crate.
//!
//! Two routines are provided: a cyclic Jacobi sweep for complex Hermitian
//! matrices (Hamiltonians are at most a few dozen levels wide) and an
//! implicit-shift QL iteration for real symmetric tridiagonal matrices
//! (the Liouvillian in the Krylov basis, which can run to thousands of
//! rows). Both return eigenvalues in ascending order with ties broken by
//! original index.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{czero, Real, C};

/// Column-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Copy> DenseMatrix<S> {
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn filled(rows: usize, cols: usize, value: S) -> Self {
        Self { rows, cols, data: vec![value; rows * cols] }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> S {
        self.data[i + j * self.rows]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i + j * self.rows] = v;
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn column(&self, j: usize) -> &[S] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }
}

impl<T: Real> DenseMatrix<C<T>> {
    pub fn matvec(&self, x: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![czero(); self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == czero() {
                continue;
            }
            for (yi, &a) in y.iter_mut().zip(self.column(j)) {
                *yi = *yi + a * xj;
            }
        }
        y
    }
}

/// Eigen-decomposition `A = V diag(values) V†` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T> {
    pub values: Vec<T>,
    /// Eigenvectors as columns.
    pub vectors: DenseMatrix<C<T>>,
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix given column-major.
pub fn hermitian_eigen<T: Real>(dim: usize, entries: &[C<T>]) -> Result<HermitianEigen<T>> {
    if entries.len() != dim * dim {
        return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
    }
    let mut a = DenseMatrix::from_col_major(dim, dim, entries.to_vec())?;
    let mut v = DenseMatrix::filled(dim, dim, czero::<T>());
    for i in 0..dim {
        v.set(i, i, Complex::new(T::one(), T::zero()));
    }
    let eps = T::epsilon();
    let scale = entries.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    const MAX_SWEEPS: usize = 100;
    let mut converged = dim < 2 || scale == T::zero();
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let off: T = (0..dim)
            .flat_map(|j| (0..dim).filter(move |&i| i != j).map(move |i| (i, j)))
            .map(|(i, j)| a.get(i, j).norm_sqr())
            .sum::<T>()
            .sqrt();
        if off <= eps * scale {
            converged = true;
            break;
        }
        for p in 0..dim - 1 {
            for q in p + 1..dim {
                let apq = a.get(p, q);
                let mag = apq.norm();
                if mag <= eps * eps * scale {
                    continue;
                }
                let phase = apq / mag;
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let theta = (aqq - app) / (T::lit(2.0) * mag);
                let t = {
                    let r = T::one() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    if theta < T::zero() { -r } else { r }
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                // U restricted to (p, q) = diag(1, conj(phase)) * [[c, s], [-s, c]]
                let upp = Complex::new(c, T::zero());
                let upq = Complex::new(s, T::zero());
                let uqp = phase.conj() * (-s);
                let uqq = phase.conj() * c;
                for k in 0..dim {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, akp * upp + akq * uqp);
                    a.set(k, q, akp * upq + akq * uqq);
                }
                for k in 0..dim {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, upp.conj() * apk + uqp.conj() * aqk);
                    a.set(q, k, upq.conj() * apk + uqq.conj() * aqk);
                }
                a.set(p, q, czero());
                a.set(q, p, czero());
                for k in 0..dim {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, vkp * upp + vkq * uqp);
                    v.set(k, q, vkp * upq + vkq * uqq);
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }
    let raw: Vec<T> = (0..dim).map(|i| a.get(i, i).re).collect();
    let order = ascending_order(&raw);
    let values = order.iter().map(|&i| raw[i]).collect();
    let mut data = Vec::with_capacity(dim * dim);
    for &i in &order {
        data.extend_from_slice(v.column(i));
    }
    Ok(HermitianEigen { values, vectors: DenseMatrix::from_col_major(dim, dim, data)? })
}

fn ascending_order<T: Real>(values: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    // stable sort: equal values keep their index order
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap_or(std::cmp::Ordering::Equal));
    order
}

/// Eigen-decomposition of a real symmetric tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct TridiagonalEigen<T> {
    pub values: Vec<T>,
    /// `vectors[k]` is the normalized eigenvector belonging to `values[k]`.
    pub vectors: Vec<Vec<T>>,
}

impl<T: Real> TridiagonalEigen<T> {
    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Implicit-shift QL iteration with eigenvector accumulation.
///
/// `diag` has length n, `offdiag` length n - 1 (`offdiag[i]` couples rows
/// `i` and `i + 1`).
pub fn tridiagonal_eigen<T: Real>(diag: &[T], offdiag: &[T]) -> Result<TridiagonalEigen<T>> {
    let n = diag.len();
    if n == 0 {
        return Ok(TridiagonalEigen { values: vec![], vectors: vec![] });
    }
    if offdiag.len() + 1 != n {
        return Err(Error::DimensionMismatch { expected: n - 1, found: offdiag.len() });
    }
    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(T::zero());
    // z[k] holds eigenvector k, stored contiguously so the Givens updates
    // touch two rows at a time.
    let mut z: Vec<Vec<T>> = (0..n)
        .map(|k| {
            let mut row = vec![T::zero(); n];
            row[k] = T::one();
            row
        })
        .collect();
    let two = T::lit(2.0);
    const MAX_ITER: usize = 60;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
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
            if iter > MAX_ITER {
                return Err(Error::NoConvergence(MAX_ITER));
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] = d[i + 1] - p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let (lo, hi) = z.split_at_mut(i + 1);
                let zi = &mut lo[i];
                let zi1 = &mut hi[0];
                for (a, bb) in zi.iter_mut().zip(zi1.iter_mut()) {
                    let f = *bb;
                    *bb = s * *a + c * f;
                    *a = c * *a - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] = d[l] - p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    let order = ascending_order(&d);
    let values = order.iter().map(|&k| d[k]).collect();
    let mut slots: Vec<Option<Vec<T>>> = z.into_iter().map(Some).collect();
    let vectors = order.iter().map(|&k| slots[k].take().expect("each index once")).collect();
    Ok(TridiagonalEigen { values, vectors })
}
