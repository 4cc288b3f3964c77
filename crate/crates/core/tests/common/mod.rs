//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the library's numerics.
#![allow(dead_code)]

use krylov_core::{HermitianMatrix, OperatorVector, C};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub type C64 = C<f64>;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Column-major product of two square matrices.
pub fn matmul(n: usize, a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for j in 0..n {
        for k in 0..n {
            let bkj = b[k + j * n];
            if bkj == C64::new(0.0, 0.0) {
                continue;
            }
            for i in 0..n {
                out[i + j * n] += a[i + k * n] * bkj;
            }
        }
    }
    out
}

pub fn matvec(n: usize, a: &[C64], x: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            out[i] += a[i + j * n] * x[j];
        }
    }
    out
}

/// `exp(A)` by scaling and squaring with a degree-20 Taylor polynomial.
pub fn expm(n: usize, a: &[C64]) -> Vec<C64> {
    let norm1 = (0..n)
        .map(|j| (0..n).map(|i| a[i + j * n].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm1 > 0.5 { (norm1 / 0.5).log2().ceil() as u32 } else { 0 };
    let s = 0.5f64.powi(squarings as i32);
    let scaled: Vec<C64> = a.iter().map(|z| z * s).collect();
    let mut result = vec![C64::new(0.0, 0.0); n * n];
    let mut term = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        result[i + i * n] = C64::new(1.0, 0.0);
        term[i + i * n] = C64::new(1.0, 0.0);
    }
    for k in 1..=20 {
        term = matmul(n, &term, &scaled);
        term.iter_mut().for_each(|z| *z /= k as f64);
        result.iter_mut().zip(&term).for_each(|(r, t)| *r += t);
    }
    for _ in 0..squarings {
        result = matmul(n, &result, &result);
    }
    result
}

/// Random Hermitian matrix with entries of order `scale`, complex unless `real`.
pub fn random_hermitian(rng: &mut impl Rng, d: usize, scale: f64, real: bool) -> HermitianMatrix<f64> {
    let mut m = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        m[i + i * d] = C64::new(scale * rng.random_range(-1.0..1.0), 0.0);
        for j in i + 1..d {
            let im = if real { 0.0 } else { rng.random_range(-1.0..1.0) };
            let z = C64::new(rng.random_range(-1.0..1.0), im) * scale;
            m[i + j * d] = z;
            m[j + i * d] = z.conj();
        }
    }
    HermitianMatrix::new(d, m).unwrap()
}

pub fn random_observable(rng: &mut impl Rng, d: usize) -> OperatorVector<f64> {
    OperatorVector::from_hermitian(&random_hermitian(rng, d, 1.0, false))
}

/// `Tr(A† B) / d`.
pub fn hs_inner(d: usize, a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>() / d as f64
}

/// `vec([H, A])` by explicit matrix products.
pub fn commutator(d: usize, h: &[C64], a: &[C64]) -> Vec<C64> {
    let ha = matmul(d, h, a);
    let ah = matmul(d, a, h);
    ha.iter().zip(&ah).map(|(x, y)| x - y).collect()
}

/// `M = I ⊗ H - Hᵀ ⊗ I` acting on column-major vectorized operators.
pub fn superoperator(d: usize, h: &[C64]) -> Vec<C64> {
    let n = d * d;
    let mut m = vec![C64::new(0.0, 0.0); n * n];
    for col in 0..n {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[col] = C64::new(1.0, 0.0);
        let c = commutator(d, h, &e);
        m[col * n..(col + 1) * n].copy_from_slice(&c);
    }
    m
}

/// Arnoldi with two full Gram–Schmidt passes on the raw Krylov sequence.
/// Returns the subdiagonal of the Hessenberg matrix and the orthonormal
/// basis; stops when the new direction falls below `tol · b_1`.
pub fn gram_schmidt_krylov(d: usize, h: &[C64], o: &[C64], tol: f64) -> (Vec<f64>, Vec<Vec<C64>>) {
    let norm0 = hs_inner(d, o, o).re.sqrt();
    let mut basis: Vec<Vec<C64>> = vec![o.iter().map(|z| z / norm0).collect()];
    let mut b = Vec::new();
    let scale = 2.0 * h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    loop {
        let mut w = commutator(d, h, basis.last().unwrap());
        for _ in 0..2 {
            for q in &basis {
                let c = hs_inner(d, q, &w);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let beta = hs_inner(d, &w, &w).re.sqrt();
        let limit = tol * b.first().copied().unwrap_or(scale);
        if beta <= limit || basis.len() == d * d {
            break;
        }
        b.push(beta);
        basis.push(w.iter().map(|z| z / beta).collect());
    }
    (b, basis)
}

/// Uniform random coefficients in `(0, hi]`.
pub fn random_coefficients(rng: &mut impl Rng, len: usize, hi: f64) -> Vec<f64> {
    (0..len).map(|_| hi * (1.0 - rng.random::<f64>())).collect()
}

/// Exact chain evolution through a dense exponential of the tridiagonal
/// generator: `ψ(t) = exp(i T t) e_0`, `φ_n = Re(i^{-n} ψ_n)`.
pub fn chain_expm(b: &[f64], t: f64) -> Vec<f64> {
    let n = b.len() + 1;
    let mut a = vec![C64::new(0.0, 0.0); n * n];
    for (m, &bm) in b.iter().enumerate() {
        a[m + (m + 1) * n] = C64::new(0.0, bm * t);
        a[m + 1 + m * n] = C64::new(0.0, bm * t);
    }
    let e = expm(n, &a);
    (0..n)
        .map(|k| {
            let psi = e[k];
            let rot = C64::new(0.0, -1.0).powu(k as u32);
            (rot * psi).re
        })
        .collect()
}
