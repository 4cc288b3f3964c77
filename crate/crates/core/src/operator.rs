//! Hamiltonians, vectorized operators, the thermal inner-product family and
//! the Liouvillian `L = [H, .]`.
//!
//! Operators are vectorized column-major: entry `(i, j)` of a `d x d`
//! operator sits at index `i + j * d`. Every stored artifact uses this
//! convention.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, DenseMatrix};
use crate::scalar::{czero, cre, Real, C};

/// Default size guard for [`build_superoperator`].
pub const DEFAULT_SUPEROPERATOR_LIMIT: usize = 64;

const HERMITIAN_TOL: f64 = 1e-12;

/// Complex Hermitian `d x d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix<T> {
    dim: usize,
    entries: Vec<C<T>>,
}

impl<T: Real> HermitianMatrix<T> {
    /// Builds from column-major entries, rejecting non-Hermitian input.
    pub fn new(dim: usize, entries: Vec<C<T>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "must be positive"));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        let scale = entries.iter().map(|z| z.norm()).fold(T::zero(), T::max);
        let tol = T::lit(HERMITIAN_TOL).max(T::lit(8.0) * T::epsilon() * scale);
        for j in 0..dim {
            for i in 0..=j {
                let dev = (entries[i + j * dim] - entries[j + i * dim].conj()).norm();
                if !(dev <= tol) {
                    return Err(Error::NotHermitian {
                        row: i,
                        col: j,
                        deviation: dev.to_f64().unwrap_or(f64::NAN),
                    });
                }
            }
        }
        Ok(Self { dim, entries })
    }

    /// Builds from row-major real and imaginary parts.
    pub fn from_parts(re: &[Vec<T>], im: &[Vec<T>]) -> Result<Self> {
        let (dim, entries) = parts_to_col_major(re, im)?;
        Self::new(dim, entries)
    }

    /// Real symmetric matrix from column-major entries.
    pub fn from_real(dim: usize, entries: &[T]) -> Result<Self> {
        Self::new(dim, entries.iter().map(|&x| cre(x)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![czero(); dim * dim] }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C<T> {
        self.entries[i + j * self.dim]
    }

    /// Column-major entries.
    pub fn entries(&self) -> &[C<T>] {
        &self.entries
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|&z| z * s).collect() }
    }

    pub fn eigen(&self) -> Result<crate::linalg::HermitianEigen<T>> {
        hermitian_eigen(self.dim, &self.entries)
    }

    pub fn to_file(&self) -> MatrixFile<T> {
        col_major_to_file(self.dim, &self.entries)
    }

    pub fn from_file(file: &MatrixFile<T>) -> Result<Self> {
        file.check()?;
        Self::from_parts(&file.re, &file.im)
    }
}

/// Pauli matrices and the identity, useful for the two-level examples.
pub mod pauli {
    use super::*;

    fn build<T: Real>(m: [[(f64, f64); 2]; 2]) -> HermitianMatrix<T> {
        let z = |(re, im): (f64, f64)| Complex::new(T::lit(re), T::lit(im));
        HermitianMatrix::new(2, vec![z(m[0][0]), z(m[1][0]), z(m[0][1]), z(m[1][1])])
            .expect("Pauli matrices are Hermitian")
    }

    pub fn identity<T: Real>() -> HermitianMatrix<T> {
        build([[(1., 0.), (0., 0.)], [(0., 0.), (1., 0.)]])
    }

    pub fn sigma_x<T: Real>() -> HermitianMatrix<T> {
        build([[(0., 0.), (1., 0.)], [(1., 0.), (0., 0.)]])
    }

    pub fn sigma_y<T: Real>() -> HermitianMatrix<T> {
        build([[(0., 0.), (0., -1.)], [(0., 1.), (0., 0.)]])
    }

    pub fn sigma_z<T: Real>() -> HermitianMatrix<T> {
        build([[(1., 0.), (0., 0.)], [(0., 0.), (-1., 0.)]])
    }
}

/// Cached spectral data of a Hamiltonian for the `beta > 0` inner product.
#[derive(Debug)]
pub struct ThermalWeights<T> {
    dim: usize,
    vectors: DenseMatrix<C<T>>,
    /// `exp(-beta (E_i - E_min) / 2)`
    half_boltzmann: Vec<T>,
    /// `sum_i exp(-beta (E_i - E_min))`
    partition: T,
}

impl<T: Real> ThermalWeights<T> {
    fn new(beta: T, h: &HermitianMatrix<T>) -> Result<Self> {
        let eig = h.eigen()?;
        let e0 = eig.values.first().copied().unwrap_or_else(T::zero);
        let half: Vec<T> =
            eig.values.iter().map(|&e| (-(beta * (e - e0)) / T::lit(2.0)).exp()).collect();
        let partition = half.iter().map(|&w| w * w).sum();
        Ok(Self { dim: h.dim(), vectors: eig.vectors, half_boltzmann: half, partition })
    }

    /// `V† A V` for a column-major operator `A`.
    fn to_eigenbasis(&self, a: &[C<T>]) -> Vec<C<T>> {
        let d = self.dim;
        // tmp = A V
        let mut tmp = vec![czero(); d * d];
        for j in 0..d {
            for k in 0..d {
                let vkj = self.vectors.get(k, j);
                if vkj == czero() {
                    continue;
                }
                for i in 0..d {
                    tmp[i + j * d] = tmp[i + j * d] + a[i + k * d] * vkj;
                }
            }
        }
        let mut out = vec![czero(); d * d];
        for j in 0..d {
            for i in 0..d {
                let mut acc = czero();
                for k in 0..d {
                    acc = acc + self.vectors.get(k, i).conj() * tmp[k + j * d];
                }
                out[i + j * d] = acc;
            }
        }
        out
    }
}

/// Member of the inner-product family
/// `(A|B) = Tr(e^{-beta H/2} A† e^{-beta H/2} B) / Z`.
///
/// At `beta = 0` this is `normalization * Tr(A† B)`; the default
/// normalization `1/d` gives the identity unit norm.
#[derive(Debug, Clone)]
pub struct InnerProductSpec<T> {
    beta: T,
    normalization: T,
    thermal: Option<Arc<ThermalWeights<T>>>,
}

impl<T: Real> InnerProductSpec<T> {
    /// Unbound spec. With `beta > 0` it must be bound via [`Self::thermal`]
    /// before use.
    pub fn new(beta: T, normalization: T) -> Result<Self> {
        if !(beta >= T::zero()) {
            return Err(Error::invalid("beta", "must be non-negative"));
        }
        if !(normalization > T::zero()) {
            return Err(Error::invalid("normalization", "must be positive"));
        }
        Ok(Self { beta, normalization, thermal: None })
    }

    /// Hilbert–Schmidt product normalized so that the identity has unit norm.
    pub fn hilbert_schmidt(dim: usize) -> Self {
        Self { beta: T::zero(), normalization: T::one() / T::from_usize_lossy(dim), thermal: None }
    }

    /// Thermal product bound to `h`. Diagonalizes `h` once.
    pub fn thermal(beta: T, h: &HermitianMatrix<T>) -> Result<Self> {
        let mut spec = Self::new(beta, T::one() / T::from_usize_lossy(h.dim()))?;
        if beta > T::zero() {
            spec.thermal = Some(Arc::new(ThermalWeights::new(beta, h)?));
        }
        Ok(spec)
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn normalization(&self) -> T {
        self.normalization
    }

    /// Evaluates `(A|B)` on raw column-major components.
    pub fn evaluate(&self, a: &[C<T>], b: &[C<T>]) -> Result<C<T>> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
        }
        if self.beta == T::zero() {
            let acc: C<T> = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
            return Ok(acc * self.normalization);
        }
        let th = self.thermal.as_ref().ok_or(Error::UnboundThermalInnerProduct)?;
        let d = th.dim;
        if a.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, found: a.len() });
        }
        let ap = th.to_eigenbasis(a);
        let bp = th.to_eigenbasis(b);
        let mut acc = czero();
        for i in 0..d {
            for j in 0..d {
                // Tr(W A'† W B') = sum_ij w_i w_j conj(A'_ji) B'_ji
                let w = th.half_boltzmann[i] * th.half_boltzmann[j];
                acc = acc + ap[j + i * d].conj() * bp[j + i * d] * w;
            }
        }
        Ok(acc / th.partition)
    }
}

/// Vectorized operator with its inner-product specification attached.
#[derive(Debug, Clone)]
pub struct OperatorVector<T> {
    dim: usize,
    components: Vec<C<T>>,
    spec: InnerProductSpec<T>,
}

impl<T: Real> OperatorVector<T> {
    pub fn new(dim: usize, components: Vec<C<T>>, spec: InnerProductSpec<T>) -> Result<Self> {
        if components.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: components.len() });
        }
        Ok(Self { dim, components, spec })
    }

    /// The operator `h` itself, under the default inner product.
    pub fn from_hermitian(h: &HermitianMatrix<T>) -> Self {
        Self {
            dim: h.dim(),
            components: h.entries().to_vec(),
            spec: InnerProductSpec::hilbert_schmidt(h.dim()),
        }
    }

    /// Operator from row-major real/imaginary parts, default inner product.
    pub fn from_parts(re: &[Vec<T>], im: &[Vec<T>]) -> Result<Self> {
        let (dim, components) = parts_to_col_major(re, im)?;
        Ok(Self { dim, components, spec: InnerProductSpec::hilbert_schmidt(dim) })
    }

    pub fn from_file(file: &MatrixFile<T>) -> Result<Self> {
        file.check()?;
        Self::from_parts(&file.re, &file.im)
    }

    pub fn to_file(&self) -> MatrixFile<T> {
        col_major_to_file(self.dim, &self.components)
    }

    pub fn with_spec(mut self, spec: InnerProductSpec<T>) -> Self {
        self.spec = spec;
        self
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[C<T>] {
        &self.components
    }

    pub fn spec(&self) -> &InnerProductSpec<T> {
        &self.spec
    }

    pub fn get(&self, i: usize, j: usize) -> C<T> {
        self.components[i + j * self.dim]
    }

    /// `(self|other)` under `self`'s inner product.
    pub fn inner(&self, other: &Self) -> Result<C<T>> {
        inner_product(self, other, &self.spec)
    }

    pub fn norm(&self) -> Result<T> {
        Ok(self.inner(self)?.re.max(T::zero()).sqrt())
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        let d = self.dim;
        (0..d).all(|j| (0..=j).all(|i| (self.get(i, j) - self.get(j, i).conj()).norm() <= tol))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let components = self.components.iter().zip(&other.components).map(|(a, b)| a + b).collect();
        Ok(Self { dim: self.dim, components, spec: self.spec.clone() })
    }

    pub fn scaled(&self, s: C<T>) -> Self {
        Self {
            dim: self.dim,
            components: self.components.iter().map(|&z| z * s).collect(),
            spec: self.spec.clone(),
        }
    }
}

/// `(A|B)` under `spec`.
pub fn inner_product<T: Real>(
    a: &OperatorVector<T>,
    b: &OperatorVector<T>,
    spec: &InnerProductSpec<T>,
) -> Result<C<T>> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { expected: a.dim, found: b.dim });
    }
    spec.evaluate(&a.components, &b.components)
}

/// Writes `vec([H, A])` into `out`; all slices column-major, `out` overwritten.
pub(crate) fn commutator_into<T: Real>(h: &HermitianMatrix<T>, a: &[C<T>], out: &mut [C<T>]) {
    let d = h.dim;
    let hm = &h.entries;
    out.iter_mut().for_each(|z| *z = czero());
    for j in 0..d {
        for k in 0..d {
            // (HA)_ij += H_ik A_kj
            let akj = a[k + j * d];
            if akj != czero() {
                let hcol = &hm[k * d..(k + 1) * d];
                let ocol = &mut out[j * d..(j + 1) * d];
                for (o, &hik) in ocol.iter_mut().zip(hcol) {
                    *o = *o + hik * akj;
                }
            }
            // (AH)_ij -= A_ik H_kj
            let hkj = hm[k + j * d];
            if hkj != czero() {
                let acol = &a[k * d..(k + 1) * d];
                let ocol = &mut out[j * d..(j + 1) * d];
                for (o, &aik) in ocol.iter_mut().zip(acol) {
                    *o = *o - aik * hkj;
                }
            }
        }
    }
}

/// `L A = [H, A]`.
pub fn apply_liouvillian<T: Real>(h: &HermitianMatrix<T>, a: &OperatorVector<T>) -> Result<OperatorVector<T>> {
    if h.dim != a.dim {
        return Err(Error::DimensionMismatch { expected: h.dim, found: a.dim });
    }
    let mut out = vec![czero(); a.components.len()];
    commutator_into(h, &a.components, &mut out);
    Ok(OperatorVector { dim: a.dim, components: out, spec: a.spec.clone() })
}

/// Dense `d² x d²` matrix `M` with `M vec(A) = vec([H, A])`.
///
/// With column-major vectorization `M = I ⊗ H - Hᵀ ⊗ I`.
pub fn build_superoperator<T: Real>(h: &HermitianMatrix<T>, limit: Option<usize>) -> Result<DenseMatrix<C<T>>> {
    let d = h.dim;
    let limit = limit.unwrap_or(DEFAULT_SUPEROPERATOR_LIMIT);
    if d > limit {
        return Err(Error::SuperoperatorTooLarge { dim: d, limit });
    }
    let n = d * d;
    let mut m = DenseMatrix::filled(n, n, czero::<T>());
    for j in 0..d {
        for l in 0..d {
            for i in 0..d {
                // row (i, j), column (k, l): delta_jl H_ik - delta_ik H_lj
                let row = i + j * d;
                if j == l {
                    for k in 0..d {
                        let col = k + l * d;
                        m.set(row, col, m.get(row, col) + h.get(i, k));
                    }
                }
                let col = i + l * d;
                m.set(row, col, m.get(row, col) - h.get(l, j));
            }
        }
    }
    Ok(m)
}

/// On-disk matrix format: `{"dim": d, "re": [[...]], "im": [[...]]}`, rows outermost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile<T> {
    pub dim: usize,
    pub re: Vec<Vec<T>>,
    pub im: Vec<Vec<T>>,
}

impl<T: Real> MatrixFile<T> {
    fn check(&self) -> Result<()> {
        if self.re.len() != self.dim {
            return Err(Error::invalid("re", format!("expected {} rows, found {}", self.dim, self.re.len())));
        }
        if self.im.len() != self.dim {
            return Err(Error::invalid("im", format!("expected {} rows, found {}", self.dim, self.im.len())));
        }
        Ok(())
    }
}

impl<T: Real + Serialize + for<'de> Deserialize<'de>> MatrixFile<T> {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

fn parts_to_col_major<T: Real>(re: &[Vec<T>], im: &[Vec<T>]) -> Result<(usize, Vec<C<T>>)> {
    let d = re.len();
    if d == 0 {
        return Err(Error::invalid("re", "empty matrix"));
    }
    if im.len() != d {
        return Err(Error::invalid("im", format!("expected {d} rows, found {}", im.len())));
    }
    for (field, rows) in [("re", re), ("im", im)] {
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::invalid(field, format!("row of length {} in a {d}x{d} matrix", bad.len())));
        }
    }
    let mut out = vec![czero(); d * d];
    for i in 0..d {
        for j in 0..d {
            out[i + j * d] = Complex::new(re[i][j], im[i][j]);
        }
    }
    Ok((d, out))
}

fn col_major_to_file<T: Real>(d: usize, entries: &[C<T>]) -> MatrixFile<T> {
    let re = (0..d).map(|i| (0..d).map(|j| entries[i + j * d].re).collect()).collect();
    let im = (0..d).map(|i| (0..d).map(|j| entries[i + j * d].im).collect()).collect();
    MatrixFile { dim: d, re, im }
}
