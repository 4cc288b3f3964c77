//! Lanczos recursion on the Liouvillian.
//!
//! Starting from a normalized observable `O_0`, the recursion
//! `A_{n+1} = L O_n - b_n O_{n-1}`, `b_{n+1} = |A_{n+1}|` builds the Krylov
//! basis and the coefficients `b_1, b_2, ...`. The diagonal coefficient
//! `(O_n|L O_n)` vanishes for Hermitian observables under any admissible
//! inner product; it is measured every step and a non-zero value is an
//! error.
//!
//! The recursion is written against [`KrylovSpace`] so that the same code
//! runs on operators in the original basis ([`LiouvilleSpace`]) and on the
//! Liouvillian eigenbasis, where `L` is diagonal and all vectors are real
//! ([`DiagonalLiouvillian`]).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{commutator_into, HermitianMatrix, InnerProductSpec, OperatorVector};
use crate::scalar::{cre, czero, Real, C};

/// Default halting tolerance, relative to `b_1`.
pub const DEFAULT_HALT_TOL: f64 = 1e-10;

/// Vector space on which the Liouvillian acts.
pub trait KrylovSpace<T: Real> {
    type Vector: Clone + Send + Sync;

    fn apply(&self, v: &Self::Vector) -> Self::Vector;
    fn inner(&self, a: &Self::Vector, b: &Self::Vector) -> C<T>;
    /// `y += alpha * x`
    fn axpy(&self, alpha: C<T>, x: &Self::Vector, y: &mut Self::Vector);
    fn scale(&self, v: &mut Self::Vector, s: T);
    /// Upper bound on the Liouvillian norm; sets the absolute halting scale
    /// before `b_1` is known.
    fn norm_scale(&self) -> T;
    /// Dimension of the full operator space (`d²`).
    fn ambient_dim(&self) -> usize;

    fn norm(&self, v: &Self::Vector) -> T {
        self.inner(v, v).re.max(T::zero()).sqrt()
    }
}

/// Operators in the original basis under a chosen inner product.
#[derive(Debug, Clone)]
pub struct LiouvilleSpace<'a, T> {
    h: &'a HermitianMatrix<T>,
    spec: InnerProductSpec<T>,
    scale: T,
}

impl<'a, T: Real> LiouvilleSpace<'a, T> {
    pub fn new(h: &'a HermitianMatrix<T>, spec: InnerProductSpec<T>) -> Result<Self> {
        // probe once so an unbound thermal spec fails here rather than mid-run
        let d = h.dim();
        let probe = vec![czero(); d * d];
        spec.evaluate(&probe, &probe)?;
        let frob = h.entries().iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        Ok(Self { h, spec, scale: T::lit(2.0) * frob })
    }
}

impl<T: Real> KrylovSpace<T> for LiouvilleSpace<'_, T> {
    type Vector = Vec<C<T>>;

    fn apply(&self, v: &Self::Vector) -> Self::Vector {
        let mut out = vec![czero(); v.len()];
        commutator_into(self.h, v, &mut out);
        out
    }

    fn inner(&self, a: &Self::Vector, b: &Self::Vector) -> C<T> {
        self.spec.evaluate(a, b).expect("inner product validated at construction")
    }

    fn axpy(&self, alpha: C<T>, x: &Self::Vector, y: &mut Self::Vector) {
        for (yi, &xi) in y.iter_mut().zip(x) {
            *yi = *yi + alpha * xi;
        }
    }

    fn scale(&self, v: &mut Self::Vector, s: T) {
        v.iter_mut().for_each(|z| *z = *z * s);
    }

    fn norm_scale(&self) -> T {
        self.scale
    }

    fn ambient_dim(&self) -> usize {
        self.h.dim() * self.h.dim()
    }
}

/// The Liouvillian in its own eigenbasis: multiplication by the Bohr
/// frequencies `E_i - E_j`. Vectors are real and the inner product is the
/// Euclidean one (the eigen-operators `|i><j|` are orthonormal).
#[derive(Debug, Clone)]
pub struct DiagonalLiouvillian<T> {
    frequencies: Vec<T>,
    scale: T,
}

impl<T: Real> DiagonalLiouvillian<T> {
    pub fn new(frequencies: Vec<T>) -> Self {
        let scale = frequencies.iter().fold(T::zero(), |m, w| m.max(w.abs()));
        Self { frequencies, scale }
    }

    pub fn frequencies(&self) -> &[T] {
        &self.frequencies
    }
}

impl<T: Real> KrylovSpace<T> for DiagonalLiouvillian<T> {
    type Vector = Vec<T>;

    fn apply(&self, v: &Self::Vector) -> Self::Vector {
        v.iter().zip(&self.frequencies).map(|(&x, &w)| x * w).collect()
    }

    fn inner(&self, a: &Self::Vector, b: &Self::Vector) -> C<T> {
        cre(a.iter().zip(b).map(|(&x, &y)| x * y).sum())
    }

    fn axpy(&self, alpha: C<T>, x: &Self::Vector, y: &mut Self::Vector) {
        let a = alpha.re;
        for (yi, &xi) in y.iter_mut().zip(x) {
            *yi = *yi + a * xi;
        }
    }

    fn scale(&self, v: &mut Self::Vector, s: T) {
        v.iter_mut().for_each(|x| *x = *x * s);
    }

    fn norm_scale(&self) -> T {
        self.scale
    }

    fn ambient_dim(&self) -> usize {
        self.frequencies.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReorthMode {
    None,
    Full,
    Partial,
}

impl std::str::FromStr for ReorthMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "full" => Ok(Self::Full),
            "partial" => Ok(Self::Partial),
            other => Err(Error::invalid("reorth", format!("expected none|full|partial, got `{other}`"))),
        }
    }
}

/// Reorthogonalization strategy.
///
/// `Partial` tracks the loss of orthogonality with Simon's recurrence and
/// reorthogonalizes against the whole basis only when the estimate exceeds
/// `threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReorthPolicy<T> {
    pub mode: ReorthMode,
    pub threshold: T,
}

impl<T: Real> ReorthPolicy<T> {
    pub fn new(mode: ReorthMode, threshold: Option<T>) -> Result<Self> {
        let threshold = threshold.unwrap_or_else(|| T::epsilon().sqrt());
        if !(threshold > T::zero() && threshold < T::one()) {
            return Err(Error::invalid("threshold", "must lie in (0, 1)"));
        }
        Ok(Self { mode, threshold })
    }

    pub fn full() -> Self {
        Self { mode: ReorthMode::Full, threshold: T::epsilon().sqrt() }
    }

    pub fn partial() -> Self {
        Self { mode: ReorthMode::Partial, threshold: T::epsilon().sqrt() }
    }

    pub fn none() -> Self {
        Self { mode: ReorthMode::None, threshold: T::epsilon().sqrt() }
    }

    /// Full reorthogonalization up to `d² = 4096`, partial above.
    pub fn default_for(ambient_dim: usize) -> Self {
        if ambient_dim <= 4096 {
            Self::full()
        } else {
            Self::partial()
        }
    }
}

#[derive(Debug, Clone)]
pub struct LanczosOptions<T> {
    pub policy: ReorthPolicy<T>,
    /// Halt when `|A_{n+1}| <= halt_tol * b_1`.
    pub halt_tol: T,
    /// Defaults to the ambient dimension.
    pub max_steps: Option<usize>,
    pub store_basis: bool,
}

impl<T: Real> LanczosOptions<T> {
    pub fn new(policy: ReorthPolicy<T>) -> Self {
        Self { policy, halt_tol: T::lit(DEFAULT_HALT_TOL), max_steps: None, store_basis: false }
    }

    pub fn with_basis(mut self) -> Self {
        self.store_basis = true;
        self
    }

    pub fn halt_tol(mut self, tol: T) -> Self {
        self.halt_tol = tol;
        self
    }

    pub fn max_steps(mut self, steps: usize) -> Self {
        self.max_steps = Some(steps);
        self
    }
}

/// Output of the recursion.
#[derive(Debug, Clone)]
pub struct LanczosResult<T, V> {
    /// `b[n - 1]` holds `b_n`; `b_0 = 0` is never stored.
    pub b: Vec<T>,
    pub krylov_dim: usize,
    pub basis: Option<Vec<V>>,
    /// Measured when the basis is stored.
    pub ortho_error: Option<T>,
    /// `max_steps` ran out before the recursion halted.
    pub truncated: bool,
    /// Number of steps at which a full reorthogonalization pass ran.
    pub reorth_steps: usize,
}

impl<T: Real, V> LanczosResult<T, V> {
    pub fn to_json(&self) -> LanczosJson<T> {
        LanczosJson {
            krylov_dim: self.krylov_dim,
            b: self.b.clone(),
            ortho_error: self.ortho_error,
            truncated: self.truncated,
        }
    }

    /// `n,b_n` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,b_n\n");
        for (i, b) in self.b.iter().enumerate() {
            let _ = writeln!(s, "{},{}", i + 1, crate::fmt_sci(*b));
        }
        s
    }
}

/// Serialized form: `{"D": int, "b": [...], "ortho_error": float|null, "truncated": bool}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanczosJson<T> {
    #[serde(rename = "D")]
    pub krylov_dim: usize,
    pub b: Vec<T>,
    pub ortho_error: Option<T>,
    #[serde(default)]
    pub truncated: bool,
}

impl<T: Real> LanczosJson<T> {
    /// Structural checks applied when an artifact is re-loaded.
    pub fn validate(&self) -> Result<()> {
        if self.krylov_dim == 0 {
            return Err(Error::invalid("D", "must be positive"));
        }
        if self.b.len() + 1 != self.krylov_dim {
            return Err(Error::invalid("b", format!("expected D - 1 = {} coefficients, found {}", self.krylov_dim - 1, self.b.len())));
        }
        if let Some((i, &v)) = self.b.iter().enumerate().find(|(_, v)| !(**v > T::zero())) {
            return Err(Error::NonPositiveCoefficient { index: i + 1, value: v.to_f64().unwrap_or(f64::NAN) });
        }
        Ok(())
    }
}

/// Runs the recursion from `start` (normalized internally).
pub fn lanczos<T: Real, S: KrylovSpace<T>>(
    space: &S,
    start: &S::Vector,
    options: &LanczosOptions<T>,
) -> Result<LanczosResult<T, S::Vector>> {
    let norm0 = space.norm(start);
    if !(norm0 > T::zero()) {
        return Err(Error::ZeroObservable);
    }
    let mut q0 = start.clone();
    space.scale(&mut q0, T::one() / norm0);

    let max_steps = options.max_steps.unwrap_or_else(|| space.ambient_dim());
    let policy = options.policy;
    let keep_basis = options.store_basis || policy.mode != ReorthMode::None;
    let eps = T::epsilon();
    let diag_tol_factor = eps.sqrt();

    let mut basis: Vec<S::Vector> = vec![q0.clone()];
    let mut b: Vec<T> = Vec::new();
    let mut prev: Option<S::Vector> = None;
    let mut cur = q0;
    let mut halted = false;
    let mut reorth_steps = 0;

    // partial reorthogonalization state: omega_cur[j] ~ (q_k|q_j)
    let mut omega_prev: Vec<T> = Vec::new();
    let mut omega_cur: Vec<T> = vec![T::one()];
    let mut force_next = false;

    for k in 0..max_steps {
        let mut w = space.apply(&cur);
        let lw = space.norm(&w);
        let diag = space.inner(&cur, &w);
        let diag_tol = diag_tol_factor * lw.max(space.norm_scale());
        if diag.norm() > diag_tol {
            return Err(Error::DiagonalCoefficient {
                step: k,
                value: diag.norm().to_f64().unwrap_or(f64::NAN),
                tolerance: diag_tol.to_f64().unwrap_or(f64::NAN),
            });
        }
        if let (Some(p), Some(&bk)) = (prev.as_ref(), b.last()) {
            space.axpy(cre(-bk), p, &mut w);
        }

        let mut beta = space.norm(&w);
        match policy.mode {
            ReorthMode::None => {}
            ReorthMode::Full => {
                reorthogonalize(space, &basis, &mut w);
                reorth_steps += 1;
                beta = space.norm(&w);
            }
            ReorthMode::Partial => {
                let coupling = |m: usize| if m == 0 { T::zero() } else { b[m - 1] };
                let noise = eps * space.norm_scale();
                let mut omega_next = vec![T::zero(); k + 2];
                if beta > T::zero() {
                    for j in 0..k {
                        let mut t = coupling(j + 1) * omega_cur[j + 1] - coupling(k) * omega_prev[j];
                        if j > 0 {
                            t = t + coupling(j) * omega_cur[j - 1];
                        }
                        t = t + if t >= T::zero() { noise } else { -noise };
                        omega_next[j] = t / beta;
                    }
                    omega_next[k] = noise / beta;
                }
                omega_next[k + 1] = T::one();
                let worst = omega_next[..=k].iter().fold(T::zero(), |m, w| m.max(w.abs()));
                if force_next || worst > policy.threshold {
                    reorthogonalize(space, &basis, &mut w);
                    reorth_steps += 1;
                    beta = space.norm(&w);
                    omega_next[..=k].iter_mut().for_each(|x| *x = eps);
                    force_next = !force_next;
                }
                omega_prev = std::mem::replace(&mut omega_cur, omega_next);
            }
        }

        let threshold = match b.first() {
            Some(&b1) => options.halt_tol * b1,
            None => options.halt_tol * space.norm_scale(),
        };
        if !(beta > threshold) {
            halted = true;
            break;
        }
        b.push(beta);
        space.scale(&mut w, T::one() / beta);
        if keep_basis {
            basis.push(w.clone());
        }
        prev = Some(std::mem::replace(&mut cur, w));
    }

    let krylov_dim = b.len() + 1;
    let (basis, ortho_error) = if options.store_basis {
        let err = gram_error(space, &basis);
        (Some(basis), Some(err))
    } else {
        (None, None)
    };
    Ok(LanczosResult { b, krylov_dim, basis, ortho_error, truncated: !halted, reorth_steps })
}

fn reorthogonalize<T: Real, S: KrylovSpace<T>>(space: &S, basis: &[S::Vector], w: &mut S::Vector) {
    // classical Gram–Schmidt; a second pass runs when the first removed
    // more than half of the norm (Daniel–Gragg–Kaufman–Stewart criterion)
    let mut before = space.norm(w);
    for _ in 0..2 {
        let coeffs: Vec<C<T>> = basis.iter().map(|q| space.inner(q, w)).collect();
        for (q, c) in basis.iter().zip(coeffs) {
            space.axpy(-c, q, w);
        }
        let after = space.norm(w);
        if after > before * T::FRAC_1_SQRT_2() {
            break;
        }
        before = after;
    }
}

fn gram_error<T: Real, S: KrylovSpace<T>>(space: &S, basis: &[S::Vector]) -> T {
    let mut worst = T::zero();
    for (i, qi) in basis.iter().enumerate() {
        for (j, qj) in basis.iter().enumerate().skip(i) {
            let g = space.inner(qi, qj);
            let dev = if i == j { (g - cre(T::one())).norm() } else { g.norm() };
            worst = worst.max(dev);
        }
    }
    worst
}

/// `max(max_{i != j} |(O_i|O_j)|, max_i |(O_i|O_i) - 1|)` over the stored basis.
pub fn orthogonality_report<T: Real, S: KrylovSpace<T>>(
    result: &LanczosResult<T, S::Vector>,
    space: &S,
) -> Result<T> {
    let basis = result.basis.as_ref().ok_or(Error::BasisNotStored)?;
    Ok(gram_error(space, basis))
}

/// Lanczos on `(L, O)` in the original operator basis, using `o`'s inner product.
pub fn run_lanczos<T: Real>(
    h: &HermitianMatrix<T>,
    o: &OperatorVector<T>,
    options: &LanczosOptions<T>,
) -> Result<LanczosResult<T, Vec<C<T>>>> {
    if h.dim() != o.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: o.dim() });
    }
    let space = LiouvilleSpace::new(h, o.spec().clone())?;
    lanczos(&space, &o.components().to_vec(), options)
}

/// Maximum columnwise residual of `L O_n = b_{n+1} O_{n+1} + b_n O_{n-1}`.
pub fn recurrence_residual<T: Real, S: KrylovSpace<T>>(
    result: &LanczosResult<T, S::Vector>,
    space: &S,
) -> Result<T> {
    let basis = result.basis.as_ref().ok_or(Error::BasisNotStored)?;
    let mut worst = T::zero();
    for (n, q) in basis.iter().enumerate() {
        let mut r = space.apply(q);
        if n + 1 < basis.len() {
            space.axpy(cre(-result.b[n]), &basis[n + 1], &mut r);
        }
        if n > 0 {
            space.axpy(cre(-result.b[n - 1]), &basis[n - 1], &mut r);
        }
        // the last column is only exact once the recursion has halted
        if n + 1 == basis.len() && result.truncated {
            continue;
        }
        worst = worst.max(space.norm(&r));
    }
    Ok(worst)
}
