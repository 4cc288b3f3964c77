//! Amplitude dynamics on the Krylov chain and the complexity observables
//! derived from it.
//!
//! The amplitudes obey `dφ_n/dt = b_n φ_{n-1} - b_{n+1} φ_{n+1}` with
//! `φ(0) = e_0`. Writing `ψ_n = i^n φ_n`, `ψ(t) = exp(i T t) e_0` where `T` is
//! the symmetric tridiagonal matrix with zero diagonal and off-diagonals
//! `b_n`; the default propagator diagonalizes `T` once.

use std::fmt::Write as _;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{tridiagonal_eigen, TridiagonalEigen};
use crate::scalar::{czero, pairwise_sum, Real, C};

/// Tail-mass threshold used by automatic truncation growth.
pub const AUTO_TAIL_TOL: f64 = 1e-12;

/// Relative size below which ratio and `tau_K` denominators count as zero.
pub const UNDEFINED_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvolutionMethod<T> {
    /// Exact propagation through the eigen-decomposition of the chain.
    TridiagEigen,
    /// Classical Runge–Kutta; `max_step` defaults to `0.005 / (2 max b)`.
    Rk4 { max_step: Option<T> },
}

impl<T> Default for EvolutionMethod<T> {
    fn default() -> Self {
        Self::TridiagEigen
    }
}

/// Chain length for coefficient families without a natural end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    Fixed(usize),
    /// Start at `initial` sites and double until the tail mass drops below
    /// [`AUTO_TAIL_TOL`], giving up beyond `max`.
    Auto { initial: usize, max: usize },
}

/// Exact propagator for a finite chain.
#[derive(Debug, Clone)]
pub struct KrylovPropagator<T> {
    b: Vec<T>,
    eigen: TridiagonalEigen<T>,
    /// first component of each eigenvector
    overlaps: Vec<T>,
}

impl<T: Real> KrylovPropagator<T> {
    pub fn new(b: &[T]) -> Result<Self> {
        check_positive(b)?;
        let n = b.len() + 1;
        let eigen = tridiagonal_eigen(&vec![T::zero(); n], b)?;
        let overlaps = eigen.vectors.iter().map(|v| v[0]).collect();
        Ok(Self { b: b.to_vec(), eigen, overlaps })
    }

    pub fn size(&self) -> usize {
        self.b.len() + 1
    }

    pub fn coefficients(&self) -> &[T] {
        &self.b
    }

    /// Amplitudes on a grid; `truncated` is recorded as given.
    pub fn trajectory(&self, times: &[T], truncated: bool) -> AmplitudeTrajectory<T> {
        let phi: Vec<Vec<T>> = times.iter().map(|&t| self.amplitudes(t)).collect();
        let tail = tail_mass(&phi);
        AmplitudeTrajectory { times: times.to_vec(), phi, b: self.b.clone(), truncated, tail_mass: tail }
    }

    /// `φ(t)`.
    pub fn amplitudes(&self, t: T) -> Vec<T> {
        let n = self.size();
        let mut phi = vec![T::zero(); n];
        if t == T::zero() {
            phi[0] = T::one();
            return phi;
        }
        let mut even = vec![T::zero(); n];
        let mut odd = vec![T::zero(); n];
        // φ_n = Σ_k U_nk U_0k Re(i^{-n} e^{i λ_k t})
        for ((v, &u0), &lam) in self.eigen.vectors.iter().zip(&self.overlaps).zip(&self.eigen.values) {
            let (s, c) = (lam * t).sin_cos();
            let wc = u0 * c;
            let ws = u0 * s;
            for ((e, o), &vn) in even.iter_mut().zip(odd.iter_mut()).zip(v) {
                *e = *e + wc * vn;
                *o = *o + ws * vn;
            }
        }
        for (m, p) in phi.iter_mut().enumerate() {
            *p = match m % 4 {
                0 => even[m],
                1 => odd[m],
                2 => -even[m],
                _ => -odd[m],
            };
        }
        phi
    }
}

/// Amplitudes `φ_n(t_k)` on a time grid.
#[derive(Debug, Clone)]
pub struct AmplitudeTrajectory<T> {
    pub times: Vec<T>,
    /// `phi[k][n] = φ_n(times[k])`
    pub phi: Vec<Vec<T>>,
    /// Coefficients of the chain actually evolved (`size() - 1` entries).
    pub b: Vec<T>,
    /// The chain is a truncation of a longer (or infinite) one.
    pub truncated: bool,
    /// `max_k Σ_{n >= N-2} φ_n(t_k)²`.
    pub tail_mass: T,
}

impl<T: Real> AmplitudeTrajectory<T> {
    pub fn size(&self) -> usize {
        self.b.len() + 1
    }

    pub fn b1(&self) -> T {
        self.b.first().copied().unwrap_or_else(T::zero)
    }

    /// `max_k |Σ_n φ_n² - 1|`.
    pub fn norm_error(&self) -> T {
        self.phi
            .iter()
            .map(|p| (p.iter().map(|&x| x * x).sum::<T>() - T::one()).abs())
            .fold(T::zero(), T::max)
    }

    /// Long-format dump `t,n,phi`.
    pub fn to_long_csv(&self) -> String {
        let mut s = String::from("t,n,phi\n");
        for (t, row) in self.times.iter().zip(&self.phi) {
            for (n, p) in row.iter().enumerate() {
                let _ = writeln!(s, "{},{},{}", crate::fmt_sci(*t), n, crate::fmt_sci(*p));
            }
        }
        s
    }

    fn complex_state(&self, k: usize) -> Vec<C<T>> {
        // ψ_n = i^n φ_n
        self.phi[k]
            .iter()
            .enumerate()
            .map(|(n, &p)| match n % 4 {
                0 => Complex::new(p, T::zero()),
                1 => Complex::new(T::zero(), p),
                2 => Complex::new(-p, T::zero()),
                _ => Complex::new(T::zero(), -p),
            })
            .collect()
    }
}

fn check_positive<T: Real>(b: &[T]) -> Result<()> {
    match b.iter().enumerate().find(|(_, &x)| !(x > T::zero())) {
        Some((i, &x)) => Err(Error::NonPositiveCoefficient { index: i + 1, value: x.to_f64().unwrap_or(f64::NAN) }),
        None => Ok(()),
    }
}

fn tail_mass<T: Real>(phi: &[Vec<T>]) -> T {
    phi.iter()
        .map(|p| {
            let start = p.len().saturating_sub(2);
            p[start..].iter().map(|&x| x * x).sum::<T>()
        })
        .fold(T::zero(), T::max)
}

/// Evolves the finite chain `b_1..b_{D-1}` exactly (no truncation).
pub fn evolve_amplitudes<T: Real>(b: &[T], times: &[T], method: EvolutionMethod<T>) -> Result<AmplitudeTrajectory<T>> {
    evolve_chain(b, times, method, false)
}

/// Evolves only the first `size` sites of the chain `b`.
pub fn evolve_truncated<T: Real>(
    b: &[T],
    times: &[T],
    method: EvolutionMethod<T>,
    size: usize,
) -> Result<AmplitudeTrajectory<T>> {
    if size == 0 {
        return Err(Error::invalid("truncation", "must be at least 1"));
    }
    let keep = (size - 1).min(b.len());
    evolve_chain(&b[..keep], times, method, keep < b.len())
}

/// Evolves an infinite coefficient family `b_n = coef(n)`, `n >= 1`.
pub fn evolve_family<T: Real, F: Fn(usize) -> T>(
    coef: F,
    times: &[T],
    method: EvolutionMethod<T>,
    truncation: Truncation,
) -> Result<AmplitudeTrajectory<T>> {
    let build = |size: usize| -> Vec<T> { (1..size).map(&coef).collect() };
    match truncation {
        Truncation::Fixed(size) => evolve_chain(&build(size.max(1)), times, method, true),
        Truncation::Auto { initial, max } => {
            let limit = T::lit(AUTO_TAIL_TOL);
            let mut size = initial.max(2);
            loop {
                let traj = evolve_chain(&build(size), times, method, true)?;
                if traj.tail_mass < limit {
                    return Ok(traj);
                }
                if size >= max {
                    return Err(Error::TruncationTooSmall {
                        size,
                        tail: traj.tail_mass.to_f64().unwrap_or(f64::NAN),
                        limit: AUTO_TAIL_TOL,
                    });
                }
                size = (size * 2).min(max);
            }
        }
    }
}

fn evolve_chain<T: Real>(b: &[T], times: &[T], method: EvolutionMethod<T>, truncated: bool) -> Result<AmplitudeTrajectory<T>> {
    check_positive(b)?;
    let phi = match method {
        EvolutionMethod::TridiagEigen => {
            return Ok(KrylovPropagator::new(b)?.trajectory(times, truncated));
        }
        EvolutionMethod::Rk4 { max_step } => rk4(b, times, max_step)?,
    };
    let tail = tail_mass(&phi);
    Ok(AmplitudeTrajectory { times: times.to_vec(), phi, b: b.to_vec(), truncated, tail_mass: tail })
}

fn chain_derivative<T: Real>(b: &[T], phi: &[T], out: &mut [T]) {
    let n = phi.len();
    for m in 0..n {
        let mut v = T::zero();
        if m > 0 {
            v = v + b[m - 1] * phi[m - 1];
        }
        if m + 1 < n {
            v = v - b[m] * phi[m + 1];
        }
        out[m] = v;
    }
}

fn rk4<T: Real>(b: &[T], times: &[T], max_step: Option<T>) -> Result<Vec<Vec<T>>> {
    let n = b.len() + 1;
    let bmax = b.iter().fold(T::zero(), |m, &x| m.max(x));
    let h_max = max_step.unwrap_or_else(|| {
        if bmax > T::zero() {
            T::lit(0.005) / (T::lit(2.0) * bmax)
        } else {
            T::one()
        }
    });
    let mut state = vec![T::zero(); n];
    state[0] = T::one();
    let mut t_cur = T::zero();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]);
    let mut tmp = vec![T::zero(); n];
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        let span = target - t_cur;
        let steps = (span.abs() / h_max).ceil().to_usize().unwrap_or(0);
        if steps > 0 {
            let h = span / T::from_usize_lossy(steps);
            for _ in 0..steps {
                chain_derivative(b, &state, &mut k1);
                for i in 0..n {
                    tmp[i] = state[i] + half * h * k1[i];
                }
                chain_derivative(b, &tmp, &mut k2);
                for i in 0..n {
                    tmp[i] = state[i] + half * h * k2[i];
                }
                chain_derivative(b, &tmp, &mut k3);
                for i in 0..n {
                    tmp[i] = state[i] + h * k3[i];
                }
                chain_derivative(b, &tmp, &mut k4);
                for i in 0..n {
                    state[i] = state[i] + h * sixth * (k1[i] + T::lit(2.0) * (k2[i] + k3[i]) + k4[i]);
                }
            }
        }
        t_cur = target;
        let drift = (state.iter().map(|&x| x * x).sum::<T>() - T::one()).abs();
        if drift > T::lit(1e-6) {
            return Err(Error::NormDrift { drift: drift.to_f64().unwrap_or(f64::NAN) });
        }
        out.push(state.clone());
    }
    Ok(out)
}

/// Krylov complexity, its rate, dispersion and the dispersion bound per time point.
#[derive(Debug, Clone)]
pub struct ComplexityProfile<T> {
    pub times: Vec<T>,
    pub complexity: Vec<T>,
    pub rate: Vec<T>,
    pub dispersion: Vec<T>,
    /// `2 b_1 ΔK`
    pub bound: Vec<T>,
    /// `|dK/dt| / bound`, `None` where the bound vanishes.
    pub ratio: Vec<Option<T>>,
    /// `ΔK / |dK/dt|`, `None` where the rate vanishes.
    pub tau_k: Vec<Option<T>>,
    pub b1: T,
}

impl<T: Real> ComplexityProfile<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest defined saturation ratio.
    pub fn max_ratio(&self) -> Option<T> {
        self.ratio.iter().flatten().copied().reduce(T::max)
    }

    /// Smallest defined saturation ratio.
    pub fn min_ratio(&self) -> Option<T> {
        self.ratio.iter().flatten().copied().reduce(T::min)
    }

    /// Columns `t,K,rate,dispersion,bound,ratio`; undefined ratios print as `NaN`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,K,rate,dispersion,bound,ratio\n");
        for i in 0..self.len() {
            let ratio = self.ratio[i].map(crate::fmt_sci).unwrap_or_else(|| "NaN".into());
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                crate::fmt_sci(self.times[i]),
                crate::fmt_sci(self.complexity[i]),
                crate::fmt_sci(self.rate[i]),
                crate::fmt_sci(self.dispersion[i]),
                crate::fmt_sci(self.bound[i]),
                ratio
            );
        }
        s
    }
}

/// Observables at a single amplitude vector.
fn point_observables<T: Real>(b: &[T], phi: &[T]) -> (T, T, T) {
    let k = phi.iter().enumerate().map(|(n, &p)| T::from_usize_lossy(n) * p * p).sum::<T>();
    let var = phi
        .iter()
        .enumerate()
        .map(|(n, &p)| {
            let dn = T::from_usize_lossy(n) - k;
            dn * dn * p * p
        })
        .sum::<T>();
    // dK/dt = 2 Σ_m m φ_m (b_m φ_{m-1} - b_{m+1} φ_{m+1}) = 2 Σ_m b_{m+1} φ_m φ_{m+1}
    let rate = T::lit(2.0) * b.iter().zip(phi.windows(2)).map(|(&bm, w)| bm * w[0] * w[1]).sum::<T>();
    (k, rate, var.max(T::zero()).sqrt())
}

pub fn complexity_profile<T: Real>(traj: &AmplitudeTrajectory<T>) -> ComplexityProfile<T> {
    let b1 = traj.b1();
    let cut = T::lit(UNDEFINED_REL_TOL) * b1;
    let n = traj.times.len();
    let mut p = ComplexityProfile {
        times: traj.times.clone(),
        complexity: Vec::with_capacity(n),
        rate: Vec::with_capacity(n),
        dispersion: Vec::with_capacity(n),
        bound: Vec::with_capacity(n),
        ratio: Vec::with_capacity(n),
        tau_k: Vec::with_capacity(n),
        b1,
    };
    for phi in &traj.phi {
        let (k, rate, dk) = point_observables(&traj.b, phi);
        let bound = T::lit(2.0) * b1 * dk;
        p.complexity.push(k);
        p.rate.push(rate);
        p.dispersion.push(dk);
        p.bound.push(bound);
        p.ratio.push((b1 > T::zero() && bound > cut).then(|| rate.abs() / bound));
        p.tau_k.push((b1 > T::zero() && rate.abs() > cut).then(|| dk / rate.abs()));
    }
    p
}

/// `2 Re (O(t)| K L |O(t))`, evaluated from the explicit matrix elements of
/// `K L` with the complex Krylov components `i^n φ_n`.
pub fn anticommutator_expectation<T: Real>(traj: &AmplitudeTrajectory<T>, k: usize) -> T {
    let psi = traj.complex_state(k);
    let mut acc: C<T> = czero();
    for (n, &bn1) in traj.b.iter().enumerate() {
        // K L = Σ_n b_{n+1} [ n |n><n+1| + (n+1) |n+1><n| ]
        let nn = T::from_usize_lossy(n);
        acc = acc + psi[n].conj() * psi[n + 1] * (bn1 * nn);
        acc = acc + psi[n + 1].conj() * psi[n] * (bn1 * (nn + T::one()));
    }
    T::lit(2.0) * acc.re
}

/// `(<L>_t, <L²>_t)` in the Krylov representation.
pub fn liouvillian_moments<T: Real>(traj: &AmplitudeTrajectory<T>, k: usize) -> (T, T) {
    let psi = traj.complex_state(k);
    let n = psi.len();
    let mut l_psi = vec![czero::<T>(); n];
    for (m, &bm1) in traj.b.iter().enumerate() {
        l_psi[m] = l_psi[m] + psi[m + 1] * bm1;
        l_psi[m + 1] = l_psi[m + 1] + psi[m] * bm1;
    }
    let mean: C<T> = psi.iter().zip(&l_psi).map(|(a, b)| a.conj() * b).sum();
    let second: Vec<T> = l_psi.iter().map(|z| z.norm_sqr()).collect();
    (mean.re, pairwise_sum(&second))
}

/// Coefficients `(c2, c4)` of `K(t) = c2 t² + c4 t⁴ + O(t⁶)`.
///
/// `c4 = b1² (b2² - 2 b1²) / 6`, fixed by Taylor-expanding the chain
/// dynamics (it reproduces `2 sin² t`, `t²` and `sinh² t` for the qubit,
/// Heisenberg–Weyl and `b_n = n` chains).
pub fn short_time_coefficients<T: Real>(b1: T, b2: T) -> (T, T) {
    let (s1, s2) = (b1 * b1, b2 * b2);
    (s1, s1 * (s2 - T::lit(2.0) * s1) / T::lit(6.0))
}

/// Sixth-order coefficient of `K(t)`:
/// `b1² (8 b1⁴ + b1² b2² - 7 b2⁴ + 3 b2² b3²) / 180`.
pub fn sixth_order_coefficient<T: Real>(b1: T, b2: T, b3: T) -> T {
    let (s1, s2, s3) = (b1 * b1, b2 * b2, b3 * b3);
    s1 * (T::lit(8.0) * s1 * s1 + s1 * s2 - T::lit(7.0) * s2 * s2 + T::lit(3.0) * s2 * s3) / T::lit(180.0)
}

/// Time at which the fifth-order term of `dK/dt` matches the third-order one
/// in magnitude: `τ_d² = |4 c4| / |6 c6|`.
pub fn deviation_time<T: Real>(b1: T, b2: T, b3: T) -> Result<T> {
    for (name, v) in [("b1", b1), ("b2", b2), ("b3", b3)] {
        if !(v > T::zero()) {
            return Err(Error::DeviationTimeUndefined(format!("{name} must be positive")));
        }
    }
    let (_, c4) = short_time_coefficients(b1, b2);
    let c6 = sixth_order_coefficient(b1, b2, b3);
    let scale = b1.max(b2).max(b3);
    let tiny = T::lit(UNDEFINED_REL_TOL);
    if c4.abs() <= tiny * b1 * b1 * scale * scale {
        return Err(Error::DeviationTimeUndefined("fourth-order coefficient vanishes".into()));
    }
    if c6.abs() <= tiny * b1 * b1 * scale.powi(4) {
        return Err(Error::DeviationTimeUndefined("sixth-order coefficient vanishes".into()));
    }
    Ok((T::lit(4.0) * c4.abs() / (T::lit(6.0) * c6.abs())).sqrt())
}

/// The closed-form deviation-time expression as it is usually quoted,
/// kept for comparison with [`deviation_time`]. It is not dimensionally
/// homogeneous (invariant under `b -> s b`).
pub fn deviation_time_printed<T: Real>(b1: T, b2: T, b3: T) -> Result<T> {
    let (s1, s2, s3) = (b1 * b1, b2 * b2, b3 * b3);
    let num = T::lit(2.0 / 3.0) * s1 * (T::lit(2.0) * s2 - s1);
    let den = s1 * (s1 + s2) / T::lit(20.0) - s2 * (s1 + s2 + s3) / T::lit(5.0) + s2 * s3 / T::lit(2.0);
    if den == T::zero() || !(num / den > T::zero()) {
        return Err(Error::DeviationTimeUndefined("non-positive radicand".into()));
    }
    Ok((num / den).sqrt())
}

/// [`deviation_time`] from a coefficient list; needs `D >= 4`.
pub fn deviation_time_from<T: Real>(b: &[T]) -> Result<T> {
    if b.len() < 3 {
        return Err(Error::DeviationTimeUndefined(format!("needs b_1..b_3, Krylov dimension is {}", b.len() + 1)));
    }
    deviation_time(b[0], b[1], b[2])
}

/// Uniform grid of `steps` points on `[0, t_max]`.
pub fn time_grid<T: Real>(t_max: T, steps: usize) -> Result<Vec<T>> {
    if !(t_max > T::zero()) {
        return Err(Error::invalid("tmax", "must be positive"));
    }
    if steps < 2 {
        return Err(Error::invalid("steps", "must be at least 2"));
    }
    let last = T::from_usize_lossy(steps - 1);
    Ok((0..steps).map(|i| t_max * T::from_usize_lossy(i) / last).collect())
}
