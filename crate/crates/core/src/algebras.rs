//! Closed complexity algebras: the SU(2), Heisenberg–Weyl and SL(2,R)
//! families, the Lanczos law `b_n = sqrt(α n (n-1) / 4 + γ n / 2)` that
//! characterizes them, and the closure test on arbitrary coefficients.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::{AmplitudeTrajectory, Truncation};
use crate::error::{Error, Result};
use crate::scalar::{pairwise_sum, Real};

/// Missing-mass limit for closed-form amplitudes on a truncated lattice.
pub const MODEL_TAIL_TOL: f64 = 1e-9;

/// Default tolerance of [`closure_test`] and [`classify_algebra`].
pub const DEFAULT_CLOSURE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KrylovDim {
    Finite(usize),
    Infinite,
}

impl KrylovDim {
    pub fn finite(self) -> Option<usize> {
        match self {
            Self::Finite(d) => Some(d),
            Self::Infinite => None,
        }
    }
}

impl fmt::Display for KrylovDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(d) => write!(f, "{d}"),
            Self::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlgebraKind {
    #[serde(rename = "SU2")]
    Su2,
    #[serde(rename = "HW")]
    HeisenbergWeyl,
    #[serde(rename = "SL2R")]
    Sl2r,
}

impl fmt::Display for AlgebraKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Su2 => "SU2",
            Self::HeisenbergWeyl => "HW",
            Self::Sl2r => "SL2R",
        })
    }
}

/// One of the three saturating families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlgebraModel<T> {
    /// Spin `j` (integer or half-integer), frequency `nu`; `D = 2j + 1`.
    Su2 { j: T, nu: T },
    HeisenbergWeyl { nu: T },
    /// `b_n = nu sqrt(n (n - 1 + eta))`; the large-q SYK family.
    Sl2r { eta: T, nu: T },
}

impl<T: Real> AlgebraModel<T> {
    pub fn su2(j: T, nu: T) -> Result<Self> {
        let m = Self::Su2 { j, nu };
        m.validate()?;
        Ok(m)
    }

    pub fn heisenberg_weyl(nu: T) -> Result<Self> {
        let m = Self::HeisenbergWeyl { nu };
        m.validate()?;
        Ok(m)
    }

    pub fn sl2r(eta: T, nu: T) -> Result<Self> {
        let m = Self::Sl2r { eta, nu };
        m.validate()?;
        Ok(m)
    }

    /// Model whose coefficients follow the saturating law for `(alpha, gamma)`.
    pub fn from_closure(alpha: T, gamma: T, dim: KrylovDim) -> Result<Self> {
        if !(gamma > T::zero()) {
            return Err(Error::invalid("gamma", "must be positive"));
        }
        match dim {
            KrylovDim::Finite(d) => {
                check_finite_consistency(alpha, gamma, d)?;
                let dm1 = T::from_usize_lossy(d - 1);
                let omega = (gamma / (T::lit(2.0) * dm1)).sqrt();
                Self::su2(dm1 / T::lit(2.0), omega)
            }
            KrylovDim::Infinite if alpha > T::zero() => {
                Self::sl2r(T::lit(2.0) * gamma / alpha, alpha.sqrt() / T::lit(2.0))
            }
            KrylovDim::Infinite if alpha == T::zero() => Self::heisenberg_weyl((gamma / T::lit(2.0)).sqrt()),
            KrylovDim::Infinite => Err(Error::invalid("alpha", "must be non-negative for an infinite Krylov space")),
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |field: &'static str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(field, "must be positive and finite"))
            }
        };
        match *self {
            Self::Su2 { j, nu } => {
                positive("nu", nu)?;
                positive("j", j)?;
                let two_j = j * T::lit(2.0);
                if (two_j - two_j.round()).abs() > T::lit(1e-9) {
                    return Err(Error::invalid("j", "2j must be a positive integer"));
                }
                Ok(())
            }
            Self::HeisenbergWeyl { nu } => positive("nu", nu),
            Self::Sl2r { eta, nu } => {
                positive("eta", eta)?;
                positive("nu", nu)
            }
        }
    }

    pub fn kind(&self) -> AlgebraKind {
        match self {
            Self::Su2 { .. } => AlgebraKind::Su2,
            Self::HeisenbergWeyl { .. } => AlgebraKind::HeisenbergWeyl,
            Self::Sl2r { .. } => AlgebraKind::Sl2r,
        }
    }

    fn two_j(j: T) -> usize {
        (j * T::lit(2.0)).round().to_usize().expect("validated spin")
    }

    pub fn krylov_dim(&self) -> KrylovDim {
        match *self {
            Self::Su2 { j, .. } => KrylovDim::Finite(Self::two_j(j) + 1),
            _ => KrylovDim::Infinite,
        }
    }

    pub fn alpha(&self) -> T {
        match *self {
            Self::Su2 { nu, .. } => -T::lit(4.0) * nu * nu,
            Self::HeisenbergWeyl { .. } => T::zero(),
            Self::Sl2r { nu, .. } => T::lit(4.0) * nu * nu,
        }
    }

    pub fn gamma(&self) -> T {
        match *self {
            Self::Su2 { j, nu } => T::lit(4.0) * nu * nu * j,
            Self::HeisenbergWeyl { nu } => T::lit(2.0) * nu * nu,
            Self::Sl2r { eta, nu } => T::lit(2.0) * nu * nu * eta,
        }
    }

    /// `b_n` for `n >= 1`; zero at and beyond `D` for SU(2).
    pub fn lanczos_coefficient(&self, n: usize) -> T {
        let nf = T::from_usize_lossy(n);
        match *self {
            Self::Su2 { j, nu } => {
                let d = Self::two_j(j) + 1;
                if n >= d {
                    T::zero()
                } else {
                    nu * (nf * T::from_usize_lossy(d - n)).sqrt()
                }
            }
            Self::HeisenbergWeyl { nu } => nu * nf.sqrt(),
            Self::Sl2r { eta, nu } => nu * (nf * (nf - T::one() + eta)).sqrt(),
        }
    }

    /// `b_1..b_{count}` (capped at `D - 1` for SU(2)).
    pub fn coefficients(&self, count: usize) -> Vec<T> {
        let count = match self.krylov_dim() {
            KrylovDim::Finite(d) => count.min(d - 1),
            KrylovDim::Infinite => count,
        };
        (1..=count).map(|n| self.lanczos_coefficient(n)).collect()
    }

    /// Evolves the model's chain numerically (exact for SU(2), truncated otherwise).
    pub fn evolve(
        &self,
        times: &[T],
        method: crate::dynamics::EvolutionMethod<T>,
        truncation: Truncation,
    ) -> Result<AmplitudeTrajectory<T>> {
        match self.krylov_dim() {
            KrylovDim::Finite(d) => crate::dynamics::evolve_amplitudes(&self.coefficients(d - 1), times, method),
            KrylovDim::Infinite => crate::dynamics::evolve_family(|n| self.lanczos_coefficient(n), times, method, truncation),
        }
    }
}

impl<T: Real> fmt::Display for AlgebraModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Su2 { j, nu } => write!(f, "su2:j={j},nu={nu}"),
            Self::HeisenbergWeyl { nu } => write!(f, "hw:nu={nu}"),
            Self::Sl2r { eta, nu } => write!(f, "syk:eta={eta},nu={nu}"),
        }
    }
}

/// Parses `su2:j=..,nu=..`, `hw:nu=..`, `syk:eta=..,nu=..` and
/// `sat:alpha=..,gamma=..[,D=..]`.
impl<T: Real + FromStr> FromStr for AlgebraModel<T> {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let fail = |reason: &str| Error::ModelSpec { spec: spec.to_string(), reason: reason.to_string() };
        let (kind, rest) = spec.split_once(':').ok_or_else(|| fail("expected `<kind>:<key>=<value>,...`"))?;
        let mut fields: Vec<(&str, &str)> = Vec::new();
        for part in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| fail("expected key=value"))?;
            fields.push((k.trim(), v.trim()));
        }
        let allowed: &[&str] = match kind.trim() {
            "su2" => &["j", "nu"],
            "hw" => &["nu"],
            "syk" | "sl2r" => &["eta", "nu"],
            "sat" => &["alpha", "gamma", "D"],
            _ => return Err(fail("unknown kind; expected su2, hw, syk or sat")),
        };
        if let Some((k, _)) = fields.iter().find(|(k, _)| !allowed.contains(k)) {
            return Err(fail(&format!("unexpected key `{k}`")));
        }
        let get = |key: &str| -> Result<Option<T>> {
            match fields.iter().find(|(k, _)| *k == key) {
                None => Ok(None),
                Some((_, v)) => v.parse::<T>().map(Some).map_err(|_| fail(&format!("`{key}` is not a number"))),
            }
        };
        let need = |key: &str| -> Result<T> { get(key)?.ok_or_else(|| fail(&format!("missing `{key}`"))) };
        match kind.trim() {
            "su2" => Self::su2(need("j")?, need("nu")?),
            "hw" => Self::heisenberg_weyl(need("nu")?),
            "syk" | "sl2r" => Self::sl2r(need("eta")?, need("nu")?),
            _ => {
                let dim = match fields.iter().find(|(k, _)| *k == "D") {
                    None => KrylovDim::Infinite,
                    Some((_, v)) if *v == "inf" => KrylovDim::Infinite,
                    Some((_, v)) => KrylovDim::Finite(v.parse::<usize>().map_err(|_| fail("`D` is not a positive integer"))?),
                };
                Self::from_closure(need("alpha")?, need("gamma")?, dim)
            }
        }
    }
}

fn check_finite_consistency<T: Real>(alpha: T, gamma: T, d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::invalid("D", "finite Krylov dimension must be at least 2"));
    }
    let expect = -T::lit(2.0) * gamma / T::from_usize_lossy(d - 1);
    let tol = T::lit(1e-9) * T::one().max(alpha.abs());
    if (alpha - expect).abs() > tol {
        return Err(Error::invalid("alpha", format!("finite D = {d} requires alpha = -2 gamma / (D - 1) = {expect}")));
    }
    Ok(())
}

/// `sqrt(α n (n - 1) / 4 + γ n / 2)`.
pub fn saturating_b<T: Real>(alpha: T, gamma: T, n: usize) -> Result<T> {
    if !(gamma > T::zero()) {
        return Err(Error::invalid("gamma", "must be positive"));
    }
    if n == 0 {
        return Err(Error::invalid("n", "coefficients are indexed from 1"));
    }
    let nf = T::from_usize_lossy(n);
    let rad = alpha * nf * (nf - T::one()) / T::lit(4.0) + gamma * nf / T::lit(2.0);
    let tol = T::lit(64.0) * T::epsilon() * (alpha.abs() * nf * nf + gamma * nf);
    if rad < -tol {
        return Err(Error::BeyondKrylovDimension {
            n,
            alpha: alpha.to_f64().unwrap_or(f64::NAN),
            gamma: gamma.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(rad.max(T::zero()).sqrt())
}

/// Result of [`closure_test`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureReport<T> {
    pub closed: bool,
    pub alpha: T,
    pub gamma: T,
    /// `max_n |f(n) - mean f|`
    pub max_residual: T,
    pub f_values: Vec<T>,
    /// Fewer than two `f` values: constancy is not constrained.
    #[serde(default)]
    pub underdetermined: bool,
}

impl<T: Real> ClosureReport<T> {
    pub fn classify(&self, tol: T) -> AlgebraKind {
        classify_algebra(self.alpha, tol)
    }
}

/// Tests whether `f(n) = (b²_{n+1} - b²_n) - (b²_{n+2} - b²_{n+1})` is
/// constant, with `b_0 = 0` and, for finite `D`, `b_D = 0`.
///
/// When it is, `f = -α/2` and `γ = 2 b_1²`, so that
/// `b_n² = α n(n-1)/4 + γ n/2`.
pub fn closure_test<T: Real>(b: &[T], dim: KrylovDim, tol: T) -> ClosureReport<T> {
    let mut sq: Vec<T> = std::iter::once(T::zero()).chain(b.iter().map(|&x| x * x)).collect();
    if let KrylovDim::Finite(d) = dim {
        if b.len() + 1 == d {
            sq.push(T::zero());
        }
    }
    let f_values: Vec<T> = sq
        .windows(3)
        .map(|w| (w[1] - w[0]) - (w[2] - w[1]))
        .collect();
    let b1_sq = sq.get(1).copied().unwrap_or_else(T::zero);
    if f_values.is_empty() {
        return ClosureReport { closed: true, alpha: T::zero(), gamma: T::lit(2.0) * b1_sq, max_residual: T::zero(), f_values, underdetermined: true };
    }
    let mean = pairwise_sum(&f_values) / T::from_usize_lossy(f_values.len());
    let max_residual = f_values.iter().map(|&f| (f - mean).abs()).fold(T::zero(), T::max);
    let alpha = -T::lit(2.0) * mean;
    let gamma = T::lit(2.0) * b1_sq;
    let closed = max_residual <= tol && gamma >= -tol;
    ClosureReport { closed, alpha, gamma, max_residual, f_values, underdetermined: sq.len() < 4 }
}

pub fn classify_algebra<T: Real>(alpha: T, tol: T) -> AlgebraKind {
    if alpha < -tol {
        AlgebraKind::Su2
    } else if alpha > tol {
        AlgebraKind::Sl2r
    } else {
        AlgebraKind::HeisenbergWeyl
    }
}

/// Solution of `K'' = α K + γ` with `K(0) = 0`, `K` even.
pub fn saturated_complexity<T: Real>(alpha: T, gamma: T, dim: KrylovDim, t: T) -> Result<T> {
    if !(gamma > T::zero()) {
        return Err(Error::invalid("gamma", "must be positive"));
    }
    let two = T::lit(2.0);
    match dim {
        KrylovDim::Finite(d) => {
            check_finite_consistency(alpha, gamma, d)?;
            let dm1 = T::from_usize_lossy(d - 1);
            let omega = (gamma / (two * dm1)).sqrt();
            let s = (omega * t).sin();
            Ok(dm1 * s * s)
        }
        KrylovDim::Infinite if alpha > T::zero() => {
            let s = (alpha.sqrt() * t / two).sinh();
            Ok(two * gamma / alpha * s * s)
        }
        KrylovDim::Infinite if alpha == T::zero() => Ok(gamma * t * t / two),
        KrylovDim::Infinite => Err(Error::invalid("alpha", "must be non-negative for an infinite Krylov space")),
    }
}

/// Closed-form amplitudes of the coherent-state evolution.
pub fn model_amplitudes<T: Real>(model: &AlgebraModel<T>, times: &[T], truncation: Option<usize>) -> Result<AmplitudeTrajectory<T>> {
    let size = match model.krylov_dim() {
        KrylovDim::Finite(d) => d,
        KrylovDim::Infinite => truncation.ok_or_else(|| Error::invalid("truncation", "required for infinite Krylov dimension"))?,
    };
    if size == 0 {
        return Err(Error::invalid("truncation", "must be at least 1"));
    }
    // ln n! and the log of the model-specific combinatorial weight, built cumulatively
    let mut log_weight = vec![T::zero(); size];
    for n in 1..size {
        let nf = T::from_usize_lossy(n);
        let step = match *model {
            // C(2j, n) = C(2j, n-1) (2j - n + 1) / n
            AlgebraModel::Su2 { j, .. } => ((T::lit(2.0) * j - nf + T::one()) / nf).ln(),
            AlgebraModel::HeisenbergWeyl { .. } => -nf.ln(),
            // (eta)_n / n! = (eta)_{n-1} / (n-1)! * (eta + n - 1) / n
            AlgebraModel::Sl2r { eta, .. } => ((eta + nf - T::one()) / nf).ln(),
        };
        log_weight[n] = log_weight[n - 1] + step;
    }
    let half = T::lit(0.5);
    let mut phi = Vec::with_capacity(times.len());
    let mut missing = T::zero();
    for &t in times {
        let row: Vec<T> = match *model {
            AlgebraModel::Su2 { j, nu } => {
                let two_j = AlgebraModel::<T>::two_j(j);
                let (s, c) = (nu * t).sin_cos();
                (0..size).map(|n| signed_power_product(half * log_weight[n], s, n, c, two_j - n)).collect()
            }
            AlgebraModel::HeisenbergWeyl { nu } => {
                let x = nu * t;
                let base = -x * x * half;
                (0..size).map(|n| signed_power_product(half * log_weight[n] + base, x, n, T::one(), 0)).collect()
            }
            AlgebraModel::Sl2r { eta, nu } => {
                let x = nu * t;
                let log_sech = -x.cosh().ln();
                let th = x.tanh();
                (0..size)
                    .map(|n| signed_power_product(half * log_weight[n] + eta * log_sech, th, n, T::one(), 0))
                    .collect()
            }
        };
        let mass: T = row.iter().map(|&x| x * x).sum();
        missing = missing.max(T::one() - mass);
        phi.push(row);
    }
    let infinite = model.krylov_dim() == KrylovDim::Infinite;
    if infinite && missing > T::lit(MODEL_TAIL_TOL) {
        return Err(Error::TruncationTooSmall { size, tail: missing.to_f64().unwrap_or(f64::NAN), limit: MODEL_TAIL_TOL });
    }
    let tail = phi
        .iter()
        .map(|p: &Vec<T>| p[p.len().saturating_sub(2)..].iter().map(|&x| x * x).sum::<T>())
        .fold(T::zero(), T::max);
    Ok(AmplitudeTrajectory {
        times: times.to_vec(),
        phi,
        b: model.coefficients(size - 1),
        truncated: infinite,
        tail_mass: tail,
    })
}

/// `exp(log_prefactor) * x^p * y^q`, evaluated in log space with explicit signs.
fn signed_power_product<T: Real>(log_prefactor: T, x: T, p: usize, y: T, q: usize) -> T {
    let factor = |v: T, e: usize| -> Option<(T, bool)> {
        if e == 0 {
            Some((T::zero(), false))
        } else if v == T::zero() {
            None
        } else {
            Some((T::from_usize_lossy(e) * v.abs().ln(), v < T::zero() && e % 2 == 1))
        }
    };
    match (factor(x, p), factor(y, q)) {
        (Some((lx, nx)), Some((ly, ny))) => {
            let mag = (log_prefactor + lx + ly).exp();
            if nx ^ ny {
                -mag
            } else {
                mag
            }
        }
        _ => T::zero(),
    }
}

/// Closed-form `(K, ΔK)`.
pub fn model_observables<T: Real>(model: &AlgebraModel<T>, t: T) -> (T, T) {
    match *model {
        AlgebraModel::Su2 { j, nu } => {
            let s = (nu * t).sin();
            let two_j = T::lit(2.0) * j;
            (two_j * s * s, (j / T::lit(2.0)).sqrt() * (T::lit(2.0) * nu * t).sin().abs())
        }
        AlgebraModel::HeisenbergWeyl { nu } => {
            let x = nu * t;
            (x * x, x.abs())
        }
        AlgebraModel::Sl2r { eta, nu } => {
            // negative binomial in n with p = tanh²: mean η sinh², variance η sinh² cosh²
            let x = nu * t;
            let s = x.sinh();
            (eta * s * s, eta.sqrt() * (s * x.cosh()).abs())
        }
    }
}
