//! Gaussian orthogonal ensemble experiments.
//!
//! Each realization draws `X` with i.i.d. `N(0, σ²)` entries, forms
//! `H = (X + Xᵀ)/2`, diagonalizes it and runs Lanczos on the Liouvillian
//! eigenbasis starting from the uniform observable (every component
//! `1/d`). Realization `i` draws from ChaCha20 seeded with
//! `seed_from_u64(seed)` on stream `i`, so the whole pipeline is a pure
//! function of [`GoeSpec`] regardless of the worker count.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{complexity_profile, deviation_time_from, KrylovPropagator};
use crate::error::{Error, Result};
use crate::lanczos::{lanczos, DiagonalLiouvillian, LanczosOptions, ReorthMode, ReorthPolicy, DEFAULT_HALT_TOL};
use crate::linalg::DenseMatrix;
use crate::operator::{HermitianMatrix, InnerProductSpec, OperatorVector};
use crate::scalar::{cre, czero, pairwise_sum, Real, C};

/// Name of the generator behind [`goe_sample`], recorded in artifacts.
pub const GENERATOR: &str = "ChaCha20 (rand_chacha 0.9, seed_from_u64, stream = realization index), StandardNormal (rand_distr 0.5)";

/// Draws a GOE matrix on stream 0 of `seed`.
pub fn goe_sample<T: Real>(d: usize, sigma: T, seed: u64) -> Result<HermitianMatrix<T>> {
    goe_sample_stream(d, sigma, seed, 0)
}

/// Draws a GOE matrix from a given ChaCha20 stream.
///
/// `X` is filled row by row (`X[0][0], X[0][1], ...`).
pub fn goe_sample_stream<T: Real>(d: usize, sigma: T, seed: u64, stream: u64) -> Result<HermitianMatrix<T>> {
    if d < 2 {
        return Err(Error::invalid("d", "must be at least 2"));
    }
    if !(sigma > T::zero()) {
        return Err(Error::invalid("sigma", "must be positive"));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut x = vec![T::zero(); d * d];
    for i in 0..d {
        for j in 0..d {
            let z: f64 = StandardNormal.sample(&mut rng);
            x[i * d + j] = sigma * T::lit(z);
        }
    }
    let half = T::lit(0.5);
    let mut h = vec![T::zero(); d * d];
    for i in 0..d {
        for j in 0..d {
            h[i + j * d] = (x[i * d + j] + x[j * d + i]) * half;
        }
    }
    HermitianMatrix::from_real(d, &h)
}

/// Eigen-operators `|i><j|` of the Liouvillian, ordered lexicographically
/// by `(i, j)` with energies ascending (ties by index).
#[derive(Debug, Clone)]
pub struct LiouvillianEigenbasis<T> {
    pub energies: Vec<T>,
    pub vectors: DenseMatrix<C<T>>,
}

impl<T: Real> LiouvillianEigenbasis<T> {
    pub fn new(h: &HermitianMatrix<T>) -> Result<Self> {
        let eig = h.eigen()?;
        Ok(Self { energies: eig.values, vectors: eig.vectors })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `E_i - E_j` in `(i, j)` lexicographic order.
    pub fn frequencies(&self) -> Vec<T> {
        let e = &self.energies;
        e.iter().flat_map(|&ei| e.iter().map(move |&ej| ei - ej)).collect()
    }

    pub fn diagonal_liouvillian(&self) -> DiagonalLiouvillian<T> {
        DiagonalLiouvillian::new(self.frequencies())
    }

    /// Operator `Σ_ij c_(i,j) |i><j|` in the original basis, column-major.
    pub fn synthesize(&self, coeffs: &[T]) -> Vec<C<T>> {
        let d = self.dim();
        let mut out = vec![czero(); d * d];
        for i in 0..d {
            for j in 0..d {
                let c = coeffs[i * d + j];
                if c == T::zero() {
                    continue;
                }
                for col in 0..d {
                    let right = self.vectors.get(col, j).conj() * c;
                    for row in 0..d {
                        out[row + col * d] = out[row + col * d] + self.vectors.get(row, i) * right;
                    }
                }
            }
        }
        out
    }
}

/// Uniform start vector in the eigen-operator basis: `d²` components `1/d`.
pub fn uniform_coefficients<T: Real>(d: usize) -> Vec<T> {
    vec![T::one() / T::from_usize_lossy(d); d * d]
}

/// The uniform observable in the original basis. Its inner product is the
/// un-normalized Hilbert–Schmidt one, under which it has unit norm.
pub fn uniform_observable<T: Real>(h: &HermitianMatrix<T>) -> Result<OperatorVector<T>> {
    let basis = LiouvillianEigenbasis::new(h)?;
    let d = h.dim();
    let comps = basis.synthesize(&uniform_coefficients(d));
    OperatorVector::new(d, comps, InnerProductSpec::new(T::zero(), T::one())?)
}

/// Ensemble description; the full pipeline is a pure function of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoeSpec<T> {
    pub d: usize,
    pub sigma: T,
    pub count: usize,
    pub seed: u64,
    pub reorth: ReorthMode,
    pub reorth_threshold: T,
    pub halt_tol: T,
    /// Shared grid for per-realization profiles and the averaged `K(t)`.
    pub times: Option<Vec<T>>,
    /// Grid size on `[0, 5 τ_d]` for the per-realization [`DeviationReport`].
    pub deviation_samples: Option<usize>,
}

impl<T: Real> GoeSpec<T> {
    pub fn new(d: usize, sigma: T, count: usize, seed: u64) -> Self {
        let policy = ReorthPolicy::<T>::default_for(d * d);
        Self {
            d,
            sigma,
            count,
            seed,
            reorth: policy.mode,
            reorth_threshold: policy.threshold,
            halt_tol: T::lit(DEFAULT_HALT_TOL),
            times: None,
            deviation_samples: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::invalid("d", "must be at least 2"));
        }
        if self.count < 1 {
            return Err(Error::invalid("count", "must be at least 1"));
        }
        if !(self.sigma > T::zero()) {
            return Err(Error::invalid("sigma", "must be positive"));
        }
        if !(self.halt_tol > T::zero()) {
            return Err(Error::invalid("halt_tol", "must be positive"));
        }
        ReorthPolicy::new(self.reorth, Some(self.reorth_threshold))?;
        Ok(())
    }

    fn options(&self) -> LanczosOptions<T> {
        let policy = ReorthPolicy { mode: self.reorth, threshold: self.reorth_threshold };
        LanczosOptions::new(policy).halt_tol(self.halt_tol)
    }
}

/// Outcome of one realization (coefficients only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization<T> {
    pub index: usize,
    #[serde(rename = "D")]
    pub krylov_dim: usize,
    pub b: Vec<T>,
    pub truncated: bool,
    pub deviation_time: Option<T>,
    /// Largest saturation ratio on the shared grid.
    pub max_ratio: Option<T>,
    /// `K(t)` on the shared grid.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complexity: Option<Vec<T>>,
    pub deviation: Option<DeviationReport<T>>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult<T> {
    pub spec: GoeSpec<T>,
    pub generator: String,
    pub realizations: Vec<Realization<T>>,
    /// `<b_n²>` for `n = 1..min(D) - 1` over successful realizations.
    pub mean_b_sq: Vec<T>,
    pub std_b_sq: Vec<T>,
    /// Krylov dimension -> number of realizations.
    pub d_histogram: BTreeMap<usize, usize>,
    pub failed: usize,
    /// Pointwise average of `K(t)` on the shared grid.
    pub mean_complexity: Option<Vec<T>>,
}

impl<T: Real> EnsembleResult<T> {
    /// `n,mean_b_sq,std_b_sq`
    pub fn summary_csv(&self) -> String {
        let mut s = String::from("n,mean_b_sq,std_b_sq\n");
        for (i, (m, sd)) in self.mean_b_sq.iter().zip(&self.std_b_sq).enumerate() {
            let _ = writeln!(s, "{},{},{}", i + 1, crate::fmt_sci(*m), crate::fmt_sci(*sd));
        }
        s
    }

    pub fn successful(&self) -> impl Iterator<Item = &Realization<T>> {
        self.realizations.iter().filter(|r| r.failure.is_none())
    }
}

fn run_realization<T: Real>(spec: &GoeSpec<T>, index: usize) -> Realization<T> {
    let mut out = Realization {
        index,
        krylov_dim: 0,
        b: Vec::new(),
        truncated: false,
        deviation_time: None,
        max_ratio: None,
        complexity: None,
        deviation: None,
        failure: None,
    };
    let mut attempt = || -> Result<()> {
        let h = goe_sample_stream(spec.d, spec.sigma, spec.seed, index as u64)?;
        let basis = LiouvillianEigenbasis::new(&h)?;
        let space = basis.diagonal_liouvillian();
        let res = lanczos(&space, &uniform_coefficients(spec.d), &spec.options())?;
        out.krylov_dim = res.krylov_dim;
        out.truncated = res.truncated;
        out.b = res.b;
        out.deviation_time = deviation_time_from(&out.b).ok();
        if spec.times.is_none() && spec.deviation_samples.is_none() {
            return Ok(());
        }
        let prop = KrylovPropagator::new(&out.b)?;
        if let Some(times) = &spec.times {
            let prof = complexity_profile(&prop.trajectory(times, false));
            out.max_ratio = prof.max_ratio();
            out.complexity = Some(prof.complexity);
        }
        if let Some(samples) = spec.deviation_samples {
            let rep = deviation_report_with(&prop, samples)?;
            if rep.max_ratio > T::one() + T::lit(1e-8) {
                out.max_ratio = Some(rep.max_ratio);
            }
            out.deviation = Some(rep);
        }
        Ok(())
    };
    if let Err(e) = attempt() {
        out.failure = Some(e.to_string());
        return out;
    }
    let cap = spec.d * spec.d - spec.d + 1;
    if out.krylov_dim > cap {
        out.failure = Some(format!("Krylov dimension {} exceeds d² - d + 1 = {cap}", out.krylov_dim));
    } else if out.max_ratio.is_some_and(|r| r > T::one() + T::lit(1e-8)) {
        out.failure = Some("dispersion bound violated".into());
    }
    out
}

/// Runs the ensemble on `workers` threads (`None`: rayon's default).
pub fn run_ensemble<T: Real>(spec: &GoeSpec<T>, workers: Option<usize>) -> Result<EnsembleResult<T>> {
    spec.validate()?;
    let job = || (0..spec.count).into_par_iter().map(|i| run_realization(spec, i)).collect::<Vec<_>>();
    let realizations = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::invalid("workers", e.to_string()))?
            .install(job),
        None => job(),
    };
    Ok(aggregate(spec.clone(), realizations))
}

fn aggregate<T: Real>(spec: GoeSpec<T>, realizations: Vec<Realization<T>>) -> EnsembleResult<T> {
    let ok: Vec<&Realization<T>> = realizations.iter().filter(|r| r.failure.is_none()).collect();
    let mut d_histogram = BTreeMap::new();
    for r in &ok {
        *d_histogram.entry(r.krylov_dim).or_insert(0) += 1;
    }
    let len = ok.iter().map(|r| r.b.len()).min().unwrap_or(0);
    let count = T::from_usize_lossy(ok.len().max(1));
    let mut mean_b_sq = Vec::with_capacity(len);
    let mut std_b_sq = Vec::with_capacity(len);
    for n in 0..len {
        let col: Vec<T> = ok.iter().map(|r| r.b[n] * r.b[n]).collect();
        let mean = pairwise_sum(&col) / count;
        let dev: Vec<T> = col.iter().map(|&x| (x - mean) * (x - mean)).collect();
        mean_b_sq.push(mean);
        std_b_sq.push((pairwise_sum(&dev) / count).sqrt());
    }
    let mean_complexity = spec.times.as_ref().map(|times| {
        (0..times.len())
            .map(|k| {
                let col: Vec<T> = ok.iter().filter_map(|r| r.complexity.as_ref().map(|c| c[k])).collect();
                pairwise_sum(&col) / T::from_usize_lossy(col.len().max(1))
            })
            .collect()
    });
    let failed = realizations.len() - ok.len();
    EnsembleResult {
        spec,
        generator: GENERATOR.to_string(),
        realizations,
        mean_b_sq,
        std_b_sq,
        d_histogram,
        failed,
        mean_complexity,
    }
}

/// Saturation-ratio summary around the deviation time of one chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport<T> {
    pub tau_d: T,
    /// Minimum defined ratio on `(0, τ_d / 2]`.
    pub min_ratio_early: T,
    /// Minimum defined ratio on `[τ_d, 5 τ_d]`.
    pub min_ratio_late: T,
    /// Maximum defined ratio on `[0, 5 τ_d]`.
    pub max_ratio: T,
}

/// Evolves `b` on `samples` uniform points of `[0, 5 τ_d]` and summarizes
/// the saturation ratio before and after the deviation time.
pub fn deviation_report<T: Real>(b: &[T], samples: usize) -> Result<DeviationReport<T>> {
    deviation_report_with(&KrylovPropagator::new(b)?, samples)
}

/// [`deviation_report`] reusing an existing propagator.
pub fn deviation_report_with<T: Real>(prop: &KrylovPropagator<T>, samples: usize) -> Result<DeviationReport<T>> {
    let tau_d = deviation_time_from(prop.coefficients())?;
    let times = crate::dynamics::time_grid(T::lit(5.0) * tau_d, samples.max(11))?;
    let prof = complexity_profile(&prop.trajectory(&times, false));
    let half = tau_d / T::lit(2.0);
    let pick = |lo: T, hi: T, f: fn(T, T) -> T, init: T| {
        prof.times
            .iter()
            .zip(&prof.ratio)
            .filter(|(&t, r)| t >= lo && t <= hi && r.is_some())
            .map(|(_, r)| r.expect("filtered"))
            .fold(init, f)
    };
    Ok(DeviationReport {
        tau_d,
        min_ratio_early: pick(T::zero(), half, T::min, T::infinity()),
        min_ratio_late: pick(tau_d, T::lit(5.0) * tau_d, T::min, T::infinity()),
        max_ratio: pick(T::zero(), T::lit(5.0) * tau_d, T::max, T::neg_infinity()),
    })
}

/// Reference for [`uniform_observable`]: the uniform vector written
/// directly in the eigen-operator basis as complex components.
pub fn uniform_components_complex<T: Real>(d: usize) -> Vec<C<T>> {
    uniform_coefficients::<T>(d).into_iter().map(cre).collect()
}
