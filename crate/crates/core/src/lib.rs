//! Krylov complexity of operator growth.
//!
//! Operators on a `d`-dimensional Hilbert space are vectors in Liouville
//! space; [`lanczos`] tridiagonalizes the Liouvillian `[H, ·]` from a seed
//! operator, [`dynamics`] evolves the amplitudes on the resulting chain and
//! computes complexity, its growth rate and dispersion, [`algebras`] holds
//! the closed-form SU(2), Heisenberg–Weyl and SL(2,R) chains, and
//! [`ensembles`] runs GOE experiments.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`.

pub mod algebras;
pub mod dynamics;
pub mod ensembles;
pub mod error;
pub mod lanczos;
pub mod linalg;
pub mod operator;
pub mod scalar;

pub use algebras::{
    closure_test, model_amplitudes, saturated_complexity, AlgebraKind, AlgebraModel, ClosureReport, KrylovDim,
};
pub use dynamics::{
    complexity_profile, deviation_time, evolve_amplitudes, evolve_family, AmplitudeTrajectory, ComplexityProfile,
    EvolutionMethod, Truncation,
};
pub use ensembles::{goe_sample, run_ensemble, EnsembleResult, GoeSpec};
pub use error::{Error, Result};
pub use lanczos::{lanczos, run_lanczos, LanczosOptions, LanczosResult, ReorthMode, ReorthPolicy};
pub use operator::{HermitianMatrix, InnerProductSpec, OperatorVector};
pub use scalar::{Real, C};

/// Seventeen significant digits, enough to round-trip an `f64`.
pub fn fmt_sci<T: Real>(x: T) -> String {
    format!("{:.16e}", x.to_f64().unwrap_or(f64::NAN))
}

pub type HermitianMatrix64 = HermitianMatrix<f64>;
pub type OperatorVector64 = OperatorVector<f64>;
pub type InnerProductSpec64 = InnerProductSpec<f64>;
pub type LanczosOptions64 = LanczosOptions<f64>;
pub type LanczosResult64 = LanczosResult<f64, Vec<C<f64>>>;
pub type AmplitudeTrajectory64 = AmplitudeTrajectory<f64>;
pub type ComplexityProfile64 = ComplexityProfile<f64>;
pub type AlgebraModel64 = AlgebraModel<f64>;
pub type ClosureReport64 = ClosureReport<f64>;
pub type GoeSpec64 = GoeSpec<f64>;
pub type EnsembleResult64 = EnsembleResult<f64>;

pub type HermitianMatrix32 = HermitianMatrix<f32>;
pub type OperatorVector32 = OperatorVector<f32>;
pub type AmplitudeTrajectory32 = AmplitudeTrajectory<f32>;
