//! JSON artifacts written by the CLI, with the checks applied on reload.

use std::fmt::Write;

use krylov_core::algebras::{AlgebraKind, ClosureReport};
use krylov_core::dynamics::{AmplitudeTrajectory, ComplexityProfile};
use krylov_core::{fmt_sci, Error, Result};
use serde::{Deserialize, Serialize};

fn opt(x: Option<f64>) -> String {
    x.map(fmt_sci).unwrap_or_else(|| "NaN".into())
}

fn check_len(field: &'static str, n: usize, expect: usize) -> Result<()> {
    if n != expect {
        return Err(Error::InvalidParameter { field, reason: format!("expected {expect} entries, found {n}") });
    }
    Ok(())
}

/// A coefficient chain `b_1..b_{N}`; `D` is absent for infinite models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub source: String,
    #[serde(rename = "D")]
    pub krylov_dim: Option<usize>,
    pub b: Vec<f64>,
    pub truncated: bool,
}

impl Coefficients {
    pub fn validate(&self) -> Result<()> {
        if let Some((i, &v)) = self.b.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::NonPositiveCoefficient { index: i + 1, value: v });
        }
        if let (Some(d), false) = (self.krylov_dim, self.truncated) {
            check_len("b", self.b.len(), d - 1)?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,b_n,b_sq\n");
        for (i, b) in self.b.iter().enumerate() {
            let _ = writeln!(s, "{},{},{}", i + 1, fmt_sci(*b), fmt_sci(b * b));
        }
        s
    }
}

/// Complexity profile on a grid; `saturated` holds the closed-form solution
/// of the saturated growth equation when one applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub source: String,
    pub b1: f64,
    pub tau_d: Option<f64>,
    pub chain_size: usize,
    pub tail_mass: f64,
    pub times: Vec<f64>,
    pub complexity: Vec<f64>,
    pub rate: Vec<f64>,
    pub dispersion: Vec<f64>,
    pub bound: Vec<f64>,
    pub ratio: Vec<Option<f64>>,
    pub tau_k: Vec<Option<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub saturated: Option<Vec<f64>>,
}

impl Profile {
    pub fn new(source: String, traj: &AmplitudeTrajectory<f64>, p: ComplexityProfile<f64>, tau_d: Option<f64>) -> Self {
        Self {
            source,
            b1: p.b1,
            tau_d,
            chain_size: traj.size(),
            tail_mass: traj.tail_mass,
            times: p.times,
            complexity: p.complexity,
            rate: p.rate,
            dispersion: p.dispersion,
            bound: p.bound,
            ratio: p.ratio,
            tau_k: p.tau_k,
            saturated: None,
        }
    }

    pub fn max_ratio(&self) -> Option<f64> {
        self.ratio.iter().flatten().copied().reduce(f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.times.len();
        check_len("complexity", self.complexity.len(), n)?;
        check_len("rate", self.rate.len(), n)?;
        check_len("dispersion", self.dispersion.len(), n)?;
        check_len("bound", self.bound.len(), n)?;
        check_len("ratio", self.ratio.len(), n)?;
        check_len("tau_k", self.tau_k.len(), n)?;
        if let Some(s) = &self.saturated {
            check_len("saturated", s.len(), n)?;
        }
        if !(self.b1 > 0.0) {
            return Err(Error::InvalidParameter { field: "b1", reason: "must be positive".into() });
        }
        Ok(())
    }

    /// `t,K,[K_saturated,]rate,dispersion,bound,ratio,tau_K,tau_d`; undefined entries print as `NaN`.
    pub fn to_csv(&self) -> String {
        let sat = self.saturated.as_ref();
        let mut s = String::from(if sat.is_some() {
            "t,K,K_saturated,rate,dispersion,bound,ratio,tau_K,tau_d\n"
        } else {
            "t,K,rate,dispersion,bound,ratio,tau_K,tau_d\n"
        });
        for i in 0..self.times.len() {
            let _ = write!(s, "{},{},", fmt_sci(self.times[i]), fmt_sci(self.complexity[i]));
            if let Some(sat) = sat {
                let _ = write!(s, "{},", fmt_sci(sat[i]));
            }
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                fmt_sci(self.rate[i]),
                fmt_sci(self.dispersion[i]),
                fmt_sci(self.bound[i]),
                opt(self.ratio[i]),
                opt(self.tau_k[i]),
                opt(self.tau_d)
            );
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `phi[k][n] = φ_n(times[k])`
    pub phi: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub truncated: bool,
    pub tail_mass: f64,
}

impl From<AmplitudeTrajectory<f64>> for Trajectory {
    fn from(t: AmplitudeTrajectory<f64>) -> Self {
        Self { times: t.times, phi: t.phi, b: t.b, truncated: t.truncated, tail_mass: t.tail_mass }
    }
}

impl Trajectory {
    pub fn validate(&self) -> Result<()> {
        check_len("phi", self.phi.len(), self.times.len())?;
        for row in &self.phi {
            check_len("phi", row.len(), self.b.len() + 1)?;
            let norm: f64 = row.iter().map(|x| x * x).sum();
            if (norm - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidParameter { field: "phi", reason: format!("row norm {norm} is not 1") });
            }
        }
        Ok(())
    }

    /// `t,n,phi,phi_sq`
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,n,phi,phi_sq\n");
        for (t, row) in self.times.iter().zip(&self.phi) {
            for (n, p) in row.iter().enumerate() {
                let _ = writeln!(s, "{},{},{},{}", fmt_sci(*t), n, fmt_sci(*p), fmt_sci(p * p));
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Closure {
    #[serde(flatten)]
    pub report: ClosureReport<f64>,
    /// From the sign of alpha.
    pub kind: AlgebraKind,
    #[serde(rename = "D")]
    pub krylov_dim: Option<usize>,
    pub tol: f64,
}

impl Closure {
    pub fn validate(&self) -> Result<()> {
        if self.report.closed && self.report.max_residual > self.tol {
            return Err(Error::InvalidParameter { field: "max_residual", reason: "exceeds tol for a closed report".into() });
        }
        Ok(())
    }

    /// One row: `closed,alpha,gamma,kind,max_residual,D`.
    pub fn to_csv(&self) -> String {
        format!(
            "closed,alpha,gamma,kind,max_residual,D\n{},{},{},{},{},{}\n",
            self.report.closed,
            fmt_sci(self.report.alpha),
            fmt_sci(self.report.gamma),
            self.kind,
            fmt_sci(self.report.max_residual),
            self.krylov_dim.map_or_else(|| "inf".into(), |d| d.to_string())
        )
    }
}
