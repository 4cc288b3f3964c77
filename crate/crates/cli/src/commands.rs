use std::io::Write as _;

use krylov_core::algebras::{classify_algebra, closure_test, model_amplitudes, saturated_complexity, AlgebraModel, KrylovDim};
use krylov_core::dynamics::{complexity_profile, deviation_time_from, evolve_amplitudes, time_grid, EvolutionMethod};
use krylov_core::ensembles::{uniform_coefficients, LiouvillianEigenbasis};
use krylov_core::lanczos::LanczosJson;
use krylov_core::operator::MatrixFile;
use krylov_core::{
    lanczos, run_ensemble, run_lanczos, EnsembleResult, Error, GoeSpec, HermitianMatrix, InnerProductSpec, LanczosOptions,
    OperatorVector, ReorthPolicy, Result,
};
use serde::Serialize;

use crate::args::*;
use crate::artifacts::{Closure, Coefficients, Profile, Trajectory};
use crate::input::{load_chain, Chain};

/// Largest amplitude count tried when growing a closed-form model.
const MAX_MODEL_TRUNCATION: usize = 1 << 20;
/// Slack on the dispersion bound before a run is reported as violating it.
const BOUND_SLACK: f64 = 1e-8;

/// Command failures that are not library errors: the artifact was written
/// but an invariant check on it failed.
#[derive(Debug)]
pub enum Failure {
    Core(Error),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { field, reason: reason.into() }
}

fn emit(out: &OutputArgs, csv: impl FnOnce() -> String, json: impl FnOnce() -> Result<String>) -> Result<()> {
    let text = match out.format {
        Format::Csv => csv(),
        Format::Json => json()? + "\n",
    };
    match &out.out {
        Some(path) => std::fs::write(path, text).map_err(|e| invalid("out", format!("{}: {e}", path.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(Error::from),
    }
}

fn to_json<S: Serialize>(value: &S) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

pub fn run(cli: Cli) -> std::result::Result<(), Failure> {
    match cli.command {
        Command::Model(a) => model(a),
        Command::Lanczos(a) => lanczos_cmd(a).map_err(Failure::from),
        Command::Evolve(a) => evolve(a).map_err(Failure::from),
        Command::Bound(a) => bound(a),
        Command::Closure(a) => closure(a).map_err(Failure::from),
        Command::Goe(a) => goe(a),
    }
}

fn check_bound(p: &Profile) -> std::result::Result<(), Failure> {
    match p.max_ratio() {
        Some(r) if r > 1.0 + BOUND_SLACK => Err(Failure::Invariant(format!("dispersion bound violated: max ratio {r:e}"))),
        _ => Ok(()),
    }
}

fn model(a: ModelArgs) -> std::result::Result<(), Failure> {
    let model: AlgebraModel<f64> = a.spec.parse()?;
    let dim = model.krylov_dim();
    if let Some(n) = a.coefficients {
        let coeffs = Coefficients {
            source: model.to_string(),
            krylov_dim: dim.finite(),
            b: model.coefficients(n),
            truncated: match dim {
                KrylovDim::Finite(d) => n + 1 < d,
                KrylovDim::Infinite => true,
            },
        };
        emit(&a.output, || coeffs.to_csv(), || to_json(&coeffs))?;
        return Ok(());
    }
    let times = time_grid(a.grid.tmax, a.grid.steps)?;
    let traj = match (dim, a.truncation) {
        (KrylovDim::Infinite, None) => {
            let mut size = 256;
            loop {
                match model_amplitudes(&model, &times, Some(size)) {
                    Err(Error::TruncationTooSmall { .. }) if size < MAX_MODEL_TRUNCATION => size *= 2,
                    other => break other?,
                }
            }
        }
        (_, n) => model_amplitudes(&model, &times, n)?,
    };
    let tau_d = deviation_time_from(&model.coefficients(3)).ok();
    let mut profile = Profile::new(model.to_string(), &traj, complexity_profile(&traj), tau_d);
    profile.saturated = Some(
        times
            .iter()
            .map(|&t| saturated_complexity(model.alpha(), model.gamma(), dim, t))
            .collect::<Result<Vec<_>>>()?,
    );
    emit(&a.output, || profile.to_csv(), || to_json(&profile))?;
    check_bound(&profile)
}

fn lanczos_options(f: &LanczosFlags, ambient: usize) -> Result<LanczosOptions<f64>> {
    let default = ReorthPolicy::<f64>::default_for(ambient);
    let policy = ReorthPolicy::new(f.reorth.map_or(default.mode, Into::into), f.reorth_threshold)?;
    if !(f.tol_halt > 0.0 && f.tol_halt < 1.0) {
        return Err(invalid("tol-halt", "must lie in (0, 1)"));
    }
    let mut opts = LanczosOptions::new(policy).halt_tol(f.tol_halt);
    if let Some(m) = f.max_steps {
        opts = opts.max_steps(m);
    }
    Ok(opts)
}

fn lanczos_cmd(a: LanczosArgs) -> Result<()> {
    let h = HermitianMatrix::from_file(&MatrixFile::read(&a.hamiltonian).map_err(|e| invalid("hamiltonian", e.to_string()))?)?;
    let d = h.dim();
    let opts = lanczos_options(&a.lanczos, d * d)?;
    let json: LanczosJson<f64> = match &a.observable {
        Some(path) => {
            let file = MatrixFile::read(path).map_err(|e| invalid("observable", e.to_string()))?;
            let mut o = OperatorVector::from_file(&file)?;
            if a.beta != 0.0 {
                o = o.with_spec(InnerProductSpec::thermal(a.beta, &h)?);
            }
            run_lanczos(&h, &o, &opts)?.to_json()
        }
        None => {
            let basis = LiouvillianEigenbasis::new(&h)?;
            lanczos(&basis.diagonal_liouvillian(), &uniform_coefficients(d), &opts)?.to_json()
        }
    };
    let csv = || {
        let mut s = String::from("n,b_n\n");
        for (i, b) in json.b.iter().enumerate() {
            s += &format!("{},{}\n", i + 1, krylov_core::fmt_sci(*b));
        }
        s
    };
    emit(&a.output, csv, || to_json(&json))?;
    eprintln!("D = {}{}", json.krylov_dim, if json.truncated { " (max-steps reached)" } else { "" });
    Ok(())
}

fn evolution_method(a: &EvolveArgs) -> Result<EvolutionMethod<f64>> {
    match (a.method, a.rk4_step) {
        (Method::Eigen, None) => Ok(EvolutionMethod::TridiagEigen),
        (Method::Eigen, Some(_)) => Err(invalid("rk4-step", "only applies with --method rk4")),
        (Method::Rk4, Some(h)) if !(h > 0.0) => Err(invalid("rk4-step", "must be positive")),
        (Method::Rk4, h) => Ok(EvolutionMethod::Rk4 { max_step: h }),
    }
}

fn evolve_chain(a: &EvolveArgs) -> Result<(Chain, krylov_core::AmplitudeTrajectory<f64>)> {
    let chain = load_chain(&a.chain)?;
    let times = time_grid(a.grid.tmax, a.grid.steps)?;
    let mut traj = evolve_amplitudes(&chain.b, &times, evolution_method(a)?)?;
    traj.truncated = chain.truncated || chain.krylov_dim.is_none_or(|d| d > chain.b.len() + 1);
    if traj.truncated {
        eprintln!("note: {} is a truncated chain; evolving its first {} sites", chain.source, chain.b.len() + 1);
    }
    Ok((chain, traj))
}

fn evolve(a: EvolveArgs) -> Result<()> {
    let (_, traj) = evolve_chain(&a)?;
    let traj = Trajectory::from(traj);
    emit(&a.output, || traj.to_csv(), || to_json(&traj))
}

fn bound(a: EvolveArgs) -> std::result::Result<(), Failure> {
    let (chain, traj) = evolve_chain(&a)?;
    let profile = Profile::new(chain.source, &traj, complexity_profile(&traj), deviation_time_from(&chain.b).ok());
    emit(&a.output, || profile.to_csv(), || to_json(&profile))?;
    check_bound(&profile)
}

fn parse_dim(s: &str) -> Result<KrylovDim> {
    match s {
        "inf" => Ok(KrylovDim::Infinite),
        _ => match s.parse::<usize>() {
            Ok(d) if d >= 2 => Ok(KrylovDim::Finite(d)),
            _ => Err(invalid("dim", format!("expected an integer >= 2 or `inf`, got `{s}`"))),
        },
    }
}

fn closure(a: ClosureArgs) -> Result<()> {
    let chain = load_chain(&a.chain)?;
    if !(a.tol_closure > 0.0) {
        return Err(invalid("tol-closure", "must be positive"));
    }
    let dim = match &a.dim {
        Some(s) => parse_dim(s)?,
        None => match chain.krylov_dim {
            Some(d) if !chain.truncated && d == chain.b.len() + 1 => KrylovDim::Finite(d),
            _ => KrylovDim::Infinite,
        },
    };
    if let KrylovDim::Finite(d) = dim {
        if d != chain.b.len() + 1 {
            return Err(invalid("dim", format!("{} coefficients imply D = {}", chain.b.len(), chain.b.len() + 1)));
        }
    }
    let report = closure_test(&chain.b, dim, a.tol_closure);
    let out = Closure { kind: classify_algebra(report.alpha, a.tol_closure), report, krylov_dim: dim.finite(), tol: a.tol_closure };
    emit(&a.output, || out.to_csv(), || to_json(&out))?;
    eprintln!(
        "{}: alpha = {}, gamma = {}, {}",
        if out.report.closed { "closed" } else { "not closed" },
        out.report.alpha,
        out.report.gamma,
        out.kind
    );
    Ok(())
}

fn goe(a: GoeArgs) -> std::result::Result<(), Failure> {
    let res: EnsembleResult<f64> = match &a.from {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| invalid("from", format!("{}: {e}", path.display())))?;
            let res: EnsembleResult<f64> = serde_json::from_str(&text).map_err(|e| invalid("from", e.to_string()))?;
            res.spec.validate()?;
            res
        }
        None => {
            let mut spec = GoeSpec::new(a.d, a.sigma, a.count, a.seed);
            let opts = lanczos_options(&a.lanczos, a.d * a.d)?;
            spec.reorth = opts.policy.mode;
            spec.reorth_threshold = opts.policy.threshold;
            spec.halt_tol = opts.halt_tol;
            if a.lanczos.max_steps.is_some() {
                return Err(invalid("max-steps", "not supported for ensembles").into());
            }
            spec.times = a.tmax.map(|t| time_grid(t, a.steps)).transpose()?;
            spec.deviation_samples = a.deviation_samples;
            run_ensemble(&spec, a.workers)?
        }
    };
    let table = match a.realization {
        Some(k) => {
            let r = res.realizations.get(k).ok_or_else(|| invalid("realization", format!("ensemble has {} realizations", res.realizations.len())))?;
            Some(Coefficients { source: format!("goe seed {} #{k}", res.spec.seed), krylov_dim: Some(r.krylov_dim), b: r.b.clone(), truncated: r.truncated })
        }
        None => None,
    };
    emit(
        &a.output,
        || table.as_ref().map_or_else(|| res.summary_csv(), Coefficients::to_csv),
        || to_json(&res),
    )?;
    let hist: Vec<String> = res.d_histogram.iter().map(|(d, n)| format!("D={d} for {n}/{}", res.realizations.len())).collect();
    eprintln!("{}", hist.join(", "));
    if res.failed > 0 {
        let lines: Vec<String> = res
            .realizations
            .iter()
            .filter_map(|r| r.failure.as_ref().map(|f| format!("realization {}: {f}", r.index)))
            .collect();
        return Err(Failure::Invariant(format!("{} realizations failed\n{}", res.failed, lines.join("\n"))));
    }
    Ok(())
}
