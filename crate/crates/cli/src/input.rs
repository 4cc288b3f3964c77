//! Coefficient chains from the command line or from files.

use std::path::Path;

use krylov_core::{EnsembleResult, Error, Result};
use serde_json::Value;

use crate::args::ChainArgs;

#[derive(Debug, Clone)]
pub struct Chain {
    pub source: String,
    pub b: Vec<f64>,
    /// Known finite Krylov dimension (`b.len() + 1` for a complete chain).
    pub krylov_dim: Option<usize>,
    pub truncated: bool,
}

fn field_err(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { field, reason: reason.into() }
}

pub fn load_chain(args: &ChainArgs) -> Result<Chain> {
    let chain = match (&args.b, &args.input) {
        (Some(b), None) => {
            if args.realization.is_some() {
                return Err(field_err("realization", "only applies to an ensemble input file"));
            }
            Chain { source: "--b".into(), b: b.clone(), krylov_dim: Some(b.len() + 1), truncated: false }
        }
        (None, Some(path)) => read_chain(path, args.realization)?,
        _ => return Err(field_err("input", "give either --b or --input")),
    };
    if chain.b.is_empty() {
        return Err(field_err("b", "needs at least one coefficient"));
    }
    if let Some((i, &v)) = chain.b.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::NonPositiveCoefficient { index: i + 1, value: v });
    }
    Ok(chain)
}

fn read_chain(path: &Path, realization: Option<usize>) -> Result<Chain> {
    let text = std::fs::read_to_string(path).map_err(|e| field_err("input", format!("{}: {e}", path.display())))?;
    let source = path.display().to_string();
    if text.trim_start().starts_with(['{', '[']) {
        let value: Value = serde_json::from_str(&text).map_err(|e| field_err("input", format!("{source}: {e}")))?;
        from_json(value, source, realization)
    } else {
        if realization.is_some() {
            return Err(field_err("realization", "only applies to an ensemble input file"));
        }
        from_csv(&text, source)
    }
}

fn from_json(value: Value, source: String, realization: Option<usize>) -> Result<Chain> {
    if value.get("realizations").is_some() {
        let ens: EnsembleResult<f64> = serde_json::from_value(value).map_err(|e| field_err("input", e.to_string()))?;
        let k = realization.ok_or_else(|| field_err("realization", "required for an ensemble input"))?;
        let r = ens
            .realizations
            .get(k)
            .ok_or_else(|| field_err("realization", format!("ensemble has {} realizations", ens.realizations.len())))?;
        if let Some(f) = &r.failure {
            return Err(field_err("realization", format!("realization {k} failed: {f}")));
        }
        return Ok(Chain {
            source: format!("{source}#{k}"),
            b: r.b.clone(),
            krylov_dim: Some(r.krylov_dim),
            truncated: r.truncated,
        });
    }
    if realization.is_some() {
        return Err(field_err("realization", "only applies to an ensemble input file"));
    }
    let list = |v: &Value| -> Result<Vec<f64>> {
        v.as_array()
            .ok_or_else(|| field_err("b", "expected a list of numbers"))?
            .iter()
            .map(|x| x.as_f64().ok_or_else(|| field_err("b", "expected a list of numbers")))
            .collect()
    };
    if value.is_array() {
        let b = list(&value)?;
        let d = b.len() + 1;
        return Ok(Chain { source, b, krylov_dim: Some(d), truncated: false });
    }
    let b = list(value.get("b").ok_or_else(|| field_err("b", "missing from input"))?)?;
    let krylov_dim = match value.get("D") {
        None => Some(b.len() + 1),
        Some(Value::Null) => None,
        Some(v) => Some(v.as_u64().ok_or_else(|| field_err("D", "expected a positive integer or null"))? as usize),
    };
    let truncated = value.get("truncated").and_then(Value::as_bool).unwrap_or(false);
    Ok(Chain { source, b, krylov_dim, truncated })
}

/// First column headed `b_n` or `b`, or the only column of a header-less file.
fn from_csv(text: &str, source: String) -> Result<Chain> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).peekable();
    let first = lines.peek().copied().ok_or_else(|| field_err("input", "empty file"))?;
    let cells: Vec<&str> = first.split(',').map(str::trim).collect();
    let column = if cells.iter().all(|c| c.parse::<f64>().is_ok()) {
        if cells.len() != 1 {
            return Err(field_err("input", "header-less CSV must have a single column"));
        }
        0
    } else {
        lines.next();
        cells
            .iter()
            .position(|c| *c == "b_n" || *c == "b")
            .ok_or_else(|| field_err("input", "no `b_n` or `b` column"))?
    };
    let b = lines
        .enumerate()
        .map(|(i, l)| {
            l.split(',')
                .nth(column)
                .and_then(|c| c.trim().parse::<f64>().ok())
                .ok_or_else(|| field_err("input", format!("row {} has no number in column {column}", i + 1)))
        })
        .collect::<Result<Vec<_>>>()?;
    let d = b.len() + 1;
    Ok(Chain { source, b, krylov_dim: Some(d), truncated: false })
}
