//! Resolution of `--system`/`--input` and the schedule flags into a spec.

use std::path::Path;

use chainscope::discretization::{Alpha, MetricKind, Quantity, Scheme, SystemKind, SystemSpec};
use chainscope::{Error, FiniteRelation, JumpGraph, Result};
use serde_json::Value;

use crate::Common;

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn read_input(path: &Path) -> Result<SystemSpec> {
    let is_json = path.extension().and_then(|e| e.to_str()) != Some("csv");
    if is_json {
        let text = std::fs::read_to_string(path)?;
        let value: Value = serde_json::from_str(&text)?;
        if value.get("kind").is_some() {
            return SystemSpec::from_json(&text, path.parent());
        }
        return Ok(SystemSpec::finite(FiniteRelation::from_json(&text)?, MetricKind::Discrete));
    }
    Ok(SystemSpec::finite(FiniteRelation::read_file(path)?, MetricKind::Discrete))
}

fn builtin(name: &str, c: &Common) -> Result<SystemSpec> {
    let n = c.n.unwrap_or(0);
    match name {
        "rotation" | "circle_rotation" => {
            let alpha: Alpha = c.alpha.as_deref().unwrap_or("golden").parse()?;
            Ok(SystemSpec::rotation(alpha, n))
        }
        "doubling" => Ok(SystemSpec::doubling(n)),
        "grid_map" | "finite_relation" => Err(invalid(format!("--system {name} needs --input"))),
        other => Err(invalid(format!("unknown system '{other}'"))),
    }
}

/// Builds the spec from flags. Grid systems read their size from `--N`, or
/// from `n_override` when a schedule supplies it.
pub fn resolve(c: &Common, n_override: Option<usize>) -> Result<SystemSpec> {
    let mut spec = match (&c.system, &c.input) {
        (Some(name), None) => {
            if c.n.is_none() && n_override.is_none() {
                return Err(invalid("--N is required for built-in systems"));
            }
            builtin(name, c)?
        }
        (None, Some(path)) => read_input(path)?,
        (None, None) => return Err(invalid("one of --system or --input is required")),
        (Some(_), Some(_)) => return Err(invalid("--system and --input are exclusive")),
    };
    if let Some(n) = n_override.or(c.n) {
        if !spec.is_grid() && n != spec.n {
            return Err(invalid(format!("--N {n} does not match the {} points of the input", spec.n)));
        }
        spec = spec.with_n(n);
    }
    if let SystemKind::Rotation { alpha, minimal } = &mut spec.kind {
        if c.input.is_some() {
            if let Some(a) = &c.alpha {
                *alpha = a.parse()?;
                *minimal = *alpha == Alpha::Golden;
            }
        }
        if let Some(m) = c.minimal {
            *minimal = m;
        }
    } else if c.alpha.is_some() || c.minimal.is_some() {
        return Err(invalid("--alpha and --minimal apply to rotations only"));
    }
    if let Some(m) = &c.metric {
        spec = spec.with_metric(if m == "table" {
            let p = c.metric_table.clone().ok_or_else(|| invalid("--metric table needs --metric-table"))?;
            MetricKind::Table(p)
        } else {
            m.parse()?
        });
    }
    if let Some(p) = &c.metric_table {
        if c.metric.as_deref().is_some_and(|m| m != "table") {
            return Err(invalid("--metric-table conflicts with --metric"));
        }
        spec = spec.with_metric(MetricKind::Table(p.clone()));
    }
    if let Some(s) = &c.scheme {
        spec = spec.with_scheme(s.parse::<Scheme>()?);
    }
    spec.validate()?;
    Ok(spec)
}

/// `None` stands for `auto`.
pub fn jump_graph(s: &str) -> Result<Option<JumpGraph>> {
    if s == "auto" {
        Ok(None)
    } else {
        s.parse().map(Some)
    }
}

pub fn check_epsilons(eps: &[f64]) -> Result<()> {
    match eps.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
        Some(e) => Err(invalid(format!("epsilon must be positive and finite, got {e}"))),
        None => Ok(()),
    }
}

pub fn check_zero(z: Option<f64>) -> Result<()> {
    match z {
        Some(z) if !(z.is_finite() && z >= 0.0) => Err(invalid(format!("numerical zero must be finite and >= 0, got {z}"))),
        _ => Ok(()),
    }
}

/// Grid sizes and quantities from `--schedule`.
#[derive(Debug, Default)]
pub struct Schedule {
    pub n: Vec<usize>,
    pub quantities: Vec<Quantity>,
}

/// `--schedule` is either a comma separated list of sizes or a JSON file
/// `{"N": [...], "quantities": [...]}`.
pub fn schedule(arg: Option<&str>) -> Result<Option<Schedule>> {
    let Some(arg) = arg else { return Ok(None) };
    let path = Path::new(arg);
    if path.is_file() {
        #[derive(serde::Deserialize)]
        struct File {
            #[serde(rename = "N")]
            n: Vec<usize>,
            #[serde(default)]
            quantities: Vec<String>,
        }
        let f: File = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let quantities = f.quantities.iter().map(|q| q.parse()).collect::<Result<_>>()?;
        return Ok(Some(Schedule { n: f.n, quantities }));
    }
    let n = arg
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| invalid(format!("bad grid size '{s}' in --schedule"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Some(Schedule { n, quantities: Vec::new() }))
}
