//! Scenario runner: JSON scenarios in, deterministic JSON reports out.
//!
//! Exit codes: 0 all scenarios ok, 2 an expectation mismatched,
//! 3 some verdict stayed unresolved, 4 bad input. The highest applies.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod runners;
pub mod scenario;

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use runners::{RunContext, RunError};
pub use scenario::{Expected, Manifest, Operation, Scenario, DEFAULT_RNG_SEED};

pub const DEFAULT_EXPECT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Mismatch,
    Unresolved,
    InputError,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Self::Ok => 0,
            Self::Mismatch => 2,
            Self::Unresolved => 3,
            Self::InputError => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectationOutcome {
    pub met: bool,
    pub tol: f64,
    pub mismatches: Vec<String>,
}

/// Everything here is a function of the scenario and seed; wall time goes to
/// a separate timings file so reports compare byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub op: String,
    pub status: Status,
    pub verdicts: BTreeMap<String, Value>,
    pub witnesses: Vec<Value>,
    pub tolerances: BTreeMap<String, f64>,
    pub rng_seed: u64,
    pub artifacts: Vec<String>,
    pub expectation: Option<ExpectationOutcome>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub out_dir: Option<PathBuf>,
    /// Overrides every expectation tolerance.
    pub tol: Option<f64>,
    pub seeds_per_axis: Option<usize>,
    pub rng_seed: Option<u64>,
    pub parallel: bool,
}

/// Accepts inline JSON or a path to a JSON file.
pub fn load_json(arg: &str) -> Result<Value, String> {
    let t = arg.trim_start();
    let text = if t.starts_with('{') || t.starts_with('[') || t.starts_with('"') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| format!("cannot read {arg}: {e}"))?
    };
    serde_json::from_str(&text).map_err(|e| format!("invalid JSON in {arg}: {e}"))
}

pub fn parse_manifest(v: Value) -> Result<Manifest, String> {
    let m: Manifest = serde_json::from_value(v).map_err(|e| format!("invalid manifest: {e}"))?;
    let mut seen = HashSet::new();
    for s in &m.scenarios {
        if !seen.insert(s.name.as_str()) {
            return Err(format!("duplicate scenario name `{}`", s.name));
        }
        if s.name.is_empty() || s.name.contains(['/', '\\']) {
            return Err(format!("scenario name `{}` is not a valid file stem", s.name));
        }
    }
    Ok(m)
}

/// Builds a scenario from an op name and its parameters.
pub fn scenario_from_parts(name: &str, op: &str, mut params: Value, expected: Option<Value>) -> Result<Scenario, String> {
    let obj = params
        .as_object_mut()
        .ok_or_else(|| "scenario parameters must be a JSON object".to_string())?;
    obj.insert("op".into(), Value::String(op.into()));
    obj.insert("name".into(), Value::String(name.into()));
    if let Some(e) = expected {
        obj.insert("expected".into(), e);
    }
    serde_json::from_value(params).map_err(|e| format!("invalid {op} scenario: {e}"))
}

fn numbers_match(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * b.abs().max(1.0)
}

fn compare(path: &str, actual: &Value, expected: &Value, tol: f64, out: &mut Vec<String>) {
    match (actual, expected) {
        (Value::Number(a), Value::Number(b)) => {
            let (a, b) = (a.as_f64().unwrap_or(f64::NAN), b.as_f64().unwrap_or(f64::NAN));
            if !numbers_match(a, b, tol) {
                out.push(format!("{path}: got {a}, expected {b}"));
            }
        }
        (Value::Array(a), Value::Array(b)) if a.len() == b.len() => {
            for (i, (x, y)) in a.iter().zip(b).enumerate() {
                compare(&format!("{path}[{i}]"), x, y, tol, out);
            }
        }
        (Value::Object(a), Value::Object(b)) => {
            for (k, y) in b {
                match a.get(k) {
                    Some(x) => compare(&format!("{path}.{k}"), x, y, tol, out),
                    None => out.push(format!("{path}.{k}: missing")),
                }
            }
        }
        (a, b) if a == b => {}
        (a, b) => out.push(format!("{path}: got {a}, expected {b}")),
    }
}

/// Compares the expected verdicts with the actual ones. Objects match on
/// the expected keys only.
pub fn check_expectation(verdicts: &BTreeMap<String, Value>, expected: &Expected, tol_override: Option<f64>) -> ExpectationOutcome {
    let tol = tol_override.or(expected.tol).unwrap_or(DEFAULT_EXPECT_TOL);
    let mut mismatches = Vec::new();
    for (k, want) in &expected.verdicts {
        match verdicts.get(k) {
            Some(got) => compare(k, got, want, tol, &mut mismatches),
            None => mismatches.push(format!("{k}: missing")),
        }
    }
    ExpectationOutcome {
        met: mismatches.is_empty(),
        tol,
        mismatches,
    }
}

/// Runs one scenario and writes its artifacts and report under `out_dir`.
pub fn run_scenario(s: &Scenario, default_seed: u64, opts: &Options) -> (RunReport, f64) {
    let start = Instant::now();
    let rng_seed = s.rng_seed.or(opts.rng_seed).unwrap_or(default_seed);
    let ctx = RunContext {
        rng_seed,
        seeds_per_axis: opts.seeds_per_axis,
    };
    let mut report = RunReport {
        scenario: s.name.clone(),
        op: s.op.name().into(),
        status: Status::Ok,
        verdicts: BTreeMap::new(),
        witnesses: Vec::new(),
        tolerances: BTreeMap::new(),
        rng_seed,
        artifacts: Vec::new(),
        expectation: None,
        error: None,
    };
    match runners::run(&s.op, &ctx) {
        Ok(out) => {
            report.verdicts = out.verdicts;
            report.witnesses = out.witnesses;
            report.tolerances = out.tolerances;
            if let Some(dir) = &opts.out_dir {
                for (file, body) in &out.artifacts {
                    let name = format!("{}.{file}", s.name);
                    match write_file(&dir.join(&name), body) {
                        Ok(()) => report.artifacts.push(name),
                        Err(e) => report.error = Some(e),
                    }
                }
            }
            if let Some(exp) = &s.expected {
                report.expectation = Some(check_expectation(&report.verdicts, exp, opts.tol));
            }
            report.status = if report.error.is_some() {
                Status::InputError
            } else if out.unresolved {
                Status::Unresolved
            } else if report.expectation.as_ref().is_some_and(|e| !e.met) {
                Status::Mismatch
            } else {
                Status::Ok
            };
        }
        Err(e) => {
            report.status = match e {
                RunError::Input(_) => Status::InputError,
                RunError::Numeric(_) => Status::Unresolved,
            };
            report.error = Some(e.to_string());
        }
    }
    (report, start.elapsed().as_secs_f64())
}

fn write_file(path: &Path, body: &str) -> Result<(), String> {
    fs::write(path, body).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub seconds: BTreeMap<String, f64>,
}

/// Runs every scenario; reports come back in manifest order.
pub fn run_manifest(m: &Manifest, opts: &Options) -> Result<Vec<RunReport>, String> {
    if let Some(dir) = &opts.out_dir {
        fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    }
    let default_seed = m.rng_seed.unwrap_or(DEFAULT_RNG_SEED);
    let results: Vec<(RunReport, f64)> = if opts.parallel {
        m.scenarios.par_iter().map(|s| run_scenario(s, default_seed, opts)).collect()
    } else {
        m.scenarios.iter().map(|s| run_scenario(s, default_seed, opts)).collect()
    };
    if let Some(dir) = &opts.out_dir {
        for (r, _) in &results {
            write_file(&dir.join(format!("{}.json", r.scenario)), &to_pretty(r))?;
        }
        let timings = Timings {
            seconds: results.iter().map(|(r, t)| (r.scenario.clone(), *t)).collect(),
        };
        write_file(&dir.join("timings.json"), &to_pretty(&timings))?;
    }
    Ok(results.into_iter().map(|(r, _)| r).collect())
}

pub fn to_pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).unwrap_or_else(|e| format!("{{\"error\": \"{e}\"}}")) + "\n"
}

/// Worst status over the reports, as a process exit code.
pub fn exit_code(reports: &[RunReport]) -> u8 {
    reports.iter().map(|r| r.status).max().unwrap_or(Status::Ok).exit_code()
}

/// The manifest shipped with the crate.
pub const SHIPPED_MANIFEST: &str = include_str!("../manifest.json");
