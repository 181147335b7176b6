//! Executes the commands of an experiment config and writes its artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use coupled_core::markets::{foc_residual, second_order_check};
use coupled_core::{
    certify, estimate_lipschitz, solve, CertificateReport, EquilibriumReport, ProductPoint, ResponseSystem,
};
use serde::Serialize;

use crate::config::{sampler, Command, Expectation, ExperimentConfig, ModelConfig, StartConfig};
use crate::error::CliError;
use crate::tables::reproduce_table;

/// Which part of a config to execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// Every command, in the listed order.
    All,
    Solve,
    Certify,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Files written by a run and the audits that did not pass.
#[derive(Debug, Clone, Default)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub audit_failures: Vec<String>,
}

impl RunOutcome {
    pub fn into_result(self) -> Result<Vec<PathBuf>, CliError> {
        if self.audit_failures.is_empty() {
            Ok(self.files)
        } else {
            Err(CliError::Audit(self.audit_failures))
        }
    }
}

#[derive(Serialize)]
struct SolveRecord<'a> {
    start: &'a StartConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<EquilibriumReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    trace_file: String,
}

#[derive(Serialize)]
struct CertifyRecord {
    expect: Expectation,
    report: CertificateReport,
}

#[derive(Serialize)]
struct LipschitzRecord {
    estimate: f64,
    max: Option<f64>,
    grid_points: Option<usize>,
    random_pairs: usize,
    seed: u64,
}

#[derive(Serialize)]
struct SecondOrderRecord<'a> {
    start: &'a StartConfig,
    foc_residual: (f64, f64),
    concave: (bool, bool),
}

struct Writer {
    dir: PathBuf,
    outcome: RunOutcome,
}

impl Writer {
    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|source| CliError::Io { path: path.clone(), source })?;
        self.outcome.files.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
        text.push('\n');
        self.write(name, &text)
    }

    fn audit(&mut self, msg: String) {
        self.outcome.audit_failures.push(msg);
    }
}

/// Output directory: `--out`, else the config's `output`, else `out/<name>`.
pub fn output_dir(cfg: &ExperimentConfig, opts: &RunOptions) -> PathBuf {
    opts.out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| Path::new("out").join(cfg.name.as_deref().unwrap_or("experiment")))
}

/// Runs `scope` of `cfg`. Configuration and feasibility problems abort
/// before anything is written; audit failures are collected so that every
/// command still produces its artifacts.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions, scope: Scope) -> Result<RunOutcome, CliError> {
    let commands: Vec<Command> = match scope {
        Scope::All => cfg.commands.clone(),
        Scope::Solve => vec![Command::Solve],
        Scope::Certify => vec![Command::Certify],
    };
    if commands.contains(&Command::Solve) && cfg.starts.is_empty() {
        return Err(CliError::Config("`starts` must be nonempty for solve".into()));
    }
    if commands.contains(&Command::Certify) && cfg.certify.is_empty() {
        return Err(CliError::Config("no [[certify]] blocks to run".into()));
    }
    let needs_model = commands.iter().any(|c| !matches!(c, Command::ReproduceTable(_)));
    let sys = if needs_model { Some(cfg.model.build()?) } else { None };
    let seed = opts.seed.unwrap_or(cfg.seed);

    let dir = output_dir(cfg, opts);
    fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
    let mut w = Writer { dir, outcome: RunOutcome::default() };

    for cmd in commands {
        match cmd {
            Command::Solve => run_solve(cfg, sys.as_ref().expect("model built"), &mut w)?,
            Command::Certify => run_certify(cfg, sys.as_ref().expect("model built"), seed, &mut w)?,
            Command::EstimateLipschitz => run_lipschitz(cfg, sys.as_ref().expect("model built"), seed, &mut w)?,
            Command::SecondOrderCheck => run_second_order(cfg, &mut w)?,
            Command::ReproduceTable(name) => {
                let csv = reproduce_table(name)?;
                w.write(&format!("{}.csv", name.as_str()), &csv)?;
            }
        }
    }
    Ok(w.outcome)
}

fn run_solve(cfg: &ExperimentConfig, sys: &ResponseSystem, w: &mut Writer) -> Result<(), CliError> {
    let mut records = Vec::with_capacity(cfg.starts.len());
    for (i, start) in cfg.starts.iter().enumerate() {
        let trace_file = format!("solve_{i}.csv");
        let record = match solve(sys, &start.point()?, &cfg.solver) {
            Ok((report, trace)) => {
                w.write(&trace_file, &trace.to_csv())?;
                w.write(&format!("solve_{i}_plot.csv"), &trace.plot_csv(report.point.as_ref()))?;
                if report.bound_violations > 0 {
                    w.audit(format!("solve start {i}: {} error-bound violations", report.bound_violations));
                }
                SolveRecord { start, report: Some(report), error: None, trace_file }
            }
            Err(failure) => {
                w.write(&trace_file, &failure.trace.to_csv())?;
                return Err(CliError::Runtime(format!(
                    "solve start {i}: {} (partial trace in {})",
                    failure.error,
                    w.dir.join(&trace_file).display()
                )));
            }
        };
        records.push(record);
    }
    w.json("solve.json", &records)
}

fn run_certify(cfg: &ExperimentConfig, sys: &ResponseSystem, seed: u64, w: &mut Writer) -> Result<(), CliError> {
    for (j, block) in cfg.certify.iter().enumerate() {
        let sampler = sampler(sys, block.grid_points, block.random_pairs, seed);
        let report =
            certify(sys, &block.constants()?, &sampler).map_err(|e| CliError::Config(format!("certify {j}: {e}")))?;
        let as_expected = match block.expect {
            Expectation::Pass => report.passed,
            Expectation::Fail => !report.passed,
        };
        if !as_expected {
            w.audit(format!(
                "certificate {j} with ({}, {}, {}) expected to {:?} but worst slack is {}",
                block.k1, block.k2, block.k3, block.expect, report.worst_slack
            ));
        }
        w.json(&format!("certify_{j}.json"), &CertifyRecord { expect: block.expect, report })?;
    }
    Ok(())
}

fn run_lipschitz(cfg: &ExperimentConfig, sys: &ResponseSystem, seed: u64, w: &mut Writer) -> Result<(), CliError> {
    let l = &cfg.lipschitz;
    let s = sampler(sys, l.grid_points, l.random_pairs, seed);
    let estimate = estimate_lipschitz(sys, &s).map_err(|e| CliError::Config(format!("estimate-lipschitz: {e}")))?;
    if let Some(max) = l.max {
        if estimate > max {
            w.audit(format!("Lipschitz estimate {estimate} exceeds {max}"));
        }
    }
    let record =
        LipschitzRecord { estimate, max: l.max, grid_points: s.grid_points, random_pairs: s.random_pairs, seed };
    w.json("lipschitz.json", &record)
}

fn run_second_order(cfg: &ExperimentConfig, w: &mut Writer) -> Result<(), CliError> {
    let ModelConfig::CournotQuadratic(m) = &cfg.model else {
        return Err(CliError::Config("second-order-check needs a cournot-quadratic model".into()));
    };
    let model = m.model();
    let mut records = Vec::new();
    for (i, start) in cfg.starts.iter().enumerate() {
        let p: ProductPoint = start.point()?;
        if p.dims() != (1, 1) {
            return Err(CliError::Config(format!("start {i}: payoff models use scalar productions")));
        }
        let (x, y) = (p.first[0], p.second[0]);
        let concave = second_order_check(&model, x, y, m.h);
        if concave != (true, true) {
            w.audit(format!("second-order check fails at start {i}: {concave:?}"));
        }
        records.push(SecondOrderRecord { start, foc_residual: foc_residual(&model, x, y, m.h), concave });
    }
    w.json("second_order.json", &records)
}
