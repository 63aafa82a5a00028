use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use summability::holo::{taylor_summability_experiment, ChainStep};
use summability::inclusion::{inclusion_experiment, transfer_experiment, weak_inclusion_experiment, TransferStatus};
use summability::methods::{summability_limit, SummabilityRun};
use summability::regularity::{check_kernel_st, check_matrix_st};
use summability::report::{self, CsvRow, CSV_HEADER};
use thiserror::Error;

use crate::config::{self, ConfigError, Plan, PlannedExperiment};
use crate::plot;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    pub plots: bool,
    pub threads: Option<usize>,
    pub tol: Option<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            out: PathBuf::from("out"),
            plots: false,
            threads: None,
            tol: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write results: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot build thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("cannot serialize results: {0}")]
    Csv(#[from] csv::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            _ => EXIT_RUNTIME,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentStatus {
    pub id: String,
    pub kind: &'static str,
    /// `completed` or `failed`.
    pub status: &'static str,
    pub summary: Option<String>,
    pub error: Option<String>,
    pub csv: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config: String,
    pub config_sha256: String,
    pub version: &'static str,
    pub wall_time_seconds: f64,
    pub threads: usize,
    pub tol_override: Option<f64>,
    pub experiments: Vec<ExperimentStatus>,
}

impl RunManifest {
    pub fn exit_code(&self) -> i32 {
        if self.experiments.iter().all(|e| e.status == "completed") {
            EXIT_OK
        } else {
            EXIT_RUNTIME
        }
    }
}

struct Output {
    rows: Vec<CsvRow>,
    json: Value,
    summary: String,
}

fn run_json(label: &str, run: &SummabilityRun) -> Value {
    let values: Vec<Value> = run
        .values
        .iter()
        .map(|v| match v {
            Ok(v) => json!(v.coords()),
            Err(e) => json!({ "error": e.to_string() }),
        })
        .collect();
    json!({ "source": label, "grid": run.grid, "values": values, "estimate": run.estimate })
}

fn chain_label(chain: &[ChainStep]) -> String {
    chain
        .iter()
        .map(|s| match s {
            ChainStep::PartialSums => "partial_sums",
            ChainStep::AbelDilate => "abel_dilate",
            ChainStep::LogMean => "log_mean",
        })
        .collect::<Vec<_>>()
        .join("+")
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or_else(|e| json!({ "serialization_error": e.to_string() }))
}

fn execute(exp: &PlannedExperiment) -> summability::Result<Output> {
    let id = exp.id.as_str();
    match &exp.plan {
        Plan::MatrixRegularity { method, m_grid, n_max, tol } => {
            let r = check_matrix_st(method, m_grid, *n_max, *tol)?;
            Ok(Output {
                rows: report::matrix_regularity_rows(id, &r),
                summary: r.overall.label().to_string(),
                json: to_json(&r),
            })
        }
        Plan::KernelRegularity { method, check, eval } => {
            let r = check_kernel_st(method, check, eval)?;
            Ok(Output {
                rows: report::kernel_regularity_rows(id, &r),
                summary: r.overall.label().to_string(),
                json: to_json(&r),
            })
        }
        Plan::Sum { method, sources, depth, eval } => {
            let mut rows = Vec::new();
            let mut runs = Vec::new();
            let mut statuses = Vec::new();
            for (j, s) in sources.iter().enumerate() {
                let run = summability_limit(method, s, *depth, eval)?;
                rows.extend(report::summability_rows(&format!("{id}[{j}]"), &run));
                statuses.push(report::status_str(run.estimate.status));
                runs.push(run_json(s.label(), &run));
            }
            let converged = statuses.iter().filter(|s| **s == "converged").count();
            Ok(Output {
                rows,
                summary: format!("{converged}/{} converged", statuses.len()),
                json: json!({ "method": method.label(), "depth": depth, "runs": runs }),
            })
        }
        Plan::Inclusion { a, b, sources, depth, eval } => {
            let r = inclusion_experiment(a, b, sources, *depth, eval)?;
            let s = &r.summary;
            Ok(Output {
                rows: report::inclusion_rows(id, &r),
                summary: format!(
                    "transfers {} violates {} vacuous {} inconclusive {}",
                    s.transfers, s.violates, s.vacuous, s.inconclusive
                ),
                json: to_json(&r),
            })
        }
        Plan::Transfer { a, b, family, probes, transfer, eval } => {
            let r = transfer_experiment(a, b, family, probes, transfer, eval)?;
            let summary = match &r.status {
                TransferStatus::Completed { summary: s } => format!(
                    "completed: transfers {} violates {} vacuous {} inconclusive {}",
                    s.transfers, s.violates, s.vacuous, s.inconclusive
                ),
                TransferStatus::NotApplicable { hypothesis } => format!("not applicable: hypothesis {hypothesis} failed"),
            };
            Ok(Output {
                rows: report::transfer_rows(id, &r),
                summary,
                json: to_json(&r),
            })
        }
        Plan::WeakInclusion { a, b, sources, functionals, depth, eval } => {
            let r = weak_inclusion_experiment(a, b, sources, functionals, *depth, eval)?;
            let s = &r.summary;
            Ok(Output {
                rows: report::weak_inclusion_rows(id, &r),
                summary: format!(
                    "transfers {} violates {} vacuous {} inconclusive {}",
                    s.transfers, s.violates, s.vacuous, s.inconclusive
                ),
                json: to_json(&r),
            })
        }
        Plan::Taylor { function, chains, depth, eval } => {
            let mut rows = Vec::new();
            let mut reports = Vec::new();
            let mut parts = Vec::new();
            for chain in chains {
                let label = chain_label(chain);
                let r = taylor_summability_experiment(function, chain, *depth, &eval.limit, &eval.quad, &eval.trunc)?;
                rows.extend(report::taylor_rows(&format!("{id}[{label}]"), &r));
                parts.push(format!(
                    "{label}: {}{}",
                    report::status_str(r.estimate.status),
                    if r.converged_to_zero { " to 0" } else { "" }
                ));
                reports.push(to_json(&r));
            }
            Ok(Output {
                rows,
                summary: parts.join(", "),
                json: Value::Array(reports),
            })
        }
    }
}

pub fn write_csv(path: &Path, rows: &[CsvRow]) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(CSV_HEADER)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Loads a config from a path, or from the example catalog when no such
/// file exists and the name matches an example.
pub fn load_config(spec: &str) -> Result<(String, String), ConfigError> {
    let path = Path::new(spec);
    if path.exists() {
        return Ok((spec.to_string(), fs::read_to_string(path)?));
    }
    match crate::catalog::example(spec) {
        Some(ex) => Ok((format!("builtin:{}", ex.name), ex.json.to_string())),
        None => Err(ConfigError::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("no config file or example named `{spec}`"),
        ))),
    }
}

/// Validates, runs and writes one config. Experiment failures are recorded
/// in the manifest (and its exit code); only invalid configs and I/O
/// problems return `Err`.
pub fn run_config(name: &str, text: &str, opts: &RunOptions) -> Result<RunManifest, RunError> {
    let started = Instant::now();
    let parsed = config::parse(text)?;
    let plans = config::compile(&parsed, opts.tol)?;
    if opts.threads == Some(0) {
        return Err(ConfigError::Global("--threads must be at least 1".into()).into());
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build()?;
    let threads = pool.current_num_threads();
    let results: Vec<summability::Result<Output>> = pool.install(|| plans.par_iter().map(execute).collect());

    fs::create_dir_all(&opts.out)?;
    let mut experiments = Vec::with_capacity(plans.len());
    for (plan, result) in plans.iter().zip(results) {
        let status = match result {
            Ok(out) => {
                let csv_name = format!("{}.csv", plan.id);
                write_csv(&opts.out.join(&csv_name), &out.rows)?;
                let doc = json!({ "id": plan.id, "kind": plan.kind, "report": out.json });
                fs::write(opts.out.join(format!("{}.json", plan.id)), serde_json::to_string_pretty(&doc).expect("json values serialize"))?;
                if opts.plots {
                    if let Some(svg) = plot::chart_from_rows(&plan.id, &out.rows) {
                        fs::write(opts.out.join(format!("{}.svg", plan.id)), svg)?;
                    }
                }
                ExperimentStatus {
                    id: plan.id.clone(),
                    kind: plan.kind,
                    status: "completed",
                    summary: Some(out.summary),
                    error: None,
                    csv: Some(csv_name),
                }
            }
            Err(e) => ExperimentStatus {
                id: plan.id.clone(),
                kind: plan.kind,
                status: "failed",
                summary: None,
                error: Some(e.to_string()),
                csv: None,
            },
        };
        experiments.push(status);
    }
    let manifest = RunManifest {
        config: name.to_string(),
        config_sha256: hex::encode(Sha256::digest(text.as_bytes())),
        version: env!("CARGO_PKG_VERSION"),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        threads,
        tol_override: opts.tol,
        experiments,
    };
    fs::write(opts.out.join("manifest.json"), serde_json::to_string_pretty(&manifest).expect("manifest serializes"))?;
    Ok(manifest)
}
