//! Flat tabular view of experiment reports.
//!
//! Every report flattens into rows of
//! `(experiment_id, module, grid_param, quantity, value_re, value_im, verdict)`
//! in a fixed order, so serializing the same report twice is byte-identical.

use serde::Serialize;

use crate::domains::{ConvergenceEstimate, Status};
use crate::holo::TaylorReport;
use crate::inclusion::{InclusionCase, InclusionReport, MethodOutcome, TransferReport, TransferStatus, WeakInclusionReport};
use crate::methods::SummabilityRun;
use crate::regularity::{ConditionRecord, KernelRegularityReport, MatrixRegularityReport, Overall};
use crate::vspace::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRow {
    pub experiment_id: String,
    pub module: &'static str,
    pub grid_param: Option<f64>,
    pub quantity: String,
    pub value_re: Option<f64>,
    pub value_im: Option<f64>,
    pub verdict: String,
}

pub const CSV_HEADER: [&str; 7] = ["experiment_id", "module", "grid_param", "quantity", "value_re", "value_im", "verdict"];

struct Rows<'a> {
    id: &'a str,
    module: &'static str,
    out: Vec<CsvRow>,
}

impl<'a> Rows<'a> {
    fn new(id: &'a str, module: &'static str) -> Self {
        Rows { id, module, out: Vec::new() }
    }

    fn push(&mut self, grid: Option<f64>, quantity: impl Into<String>, value: Option<Scalar>, verdict: impl Into<String>) {
        self.out.push(CsvRow {
            experiment_id: self.id.to_string(),
            module: self.module,
            grid_param: grid,
            quantity: quantity.into(),
            value_re: value.map(|z| z.re),
            value_im: value.map(|z| z.im),
            verdict: verdict.into(),
        });
    }

    fn real(&mut self, grid: Option<f64>, quantity: impl Into<String>, value: f64, verdict: impl Into<String>) {
        self.push(grid, quantity, Some(Scalar::new(value, 0.0)), verdict);
    }

    fn condition(&mut self, c: &ConditionRecord) {
        for cell in &c.cells {
            self.push(Some(cell.grid_param), c.id.clone(), cell.value, "");
        }
        self.push(None, format!("{}:verdict", c.id), None, c.verdict.as_str());
    }

    fn overall(&mut self, o: &Overall) {
        let detail = match o {
            Overall::NotRegular { witness } => format!("overall:{}", witness.condition),
            _ => "overall".into(),
        };
        self.push(None, detail, None, o.label());
    }

    /// Limit estimate as one row per coordinate plus a status row.
    fn estimate(&mut self, prefix: &str, e: &ConvergenceEstimate) {
        if let Some(v) = &e.value {
            for (k, z) in v.coords().iter().enumerate() {
                self.push(None, format!("{prefix}limit[{k}]"), Some(*z), "");
            }
        }
        self.real(None, format!("{prefix}residual"), e.residual, status_str(e.status));
    }
}

pub fn status_str(s: Status) -> &'static str {
    match s {
        Status::Converged => "converged",
        Status::Diverged => "diverged",
        Status::Inconclusive => "inconclusive",
    }
}

pub fn matrix_regularity_rows(id: &str, r: &MatrixRegularityReport) -> Vec<CsvRow> {
    let mut rows = Rows::new(id, "regularity");
    for c in r.conditions() {
        rows.condition(c);
    }
    rows.overall(&r.overall);
    rows.out
}

pub fn kernel_regularity_rows(id: &str, r: &KernelRegularityReport) -> Vec<CsvRow> {
    let mut rows = Rows::new(id, "regularity");
    for c in r.conditions() {
        rows.condition(c);
    }
    rows.overall(&r.overall);
    rows.out
}

/// Per-grid-point transforms, one row per coordinate.
pub fn summability_rows(id: &str, run: &SummabilityRun) -> Vec<CsvRow> {
    let mut rows = Rows::new(id, "methods");
    for (p, v) in run.grid.iter().zip(&run.values) {
        match v {
            Ok(v) => {
                for (k, z) in v.coords().iter().enumerate() {
                    rows.push(Some(*p), format!("transform[{k}]"), Some(*z), "");
                }
            }
            Err(e) => rows.push(Some(*p), "transform", None, format!("error: {e}")),
        }
    }
    rows.estimate("", &run.estimate);
    rows.out
}

fn outcome(rows: &mut Rows<'_>, prefix: &str, o: &MethodOutcome) {
    rows.estimate(prefix, &o.estimate);
    if o.failures > 0 {
        rows.real(None, format!("{prefix}failures"), o.failures as f64, "");
    }
}

fn case(rows: &mut Rows<'_>, prefix: &str, c: &InclusionCase) {
    outcome(rows, &format!("{prefix}{}:a:", c.label), &c.a);
    if let Some(b) = &c.b {
        outcome(rows, &format!("{prefix}{}:b:", c.label), b);
    }
    let d = c.distance.map(|d| Scalar::new(d, 0.0));
    rows.push(None, format!("{prefix}{}:consistency", c.label), d, c.consistency.label());
}

pub fn inclusion_rows(id: &str, r: &InclusionReport) -> Vec<CsvRow> {
    let mut rows = Rows::new(id, "inclusion");
    for c in &r.cases {
        case(&mut rows, "", c);
    }
    summary(&mut rows, r.summary.transfers, r.summary.violates, r.summary.vacuous, r.summary.inconclusive);
    rows.out
}

fn summary(rows: &mut Rows<'_>, t: usize, v: usize, va: usize, i: usize) {
    rows.real(None, "summary:transfers", t as f64, "");
    rows.real(None, "summary:violates", v as f64, "");
    rows.real(None, "summary:vacuous", va as f64, "");
    rows.real(None, "summary:inconclusive", i as f64, "");
}

pub fn transfer_rows(id: &str, r: &TransferReport) -> Vec<CsvRow> {
    let mut rows = Rows::new(id, "inclusion");
    for h in &r.hypotheses {
        rows.push(None, format!("hypothesis:{}", h.id), None, if h.passed { "pass" } else { "fail" });
    }
    for (j, p) in r.probes.iter().enumerate() {
        let prefix = format!("probe{j}:");
        outcome(&mut rows, &format!("{prefix}a:"), &p.a);
        outcome(&mut rows, &format!("{prefix}b:"), &p.b);
        if let Some(e) = p.a_error {
            rows.real(None, format!("{prefix}a:error"), e, "");
        }
        if let Some(e) = p.b_error {
            rows.real(None, format!("{prefix}b:error"), e, "");
        }
        rows.push(None, format!("{prefix}consistency"), None, p.consistency.label());
    }
    match &r.status {
        TransferStatus::Completed { summary: s } => {
            summary(&mut rows, s.transfers, s.violates, s.vacuous, s.inconclusive);
            rows.push(None, "status", None, "completed");
        }
        TransferStatus::NotApplicable { hypothesis } => {
            rows.push(None, format!("status:{hypothesis}"), None, "not_applicable");
        }
    }
    rows.out
}

pub fn weak_inclusion_rows(id: &str, r: &WeakInclusionReport) -> Vec<CsvRow> {
    let mut rows = Rows::new(id, "inclusion");
    for w in &r.cases {
        case(&mut rows, &format!("test{}:phi{}:", w.test, w.functional), &w.case);
    }
    summary(&mut rows, r.summary.transfers, r.summary.violates, r.summary.vacuous, r.summary.inconclusive);
    rows.out
}

pub fn taylor_rows(id: &str, r: &TaylorReport) -> Vec<CsvRow> {
    let mut rows = Rows::new(id, "holo");
    for ((p, d), e) in r.grid.iter().zip(&r.distances).zip(&r.errors) {
        match (d, e) {
            (Some(d), _) => rows.real(Some(*p), "distance", *d, ""),
            (None, e) => rows.push(Some(*p), "distance", None, format!("error: {}", e.as_deref().unwrap_or(""))),
        }
    }
    rows.estimate("", &r.estimate);
    rows.push(None, "converged_to_zero", None, if r.converged_to_zero { "yes" } else { "no" });
    rows.out
}
