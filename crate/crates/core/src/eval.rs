//! Scoring of model responses against labeled test sets.
//!
//! The confusion matrix is indexed `[plan_valid][trace_valid]` with `false`
//! first, so `[[1, 0], [1, 2]]` means one response with neither valid, one
//! with only the plan valid, and two with both valid.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::batch;
use crate::dataset::Dataset;
use crate::tokens::{from_line, Domain};
use crate::validate::{classify_response, Problem, ResponseClassification, TraceErrorClass};

pub const REPORT_SCHEMA: &str = "tracelab-eval/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub id: u64,
    pub response_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InputError {
    #[error("line {line}: unreadable response: {message}")]
    Unreadable { line: usize, message: String },
    #[error("line {line}: response id {id} is not in the dataset")]
    UnknownId { line: usize, id: u64 },
    #[error("line {line}: duplicate response id {id}")]
    DuplicateId { line: usize, id: u64 },
    #[error("record {id}: stored instance is invalid: {message}")]
    BadRecord { id: u64, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct InputErrors(pub Vec<InputError>);

impl fmt::Display for InputErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} input error(s)", self.0.len())?;
        for e in &self.0 {
            write!(f, "\n  {e}")?;
        }
        Ok(())
    }
}

/// Parses a response file body. Every unreadable line is reported; line
/// numbers are 1-based. Blank lines are skipped.
pub fn parse_responses(text: &str) -> (Vec<(usize, ResponseRecord)>, Vec<InputError>) {
    let mut ok = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<ResponseRecord>(line) {
            Ok(r) => ok.push((i + 1, r)),
            Err(e) => errors.push(InputError::Unreadable { line: i + 1, message: e.to_string() }),
        }
    }
    (ok, errors)
}

pub fn load_responses(path: &Path) -> Result<Vec<(usize, ResponseRecord)>, InputErrors> {
    let text = fs::read_to_string(path)
        .map_err(|e| InputErrors(vec![InputError::Unreadable { line: 0, message: format!("{}: {e}", path.display()) }]))?;
    let (ok, errors) = parse_responses(&text);
    if errors.is_empty() {
        Ok(ok)
    } else {
        Err(InputErrors(errors))
    }
}

/// Associative, commutative per-response counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub matrix: [[u64; 2]; 2],
    pub parse_failures: u64,
    pub errors: [u64; 6],
}

impl Tally {
    pub fn of(c: &ResponseClassification) -> Self {
        let mut t = Tally::default();
        t.matrix[c.plan_valid as usize][c.trace_valid as usize] = 1;
        t.parse_failures = c.parse_failed as u64;
        if let Some(e) = c.trace_error {
            let k = TraceErrorClass::ALL.iter().position(|&x| x == e.class).unwrap();
            t.errors[k] = 1;
        }
        t
    }

    pub fn merge(mut self, other: Tally) -> Tally {
        for p in 0..2 {
            for q in 0..2 {
                self.matrix[p][q] += other.matrix[p][q];
            }
        }
        self.parse_failures += other.parse_failures;
        for (a, b) in self.errors.iter_mut().zip(other.errors) {
            *a += b;
        }
        self
    }

    pub fn total(&self) -> u64 {
        self.matrix.iter().flatten().sum()
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSetReport {
    pub test_set: String,
    pub domain: Domain,
    pub responses: u64,
    /// `[plan_valid][trace_valid]`, false before true.
    pub matrix: [[u64; 2]; 2],
    pub plan_validity: Option<f64>,
    /// Trace-valid fraction among plan-valid responses.
    pub trace_validity_within_valid_plans: Option<f64>,
    pub trace_validity: Option<f64>,
    pub parse_failures: u64,
    pub error_histogram: BTreeMap<TraceErrorClass, u64>,
}

impl TestSetReport {
    pub fn from_tally(test_set: &str, domain: Domain, t: &Tally) -> Self {
        let n = t.total();
        let plan_valid = t.matrix[1][0] + t.matrix[1][1];
        let trace_valid = t.matrix[0][1] + t.matrix[1][1];
        TestSetReport {
            test_set: test_set.to_string(),
            domain,
            responses: n,
            matrix: t.matrix,
            plan_validity: ratio(plan_valid, n),
            trace_validity_within_valid_plans: ratio(t.matrix[1][1], plan_valid),
            trace_validity: ratio(trace_valid, n),
            parse_failures: t.parse_failures,
            error_histogram: TraceErrorClass::ALL.into_iter().zip(t.errors).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema: String,
    pub test_sets: Vec<TestSetReport>,
}

impl EvalReport {
    pub fn new(test_sets: Vec<TestSetReport>) -> Self {
        EvalReport { schema: REPORT_SCHEMA.to_string(), test_sets }
    }
}

/// Classifies every response against its record and aggregates the counts.
pub fn score(test_set: &str, dataset: &Dataset, responses: &[(usize, ResponseRecord)]) -> Result<TestSetReport, InputErrors> {
    let by_id: HashMap<u64, usize> = dataset.records.iter().enumerate().map(|(i, r)| (r.id, i)).collect();
    let mut errors = Vec::new();
    let mut seen = HashMap::new();
    let mut jobs = Vec::with_capacity(responses.len());
    for (line, r) in responses {
        let Some(&idx) = by_id.get(&r.id) else {
            errors.push(InputError::UnknownId { line: *line, id: r.id });
            continue;
        };
        if seen.insert(r.id, *line).is_some() {
            errors.push(InputError::DuplicateId { line: *line, id: r.id });
            continue;
        }
        jobs.push((idx, r));
    }
    let mut problems: HashMap<usize, Problem> = HashMap::new();
    for &(idx, _) in &jobs {
        match dataset.records[idx].problem() {
            Ok(p) => {
                problems.insert(idx, p);
            }
            Err(e) => errors.push(InputError::BadRecord { id: dataset.records[idx].id, message: e.to_string() }),
        }
    }
    if !errors.is_empty() {
        return Err(InputErrors(errors));
    }
    let tallies = batch::map_slice(&jobs, |(idx, r)| {
        Tally::of(&classify_response(&problems[idx], &from_line(&r.response_text)))
    });
    let tally = tallies.into_iter().fold(Tally::default(), Tally::merge);
    Ok(TestSetReport::from_tally(test_set, dataset.manifest.domain, &tally))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Json,
    Csv,
    TextTable,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "text" | "table" | "text-table" => Ok(ReportFormat::TextTable),
            _ => Err(format!("unknown report format `{s}` (json, csv, text-table)")),
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn pct(v: Option<f64>) -> String {
    v.map(|x| format!("{:.1}%", 100.0 * x)).unwrap_or_else(|| "n/a".into())
}

pub fn render(report: &EvalReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Csv => render_csv(report),
        ReportFormat::TextTable => render_table(report),
    }
}

fn render_csv(report: &EvalReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = [
        "test_set",
        "domain",
        "responses",
        "plan_invalid_trace_invalid",
        "plan_invalid_trace_valid",
        "plan_valid_trace_invalid",
        "plan_valid_trace_valid",
        "plan_validity",
        "trace_validity_within_valid_plans",
        "trace_validity",
        "parse_failures",
    ]
    .map(String::from)
    .to_vec();
    header.extend(TraceErrorClass::ALL.map(|c| c.name().to_string()));
    w.write_record(&header).expect("in-memory csv");
    for t in &report.test_sets {
        let domain = match t.domain {
            Domain::Maze => "maze",
            Domain::Sokoban => "sokoban",
        };
        let mut row = vec![
            t.test_set.clone(),
            domain.to_string(),
            t.responses.to_string(),
            t.matrix[0][0].to_string(),
            t.matrix[0][1].to_string(),
            t.matrix[1][0].to_string(),
            t.matrix[1][1].to_string(),
            opt(t.plan_validity),
            opt(t.trace_validity_within_valid_plans),
            opt(t.trace_validity),
            t.parse_failures.to_string(),
        ];
        row.extend(TraceErrorClass::ALL.map(|c| t.error_histogram.get(&c).copied().unwrap_or(0).to_string()));
        w.write_record(&row).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

fn render_table(report: &EvalReport) -> String {
    let name_w = report.test_sets.iter().map(|t| t.test_set.len()).max().unwrap_or(0).max(8);
    let mut s = String::new();
    let _ = writeln!(s, "{:<name_w$}  {:>9}  {:>10}  {:>11}  {:>10}", "Test set", "Responses", "Plan Val.", "Trace Val.", "Parse Err.");
    let _ = writeln!(s, "{}", "-".repeat(name_w + 50));
    for t in &report.test_sets {
        let _ = writeln!(
            s,
            "{:<name_w$}  {:>9}  {:>10}  {:>11}  {:>10}",
            t.test_set,
            t.responses,
            pct(t.plan_validity),
            pct(t.trace_validity_within_valid_plans),
            t.parse_failures
        );
    }
    s.push_str("\nTrace Val. = trace validity within valid plans.\n");
    for t in &report.test_sets {
        let _ = writeln!(s, "\n{}: plan x trace validity", t.test_set);
        let _ = writeln!(s, "                 trace invalid  trace valid");
        let _ = writeln!(s, "  plan invalid   {:>13}  {:>11}", t.matrix[0][0], t.matrix[0][1]);
        let _ = writeln!(s, "  plan valid     {:>13}  {:>11}", t.matrix[1][0], t.matrix[1][1]);
    }
    s
}
