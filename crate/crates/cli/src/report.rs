//! Aggregation of a finished run directory into a per-pipeline table
//! (`report.csv`) and plot-ready per-radius data (`plot_data.csv`).

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wvlab_core::verifier::{export::read_jsonl, CheckId, VerificationReport};

use crate::artifacts;
use crate::config::CheckSet;
use crate::error::{CliError, Result};
use crate::pipeline::{write_artifact, Outcome, Summary};

/// Pipeline that owns each verification record kind.
pub fn pipeline_of(check: CheckId) -> CheckSet {
    match check {
        CheckId::TractDisc | CheckId::Monomial | CheckId::Logderiv => CheckSet::Thm1,
        CheckId::HigherLogderiv | CheckId::AepsDivergence => CheckSet::Thm2,
        CheckId::ZeroOrderGrowth | CheckId::ZeroOrderAeps | CheckId::ZeroOrderBound | CheckId::NegativeControl => {
            CheckSet::ZeroOrder
        }
        CheckId::ClassicalAsym => CheckSet::Classical,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub pipeline: CheckSet,
    pub outcome: Outcome,
    pub records: usize,
    pub passed: usize,
    pub pass_rate: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub check: CheckId,
    pub records: usize,
    pub passed: usize,
    pub pass_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub checks: Vec<CheckRow>,
    /// Conjunction of the `pass` column of `rows`.
    pub pass: bool,
}

impl Report {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:<12} {:<8} {:>8} {:>8} {:>10}\n",
            "pipeline", "outcome", "records", "passed", "pass_rate"
        );
        for r in &self.rows {
            let rate = r.pass_rate.map_or("-".to_string(), |v| format!("{v:.4}"));
            out.push_str(&format!(
                "{:<12} {:<8} {:>8} {:>8} {:>10}\n",
                r.pipeline.as_str(),
                r.outcome.to_string(),
                r.records,
                r.passed,
                rate
            ));
        }
        out.push('\n');
        out.push_str(&format!(
            "{:<20} {:>8} {:>8} {:>10}\n",
            "check", "records", "passed", "pass_rate"
        ));
        for c in &self.checks {
            out.push_str(&format!(
                "{:<20} {:>8} {:>8} {:>10.4}\n",
                c.check.as_str(),
                c.records,
                c.passed,
                c.pass_rate
            ));
        }
        out.push_str(&format!("\noverall: {}\n", if self.pass { "pass" } else { "fail" }));
        out
    }
}

#[derive(Debug, Deserialize)]
struct ProfileRow {
    r: f64,
    x: f64,
    #[serde(rename = "B")]
    b: f64,
    a: f64,
    eps: f64,
}

#[derive(Debug, Deserialize)]
struct FlagRow {
    r: f64,
    #[serde(rename = "in_E")]
    in_e: bool,
}

#[derive(Debug, Serialize)]
struct PlotRow {
    x: f64,
    #[serde(rename = "B")]
    b: f64,
    a: f64,
    eps: f64,
    #[serde(rename = "in_E")]
    in_e: Option<bool>,
    err_con1: Option<f64>,
    err_20: Option<f64>,
    err_b1_q2: Option<f64>,
    r: f64,
    err_tract: Option<f64>,
    err_b1_q1: Option<f64>,
    err_b1_q3: Option<f64>,
    a_eps: Option<f64>,
}

fn require(path: PathBuf) -> Result<PathBuf> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(CliError::MissingArtifact(path))
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let bad = |e: csv::Error| CliError::Config(format!("{}: {e}", path.display()));
    csv::Reader::from_path(path)
        .map_err(bad)?
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(bad)
}

pub fn read_summary(dir: &Path) -> Result<Summary> {
    let path = require(dir.join(artifacts::SUMMARY_JSON))?;
    serde_json::from_str(&read_to_string(&path)?).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn aggregate(summary: &Summary, records: &[VerificationReport]) -> Report {
    let rows: Vec<ReportRow> = summary
        .pipelines
        .iter()
        .map(|p| {
            let mine: Vec<&VerificationReport> = records.iter().filter(|r| pipeline_of(r.check) == p.name).collect();
            let passed = mine.iter().filter(|r| r.pass).count();
            ReportRow {
                pipeline: p.name,
                outcome: p.outcome,
                records: mine.len(),
                passed,
                pass_rate: (!mine.is_empty()).then(|| passed as f64 / mine.len() as f64),
                pass: p.outcome != Outcome::Fail,
            }
        })
        .collect();
    let mut checks: Vec<CheckRow> = Vec::new();
    for r in records {
        match checks.iter_mut().find(|c| c.check == r.check) {
            Some(c) => {
                c.records += 1;
                c.passed += r.pass as usize;
            }
            None => checks.push(CheckRow {
                check: r.check,
                records: 1,
                passed: r.pass as usize,
                pass_rate: 0.0,
            }),
        }
    }
    checks.sort_by_key(|c| c.check);
    for c in &mut checks {
        c.pass_rate = c.passed as f64 / c.records as f64;
    }
    let pass = rows.iter().all(|r| r.pass);
    Report { rows, checks, pass }
}

fn plot_rows(profile: Vec<ProfileRow>, flags: Option<Vec<FlagRow>>, records: &[VerificationReport]) -> Vec<PlotRow> {
    let in_e: Option<HashMap<u64, bool>> =
        flags.map(|f| f.into_iter().map(|row| (row.r.to_bits(), row.in_e)).collect());
    let err: HashMap<(CheckId, u64, Option<usize>), &VerificationReport> = records
        .iter()
        .map(|rec| ((rec.check, rec.r.to_bits(), rec.q), rec))
        .collect();
    let get = |c: CheckId, r: f64, q: Option<usize>| err.get(&(c, r.to_bits(), q)).map(|rec| rec.max_rel_err);
    profile
        .into_iter()
        .map(|p| PlotRow {
            x: p.x,
            b: p.b,
            a: p.a,
            eps: p.eps,
            in_e: in_e.as_ref().and_then(|m| m.get(&p.r.to_bits()).copied()),
            err_con1: get(CheckId::Monomial, p.r, None),
            err_20: get(CheckId::Logderiv, p.r, None),
            err_b1_q2: get(CheckId::HigherLogderiv, p.r, Some(2)),
            r: p.r,
            err_tract: get(CheckId::TractDisc, p.r, None),
            err_b1_q1: get(CheckId::HigherLogderiv, p.r, Some(1)),
            err_b1_q3: get(CheckId::HigherLogderiv, p.r, Some(3)),
            a_eps: get(CheckId::AepsDivergence, p.r, None),
        })
        .collect()
}

/// Reads `summary.json`, `profile.csv`, `verification.jsonl` (required when
/// any check ran) and `exceptional.csv` (optional) from `dir`, and writes
/// `report.csv` and `plot_data.csv` next to them.
pub fn report(dir: &Path) -> Result<Report> {
    let summary = read_summary(dir)?;
    let profile: Vec<ProfileRow> = read_csv(&require(dir.join(artifacts::PROFILE_CSV))?)?;
    let records = if summary.checks.is_empty() {
        Vec::new()
    } else {
        let path = require(dir.join(artifacts::VERIFICATION_JSONL))?;
        read_jsonl(&read_to_string(&path)?).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
    };
    let flags_path = dir.join(artifacts::EXCEPTIONAL_CSV);
    let flags = if flags_path.is_file() {
        Some(read_csv::<FlagRow>(&flags_path)?)
    } else {
        None
    };

    let report = aggregate(&summary, &records);
    let plot = plot_rows(profile, flags, &records);
    write_csv_rows(&dir.join(artifacts::REPORT_CSV), &report.rows)?;
    write_csv_rows(&dir.join(artifacts::PLOT_DATA_CSV), &plot)?;
    Ok(report)
}

fn write_csv_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    write_artifact(path, |w| {
        let err = |e: csv::Error| wvlab_core::Error::Export(e.to_string());
        let mut out = csv::Writer::from_writer(w);
        for row in rows {
            out.serialize(row).map_err(err)?;
        }
        out.flush().map_err(|e| wvlab_core::Error::Export(e.to_string()))
    })
}
