//! Result tables and file exports.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::orchestrator::RunRecord;

pub const HEADER: [&str; 8] = ["ID", "Variable", "Domain", "Const.", "Valid", "Correct", "Step", "Token"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRow {
    #[serde(rename = "ID")]
    pub id: u32,
    #[serde(rename = "Variable")]
    pub variable: String,
    #[serde(rename = "Domain")]
    pub domain: String,
    #[serde(rename = "Const.")]
    pub constraint: String,
    #[serde(rename = "Valid")]
    pub valid: String,
    #[serde(rename = "Correct")]
    pub correct: String,
    #[serde(rename = "Step")]
    pub step: u32,
    #[serde(rename = "Token")]
    pub token: u64,
}

fn yes_no(b: bool) -> String {
    if b { "yes" } else { "no" }.to_string()
}

impl ReportRow {
    pub fn from_record(r: &RunRecord) -> Self {
        ReportRow {
            id: r.spec.id,
            variable: r.spec.variable_kind.label().into(),
            domain: r.spec.domain_kind.label().into(),
            constraint: r.spec.constraint_kind.label().into(),
            valid: yes_no(r.valid),
            correct: yes_no(r.valid && r.correct),
            step: r.steps,
            token: r.tokens,
        }
    }

    fn cells(&self) -> [String; 8] {
        [
            self.id.to_string(),
            self.variable.clone(),
            self.domain.clone(),
            self.constraint.clone(),
            self.valid.clone(),
            self.correct.clone(),
            self.step.to_string(),
            self.token.to_string(),
        ]
    }
}

/// Rows sorted by id.
pub fn report_rows(records: &[RunRecord]) -> Vec<ReportRow> {
    let mut rows: Vec<ReportRow> = records.iter().map(ReportRow::from_record).collect();
    rows.sort_by_key(|r| r.id);
    rows
}

/// Fixed-width table, columns separated by two spaces, followed by notes.
pub fn render_table(records: &[RunRecord]) -> String {
    let rows: Vec<[String; 8]> = report_rows(records).iter().map(ReportRow::cells).collect();
    let mut widths = HEADER.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[&str]| {
        let mut s = cells
            .iter()
            .zip(widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ");
        s.truncate(s.trim_end().len());
        s.push('\n');
        s
    };
    let mut out = line(&HEADER);
    let total: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
    out.push_str(&"-".repeat(total));
    out.push('\n');
    for row in &rows {
        out.push_str(&line(&row.each_ref().map(String::as_str)));
    }
    out.push('\n');
    out.push_str("Correct: automated structural conformance check.\n");
    if records.iter().any(|r| r.aborted.is_some()) {
        out.push_str("Runs marked aborted stopped on a backend failure:\n");
        for r in records.iter().filter(|r| r.aborted.is_some()) {
            out.push_str(&format!("  #{}: {}\n", r.spec.id, r.aborted.as_deref().unwrap_or_default()));
        }
    }
    out.push_str("Token: backend-reported or script-declared usage; replayed counts are not live-API measurements.\n");
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Csv,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// JSON embeds full records with traces; CSV holds the eight table columns.
pub fn export_results(records: &[RunRecord], format: ExportFormat, path: &Path) -> Result<(), ReportError> {
    match format {
        ExportFormat::Json => {
            std::fs::write(path, serde_json::to_string_pretty(records)? + "\n")?;
        }
        ExportFormat::Csv => {
            let mut w = csv::Writer::from_path(path)?;
            for row in report_rows(records) {
                w.serialize(row)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn import_results_json(path: &Path) -> Result<Vec<RunRecord>, ReportError> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

pub fn import_results_csv(path: &Path) -> Result<Vec<ReportRow>, ReportError> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}
