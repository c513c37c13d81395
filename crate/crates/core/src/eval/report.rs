//! Pipe-delimited result tables with mean (SD) cells.

use crate::eval::aggregate::{Stat, Summary};
use crate::eval::harness::EvalReport;

pub struct EvalRow {
    pub name: String,
    pub summary: Summary,
    /// F1 gain of the imputed variant over the raw one, in percentage points.
    pub f1_improvement_pp: Option<f64>,
}

impl EvalRow {
    /// Row for `report`; with `raw` given, the improvement column compares
    /// headline macro-F1 against it.
    pub fn from_report(report: &EvalReport, raw: Option<&EvalReport>) -> Self {
        EvalRow {
            name: report.strategy.clone(),
            summary: report.headline.clone(),
            f1_improvement_pp: raw.map(|r| f1_improvement_pp(&report.headline, &r.headline)),
        }
    }
}

pub fn f1_improvement_pp(imputed: &Summary, raw: &Summary) -> f64 {
    (imputed.f1.mean - raw.f1.mean) * 100.0
}

/// `0.94 (0.05)`
pub fn mean_sd(s: &Stat) -> String {
    format!("{:.2} ({:.2})", s.mean, s.sd)
}

pub fn render_eval_table(rows: &[EvalRow]) -> String {
    let header = [
        "Land. subset",
        "Accuracy",
        "Precision",
        "Recall",
        "F1-score",
        "F1-score imp. (p.p.)",
    ];
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.name.clone(),
                mean_sd(&r.summary.accuracy),
                mean_sd(&r.summary.precision),
                mean_sd(&r.summary.recall),
                mean_sd(&r.summary.f1),
                r.f1_improvement_pp
                    .map(|v| format!("{v:.0}"))
                    .unwrap_or_else(|| "-".into()),
            ]
        })
        .collect();
    render_grid(&header.map(String::from), &body)
}

/// Pipe-delimited table with left-aligned, padded columns.
pub fn render_grid(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:<w$}"))
            .collect();
        format!("| {} |\n", parts.join(" | "))
    };
    let rule: String = format!(
        "|{}|\n",
        widths.iter().map(|w| "-".repeat(w + 2)).collect::<Vec<_>>().join("|")
    );
    let mut out = line(header);
    out.push_str(&rule);
    for r in rows {
        out.push_str(&line(r));
    }
    out
}
