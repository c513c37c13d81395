//! Mean / SD aggregation of per-session metrics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::metrics::MetricsReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationMode {
    #[default]
    PerSession,
    /// Average each test signer's sessions first, then aggregate over signers.
    PerTestSigner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdKind {
    #[default]
    Population,
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub sd: f64,
}

impl Stat {
    pub fn of(values: &[f64], kind: SdKind) -> Stat {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        let den = match kind {
            SdKind::Population => n,
            SdKind::Sample => n - 1.0,
        };
        let sd = if den > 0.0 { (ss / den).sqrt() } else { 0.0 };
        Stat { mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mode: AggregationMode,
    /// Number of units aggregated (sessions or test signers).
    pub n: usize,
    pub accuracy: Stat,
    pub precision: Stat,
    pub recall: Stat,
    pub f1: Stat,
}

/// One scored session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionResult {
    pub test: String,
    pub val: String,
    pub metrics: MetricsReport,
}

type Row = [f64; 4];

fn row(m: &MetricsReport) -> Row {
    [m.accuracy, m.macro_precision, m.macro_recall, m.macro_f1]
}

pub fn aggregate_sessions(results: &[SessionResult], mode: AggregationMode, sd: SdKind) -> Result<Summary> {
    if results.is_empty() {
        return Err(Error::EmptyInput("no session reports to aggregate".into()));
    }
    let rows: Vec<Row> = match mode {
        AggregationMode::PerSession => results.iter().map(|r| row(&r.metrics)).collect(),
        AggregationMode::PerTestSigner => {
            let mut groups: BTreeMap<&str, Vec<Row>> = BTreeMap::new();
            for r in results {
                groups.entry(r.test.as_str()).or_default().push(row(&r.metrics));
            }
            groups
                .values()
                .map(|g| {
                    let mut mean = [0.0; 4];
                    for r in g {
                        for (m, v) in mean.iter_mut().zip(r) {
                            *m += v;
                        }
                    }
                    mean.map(|m| m / g.len() as f64)
                })
                .collect()
        }
    };
    let column = |i: usize| Stat::of(&rows.iter().map(|r| r[i]).collect::<Vec<_>>(), sd);
    Ok(Summary {
        mode,
        n: rows.len(),
        accuracy: column(0),
        precision: column(1),
        recall: column(2),
        f1: column(3),
    })
}
