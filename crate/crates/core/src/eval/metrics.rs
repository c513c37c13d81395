//! Confusion-matrix classification metrics with macro averaging.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub per_class: Vec<ClassMetrics>,
    pub classes: Vec<String>,
    /// `confusion[truth][pred]`
    pub confusion: Vec<Vec<usize>>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Computes accuracy and macro-averaged precision, recall and F1.
///
/// A class with no predicted (or no actual) instances gets precision (or
/// recall) 0; F1 is 0 when both are 0. Macro F1 is the mean of per-class F1.
pub fn compute_metrics<S: AsRef<str>>(truth: &[S], pred: &[S], classes: &[S]) -> Result<MetricsReport> {
    if truth.len() != pred.len() {
        return Err(Error::LengthMismatch(format!(
            "{} truth labels vs {} predictions",
            truth.len(),
            pred.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::EmptyInput("no labels to score".into()));
    }
    if classes.is_empty() {
        return Err(Error::EmptyInput("empty class set".into()));
    }
    let mut lookup = HashMap::with_capacity(classes.len());
    for (i, c) in classes.iter().enumerate() {
        if lookup.insert(c.as_ref(), i).is_some() {
            return Err(Error::Config(format!("duplicate class {:?}", c.as_ref())));
        }
    }
    let idx = |s: &S| {
        lookup
            .get(s.as_ref())
            .copied()
            .ok_or_else(|| Error::UnknownLabel(s.as_ref().to_string()))
    };

    let k = classes.len();
    let mut confusion = vec![vec![0usize; k]; k];
    for (t, p) in truth.iter().zip(pred) {
        confusion[idx(t)?][idx(p)?] += 1;
    }

    let total = truth.len();
    let correct: usize = (0..k).map(|i| confusion[i][i]).sum();
    let per_class: Vec<ClassMetrics> = (0..k)
        .map(|c| {
            let tp = confusion[c][c];
            let support: usize = confusion[c].iter().sum();
            let predicted: usize = confusion.iter().map(|row| row[c]).sum();
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            ClassMetrics {
                class: classes[c].as_ref().to_string(),
                precision,
                recall,
                f1,
                support,
            }
        })
        .collect();

    let mean = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / k as f64;
    Ok(MetricsReport {
        accuracy: ratio(correct, total),
        macro_precision: mean(|c| c.precision),
        macro_recall: mean(|c| c.recall),
        macro_f1: mean(|c| c.f1),
        classes: classes.iter().map(|c| c.as_ref().to_string()).collect(),
        per_class,
        confusion,
    })
}
