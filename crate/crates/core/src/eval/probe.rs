//! Nearest-centroid classifier over encoded skeleton images.
//!
//! A deliberately simple probe: it lets the evaluation harness score
//! encodings end to end without an external trainer.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Flattens an RGB image into features in [0, 1], resampling each half
/// (x and y) to `half_width` columns by nearest neighbour.
pub fn image_features(height: usize, width: usize, pixels: &[u8], half_width: usize) -> Vec<f64> {
    let src_half = width / 2;
    let mut out = Vec::with_capacity(height * 2 * half_width * 3);
    for row in 0..height {
        for half in 0..2 {
            for g in 0..half_width {
                let src = if src_half == 0 { 0 } else { (g * src_half) / half_width };
                let col = half * src_half + src.min(src_half.saturating_sub(1));
                let i = (row * width + col) * 3;
                out.extend(pixels[i..i + 3].iter().map(|&p| p as f64 / 255.0));
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct NearestCentroid {
    classes: Vec<String>,
    centroids: Vec<Vec<f64>>,
}

impl NearestCentroid {
    pub fn fit<S: AsRef<str>>(features: &[Vec<f64>], labels: &[S]) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::LengthMismatch(format!(
                "{} feature vectors vs {} labels",
                features.len(),
                labels.len()
            )));
        }
        if features.is_empty() {
            return Err(Error::EmptyInput("no training samples".into()));
        }
        let dim = features[0].len();
        let mut sums: BTreeMap<&str, (Vec<f64>, usize)> = BTreeMap::new();
        for (f, label) in features.iter().zip(labels) {
            if f.len() != dim {
                return Err(Error::LengthMismatch("feature vectors differ in length".into()));
            }
            let entry = sums.entry(label.as_ref()).or_insert_with(|| (vec![0.0; dim], 0));
            for (s, v) in entry.0.iter_mut().zip(f) {
                *s += v;
            }
            entry.1 += 1;
        }
        let (classes, centroids) = sums
            .into_iter()
            .map(|(label, (sum, n))| (label.to_string(), sum.into_iter().map(|s| s / n as f64).collect()))
            .unzip();
        Ok(NearestCentroid { classes, centroids })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    /// Label of the closest centroid; ties go to the first class in sorted order.
    pub fn predict(&self, features: &[f64]) -> &str {
        let mut best = (f64::INFINITY, 0);
        for (i, c) in self.centroids.iter().enumerate() {
            let d: f64 = c.iter().zip(features).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best.0 {
                best = (d, i);
            }
        }
        &self.classes[best.1]
    }
}
