//! Gap imputation with short-window piecewise splines.
//!
//! Each landmark's x and y series are reconstructed independently. For a run
//! of missing frames `[a, b]` with observations on both sides:
//!
//! * if the run is longer than `window`, it is bridged linearly between the
//!   observations at `a - 1` and `b + 1`;
//! * otherwise the knots are the observed frames in `[a - window, a - 1]` and
//!   `[b + 1, b + window]`. With at least `cubic_min_points` knots the run is
//!   filled from a natural cubic spline through them, else linearly.
//!
//! Only originally observed values serve as knots. Runs touching either end of
//! the sequence are left missing unless extrapolation is enabled, in which
//! case they hold the nearest observed value.

use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landmark::{LandmarkSequence, Point};
use crate::spline::NaturalCubicSpline;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ImputeConfig {
    pub window: usize,
    pub cubic_min_points: usize,
    pub allow_extrapolation: bool,
}

impl Default for ImputeConfig {
    fn default() -> Self {
        ImputeConfig {
            window: 5,
            cubic_min_points: 4,
            allow_extrapolation: false,
        }
    }
}

impl ImputeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 2 {
            return Err(Error::Config(format!("impute window must be >= 2, got {}", self.window)));
        }
        if self.cubic_min_points < 4 {
            return Err(Error::Config(format!(
                "cubic_min_points must be >= 4, got {}",
                self.cubic_min_points
            )));
        }
        Ok(())
    }
}

/// Counts are per (frame, landmark) point; x and y share a mask so they are filled together.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImputeStats {
    pub filled_cubic: usize,
    pub filled_linear: usize,
    pub left_missing: usize,
}

impl AddAssign for ImputeStats {
    fn add_assign(&mut self, rhs: Self) {
        self.filled_cubic += rhs.filled_cubic;
        self.filled_linear += rhs.filled_linear;
        self.left_missing += rhs.left_missing;
    }
}

/// How a missing point was reconstructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fill {
    Cubic,
    Linear,
    Hold,
}

pub fn impute_sequence(seq: &LandmarkSequence, cfg: &ImputeConfig) -> Result<(LandmarkSequence, ImputeStats)> {
    cfg.validate()?;
    let mut out = seq.clone();
    let mut stats = ImputeStats::default();
    let t = seq.frame_count();
    let l = seq.landmark_count();
    for slot in 0..l {
        let series = seq.series(slot);
        let filled = impute_series(&series, cfg);
        for (frame, (before, after)) in series.iter().zip(&filled).enumerate() {
            if before.is_some() {
                continue;
            }
            match after {
                Some((p, kind)) => {
                    out.set(frame, slot, Some(*p));
                    match kind {
                        Fill::Cubic => stats.filled_cubic += 1,
                        Fill::Linear | Fill::Hold => stats.filled_linear += 1,
                    }
                }
                None => stats.left_missing += 1,
            }
        }
    }
    debug_assert_eq!(out.frame_count(), t);
    Ok((out, stats))
}

/// Fills one landmark's series. Observed entries come back unchanged, tagged
/// as `Fill::Hold` only for convenience; callers look at the input mask.
pub fn impute_series(series: &[Option<Point>], cfg: &ImputeConfig) -> Vec<Option<(Point, Fill)>> {
    let t = series.len();
    let mut out: Vec<Option<(Point, Fill)>> = series.iter().map(|p| p.map(|p| (p, Fill::Hold))).collect();
    let Some(first) = series.iter().position(Option::is_some) else {
        return out;
    };
    let last = series.iter().rposition(Option::is_some).unwrap_or(first);

    if cfg.allow_extrapolation {
        let head = series[first].unwrap();
        let tail = series[last].unwrap();
        for slot in out.iter_mut().take(first) {
            *slot = Some((head, Fill::Hold));
        }
        for slot in out.iter_mut().skip(last + 1) {
            *slot = Some((tail, Fill::Hold));
        }
    }

    let mut frame = first;
    while frame < last {
        if series[frame].is_some() {
            frame += 1;
            continue;
        }
        let a = frame;
        let mut b = a;
        while series[b + 1].is_none() {
            b += 1;
        }
        fill_gap(series, a, b, cfg, &mut out);
        frame = b + 1;
    }
    debug_assert!(out.len() == t);
    out
}

fn fill_gap(
    series: &[Option<Point>],
    a: usize,
    b: usize,
    cfg: &ImputeConfig,
    out: &mut [Option<(Point, Fill)>],
) {
    let left = series[a - 1].expect("gap is bounded by observations");
    let right = series[b + 1].expect("gap is bounded by observations");
    let gap_len = b - a + 1;

    let knots: Vec<usize> = if gap_len > cfg.window {
        Vec::new()
    } else {
        let lo = a.saturating_sub(cfg.window);
        let hi = (b + cfg.window).min(series.len() - 1);
        (lo..a)
            .chain(b + 1..=hi)
            .filter(|&f| series[f].is_some())
            .collect()
    };

    if knots.len() >= cfg.cubic_min_points {
        let xs: Vec<f64> = knots.iter().map(|&f| f as f64).collect();
        let px: Vec<f64> = knots.iter().map(|&f| series[f].unwrap().x).collect();
        let py: Vec<f64> = knots.iter().map(|&f| series[f].unwrap().y).collect();
        let sx = NaturalCubicSpline::new(&xs, &px);
        let sy = NaturalCubicSpline::new(&xs, &py);
        for f in a..=b {
            let p = Point::new(clamp01(sx.eval(f as f64)), clamp01(sy.eval(f as f64)));
            out[f] = Some((p, Fill::Cubic));
        }
    } else {
        let x0 = (a - 1) as f64;
        let span = (b + 1 - (a - 1)) as f64;
        for f in a..=b {
            let w = (f as f64 - x0) / span;
            let p = Point::new(
                clamp01(lerp(left.x, right.x, w)),
                clamp01(lerp(left.y, right.y, w)),
            );
            out[f] = Some((p, Fill::Linear));
        }
    }
}

fn lerp(a: f64, b: f64, w: f64) -> f64 {
    a + (b - a) * w
}

fn clamp01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}
