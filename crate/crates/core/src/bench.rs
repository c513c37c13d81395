//! Per-stage wall-clock benchmarking and speed-up reports.
//!
//! Stages run serially on the calling thread. One untimed warm-up pass
//! precedes the recorded runs.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::encode::encode;
use crate::error::{Error, Result};
use crate::eval::aggregate::{SdKind, Stat};
use crate::eval::config::ExperimentConfig;
use crate::eval::report::render_grid;
use crate::impute::impute_sequence;
use crate::select::{apply_selection, load_manifest};
use crate::sequence_csv::{read_sequence_with, ReadOptions};

pub trait Clock {
    /// Seconds since an arbitrary fixed origin.
    fn now(&mut self) -> f64;
}

pub struct WallClock(Instant);

impl WallClock {
    pub fn new() -> Self {
        WallClock(Instant::now())
    }
}

impl Default for WallClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for WallClock {
    fn now(&mut self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// Deterministic clock advancing by a fixed step on every reading.
pub struct StepClock {
    t: f64,
    step: f64,
}

impl StepClock {
    pub fn new(step: f64) -> Self {
        StepClock { t: 0.0, step }
    }
}

impl Clock for StepClock {
    fn now(&mut self) -> f64 {
        let t = self.t;
        self.t += self.step;
        t
    }
}

pub trait Stage {
    fn name(&self) -> &str;
    fn run(&mut self) -> Result<()>;
}

/// A stage backed by a closure.
pub struct FnStage<F> {
    name: String,
    f: F,
}

impl<F: FnMut() -> Result<()>> FnStage<F> {
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnStage { name: name.into(), f }
    }
}

impl<F: FnMut() -> Result<()>> Stage for FnStage<F> {
    fn name(&self) -> &str {
        &self.name
    }

    fn run(&mut self) -> Result<()> {
        (self.f)()
    }
}

/// A stage that runs an external program, e.g. a landmark extractor.
pub struct CommandStage {
    pub name: String,
    pub argv: Vec<String>,
}

impl Stage for CommandStage {
    fn name(&self) -> &str {
        &self.name
    }

    fn run(&mut self) -> Result<()> {
        let fail = |reason: String| Error::StageFailed {
            stage: self.name.clone(),
            reason,
        };
        let (prog, args) = self.argv.split_first().ok_or_else(|| fail("empty command".into()))?;
        let status = Command::new(prog)
            .args(args)
            .stdout(std::process::Stdio::null())
            .status()
            .map_err(|e| fail(e.to_string()))?;
        if status.success() {
            Ok(())
        } else {
            Err(fail(format!("exited with {status}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub name: String,
    /// Seconds, one entry per recorded run.
    pub runs: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
}

impl StageTimings {
    pub fn from_runs(name: impl Into<String>, runs: Vec<f64>) -> Self {
        let stat = if runs.is_empty() {
            Stat { mean: 0.0, sd: 0.0 }
        } else {
            Stat::of(&runs, SdKind::Population)
        };
        StageTimings {
            name: name.into(),
            runs,
            mean: stat.mean,
            sd: stat.sd,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub runs: usize,
    pub stages: Vec<StageTimings>,
    pub valid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub video: Option<PathBuf>,
}

impl BenchReport {
    pub fn from_stage_runs(stages: Vec<(String, Vec<f64>)>) -> Self {
        let runs = stages.iter().map(|(_, r)| r.len()).max().unwrap_or(0);
        BenchReport {
            runs,
            stages: stages
                .into_iter()
                .map(|(name, r)| StageTimings::from_runs(name, r))
                .collect(),
            valid: true,
            error: None,
            video: None,
        }
    }

    pub fn stage(&self, name: &str) -> Option<&StageTimings> {
        self.stages.iter().find(|s| s.name == name)
    }

    pub fn total_mean(&self) -> f64 {
        self.stages.iter().map(|s| s.mean).sum()
    }
}

/// Times `runs` passes over `stages` after one warm-up pass.
///
/// A failing stage stops the benchmark; the partial report comes back with
/// `valid = false` and the error message.
pub fn run_bench(stages: &mut [Box<dyn Stage + '_>], runs: usize, clock: &mut dyn Clock) -> BenchReport {
    let mut timings: Vec<Vec<f64>> = vec![Vec::with_capacity(runs); stages.len()];
    let names: Vec<String> = stages.iter().map(|s| s.name().to_string()).collect();
    let finish = |timings: Vec<Vec<f64>>, error: Option<String>| {
        let mut report = BenchReport::from_stage_runs(names.iter().cloned().zip(timings).collect());
        report.runs = runs;
        report.valid = error.is_none();
        report.error = error;
        report
    };

    for stage in stages.iter_mut() {
        if let Err(e) = stage.run() {
            return finish(timings, Some(format!("warm-up: {}", e.full_message())));
        }
    }
    for _ in 0..runs {
        for (i, stage) in stages.iter_mut().enumerate() {
            let start = clock.now();
            let result = stage.run();
            let elapsed = clock.now() - start;
            if let Err(e) = result {
                return finish(timings, Some(e.full_message()));
            }
            timings[i].push(elapsed);
        }
    }
    finish(timings, None)
}

/// In-process stages, in pipeline order.
pub const BUILTIN_STAGES: [&str; 4] = ["read", "select", "impute", "encode"];

/// Stages for benchmarking one sequence file under `cfg`: external commands
/// from `cfg.bench.commands` (with `{video}` expanded) followed by the
/// built-in stages. Each built-in stage works on the previous stage's output,
/// computed once up front. `only` picks and orders stages by name.
pub fn pipeline_stages(
    cfg: &ExperimentConfig,
    video: &Path,
    only: Option<&[String]>,
) -> Result<Vec<Box<dyn Stage>>> {
    let read_opts = ReadOptions::default();
    let selection = load_manifest(&cfg.strategy)?;
    let raw = read_sequence_with(video, &read_opts)?;
    let selected = apply_selection(&raw, &selection)?;
    let imputed = match &cfg.impute {
        Some(c) => impute_sequence(&selected, c)?.0,
        None => selected.clone(),
    };
    let spec = cfg.encode;
    let strategy = selection.name.clone();

    let mut all: Vec<Box<dyn Stage>> = Vec::new();
    for c in &cfg.bench.commands {
        all.push(Box::new(CommandStage {
            name: c.name.clone(),
            argv: c.argv.iter().map(|a| a.replace("{video}", &video.to_string_lossy())).collect(),
        }));
    }
    let path = video.to_path_buf();
    all.push(Box::new(FnStage::new("read", move || read_sequence_with(&path, &read_opts).map(drop))));
    all.push(Box::new(FnStage::new("select", move || apply_selection(&raw, &selection).map(drop))));
    let impute_cfg = cfg.impute;
    all.push(Box::new(FnStage::new("impute", move || match &impute_cfg {
        Some(c) => impute_sequence(&selected, c).map(drop),
        None => Ok(()),
    })));
    all.push(Box::new(FnStage::new("encode", move || encode(&imputed, &spec, &strategy).map(drop))));

    let Some(only) = only else { return Ok(all) };
    let mut slots: Vec<Option<Box<dyn Stage>>> = all.into_iter().map(Some).collect();
    only.iter()
        .map(|name| {
            slots
                .iter_mut()
                .find(|s| s.as_ref().is_some_and(|s| s.name() == name))
                .and_then(Option::take)
                .ok_or_else(|| Error::Config(format!("unknown or repeated bench stage `{name}`")))
        })
        .collect()
}

/// Benchmarks `video` through the configured stages.
pub fn bench_pipeline(
    cfg: &ExperimentConfig,
    video: &Path,
    runs: usize,
    only: Option<&[String]>,
    clock: &mut dyn Clock,
) -> Result<BenchReport> {
    if runs == 0 {
        return Err(Error::Config("runs must be positive".into()));
    }
    let mut stages = pipeline_stages(cfg, video, only)?;
    let mut report = run_bench(&mut stages, runs, clock);
    report.video = Some(video.to_path_buf());
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSpeedup {
    pub name: String,
    pub baseline_mean: f64,
    pub candidate_mean: f64,
    pub speedup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedupTable {
    pub stages: Vec<StageSpeedup>,
    pub baseline_total: f64,
    pub candidate_total: f64,
    /// `baseline_total / candidate_total` over all stages.
    pub end_to_end: f64,
}

pub fn compare_reports(candidate: &BenchReport, baseline: &BenchReport) -> Result<SpeedupTable> {
    let mut cand_names: Vec<&str> = candidate.stages.iter().map(|s| s.name.as_str()).collect();
    let mut base_names: Vec<&str> = baseline.stages.iter().map(|s| s.name.as_str()).collect();
    cand_names.sort_unstable();
    base_names.sort_unstable();
    if cand_names != base_names {
        return Err(Error::StageMismatch(format!(
            "candidate stages {cand_names:?} vs baseline stages {base_names:?}"
        )));
    }
    let stages = candidate
        .stages
        .iter()
        .map(|c| {
            let b = baseline.stage(&c.name).expect("stage sets match");
            StageSpeedup {
                name: c.name.clone(),
                baseline_mean: b.mean,
                candidate_mean: c.mean,
                speedup: b.mean / c.mean,
            }
        })
        .collect();
    let baseline_total = baseline.total_mean();
    let candidate_total = candidate.total_mean();
    Ok(SpeedupTable {
        stages,
        baseline_total,
        candidate_total,
        end_to_end: baseline_total / candidate_total,
    })
}

/// Per-run rows followed by a `Mean (SD)` row, three decimals.
pub fn render_bench_table(report: &BenchReport) -> String {
    let mut header = vec!["#".to_string()];
    header.extend(report.stages.iter().map(|s| s.name.clone()));
    let mut rows: Vec<Vec<String>> = (0..report.runs)
        .map(|r| {
            let mut row = vec![(r + 1).to_string()];
            row.extend(
                report
                    .stages
                    .iter()
                    .map(|s| s.runs.get(r).map_or("-".to_string(), |v| format!("{v:.3}"))),
            );
            row
        })
        .collect();
    let mut last = vec!["Mean (SD)".to_string()];
    last.extend(report.stages.iter().map(|s| format!("{:.3} ({:.3})", s.mean, s.sd)));
    rows.push(last);
    render_grid(&header, &rows)
}

pub fn render_speedup_table(table: &SpeedupTable) -> String {
    let header: Vec<String> = ["Stage", "Baseline mean (s)", "Candidate mean (s)", "Speed-up"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut rows: Vec<Vec<String>> = table
        .stages
        .iter()
        .map(|s| {
            vec![
                s.name.clone(),
                format!("{:.3}", s.baseline_mean),
                format!("{:.3}", s.candidate_mean),
                format!("{:.2}x", s.speedup),
            ]
        })
        .collect();
    rows.push(vec![
        "end-to-end".into(),
        format!("{:.3}", table.baseline_total),
        format!("{:.3}", table.candidate_total),
        format!("{:.2}x", table.end_to_end),
    ]);
    render_grid(&header, &rows)
}
