//! Runs split-plan sessions through a trainer and collects scored results.

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::augment::AugmentConfig;
use crate::dataset::DatasetManifest;
use crate::encode::read_png;
use crate::error::{Error, Result};
use crate::eval::aggregate::{aggregate_sessions, AggregationMode, SessionResult, Summary};
use crate::eval::config::{ExperimentConfig, TrainerEndpoint};
use crate::eval::metrics::compute_metrics;
use crate::eval::probe::{image_features, NearestCentroid};
use crate::eval::split::{make_split_plan, Session, SplitPlan};
use crate::pipeline::{encode_dataset, write_json, EncodeOptions, ImageIndex, IndexItem};
use crate::select::load_manifest;

/// Session description handed to an external trainer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionFile {
    pub session_index: usize,
    pub test: String,
    pub val: String,
    pub train: Vec<String>,
    pub augment: AugmentConfig,
}

/// Predictions written by an external trainer, in index order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Predictions {
    Object { labels: Vec<String> },
    List(Vec<String>),
}

impl Predictions {
    pub fn into_labels(self) -> Vec<String> {
        match self {
            Predictions::Object { labels } | Predictions::List(labels) => labels,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub strategy: String,
    pub imputed: bool,
    pub sessions: Vec<SessionResult>,
    pub per_session: Summary,
    pub per_test_signer: Summary,
    /// Summary selected by the experiment's `split_mode`.
    pub headline: Summary,
}

pub struct SessionRunner<'a> {
    pub index: &'a ImageIndex,
    /// Directory that index image paths are relative to.
    pub image_dir: &'a Path,
    pub trainer: &'a TrainerEndpoint,
    pub augment: &'a AugmentConfig,
    /// Scratch space for external trainer files.
    pub work_dir: &'a Path,
    pub workers: usize,
}

impl SessionRunner<'_> {
    pub fn run(&self, plan: &SplitPlan) -> Result<Vec<SessionResult>> {
        let classes: Vec<String> = self
            .index
            .items
            .iter()
            .map(|i| i.label.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers.max(1))
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        match self.trainer {
            TrainerEndpoint::NearestCentroid { half_width } => {
                let features = self.load_features(*half_width)?;
                pool.install(|| {
                    plan.sessions
                        .par_iter()
                        .map(|s| self.centroid_session(s, &features, &classes))
                        .collect()
                })
            }
            TrainerEndpoint::Command { train, predict } => pool.install(|| {
                plan.sessions
                    .par_iter()
                    .enumerate()
                    .map(|(i, s)| self.command_session(i, s, train, predict, &classes))
                    .collect()
            }),
        }
    }

    fn load_features(&self, half_width: Option<usize>) -> Result<Vec<Vec<f64>>> {
        let images = self
            .index
            .items
            .iter()
            .map(|item| read_png(self.image_dir.join(&item.image)))
            .collect::<Result<Vec<_>>>()?;
        let target = half_width
            .or_else(|| images.iter().map(|(_, w, _)| w / 2).max())
            .unwrap_or(1)
            .max(1);
        let height = images.first().map(|i| i.0);
        if images.iter().any(|i| Some(i.0) != height) {
            return Err(Error::Image("images in one index must share a height".into()));
        }
        Ok(images
            .iter()
            .map(|(h, w, px)| image_features(*h, *w, px, target))
            .collect())
    }

    fn partition(&self, session: &Session) -> (Vec<usize>, Vec<usize>) {
        let train: HashSet<&str> = session.train.iter().map(String::as_str).collect();
        let mut tr = Vec::new();
        let mut te = Vec::new();
        for (i, item) in self.index.items.iter().enumerate() {
            if train.contains(item.signer_id.as_str()) {
                tr.push(i);
            } else if item.signer_id == session.test {
                te.push(i);
            }
        }
        (tr, te)
    }

    fn centroid_session(&self, session: &Session, features: &[Vec<f64>], classes: &[String]) -> Result<SessionResult> {
        let (train, test) = self.partition(session);
        if train.is_empty() || test.is_empty() {
            return Err(Error::Trainer(format!(
                "session test={} val={} has an empty train or test partition",
                session.test, session.val
            )));
        }
        let train_x: Vec<Vec<f64>> = train.iter().map(|&i| features[i].clone()).collect();
        let train_y: Vec<&str> = train.iter().map(|&i| self.index.items[i].label.as_str()).collect();
        let model = NearestCentroid::fit(&train_x, &train_y)?;
        let truth: Vec<&str> = test.iter().map(|&i| self.index.items[i].label.as_str()).collect();
        let pred: Vec<&str> = test.iter().map(|&i| model.predict(&features[i])).collect();
        let class_refs: Vec<&str> = classes.iter().map(String::as_str).collect();
        Ok(SessionResult {
            test: session.test.clone(),
            val: session.val.clone(),
            metrics: compute_metrics(&truth, &pred, &class_refs)?,
        })
    }

    fn command_session(
        &self,
        n: usize,
        session: &Session,
        train_cmd: &[String],
        predict_cmd: &[String],
        classes: &[String],
    ) -> Result<SessionResult> {
        let dir = self.work_dir.join(format!("session_{n:03}"));
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let session_path = dir.join("session.json");
        write_json(
            &session_path,
            &SessionFile {
                session_index: n,
                test: session.test.clone(),
                val: session.val.clone(),
                train: session.train.clone(),
                augment: self.augment.clone(),
            },
        )?;

        // full index with absolute image paths; the trainer filters by signer
        let absolute = |items: Vec<IndexItem>| ImageIndex {
            items: items
                .into_iter()
                .map(|mut i| {
                    i.image = absolute_path(&self.image_dir.join(&i.image));
                    i
                })
                .collect(),
            failures: Vec::new(),
        };
        let images_path = dir.join("images.json");
        absolute(self.index.items.clone()).save(&images_path)?;
        let (_, test) = self.partition(session);
        if test.is_empty() {
            return Err(Error::Trainer(format!("no test images for signer {}", session.test)));
        }
        let test_items: Vec<IndexItem> = test.iter().map(|&i| self.index.items[i].clone()).collect();
        let truth: Vec<String> = test_items.iter().map(|i| i.label.clone()).collect();
        let test_path = dir.join("test_images.json");
        absolute(test_items).save(&test_path)?;

        let ckpt = dir.join("ckpt");
        let preds_path = dir.join("preds.json");
        let subst = |arg: &String| {
            arg.replace("{session}", &session_path.to_string_lossy())
                .replace("{images}", &images_path.to_string_lossy())
                .replace("{test_images}", &test_path.to_string_lossy())
                .replace("{ckpt}", &ckpt.to_string_lossy())
                .replace("{out}", &preds_path.to_string_lossy())
        };
        run_command(&train_cmd.iter().map(subst).collect::<Vec<_>>())?;
        run_command(&predict_cmd.iter().map(subst).collect::<Vec<_>>())?;

        let text = fs::read_to_string(&preds_path).map_err(|e| Error::io(&preds_path, e))?;
        let pred = serde_json::from_str::<Predictions>(&text)
            .map_err(|e| Error::json(&preds_path, e))?
            .into_labels();
        Ok(SessionResult {
            test: session.test.clone(),
            val: session.val.clone(),
            metrics: compute_metrics(&truth, &pred, classes)?,
        })
    }
}

fn absolute_path(p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        std::env::current_dir().map(|d| d.join(p)).unwrap_or_else(|_| p.to_path_buf())
    }
}

fn run_command(argv: &[String]) -> Result<()> {
    let (prog, args) = argv
        .split_first()
        .ok_or_else(|| Error::Trainer("empty trainer command".into()))?;
    log::info!("running trainer: {}", argv.join(" "));
    let status = Command::new(prog)
        .args(args)
        .status()
        .map_err(|e| Error::Trainer(format!("{prog}: {e}")))?;
    if !status.success() {
        return Err(Error::Trainer(format!("{} exited with {status}", argv.join(" "))));
    }
    Ok(())
}

/// Encodes the configured dataset into `out_dir/images`, runs every nested
/// LOPO session, and writes `eval_report.json` and `eval_table.txt`.
pub fn evaluate(cfg: &ExperimentConfig, out_dir: &Path, workers: usize) -> Result<EvalReport> {
    cfg.validate()?;
    let manifest = DatasetManifest::load(&cfg.dataset_manifest)?;
    let selection = load_manifest(&cfg.strategy)?;
    let image_dir = out_dir.join("images");
    let opts = EncodeOptions {
        impute: cfg.impute,
        spec: cfg.encode,
        workers,
        ..EncodeOptions::default()
    };
    let index = encode_dataset(&manifest, &selection, &opts, &image_dir)?;
    if !index.failures.is_empty() {
        return Err(Error::Trainer(format!(
            "{} sequences failed to encode; see {}",
            index.failures.len(),
            image_dir.join("index.json").display()
        )));
    }
    let plan = make_split_plan(&manifest)?;
    write_json(out_dir.join("split_plan.json"), &plan)?;

    let work_dir = out_dir.join("sessions");
    let runner = SessionRunner {
        index: &index,
        image_dir: &image_dir,
        trainer: &cfg.trainer,
        augment: &cfg.augment,
        work_dir: &work_dir,
        workers,
    };
    let sessions = runner.run(&plan)?;
    let report = build_report(&selection.name, cfg.impute.is_some(), sessions, cfg)?;
    write_json(out_dir.join("eval_report.json"), &report)?;
    let table = crate::eval::report::render_eval_table(&[crate::eval::report::EvalRow::from_report(&report, None)]);
    fs::write(out_dir.join("eval_table.txt"), table).map_err(|e| Error::io(out_dir, e))?;
    Ok(report)
}

pub fn build_report(
    strategy: &str,
    imputed: bool,
    sessions: Vec<SessionResult>,
    cfg: &ExperimentConfig,
) -> Result<EvalReport> {
    let per_session = aggregate_sessions(&sessions, AggregationMode::PerSession, cfg.sd)?;
    let per_test_signer = aggregate_sessions(&sessions, AggregationMode::PerTestSigner, cfg.sd)?;
    let headline = match cfg.split_mode {
        AggregationMode::PerSession => per_session.clone(),
        AggregationMode::PerTestSigner => per_test_signer.clone(),
    };
    Ok(EvalReport {
        strategy: strategy.to_string(),
        imputed,
        sessions,
        per_session,
        per_test_signer,
        headline,
    })
}
