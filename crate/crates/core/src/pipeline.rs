//! Dataset-level composition: read → cut → select → impute → encode → PNG.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::DatasetManifest;
use crate::encode::{encode, EncodingSpec, SkeletonImage};
use crate::error::{Error, Result};
use crate::impute::{impute_sequence, ImputeConfig, ImputeStats};
use crate::landmark::LandmarkSequence;
use crate::select::{apply_selection, SelectionManifest};
use crate::sequence_csv::ReadOptions;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexItem {
    /// Image path relative to the index file.
    pub image: PathBuf,
    pub label: String,
    pub signer_id: String,
    pub video_id: String,
    pub strategy: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexFailure {
    pub video_id: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageIndex {
    pub items: Vec<IndexItem>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<IndexFailure>,
}

impl ImageIndex {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(path, self)
    }
}

/// Per-video and total imputation counts for one encode run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImputeReport {
    pub total: ImputeStats,
    pub per_video: BTreeMap<String, ImputeStats>,
}

#[derive(Debug, Clone)]
pub struct EncodeOptions {
    pub read: ReadOptions,
    /// `None` skips imputation; residual gaps encode as 0.
    pub impute: Option<ImputeConfig>,
    pub spec: EncodingSpec,
    pub workers: usize,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions {
            read: ReadOptions::default(),
            impute: Some(ImputeConfig::default()),
            spec: EncodingSpec::default(),
            workers: 1,
        }
    }
}

/// Selection, optional imputation and encoding of one in-memory sequence.
pub fn process_sequence(
    seq: &LandmarkSequence,
    selection: &SelectionManifest,
    impute: Option<&ImputeConfig>,
    spec: &EncodingSpec,
) -> Result<(SkeletonImage, ImputeStats)> {
    let selected = apply_selection(seq, selection)?;
    let (ready, stats) = match impute {
        Some(cfg) => impute_sequence(&selected, cfg)?,
        None => {
            let missing = selected.missing_count();
            (
                selected,
                ImputeStats {
                    left_missing: missing,
                    ..ImputeStats::default()
                },
            )
        }
    };
    let image = encode(&ready, spec, &selection.name)?;
    Ok((image, stats))
}

/// Encodes every manifest entry into `out_dir`, writing `index.json` and
/// `impute_stats.json` there. Failures are recorded in the index rather than
/// aborting the run. Output is identical for any worker count.
pub fn encode_dataset(
    manifest: &DatasetManifest,
    selection: &SelectionManifest,
    opts: &EncodeOptions,
    out_dir: impl AsRef<Path>,
) -> Result<ImageIndex> {
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    if let Some(cfg) = &opts.impute {
        cfg.validate()?;
    }

    type EntryResult = std::result::Result<Vec<(IndexItem, ImputeStats)>, IndexFailure>;
    let run_entry = |entry: &crate::dataset::DatasetEntry| -> EntryResult {
        let fail = |e: Error| IndexFailure {
            video_id: entry.video_id.clone(),
            error: e.full_message(),
        };
        let samples = manifest.load_entry(entry, &opts.read).map_err(fail)?;
        let mut out = Vec::with_capacity(samples.len());
        for sample in samples {
            let seq = &sample.sequence;
            let (image, stats) =
                process_sequence(seq, selection, opts.impute.as_ref(), &opts.spec).map_err(fail)?;
            let file = PathBuf::from(format!("{}.png", seq.video_id));
            image.write_png(out_dir.join(&file)).map_err(fail)?;
            out.push((
                IndexItem {
                    image: file,
                    label: seq.label.clone(),
                    signer_id: seq.signer_id.clone(),
                    video_id: seq.video_id.clone(),
                    strategy: selection.name.clone(),
                },
                stats,
            ));
        }
        Ok(out)
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let results: Vec<EntryResult> = pool.install(|| manifest.entries.par_iter().map(run_entry).collect());

    let mut index = ImageIndex::default();
    let mut report = ImputeReport::default();
    for result in results {
        match result {
            Ok(items) => {
                for (item, stats) in items {
                    report.total += stats;
                    report.per_video.insert(item.video_id.clone(), stats);
                    index.items.push(item);
                }
            }
            Err(failure) => {
                log::warn!("encoding {} failed: {}", failure.video_id, failure.error);
                index.failures.push(failure);
            }
        }
    }
    index.save(out_dir.join("index.json"))?;
    write_json(out_dir.join("impute_stats.json"), &report)?;
    Ok(index)
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
