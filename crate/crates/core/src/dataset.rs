//! Dataset manifests and repetition cutting.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landmark::LandmarkSequence;
use crate::sequence_csv::{read_sequence_with, ReadOptions};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub video_id: String,
    pub signer_id: String,
    pub label: String,
    pub path: PathBuf,
}

/// One repetition inside a multi-repetition recording. `end_frame` is exclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutPoint {
    pub video_id: String,
    pub start_frame: usize,
    pub end_frame: usize,
    pub repetition_index: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub entries: Vec<DatasetEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cut_points: Vec<CutPoint>,
}

/// A sequence ready for processing, tagged with its origin.
#[derive(Debug, Clone)]
pub struct Sample {
    pub sequence: LandmarkSequence,
    pub repetition: Option<usize>,
}

impl DatasetManifest {
    /// Loads a manifest; relative sequence paths resolve against the manifest's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest: DatasetManifest =
            serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        for entry in &mut manifest.entries {
            if entry.path.is_relative() {
                entry.path = base.join(&entry.path);
            }
        }
        manifest.validate()?;
        Ok(manifest)
    }

    /// Builds a manifest from every `*.csv` in a directory, sorted by file name.
    /// Signer and label are left empty.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        paths.sort();
        let entries = paths
            .into_iter()
            .map(|path| DatasetEntry {
                video_id: path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default(),
                signer_id: String::new(),
                label: String::new(),
                path,
            })
            .collect();
        Ok(DatasetManifest {
            entries,
            cut_points: Vec::new(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for entry in &self.entries {
            if !seen.insert(entry.video_id.as_str()) {
                return Err(Error::Manifest(format!("duplicate video_id {:?}", entry.video_id)));
            }
            if !entry.path.is_file() {
                return Err(Error::Manifest(format!(
                    "sequence file for {:?} does not exist: {}",
                    entry.video_id,
                    entry.path.display()
                )));
            }
        }
        for cut in &self.cut_points {
            if !seen.contains(cut.video_id.as_str()) {
                return Err(Error::Cut(format!("cut point references unknown video {:?}", cut.video_id)));
            }
        }
        Ok(())
    }

    pub fn signers(&self) -> Vec<String> {
        let mut s: Vec<String> = self.entries.iter().map(|e| e.signer_id.clone()).collect();
        s.sort();
        s.dedup();
        s
    }

    /// Cut ranges for one video as `(start, end, repetition)`, ordered by repetition.
    pub fn cuts_for(&self, video_id: &str) -> Vec<(usize, usize, usize)> {
        let mut cuts: Vec<_> = self
            .cut_points
            .iter()
            .filter(|c| c.video_id == video_id)
            .map(|c| (c.start_frame, c.end_frame, c.repetition_index))
            .collect();
        cuts.sort_by_key(|c| c.2);
        cuts
    }

    /// Reads one entry's sequence and splits it into repetitions when cut points exist.
    pub fn load_entry(&self, entry: &DatasetEntry, opts: &ReadOptions) -> Result<Vec<Sample>> {
        let mut seq = read_sequence_with(&entry.path, opts)?;
        seq.video_id = entry.video_id.clone();
        seq.signer_id = entry.signer_id.clone();
        seq.label = entry.label.clone();
        let cuts = self.cuts_for(&entry.video_id);
        if cuts.is_empty() {
            return Ok(vec![Sample {
                sequence: seq,
                repetition: None,
            }]);
        }
        let pieces = cut_indexed(&seq, &cuts)?;
        Ok(pieces
            .into_iter()
            .zip(cuts)
            .map(|(sequence, c)| Sample {
                sequence,
                repetition: Some(c.2),
            })
            .collect())
    }
}

/// Splits a sequence into one sequence per `(start, end)` range (end exclusive).
///
/// The i-th output has frames re-based to 0 and video id `<id>_r<i>`.
pub fn cut_repetitions(seq: &LandmarkSequence, cuts: &[(usize, usize)]) -> Result<Vec<LandmarkSequence>> {
    let indexed: Vec<_> = cuts.iter().enumerate().map(|(i, &(s, e))| (s, e, i)).collect();
    cut_indexed(seq, &indexed)
}

fn cut_indexed(seq: &LandmarkSequence, cuts: &[(usize, usize, usize)]) -> Result<Vec<LandmarkSequence>> {
    let t = seq.frame_count();
    for &(start, end, _) in cuts {
        if start >= end || end > t {
            return Err(Error::Cut(format!(
                "range ({start}, {end}) invalid for {:?} with {t} frames",
                seq.video_id
            )));
        }
    }
    let mut sorted: Vec<_> = cuts.iter().map(|&(s, e, _)| (s, e)).collect();
    sorted.sort();
    for w in sorted.windows(2) {
        if w[1].0 < w[0].1 {
            return Err(Error::Cut(format!(
                "ranges ({}, {}) and ({}, {}) overlap",
                w[0].0, w[0].1, w[1].0, w[1].1
            )));
        }
    }
    Ok(cuts
        .iter()
        .map(|&(start, end, rep)| {
            let mut piece = seq.slice_frames(start, end);
            piece.video_id = format!("{}_r{rep}", seq.video_id);
            piece
        })
        .collect())
}
