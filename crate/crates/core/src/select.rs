//! Landmark subset strategies.
//!
//! Strategies are JSON manifests; the five built-ins are compiled in from
//! `manifests/`. Manifest order is the row order of encoded images.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landmark::{LandmarkId, LandmarkSequence};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionManifest {
    pub name: String,
    pub ids: Vec<LandmarkId>,
    pub expected_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<u32>,
    /// Set for lists that were not transcribed from an authoritative source.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub provisional: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

const BUILTINS: [(&str, &str); 5] = [
    ("all", include_str!("../manifests/all.json")),
    ("laines", include_str!("../manifests/laines.json")),
    ("arcanjo", include_str!("../manifests/arcanjo.json")),
    ("asl-1st", include_str!("../manifests/asl-1st.json")),
    ("asl-2nd", include_str!("../manifests/asl-2nd.json")),
];

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTINS.iter().map(|(n, _)| *n)
}

impl SelectionManifest {
    pub fn new(name: impl Into<String>, ids: Vec<LandmarkId>) -> Result<Self> {
        let m = SelectionManifest {
            name: name.into(),
            expected_count: ids.len(),
            ids,
            version: None,
            provisional: false,
            note: None,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.ids.len());
        for id in &self.ids {
            if !seen.insert(*id) {
                return Err(Error::Manifest(format!("{}: duplicate landmark {id}", self.name)));
            }
        }
        if self.ids.len() != self.expected_count {
            return Err(Error::Manifest(format!(
                "{}: expected {} landmarks, found {}",
                self.name,
                self.expected_count,
                self.ids.len()
            )));
        }
        if self.ids.is_empty() {
            return Err(Error::Manifest(format!("{}: empty manifest", self.name)));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: SelectionManifest =
            serde_json::from_str(text).map_err(|e| Error::Manifest(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn builtin(name: &str) -> Result<Self> {
        let key = name.to_ascii_lowercase();
        let (_, text) = BUILTINS
            .iter()
            .find(|(n, _)| *n == key)
            .ok_or_else(|| Error::UnknownStrategy(name.to_string()))?;
        SelectionManifest::from_json(text)
    }
}

/// Resolves a built-in strategy name or a path to a manifest JSON file.
pub fn load_manifest(name_or_path: &str) -> Result<SelectionManifest> {
    let m = match SelectionManifest::builtin(name_or_path) {
        Ok(m) => m,
        Err(Error::UnknownStrategy(_)) => {
            let path = Path::new(name_or_path);
            if !path.is_file() {
                return Err(Error::UnknownStrategy(name_or_path.to_string()));
            }
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            SelectionManifest::from_json(&text)?
        }
        Err(e) => return Err(e),
    };
    if m.provisional {
        log::warn!("selection manifest {:?} is provisional: {}", m.name, m.note.as_deref().unwrap_or(""));
    }
    Ok(m)
}

/// Projects a sequence onto the manifest's landmarks, in manifest order.
///
/// The input may be any landmark set that contains every manifest id, so
/// applying a manifest to its own output is the identity.
pub fn apply_selection(seq: &LandmarkSequence, m: &SelectionManifest) -> Result<LandmarkSequence> {
    let slots = m
        .ids
        .iter()
        .map(|&id| slot_lookup(seq, id).ok_or_else(|| Error::MissingLandmark(id.to_string())))
        .collect::<Result<Vec<usize>>>()?;
    let t = seq.frame_count();
    let mut points = Vec::with_capacity(t * slots.len());
    for frame in seq.frames().take(t) {
        points.extend(slots.iter().map(|&s| frame[s]));
    }
    Ok(LandmarkSequence::from_raw(
        seq.video_id.clone(),
        seq.signer_id.clone(),
        seq.label.clone(),
        m.ids.clone(),
        points,
    ))
}

fn slot_lookup(seq: &LandmarkSequence, id: LandmarkId) -> Option<usize> {
    let c = id.canonical_index();
    // canonical layout lets us skip the scan
    if seq.landmark_count() == crate::landmark::TOTAL_LANDMARKS && seq.landmarks()[c] == id {
        return Some(c);
    }
    seq.slot_of(id)
}
