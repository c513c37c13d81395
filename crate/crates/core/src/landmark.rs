//! Landmark schema and the in-memory landmark sequence.
//!
//! The holistic schema has 543 identifiers: 468 face, 33 pose and 21 per
//! hand. The canonical order is face, pose, left hand, right hand, which is
//! also the column order of the sequence CSV.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FACE_COUNT: u16 = 468;
pub const POSE_COUNT: u16 = 33;
pub const HAND_COUNT: u16 = 21;
pub const TOTAL_LANDMARKS: usize = 543;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Face,
    Pose,
    LeftHand,
    RightHand,
}

impl Part {
    pub const ALL: [Part; 4] = [Part::Face, Part::Pose, Part::LeftHand, Part::RightHand];

    pub fn len(self) -> u16 {
        match self {
            Part::Face => FACE_COUNT,
            Part::Pose => POSE_COUNT,
            Part::LeftHand | Part::RightHand => HAND_COUNT,
        }
    }

    /// Offset of the part's first landmark in the canonical layout.
    pub fn offset(self) -> usize {
        match self {
            Part::Face => 0,
            Part::Pose => FACE_COUNT as usize,
            Part::LeftHand => (FACE_COUNT + POSE_COUNT) as usize,
            Part::RightHand => (FACE_COUNT + POSE_COUNT + HAND_COUNT) as usize,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Part::Face => "face",
            Part::Pose => "pose",
            Part::LeftHand => "left_hand",
            Part::RightHand => "right_hand",
        }
    }
}

impl fmt::Display for Part {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Part {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "face" => Ok(Part::Face),
            "pose" => Ok(Part::Pose),
            "left_hand" => Ok(Part::LeftHand),
            "right_hand" => Ok(Part::RightHand),
            other => Err(Error::Manifest(format!("unknown body part {other:?}"))),
        }
    }
}

/// One landmark of the holistic schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawLandmarkId")]
pub struct LandmarkId {
    pub part: Part,
    pub index: u16,
}

#[derive(Deserialize)]
struct RawLandmarkId {
    part: Part,
    index: u16,
}

impl TryFrom<RawLandmarkId> for LandmarkId {
    type Error = Error;

    fn try_from(raw: RawLandmarkId) -> Result<Self> {
        LandmarkId::new(raw.part, raw.index)
    }
}

impl LandmarkId {
    pub fn new(part: Part, index: u16) -> Result<Self> {
        if index >= part.len() {
            return Err(Error::Manifest(format!(
                "index {index} out of range for {part} (< {})",
                part.len()
            )));
        }
        Ok(LandmarkId { part, index })
    }

    pub fn canonical_index(self) -> usize {
        self.part.offset() + self.index as usize
    }

    pub fn from_canonical_index(i: usize) -> Option<Self> {
        Part::ALL.iter().find_map(|&part| {
            let off = part.offset();
            (i >= off && i < off + part.len() as usize).then(|| LandmarkId {
                part,
                index: (i - off) as u16,
            })
        })
    }

    /// All 543 identifiers in canonical order.
    pub fn all() -> Vec<LandmarkId> {
        Part::ALL
            .iter()
            .flat_map(|&part| (0..part.len()).map(move |index| LandmarkId { part, index }))
            .collect()
    }

    /// Column stem used in CSV headers, e.g. `left_hand_4`.
    pub fn column_stem(self) -> String {
        format!("{}_{}", self.part, self.index)
    }

    /// Parses a column stem such as `pose_12`.
    pub fn parse_stem(stem: &str) -> Result<Self> {
        let (part, index) = stem
            .rsplit_once('_')
            .ok_or_else(|| Error::Manifest(format!("bad landmark name {stem:?}")))?;
        let index: u16 = index
            .parse()
            .map_err(|_| Error::Manifest(format!("bad landmark index in {stem:?}")))?;
        LandmarkId::new(part.parse()?, index)
    }
}

impl fmt::Display for LandmarkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.part, self.index)
    }
}

/// A present 2-D landmark observation in normalized image coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn coord(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Per-video landmark time series.
///
/// Values are stored frame-major: the entry for frame `t` and landmark slot
/// `l` lives at `t * landmark_count + l`. `None` marks a missing detection,
/// so a landmark is always either fully present or fully missing.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSequence {
    pub video_id: String,
    pub signer_id: String,
    pub label: String,
    landmarks: Vec<LandmarkId>,
    points: Vec<Option<Point>>,
}

impl LandmarkSequence {
    /// An empty (T = 0) sequence over the given landmark set.
    pub fn empty(video_id: impl Into<String>, landmarks: Vec<LandmarkId>) -> Self {
        LandmarkSequence {
            video_id: video_id.into(),
            signer_id: String::new(),
            label: String::new(),
            landmarks,
            points: Vec::new(),
        }
    }

    pub fn from_frames(
        video_id: impl Into<String>,
        landmarks: Vec<LandmarkId>,
        frames: Vec<Vec<Option<Point>>>,
    ) -> Result<Self> {
        let mut seq = LandmarkSequence::empty(video_id, landmarks);
        for frame in frames {
            seq.push_frame(frame)?;
        }
        Ok(seq)
    }

    pub(crate) fn from_raw(
        video_id: String,
        signer_id: String,
        label: String,
        landmarks: Vec<LandmarkId>,
        points: Vec<Option<Point>>,
    ) -> Self {
        debug_assert!(landmarks.is_empty() || points.len().is_multiple_of(landmarks.len()));
        LandmarkSequence {
            video_id,
            signer_id,
            label,
            landmarks,
            points,
        }
    }

    pub fn with_meta(mut self, signer_id: impl Into<String>, label: impl Into<String>) -> Self {
        self.signer_id = signer_id.into();
        self.label = label.into();
        self
    }

    pub fn push_frame(&mut self, frame: Vec<Option<Point>>) -> Result<()> {
        if frame.len() != self.landmarks.len() {
            return Err(Error::LengthMismatch(format!(
                "frame has {} landmarks, sequence has {}",
                frame.len(),
                self.landmarks.len()
            )));
        }
        self.points.extend(frame);
        Ok(())
    }

    pub fn landmarks(&self) -> &[LandmarkId] {
        &self.landmarks
    }

    pub fn landmark_count(&self) -> usize {
        self.landmarks.len()
    }

    pub fn frame_count(&self) -> usize {
        if self.landmarks.is_empty() {
            0
        } else {
            self.points.len() / self.landmarks.len()
        }
    }

    pub fn slot_of(&self, id: LandmarkId) -> Option<usize> {
        self.landmarks.iter().position(|&l| l == id)
    }

    pub fn get(&self, frame: usize, slot: usize) -> Option<Point> {
        self.points[frame * self.landmarks.len() + slot]
    }

    pub fn set(&mut self, frame: usize, slot: usize, value: Option<Point>) {
        let l = self.landmarks.len();
        self.points[frame * l + slot] = value;
    }

    pub fn is_missing(&self, frame: usize, slot: usize) -> bool {
        self.get(frame, slot).is_none()
    }

    pub fn frame(&self, frame: usize) -> &[Option<Point>] {
        let l = self.landmarks.len();
        &self.points[frame * l..(frame + 1) * l]
    }

    pub fn frames(&self) -> impl Iterator<Item = &[Option<Point>]> {
        self.points.chunks(self.landmarks.len().max(1))
    }

    pub fn points(&self) -> &[Option<Point>] {
        &self.points
    }

    /// The time series of one landmark slot.
    pub fn series(&self, slot: usize) -> Vec<Option<Point>> {
        (0..self.frame_count()).map(|t| self.get(t, slot)).collect()
    }

    pub fn missing_count(&self) -> usize {
        self.points.iter().filter(|p| p.is_none()).count()
    }

    /// Copies frames `start..end` into a new sequence with frame indices re-based to 0.
    pub(crate) fn slice_frames(&self, start: usize, end: usize) -> LandmarkSequence {
        let l = self.landmarks.len();
        LandmarkSequence {
            video_id: self.video_id.clone(),
            signer_id: self.signer_id.clone(),
            label: self.label.clone(),
            landmarks: self.landmarks.clone(),
            points: self.points[start * l..end * l].to_vec(),
        }
    }
}
