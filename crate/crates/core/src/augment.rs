//! Geometric augmentation of landmark sequences.
//!
//! One transform set is drawn per call from a ChaCha stream keyed by
//! `(seed, sample_key, epoch)`, then applied to every frame in this order:
//! horizontal flip, rotation about (0.5, 0.5), zoom about (0.5, 0.5),
//! translation, clamp to [0, 1]. Missing points stay missing.

use std::collections::HashMap;

use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landmark::{LandmarkId, LandmarkSequence, Part, Point};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentConfig {
    /// Rotation angle is drawn from `[-rotation_deg, rotation_deg]`.
    pub rotation_deg: f64,
    /// Zoom factor range `[min, max]`.
    pub zoom: (f64, f64),
    /// Translation in normalized units, drawn per axis from `[-translation, translation]`.
    pub translation: f64,
    pub hflip_prob: f64,
    pub seed: u64,
    /// Mirror pose left/right pairs when flipping. Hands are always swapped.
    pub mirror_pose: bool,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            rotation_deg: 10.0,
            zoom: (0.9, 1.1),
            translation: 0.05,
            hflip_prob: 0.5,
            seed: 0,
            mirror_pose: true,
        }
    }
}

impl AugmentConfig {
    pub fn identity() -> Self {
        AugmentConfig {
            rotation_deg: 0.0,
            zoom: (1.0, 1.0),
            translation: 0.0,
            hflip_prob: 0.0,
            seed: 0,
            mirror_pose: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.rotation_deg, self.zoom.0, self.zoom.1, self.translation, self.hflip_prob]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("augmentation parameters must be finite".into()));
        }
        if self.rotation_deg < 0.0 || self.translation < 0.0 {
            return Err(Error::Config("rotation and translation ranges must be non-negative".into()));
        }
        if !(self.zoom.0 > 0.0 && self.zoom.0 <= self.zoom.1) {
            return Err(Error::Config(format!("zoom range {:?} is not a positive ordered range", self.zoom)));
        }
        if !(0.0..=1.0).contains(&self.hflip_prob) {
            return Err(Error::Config(format!("hflip_prob {} outside [0, 1]", self.hflip_prob)));
        }
        Ok(())
    }
}

/// Concrete parameters of one augmentation draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    pub flip: bool,
    pub rotation_rad: f64,
    pub zoom: f64,
    pub translate: (f64, f64),
}

impl Transform {
    pub const IDENTITY: Transform = Transform {
        flip: false,
        rotation_rad: 0.0,
        zoom: 1.0,
        translate: (0.0, 0.0),
    };

    /// Applies flip, rotation, zoom and translation to one point, then clamps.
    pub fn apply_point(&self, p: Point) -> Point {
        let (mut x, mut y) = (p.x, p.y);
        if self.flip {
            x = 1.0 - x;
        }
        if self.rotation_rad != 0.0 || self.zoom != 1.0 {
            let (s, c) = self.rotation_rad.sin_cos();
            let (dx, dy) = (x - 0.5, y - 0.5);
            x = 0.5 + self.zoom * (c * dx - s * dy);
            y = 0.5 + self.zoom * (s * dx + c * dy);
        }
        x += self.translate.0;
        y += self.translate.1;
        Point::new(x.clamp(0.0, 1.0), y.clamp(0.0, 1.0))
    }
}

/// RNG for one `(seed, sample_key, epoch)` triple.
pub fn sample_rng(seed: u64, sample_key: u64, epoch: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&sample_key.to_le_bytes());
    key[16..24].copy_from_slice(&epoch.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

pub fn sample_transform(cfg: &AugmentConfig, rng: &mut impl Rng) -> Transform {
    let flip = rng.gen::<f64>() < cfg.hflip_prob;
    let angle = Uniform::new_inclusive(-cfg.rotation_deg, cfg.rotation_deg).sample(rng);
    let zoom = Uniform::new_inclusive(cfg.zoom.0, cfg.zoom.1).sample(rng);
    let shift = Uniform::new_inclusive(-cfg.translation, cfg.translation);
    let tx = shift.sample(rng);
    let ty = shift.sample(rng);
    Transform {
        flip,
        rotation_rad: angle.to_radians(),
        zoom,
        translate: (tx, ty),
    }
}

/// Draws a transform for `(cfg.seed, sample_key, epoch)` and applies it.
pub fn augment(seq: &LandmarkSequence, cfg: &AugmentConfig, sample_key: u64, epoch: u64) -> Result<LandmarkSequence> {
    cfg.validate()?;
    let mut rng = sample_rng(cfg.seed, sample_key, epoch);
    let transform = sample_transform(cfg, &mut rng);
    Ok(apply_transform(seq, &transform, cfg.mirror_pose))
}

/// Pose landmark pairs that swap under a horizontal mirror.
pub const POSE_MIRROR_PAIRS: [(u16, u16); 16] = [
    (1, 4),
    (2, 5),
    (3, 6),
    (7, 8),
    (9, 10),
    (11, 12),
    (13, 14),
    (15, 16),
    (17, 18),
    (19, 20),
    (21, 22),
    (23, 24),
    (25, 26),
    (27, 28),
    (29, 30),
    (31, 32),
];

/// Identifier a landmark maps to under a horizontal mirror.
pub fn mirror_id(id: LandmarkId, mirror_pose: bool) -> LandmarkId {
    match id.part {
        Part::LeftHand => LandmarkId { part: Part::RightHand, index: id.index },
        Part::RightHand => LandmarkId { part: Part::LeftHand, index: id.index },
        Part::Pose if mirror_pose => {
            let index = POSE_MIRROR_PAIRS
                .iter()
                .find_map(|&(a, b)| match id.index {
                    i if i == a => Some(b),
                    i if i == b => Some(a),
                    _ => None,
                })
                .unwrap_or(id.index);
            LandmarkId { part: Part::Pose, index }
        }
        _ => id,
    }
}

pub fn apply_transform(seq: &LandmarkSequence, t: &Transform, mirror_pose: bool) -> LandmarkSequence {
    if *t == Transform::IDENTITY {
        return seq.clone();
    }
    let l = seq.landmark_count();
    // slot permutation for the flip: output slot s reads input slot source[s]
    let source: Vec<usize> = if t.flip {
        let slots: HashMap<LandmarkId, usize> =
            seq.landmarks().iter().enumerate().map(|(i, &id)| (id, i)).collect();
        seq.landmarks()
            .iter()
            .enumerate()
            .map(|(s, &id)| {
                let partner = mirror_id(id, mirror_pose);
                // a partner outside the selected set leaves the series in place
                slots.get(&partner).copied().unwrap_or(s)
            })
            .collect()
    } else {
        (0..l).collect()
    };

    let mut out = seq.clone();
    let frames = seq.frame_count();
    for f in 0..frames {
        for (s, &src) in source.iter().enumerate() {
            let p = seq.get(f, src).map(|p| t.apply_point(p));
            out.set(f, s, p);
        }
    }
    out
}
