//! Synthetic signing data for smoke tests and desk-scale experiments.
//!
//! Each class is a distinct dominant-hand trajectory (circle, diagonal line,
//! zig-zag, then Lissajous variants). Signers differ by a small body offset,
//! scale and tempo. Detection dropout removes landmarks in short bursts.

use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{DatasetEntry, DatasetManifest};
use crate::error::{Error, Result};
use crate::landmark::{LandmarkId, LandmarkSequence, Part, Point};
use crate::sequence_csv::write_sequence;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub classes: usize,
    pub signers: usize,
    pub samples_per_class: usize,
    pub frames: usize,
    /// Target fraction of landmark observations removed.
    pub dropout: f64,
    /// Longest dropout burst, in frames.
    pub max_burst: usize,
    /// Per-coordinate Gaussian-ish jitter amplitude.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            classes: 3,
            signers: 4,
            samples_per_class: 5,
            frames: 30,
            dropout: 0.0,
            max_burst: 3,
            noise: 0.003,
            seed: 7,
        }
    }
}

fn class_name(k: usize) -> String {
    match k {
        0 => "circle".into(),
        1 => "line".into(),
        2 => "zigzag".into(),
        k => format!("lissajous{k}"),
    }
}

/// Dominant-hand centre at phase `s` in [0, 1].
fn trajectory(class: usize, s: f64) -> (f64, f64) {
    match class {
        0 => (0.5 + 0.15 * (TAU * s).cos(), 0.5 + 0.15 * (TAU * s).sin()),
        1 => (0.3 + 0.4 * s, 0.3 + 0.4 * s),
        2 => {
            let tri = 1.0 - 2.0 * ((4.0 * s).fract() - 0.5).abs() * 2.0;
            (0.3 + 0.4 * s, 0.5 + 0.12 * tri)
        }
        k => {
            let a = 1.0 + (k % 3) as f64;
            let b = 2.0 + (k / 3) as f64;
            (0.5 + 0.15 * (a * TAU * s).sin(), 0.5 + 0.15 * (b * TAU * s).cos())
        }
    }
}

struct SignerStyle {
    offset: (f64, f64),
    scale: f64,
    tempo: f64,
}

fn jitter(rng: &mut ChaCha8Rng, amp: f64) -> f64 {
    // sum of uniforms, roughly normal
    (rng.gen::<f64>() + rng.gen::<f64>() + rng.gen::<f64>() - 1.5) * amp
}

fn render(class: usize, style: &SignerStyle, frames: usize, noise: f64, rng: &mut ChaCha8Rng) -> Vec<Vec<Option<Point>>> {
    let ids = LandmarkId::all();
    let phase0 = rng.gen::<f64>() * 0.05;
    (0..frames)
        .map(|t| {
            let s = (phase0 + style.tempo * t as f64 / frames.max(2) as f64).min(1.0);
            let (hx, hy) = trajectory(class, s);
            let place = |x: f64, y: f64| {
                (
                    0.5 + style.scale * (x - 0.5) + style.offset.0,
                    0.5 + style.scale * (y - 0.5) + style.offset.1,
                )
            };
            ids.iter()
                .map(|id| {
                    let (x, y) = match id.part {
                        Part::Face => {
                            let a = TAU * id.index as f64 / 468.0;
                            let r = 0.02 + 0.05 * ((id.index as usize * 7919) % 468) as f64 / 468.0;
                            place(0.5 + r * a.cos(), 0.2 + 1.2 * r * a.sin())
                        }
                        Part::Pose => {
                            let i = id.index as f64;
                            let side = if id.index % 2 == 0 { 1.0 } else { -1.0 };
                            place(0.5 + side * (0.05 + 0.008 * i), 0.25 + 0.02 * i)
                        }
                        Part::RightHand => {
                            let a = TAU * id.index as f64 / 21.0;
                            place(hx + 0.03 * a.cos(), hy + 0.03 * a.sin())
                        }
                        Part::LeftHand => {
                            let a = TAU * id.index as f64 / 21.0;
                            place(0.25 + 0.03 * a.cos(), 0.75 + 0.03 * a.sin())
                        }
                    };
                    let x = (x + jitter(rng, noise)).clamp(0.0, 1.0);
                    let y = (y + jitter(rng, noise)).clamp(0.0, 1.0);
                    Some(Point::new(x, y))
                })
                .collect()
        })
        .collect()
}

/// Removes observations in bursts of 1..=`max_burst` frames per landmark,
/// aiming for an overall missing fraction of `rate`.
pub fn apply_dropout(seq: &mut LandmarkSequence, rate: f64, max_burst: usize, rng: &mut impl Rng) {
    if rate <= 0.0 {
        return;
    }
    let max_burst = max_burst.max(1);
    let mean_burst = (1 + max_burst) as f64 / 2.0;
    // bursts start only from observed frames, so correct for the time spent inside bursts
    let start_p = (rate / (mean_burst * (1.0 - rate))).min(1.0);
    let t = seq.frame_count();
    for slot in 0..seq.landmark_count() {
        let mut f = 0;
        while f < t {
            if rng.gen::<f64>() < start_p {
                let len = rng.gen_range(1..=max_burst);
                for g in f..(f + len).min(t) {
                    seq.set(g, slot, None);
                }
                f += len;
            } else {
                f += 1;
            }
        }
    }
}

/// Generates `classes × signers × samples_per_class` sequences, signer-major.
pub fn generate(cfg: &SynthConfig) -> Vec<LandmarkSequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::new();
    for signer in 0..cfg.signers {
        let style = SignerStyle {
            offset: (jitter(&mut rng, 0.04), jitter(&mut rng, 0.04)),
            scale: 0.9 + 0.2 * rng.gen::<f64>(),
            tempo: 0.85 + 0.3 * rng.gen::<f64>(),
        };
        for class in 0..cfg.classes {
            for rep in 0..cfg.samples_per_class {
                let frames = render(class, &style, cfg.frames, cfg.noise, &mut rng);
                let mut seq = LandmarkSequence::from_frames(
                    format!("s{signer:02}_{}_{rep:02}", class_name(class)),
                    LandmarkId::all(),
                    frames,
                )
                .expect("rendered frames match the schema")
                .with_meta(format!("s{signer:02}"), class_name(class));
                apply_dropout(&mut seq, cfg.dropout, cfg.max_burst, &mut rng);
                out.push(seq);
            }
        }
    }
    out
}

/// Writes generated sequences as CSVs plus `manifest.json` into `dir` and
/// returns the manifest as loaded back, with paths resolved.
pub fn write_dataset(cfg: &SynthConfig, dir: impl AsRef<Path>) -> Result<DatasetManifest> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = DatasetManifest::default();
    for seq in generate(cfg) {
        let file = format!("{}.csv", seq.video_id);
        write_sequence(&seq, dir.join(&file))?;
        manifest.entries.push(DatasetEntry {
            video_id: seq.video_id.clone(),
            signer_id: seq.signer_id.clone(),
            label: seq.label.clone(),
            path: file.into(),
        });
    }
    let path = dir.join("manifest.json");
    crate::pipeline::write_json(&path, &manifest)?;
    DatasetManifest::load(path)
}
