//! 2-D skeleton image encoding.
//!
//! For L landmarks and T frames, the x and y coordinates form two L×T
//! matrices. Frames are padded to a multiple of three and each column triple
//! `(3g, 3g+1, 3g+2)` becomes the RGB channels of image column `g`. The x image
//! and y image are concatenated left to right, giving an L × 2⌈T/3⌉ RGB image.

use std::fs;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landmark::{Axis, LandmarkSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PadPolicy {
    #[default]
    ZeroPad,
    RepeatLast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantization {
    /// `round_half_up(clamp(v, 0, 1) * 255)`
    #[default]
    Round255,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct EncodingSpec {
    pub pad_policy: PadPolicy,
    pub quantization: Quantization,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageMeta {
    pub video_id: String,
    pub strategy: String,
    pub frame_count: usize,
    pub landmark_count: usize,
}

/// An 8-bit RGB image, row-major, 3 bytes per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeletonImage {
    pub height: usize,
    pub width: usize,
    pub pixels: Vec<u8>,
    pub meta: ImageMeta,
}

impl SkeletonImage {
    pub const CHANNELS: usize = 3;

    pub fn pixel(&self, row: usize, col: usize) -> [u8; 3] {
        let i = (row * self.width + col) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn write_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.encode_png(BufWriter::new(file))
    }

    pub fn to_png_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.encode_png(&mut buf)?;
        Ok(buf)
    }

    fn encode_png<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut enc = png::Encoder::new(w, self.width as u32, self.height as u32);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().map_err(|e| Error::Image(e.to_string()))?;
        writer
            .write_image_data(&self.pixels)
            .map_err(|e| Error::Image(e.to_string()))?;
        writer.finish().map_err(|e| Error::Image(e.to_string()))
    }
}

/// Decodes an 8-bit RGB PNG into `(height, width, pixels)`.
pub fn read_png(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<u8>)> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let decoder = png::Decoder::new(std::io::BufReader::new(file));
    let mut reader = decoder.read_info().map_err(|e| Error::Image(e.to_string()))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Image("image too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(|e| Error::Image(e.to_string()))?;
    if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
        return Err(Error::Image(format!(
            "{}: expected 8-bit RGB, found {:?}/{:?}",
            path.display(),
            info.color_type,
            info.bit_depth
        )));
    }
    buf.truncate(info.buffer_size());
    Ok((info.height as usize, info.width as usize, buf))
}

/// Maps a coordinate to an 8-bit intensity, rounding halves up.
pub fn quantize(v: f64) -> u8 {
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    (v * 255.0 + 0.5).floor() as u8
}

/// Width of the encoded image for `t` frames.
pub fn encoded_width(t: usize) -> usize {
    2 * t.div_ceil(3)
}

/// Encodes a sequence whose landmarks are already in manifest order.
/// Residual missing points are encoded as 0.0.
pub fn encode(seq: &LandmarkSequence, spec: &EncodingSpec, strategy: &str) -> Result<SkeletonImage> {
    let l = seq.landmark_count();
    let t = seq.frame_count();
    if l == 0 || t == 0 {
        return Err(Error::EmptyInput(format!(
            "cannot encode {:?} with {l} landmarks and {t} frames",
            seq.video_id
        )));
    }
    let groups = t.div_ceil(3);
    let width = 2 * groups;
    let mut pixels = vec![0u8; l * width * 3];

    let value = |frame: usize, slot: usize, axis: Axis| -> u8 {
        let frame = if frame < t {
            frame
        } else {
            match spec.pad_policy {
                PadPolicy::ZeroPad => return 0,
                PadPolicy::RepeatLast => t - 1,
            }
        };
        seq.get(frame, slot).map_or(0, |p| quantize(p.coord(axis)))
    };

    for row in 0..l {
        for g in 0..groups {
            for c in 0..3 {
                let frame = 3 * g + c;
                pixels[(row * width + g) * 3 + c] = value(frame, row, Axis::X);
                pixels[(row * width + groups + g) * 3 + c] = value(frame, row, Axis::Y);
            }
        }
    }

    Ok(SkeletonImage {
        height: l,
        width,
        pixels,
        meta: ImageMeta {
            video_id: seq.video_id.clone(),
            strategy: strategy.to_string(),
            frame_count: t,
            landmark_count: l,
        },
    })
}
