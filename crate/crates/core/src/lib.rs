//! Landmark-sequence toolkit for skeleton-image sign recognition.
//!
//! The pipeline reads per-frame holistic landmarks (468 face, 33 pose and
//! 2 × 21 hand points), selects a landmark subset, fills short detection gaps
//! with piecewise splines, and encodes each sequence as a 3-channel image
//! whose left half carries x and right half carries y. The `eval` module runs
//! nested leave-one-person-out sessions and aggregates macro metrics; `bench`
//! times pipeline stages and computes speed-ups.

pub mod augment;
pub mod bench;
pub mod dataset;
pub mod encode;
pub mod error;
pub mod eval;
pub mod impute;
pub mod landmark;
pub mod pipeline;
pub mod select;
pub mod sequence_csv;
pub mod spline;
pub mod synth;

pub use augment::{augment, AugmentConfig};
pub use dataset::{cut_repetitions, DatasetManifest};
pub use encode::{encode, EncodingSpec, PadPolicy, SkeletonImage};
pub use error::{Error, Result};
pub use impute::{impute_sequence, ImputeConfig, ImputeStats};
pub use landmark::{LandmarkId, LandmarkSequence, Part, Point};
pub use pipeline::{encode_dataset, EncodeOptions, ImageIndex};
pub use select::{apply_selection, load_manifest, SelectionManifest};
pub use sequence_csv::{read_sequence, write_sequence};
