//! Sequence CSV interchange.
//!
//! Header is `frame,<part>_<idx>_x,<part>_<idx>_y,...`; one row per frame,
//! frames numbered from 0 without gaps. A missing landmark is two empty
//! cells. Coordinates are written as 6-decimal fixed point.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::landmark::{LandmarkId, LandmarkSequence, Point};

/// Which header layouts `read_sequence_with` accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Layout {
    /// Exactly the 543-landmark canonical column order.
    #[default]
    Canonical,
    /// Any unique landmark subset, in the order the header lists it.
    Subset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RangePolicy {
    /// Pull values within tolerance of [0, 1] back onto the interval.
    #[default]
    Clamp,
    /// Any value outside [0, 1] is a range error.
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadOptions {
    pub layout: Layout,
    pub range: RangePolicy,
    /// Values in `[-tolerance, 1 + tolerance]` are clamped; anything beyond is an error.
    pub clamp_tolerance: f64,
}

impl Default for ReadOptions {
    fn default() -> Self {
        ReadOptions {
            layout: Layout::Canonical,
            range: RangePolicy::Clamp,
            clamp_tolerance: 0.5,
        }
    }
}

/// Reads a canonical 543-landmark sequence CSV.
pub fn read_sequence(path: impl AsRef<Path>) -> Result<LandmarkSequence> {
    read_sequence_with(path, &ReadOptions::default())
}

pub fn read_sequence_with(path: impl AsRef<Path>, opts: &ReadOptions) -> Result<LandmarkSequence> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let video_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_sequence(&bytes, video_id, opts)
}

/// Parses sequence CSV content already held in memory.
pub fn parse_sequence(bytes: &[u8], video_id: String, opts: &ReadOptions) -> Result<LandmarkSequence> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(bytes);
    let header = reader.headers().map_err(|e| Error::Csv(e.to_string()))?.clone();
    let landmarks = parse_header(&header, opts.layout)?;
    let names: Vec<&str> = header.iter().collect();

    let l = landmarks.len();
    let mut points = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        let frame_cell = record.get(0).unwrap_or("");
        match frame_cell.trim().parse::<u64>() {
            Ok(f) if f == row as u64 => {}
            _ => {
                return Err(Error::Ordering {
                    row,
                    expected: row as u64,
                    found: frame_cell.to_string(),
                })
            }
        }
        for slot in 0..l {
            let xi = 1 + 2 * slot;
            let x = parse_cell(record.get(xi).unwrap_or(""), row, names[xi], opts)?;
            let y = parse_cell(record.get(xi + 1).unwrap_or(""), row, names[xi + 1], opts)?;
            let point = match (x, y) {
                (Some(x), Some(y)) => Some(Point::new(x, y)),
                (None, None) => None,
                _ => {
                    return Err(Error::PartialLandmark {
                        row,
                        name: landmarks[slot].to_string(),
                    })
                }
            };
            points.push(point);
        }
    }
    Ok(LandmarkSequence::from_raw(
        video_id,
        String::new(),
        String::new(),
        landmarks,
        points,
    ))
}

fn parse_header(header: &csv::StringRecord, layout: Layout) -> Result<Vec<LandmarkId>> {
    let schema_err = |column: usize, name: &str, reason: &str| Error::Schema {
        column,
        name: name.to_string(),
        reason: reason.to_string(),
    };
    match header.get(0) {
        Some("frame") => {}
        Some(other) => return Err(schema_err(0, other, "first column must be \"frame\"")),
        None => return Err(schema_err(0, "", "empty header")),
    }

    match layout {
        Layout::Canonical => {
            let expected = canonical_header();
            for (i, (got, want)) in header.iter().zip(expected.iter()).enumerate() {
                if got != want {
                    return Err(schema_err(i, got, &format!("expected {want:?}")));
                }
            }
            if header.len() != expected.len() {
                let col = header.len().min(expected.len());
                let name = header.get(col).unwrap_or("");
                return Err(schema_err(
                    col,
                    name,
                    &format!("expected {} columns, found {}", expected.len(), header.len()),
                ));
            }
            Ok(LandmarkId::all())
        }
        Layout::Subset => {
            if header.len() % 2 != 1 {
                let col = header.len() - 1;
                return Err(schema_err(col, &header[col], "unpaired coordinate column"));
            }
            let mut ids = Vec::with_capacity(header.len() / 2);
            let mut seen = std::collections::HashSet::new();
            for i in (1..header.len()).step_by(2) {
                let xname = &header[i];
                let yname = &header[i + 1];
                let stem = xname
                    .strip_suffix("_x")
                    .ok_or_else(|| schema_err(i, xname, "expected an _x column"))?;
                if yname.strip_suffix("_y") != Some(stem) {
                    return Err(schema_err(i + 1, yname, &format!("expected {stem}_y")));
                }
                let id = LandmarkId::parse_stem(stem)
                    .map_err(|e| schema_err(i, xname, &e.to_string()))?;
                if !seen.insert(id) {
                    return Err(schema_err(i, xname, "duplicate landmark"));
                }
                ids.push(id);
            }
            Ok(ids)
        }
    }
}

fn parse_cell(cell: &str, row: usize, name: &str, opts: &ReadOptions) -> Result<Option<f64>> {
    let cell = cell.trim();
    if cell.is_empty() {
        return Ok(None);
    }
    let value: f64 = cell.parse().map_err(|_| {
        Error::Csv(format!("row {row}, column {name:?}: not a number: {cell:?}"))
    })?;
    if value.is_nan() {
        return Ok(None);
    }
    if (0.0..=1.0).contains(&value) {
        return Ok(Some(value + 0.0));
    }
    let tol = opts.clamp_tolerance;
    if opts.range == RangePolicy::Clamp && value >= -tol && value <= 1.0 + tol {
        return Ok(Some(value.clamp(0.0, 1.0)));
    }
    Err(Error::Range {
        row,
        name: name.to_string(),
        value,
    })
}

/// The 1 + 1086 canonical column names.
pub fn canonical_header() -> Vec<String> {
    header_for(&LandmarkId::all())
}

pub fn header_for(ids: &[LandmarkId]) -> Vec<String> {
    let mut cols = Vec::with_capacity(1 + 2 * ids.len());
    cols.push("frame".to_string());
    for id in ids {
        let stem = id.column_stem();
        cols.push(format!("{stem}_x"));
        cols.push(format!("{stem}_y"));
    }
    cols
}

/// Renders a sequence as canonical CSV text.
pub fn format_sequence(seq: &LandmarkSequence) -> String {
    let mut out = header_for(seq.landmarks()).join(",");
    out.push('\n');
    for (t, frame) in seq.frames().enumerate().take(seq.frame_count()) {
        out.push_str(&t.to_string());
        for p in frame {
            match p {
                Some(p) => {
                    out.push_str(&format!(",{:.6},{:.6}", p.x + 0.0, p.y + 0.0));
                }
                None => out.push_str(",,"),
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_sequence(seq: &LandmarkSequence, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(format_sequence(seq).as_bytes())
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landmark::Part;

    fn full_row(t: usize, skip: Option<usize>) -> String {
        let mut row = t.to_string();
        for i in 0..543 {
            if Some(i) == skip {
                row.push_str(",,");
            } else {
                row.push_str(&format!(",{:.6},{:.6}", (i % 100) as f64 / 100.0, 0.5));
            }
        }
        row
    }

    fn csv_text(rows: &[String]) -> String {
        let mut s = canonical_header().join(",");
        s.push('\n');
        for r in rows {
            s.push_str(r);
            s.push('\n');
        }
        s
    }

    fn parse(text: &str) -> Result<LandmarkSequence> {
        parse_sequence(text.as_bytes(), "v".into(), &ReadOptions::default())
    }

    #[test]
    fn header_has_1087_columns() {
        let h = canonical_header();
        assert_eq!(h.len(), 1 + 1086);
        assert_eq!(h[1], "face_0_x");
        assert_eq!(h[937], "pose_0_x");
        assert_eq!(h[1086], "right_hand_20_y");
    }

    #[test]
    fn three_full_rows() {
        let seq = parse(&csv_text(&[full_row(0, None), full_row(1, None), full_row(2, None)])).unwrap();
        assert_eq!(seq.frame_count(), 3);
        assert_eq!(seq.landmark_count(), 543);
        assert_eq!(seq.missing_count(), 0);
    }

    #[test]
    fn empty_face_10_in_row_1() {
        let seq = parse(&csv_text(&[full_row(0, None), full_row(1, Some(10)), full_row(2, None)])).unwrap();
        let face10 = LandmarkId::new(Part::Face, 10).unwrap().canonical_index();
        for t in 0..3 {
            for slot in 0..543 {
                assert_eq!(seq.is_missing(t, slot), t == 1 && slot == face10);
            }
        }
    }

    #[test]
    fn nan_cells_are_missing() {
        let mut row = full_row(0, None);
        row = row.replacen(",0.000000,0.500000", ",NaN,NaN", 1);
        let seq = parse(&csv_text(&[row])).unwrap();
        assert!(seq.is_missing(0, 0));
    }

    #[test]
    fn bad_header_names_first_bad_column() {
        let text = csv_text(&[]).replacen("face_3_y", "face_3_z", 1);
        match parse(&text) {
            Err(Error::Schema { column, name, .. }) => {
                assert_eq!(column, 8);
                assert_eq!(name, "face_3_z");
            }
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn non_monotonic_frames_rejected() {
        let text = csv_text(&[full_row(0, None), full_row(2, None)]);
        assert!(matches!(parse(&text), Err(Error::Ordering { row: 1, .. })));
        let text = csv_text(&[full_row(1, None), full_row(0, None)]);
        assert!(matches!(parse(&text), Err(Error::Ordering { row: 0, .. })));
    }

    #[test]
    fn out_of_range_rejected_or_clamped() {
        let row = full_row(0, None).replacen(",0.000000,0.500000", ",-0.200000,1.300000", 1);
        let seq = parse(&csv_text(&[row])).unwrap();
        assert_eq!(seq.get(0, 0), Some(Point::new(0.0, 1.0)));

        let row = full_row(0, None).replacen(",0.000000,0.500000", ",1.600000,0.5", 1);
        assert!(matches!(parse(&csv_text(&[row])), Err(Error::Range { .. })));

        let row = full_row(0, None).replacen(",0.000000,0.500000", ",1.2,0.5", 1);
        let strict = ReadOptions {
            range: RangePolicy::Reject,
            ..ReadOptions::default()
        };
        assert!(matches!(
            parse_sequence(csv_text(&[row]).as_bytes(), "v".into(), &strict),
            Err(Error::Range { .. })
        ));
    }

    #[test]
    fn half_present_landmark_rejected() {
        let row = full_row(0, None).replacen(",0.000000,0.500000", ",,0.5", 1);
        assert!(matches!(parse(&csv_text(&[row])), Err(Error::PartialLandmark { .. })));
    }

    #[test]
    fn empty_sequence_is_header_only() {
        let seq = LandmarkSequence::empty("v", LandmarkId::all());
        let text = format_sequence(&seq);
        assert_eq!(text.lines().count(), 1);
        assert_eq!(text, format!("{}\n", canonical_header().join(",")));
        assert_eq!(parse(&text).unwrap().frame_count(), 0);
    }

    #[test]
    fn missing_landmark_writes_two_empty_cells() {
        let mut frame: Vec<Option<Point>> = vec![Some(Point::new(0.25, 0.75)); 543];
        frame[7] = None;
        let seq = LandmarkSequence::from_frames("v", LandmarkId::all(), vec![frame]).unwrap();
        let text = format_sequence(&seq);
        let row = text.lines().nth(1).unwrap();
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 1087);
        assert_eq!(cells.iter().filter(|c| c.is_empty()).count(), 2);
        assert_eq!(cells[15], "");
        assert_eq!(cells[16], "");
        assert_eq!(cells[1], "0.250000");
    }

    #[test]
    fn subset_layout_round_trip() {
        let ids = vec![
            LandmarkId::new(Part::RightHand, 3).unwrap(),
            LandmarkId::new(Part::Face, 0).unwrap(),
        ];
        let seq = LandmarkSequence::from_frames(
            "v",
            ids.clone(),
            vec![vec![Some(Point::new(0.1, 0.2)), None]],
        )
        .unwrap();
        let text = format_sequence(&seq);
        assert!(parse(&text).is_err());
        let opts = ReadOptions {
            layout: Layout::Subset,
            ..ReadOptions::default()
        };
        let back = parse_sequence(text.as_bytes(), "v".into(), &opts).unwrap();
        assert_eq!(back.landmarks(), &ids[..]);
        assert_eq!(back, seq);
    }
}
