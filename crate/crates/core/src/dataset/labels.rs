//! JSON label files.
//!
//! ```json
//! { "frames": [ { "id": "s01_f0001", "surgery": "s01", "domain": "sim",
//!                 "width": 512, "height": 288,
//!                 "points": [[101.5, 40.25], [130.0, 44.0]] } ] }
//! ```
//!
//! Unknown keys, at the top level or inside a frame, are carried through a
//! read/write cycle unchanged.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::types::{ImageDims, LandmarkSet, Point2D};

/// Landmark counts above this are accepted but logged.
pub const TYPICAL_MAX_POINTS: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    #[default]
    Sim,
    Intraop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelRecord {
    pub surgery_id: String,
    pub domain: Domain,
    pub landmarks: LandmarkSet,
    /// Frame-level keys outside the schema.
    pub extra: Map<String, Value>,
}

impl LabelRecord {
    pub fn new(surgery_id: impl Into<String>, domain: Domain, landmarks: LandmarkSet) -> Self {
        Self {
            surgery_id: surgery_id.into(),
            domain,
            landmarks,
            extra: Map::new(),
        }
    }

    pub fn frame_id(&self) -> &str {
        &self.landmarks.frame_id
    }
}

/// A whole label file: records plus any top-level keys outside the schema.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelDocument {
    pub records: Vec<LabelRecord>,
    pub extra: Map<String, Value>,
}

#[derive(Serialize, Deserialize)]
struct RawFrame {
    id: String,
    surgery: String,
    domain: Domain,
    width: u32,
    height: u32,
    points: Vec<[f64; 2]>,
    #[serde(flatten)]
    extra: Map<String, Value>,
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<LabelRecord>> {
    Ok(read_label_document(path)?.records)
}

pub fn read_label_document(path: impl AsRef<Path>) -> Result<LabelDocument> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_label_document(&text, path)
}

/// Parses label JSON; `origin` is only used in error messages.
pub fn parse_label_document(text: &str, origin: &Path) -> Result<LabelDocument> {
    let schema = |record: String, message: String| Error::Schema {
        path: origin.to_path_buf(),
        record,
        message,
    };
    let root: Value = serde_json::from_str(text).map_err(|source| Error::Json {
        path: origin.to_path_buf(),
        source,
    })?;
    let Value::Object(mut top) = root else {
        return Err(schema("-".into(), "top level must be an object".into()));
    };
    let frames = match top.remove("frames") {
        Some(Value::Array(frames)) => frames,
        Some(_) => return Err(schema("-".into(), "`frames` must be an array".into())),
        None => return Err(schema("-".into(), "missing required field `frames`".into())),
    };

    let mut records = Vec::with_capacity(frames.len());
    let mut seen = HashSet::new();
    let mut surgery_dims: HashMap<String, ImageDims> = HashMap::new();
    for (i, frame) in frames.into_iter().enumerate() {
        let locus = frame
            .get("id")
            .and_then(Value::as_str)
            .map(str::to_string)
            .unwrap_or_else(|| format!("#{i}"));
        let raw: RawFrame =
            serde_json::from_value(frame).map_err(|e| schema(locus.clone(), e.to_string()))?;
        let dims = ImageDims::new(raw.width, raw.height)
            .map_err(|e| schema(locus.clone(), e.to_string()))?;
        if !seen.insert(raw.id.clone()) {
            return Err(schema(locus, "duplicate frame id".into()));
        }
        if let Some(prev) = surgery_dims.insert(raw.surgery.clone(), dims) {
            if prev != dims {
                return Err(schema(
                    locus,
                    format!(
                        "dimensions {}x{} differ from {}x{} used elsewhere in surgery {}",
                        dims.width, dims.height, prev.width, prev.height, raw.surgery
                    ),
                ));
            }
        }
        let points = raw.points.iter().map(|&[x, y]| Point2D::new(x, y)).collect();
        let landmarks = LandmarkSet::new(raw.id, dims, points)
            .map_err(|e| schema(locus.clone(), e.to_string()))?;
        if landmarks.len() > TYPICAL_MAX_POINTS {
            log::warn!(
                "{}: frame {locus} has {} landmarks (more than {TYPICAL_MAX_POINTS})",
                origin.display(),
                landmarks.len()
            );
        }
        records.push(LabelRecord {
            surgery_id: raw.surgery,
            domain: raw.domain,
            landmarks,
            extra: raw.extra,
        });
    }
    Ok(LabelDocument {
        records,
        extra: top,
    })
}

pub fn label_document_to_json(doc: &LabelDocument) -> Result<String> {
    let frames: Vec<RawFrame> = doc
        .records
        .iter()
        .map(|r| RawFrame {
            id: r.landmarks.frame_id.clone(),
            surgery: r.surgery_id.clone(),
            domain: r.domain,
            width: r.landmarks.dims.width,
            height: r.landmarks.dims.height,
            points: r.landmarks.points.iter().map(|p| [p.x, p.y]).collect(),
            extra: r.extra.clone(),
        })
        .collect();
    let mut top = doc.extra.clone();
    top.insert(
        "frames".into(),
        serde_json::to_value(frames).map_err(|e| Error::InvalidParameter(e.to_string()))?,
    );
    serde_json::to_string_pretty(&Value::Object(top))
        .map_err(|e| Error::InvalidParameter(e.to_string()))
}

pub fn write_labels(records: &[LabelRecord], path: impl AsRef<Path>) -> Result<()> {
    write_label_document(
        &LabelDocument {
            records: records.to_vec(),
            extra: Map::new(),
        },
        path,
    )
}

pub fn write_label_document(doc: &LabelDocument, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = label_document_to_json(doc)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
