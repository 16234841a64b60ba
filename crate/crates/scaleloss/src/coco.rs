//! COCO annotation and results files.
//!
//! Only the fields the evaluator needs are read; everything else (`area`,
//! `iscrowd`, `file_name`, `segmentation`, ...) is ignored. Syntax and type
//! errors name the array element being read, e.g. `annotations[17]`.

use std::fmt;
use std::marker::PhantomData;
use std::path::Path;

use serde::de::{self, DeserializeOwned, Deserializer, SeqAccess, Visitor};
use serde::Deserialize;

use scaleloss_core::evaluator::{Annotation, Category, Detection, GroundTruthSet};
use scaleloss_core::Bbox;

use crate::error::{CliError, Result};

#[derive(Debug, Deserialize)]
struct RawImage {
    id: u64,
}

#[derive(Debug, Deserialize)]
struct RawAnnotation {
    id: u64,
    image_id: u64,
    category_id: u64,
    bbox: [f64; 4],
}

#[derive(Debug, Deserialize)]
struct RawCategory {
    id: u64,
    #[serde(default)]
    name: String,
}

#[derive(Debug, Deserialize)]
struct RawResult {
    image_id: u64,
    category_id: u64,
    bbox: [f64; 4],
    score: f64,
}

#[derive(Debug, Deserialize)]
struct RawDataset {
    #[serde(deserialize_with = "images")]
    images: Vec<RawImage>,
    #[serde(deserialize_with = "annotations")]
    annotations: Vec<RawAnnotation>,
    #[serde(deserialize_with = "categories")]
    categories: Vec<RawCategory>,
}

/// Sequence visitor that prefixes element errors with `label[index]`.
struct Indexed<T> {
    label: &'static str,
    marker: PhantomData<T>,
}

impl<'de, T: DeserializeOwned> Visitor<'de> for Indexed<T> {
    type Value = Vec<T>;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "an array of {} records", self.label)
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Vec<T>, A::Error> {
        let mut out = Vec::with_capacity(seq.size_hint().unwrap_or(0));
        loop {
            match seq.next_element::<T>() {
                Ok(Some(v)) => out.push(v),
                Ok(None) => return Ok(out),
                Err(e) => return Err(de::Error::custom(format!("{}[{}]: {e}", self.label, out.len()))),
            }
        }
    }
}

fn indexed<'de, D: Deserializer<'de>, T: DeserializeOwned>(
    d: D,
    label: &'static str,
) -> std::result::Result<Vec<T>, D::Error> {
    d.deserialize_seq(Indexed { label, marker: PhantomData })
}

fn images<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<RawImage>, D::Error> {
    indexed(d, "images")
}

fn annotations<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<RawAnnotation>, D::Error> {
    indexed(d, "annotations")
}

fn categories<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<RawCategory>, D::Error> {
    indexed(d, "categories")
}

fn to_box(b: [f64; 4]) -> Option<Bbox> {
    Bbox::new(b[0], b[1], b[2], b[3]).ok()
}

/// Parses a COCO annotation document. `origin` names the source in errors.
pub fn parse_ground_truth(text: &str, origin: &Path) -> Result<GroundTruthSet> {
    let raw: RawDataset = serde_json::from_str(text).map_err(|e| CliError::parse(origin, e.to_string()))?;
    let mut anns = Vec::with_capacity(raw.annotations.len());
    let mut bad = Vec::new();
    for (i, a) in raw.annotations.iter().enumerate() {
        match to_box(a.bbox) {
            Some(bbox) => anns.push(Annotation { id: a.id, image_id: a.image_id, category_id: a.category_id, bbox }),
            None => bad.push(format!("annotations[{i}] (id {}): invalid bbox {:?}", a.id, a.bbox)),
        }
    }
    if !bad.is_empty() {
        return Err(CliError::parse(origin, bad.join("; ")));
    }
    let images = raw.images.iter().map(|i| i.id).collect();
    let cats = raw.categories.into_iter().map(|c| Category { id: c.id, name: c.name }).collect();
    GroundTruthSet::new(images, cats, anns).map_err(|e| CliError::parse(origin, e.to_string()))
}

/// Parses a COCO results array.
pub fn parse_detections(text: &str, origin: &Path) -> Result<Vec<Detection>> {
    let mut de = serde_json::Deserializer::from_str(text);
    let raw: Vec<RawResult> = indexed(&mut de, "results")
        .and_then(|v| de.end().map(|_| v))
        .map_err(|e| CliError::parse(origin, e.to_string()))?;
    let mut out = Vec::with_capacity(raw.len());
    let mut bad = Vec::new();
    for (i, r) in raw.into_iter().enumerate() {
        match to_box(r.bbox) {
            Some(bbox) => {
                out.push(Detection { image_id: r.image_id, category_id: r.category_id, bbox, score: r.score })
            }
            None => bad.push(format!("results[{i}]: invalid bbox {:?}", r.bbox)),
        }
    }
    if bad.is_empty() {
        Ok(out)
    } else {
        Err(CliError::parse(origin, bad.join("; ")))
    }
}

pub fn load_ground_truth(path: &Path) -> Result<GroundTruthSet> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_ground_truth(&text, path)
}

pub fn load_detections(path: &Path) -> Result<Vec<Detection>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_detections(&text, path)
}
