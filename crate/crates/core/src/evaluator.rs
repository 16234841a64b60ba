//! COCO-style detection evaluation with tiny-object size buckets.
//!
//! Reports AP averaged over IoU thresholds 0.50:0.05:0.95, AP at 0.50 and
//! 0.75, and AP restricted to very tiny `[2, 8)`, tiny `[8, 16)`, small
//! `[16, 32)` and medium `[32, 64)` objects, where an object's size is
//! `sqrt(w * h)` in pixels.
//!
//! Matching follows pycocotools: per image and category, detections are taken
//! in descending score order (ties keep input order), truncated to
//! `max_dets_per_image`, and each is greedily assigned the unmatched ground
//! truth of highest IoU at or above the threshold. When a size bucket is
//! evaluated, ground truths outside it are ignored rather than removed:
//! detections matched to them, and unmatched detections whose own size falls
//! outside the bucket, count neither as true nor false positives.
//!
//! Per (category, bucket, threshold) the precision/recall curve is made
//! monotone and sampled at `recall_points` evenly spaced recalls. A category
//! contributes to a metric only if it has ground truths in that bucket; the
//! metric is absent when no category does.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::boxgeom::{iou, Bbox};
use crate::error::{Error, Result};

/// Default bucket boundaries in pixels.
pub const AI_TOD_BOUNDARIES: [f64; 5] = [2.0, 8.0, 16.0, 32.0, 64.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SizeBucket {
    VeryTiny,
    Tiny,
    Small,
    Medium,
}

impl SizeBucket {
    pub const ALL: [SizeBucket; 4] = [SizeBucket::VeryTiny, SizeBucket::Tiny, SizeBucket::Small, SizeBucket::Medium];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            SizeBucket::VeryTiny => "vt",
            SizeBucket::Tiny => "t",
            SizeBucket::Small => "s",
            SizeBucket::Medium => "m",
        }
    }

    /// `[lo, hi)` of this bucket under `boundaries`.
    pub fn range(self, boundaries: &[f64; 5]) -> (f64, f64) {
        (boundaries[self.index()], boundaries[self.index() + 1])
    }
}

/// Bucket of a box by `sqrt(w * h)` against half-open intervals; `None` when
/// the size falls outside every interval.
pub fn size_bucket(b: &Bbox, boundaries: &[f64; 5]) -> Option<SizeBucket> {
    let size = b.size();
    SizeBucket::ALL.into_iter().find(|k| {
        let (lo, hi) = k.range(boundaries);
        size >= lo && size < hi
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub image_id: u64,
    pub category_id: u64,
    pub bbox: Bbox,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Annotation {
    pub id: u64,
    pub image_id: u64,
    pub category_id: u64,
    pub bbox: Bbox,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Category {
    pub id: u64,
    pub name: String,
}

/// Registered images and categories plus their annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthSet {
    images: Vec<u64>,
    categories: Vec<Category>,
    annotations: Vec<Annotation>,
}

impl GroundTruthSet {
    /// Fails with [`Error::UnknownReferences`] listing every annotation that
    /// names an unregistered image or category.
    pub fn new(images: Vec<u64>, categories: Vec<Category>, annotations: Vec<Annotation>) -> Result<Self> {
        let mut images = images;
        images.sort_unstable();
        images.dedup();
        let mut categories = categories;
        categories.sort_by_key(|c| c.id);
        categories.dedup_by_key(|c| c.id);
        let set = Self { images, categories, annotations };
        let mut bad = Vec::new();
        for (i, a) in set.annotations.iter().enumerate() {
            if let Some(why) = set.unknown_refs(a.image_id, a.category_id) {
                bad.push(format!("annotation #{i} (id {}): {why}", a.id));
            }
            if a.bbox.validate().is_err() {
                bad.push(format!("annotation #{i} (id {}): invalid bbox", a.id));
            }
        }
        if bad.is_empty() {
            Ok(set)
        } else {
            Err(Error::UnknownReferences(bad))
        }
    }

    fn unknown_refs(&self, image_id: u64, category_id: u64) -> Option<String> {
        let img = self.images.binary_search(&image_id).is_ok();
        let cat = self.categories.binary_search_by_key(&category_id, |c| c.id).is_ok();
        match (img, cat) {
            (true, true) => None,
            (false, true) => Some(format!("image_id {image_id} not registered")),
            (true, false) => Some(format!("category_id {category_id} not registered")),
            (false, false) => Some(format!("image_id {image_id} and category_id {category_id} not registered")),
        }
    }

    pub fn images(&self) -> &[u64] {
        &self.images
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    pub fn annotations(&self) -> &[Annotation] {
        &self.annotations
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub iou_thresholds: Vec<f64>,
    pub recall_points: usize,
    pub max_dets_per_image: usize,
    pub size_buckets: [f64; 5],
}

/// `0.50, 0.55, ..., 0.95`.
pub fn coco_iou_thresholds() -> Vec<f64> {
    (0..10).map(|i| (50 + 5 * i) as f64 / 100.0).collect()
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            iou_thresholds: coco_iou_thresholds(),
            recall_points: 101,
            max_dets_per_image: 100,
            size_buckets: AI_TOD_BOUNDARIES,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        let t = &self.iou_thresholds;
        if t.is_empty() || t.iter().any(|&v| !(v > 0.0 && v <= 1.0)) || t.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!("IoU thresholds must be strictly increasing in (0, 1], got {t:?}")));
        }
        if self.recall_points < 2 {
            return Err(Error::Config("need at least 2 recall points".into()));
        }
        if self.max_dets_per_image == 0 {
            return Err(Error::Config("max detections per image must be >= 1".into()));
        }
        let b = &self.size_buckets;
        if b.iter().any(|v| !v.is_finite() || *v < 0.0) || b.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!("bucket boundaries must be strictly increasing, got {b:?}")));
        }
        Ok(())
    }

    fn threshold_index(&self, t: f64) -> Option<usize> {
        self.iou_thresholds.iter().position(|&v| (v - t).abs() < 1e-12)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub ap: Option<f64>,
    pub ap50: Option<f64>,
    pub ap75: Option<f64>,
    pub ap_vt: Option<f64>,
    pub ap_t: Option<f64>,
    pub ap_s: Option<f64>,
    pub ap_m: Option<f64>,
    /// AP over all sizes and thresholds, per category; `None` for categories
    /// without ground truths.
    pub per_category: BTreeMap<u64, Option<f64>>,
}

impl EvalReport {
    pub fn bucket(&self, b: SizeBucket) -> Option<f64> {
        match b {
            SizeBucket::VeryTiny => self.ap_vt,
            SizeBucket::Tiny => self.ap_t,
            SizeBucket::Small => self.ap_s,
            SizeBucket::Medium => self.ap_m,
        }
    }

    /// Metric name/value rows in report order.
    pub fn rows(&self) -> Vec<(String, Option<f64>)> {
        let mut rows: Vec<(String, Option<f64>)> = vec![
            ("AP".into(), self.ap),
            ("AP50".into(), self.ap50),
            ("AP75".into(), self.ap75),
            ("AP_vt".into(), self.ap_vt),
            ("AP_t".into(), self.ap_t),
            ("AP_s".into(), self.ap_s),
            ("AP_m".into(), self.ap_m),
        ];
        rows.extend(self.per_category.iter().map(|(id, v)| (format!("AP_cat_{id}"), *v)));
        rows
    }
}

/// Result of matching one detection at one threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchOutcome {
    TruePositive,
    FalsePositive,
    /// Neither: matched an ignored ground truth, or out of the evaluated range.
    Ignored,
}

/// Greedy matching of score-sorted detections against one image/category's
/// ground truths.
///
/// `gt_ignore[g]` marks ground truths that may absorb a detection without
/// counting as recall. Non-ignored ground truths are preferred; among them
/// the highest IoU wins, and equal IoUs go to the later ground truth.
fn match_sorted(dets: &[Bbox], gts: &[Bbox], gt_ignore: &[bool], threshold: f64) -> Vec<Option<usize>> {
    let mut order: Vec<usize> = (0..gts.len()).collect();
    order.sort_by_key(|&g| gt_ignore[g]);
    let mut taken = vec![false; gts.len()];
    let floor = threshold.min(1.0 - 1e-10);
    dets.iter()
        .map(|d| {
            let mut best = floor;
            let mut m: Option<usize> = None;
            for &g in &order {
                if taken[g] {
                    continue;
                }
                if let Some(prev) = m {
                    if !gt_ignore[prev] && gt_ignore[g] {
                        break;
                    }
                }
                let v = iou(d, &gts[g]);
                if v < best {
                    continue;
                }
                best = v;
                m = Some(g);
            }
            if let Some(g) = m {
                taken[g] = true;
            }
            m
        })
        .collect()
}

/// TP/FP flags for one image's detections, aligned with `dets`.
///
/// Detections are processed per category in descending score order (ties in
/// input order); `gts` holds `(category_id, box)`.
pub fn match_detections(dets: &[Detection], gts: &[(u64, Bbox)], iou_threshold: f64) -> Vec<bool> {
    let mut flags = vec![false; dets.len()];
    let mut cats: Vec<u64> = dets.iter().map(|d| d.category_id).collect();
    cats.sort_unstable();
    cats.dedup();
    for cat in cats {
        let mut idx: Vec<usize> = (0..dets.len()).filter(|&i| dets[i].category_id == cat).collect();
        sort_by_score(&mut idx, |i| dets[i].score);
        let boxes: Vec<Bbox> = idx.iter().map(|&i| dets[i].bbox).collect();
        let cat_gts: Vec<Bbox> = gts.iter().filter(|g| g.0 == cat).map(|g| g.1).collect();
        let ignore = vec![false; cat_gts.len()];
        for (k, m) in match_sorted(&boxes, &cat_gts, &ignore, iou_threshold).into_iter().enumerate() {
            flags[idx[k]] = m.is_some();
        }
    }
    flags
}

/// Stable sort of indices by descending score.
fn sort_by_score(idx: &mut [usize], score: impl Fn(usize) -> f64) {
    idx.sort_by(|&a, &b| score(b).partial_cmp(&score(a)).unwrap_or(core::cmp::Ordering::Equal));
}

/// Interpolated AP of a score-sorted TP/FP sequence.
///
/// Precision is replaced by its running maximum from the right and sampled at
/// `recall_points` recalls `0, 1/(R-1), ..., 1`; samples beyond the reached
/// recall count as 0. Returns 0 when `total_gt` is 0.
pub fn average_precision(tp: &[bool], total_gt: usize, recall_points: usize) -> f64 {
    interpolated_ap(tp, total_gt, recall_points).unwrap_or(0.0)
}

fn interpolated_ap(tp: &[bool], total_gt: usize, recall_points: usize) -> Option<f64> {
    if total_gt == 0 {
        return None;
    }
    let n = tp.len();
    let mut recall = Vec::with_capacity(n);
    let mut precision = Vec::with_capacity(n);
    let (mut tps, mut fps) = (0usize, 0usize);
    for &t in tp {
        if t {
            tps += 1;
        } else {
            fps += 1;
        }
        recall.push(tps as f64 / total_gt as f64);
        precision.push(tps as f64 / (tps + fps) as f64);
    }
    for i in (0..n.saturating_sub(1)).rev() {
        if precision[i + 1] > precision[i] {
            precision[i] = precision[i + 1];
        }
    }
    let denom = (recall_points - 1) as f64;
    let mut sum = 0.0;
    for j in 0..recall_points {
        let r = j as f64 / denom;
        let k = recall.partition_point(|&v| v < r);
        if k < n {
            sum += precision[k];
        }
    }
    Some(sum / recall_points as f64)
}

/// Checks every detection against the ground-truth registries.
pub fn validate_detections(gts: &GroundTruthSet, dets: &[Detection]) -> Result<()> {
    let mut bad = Vec::new();
    for (i, d) in dets.iter().enumerate() {
        if let Some(why) = gts.unknown_refs(d.image_id, d.category_id) {
            bad.push(format!("detection #{i}: {why}"));
        }
        if !(0.0..=1.0).contains(&d.score) {
            bad.push(format!("detection #{i}: score {} outside [0, 1]", d.score));
        }
        if d.bbox.validate().is_err() {
            bad.push(format!("detection #{i}: invalid bbox"));
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::UnknownReferences(bad))
    }
}

type Range = Option<(f64, f64)>;

fn in_range(b: &Bbox, range: Range) -> bool {
    match range {
        None => true,
        Some((lo, hi)) => {
            let s = b.size();
            s >= lo && s < hi
        }
    }
}

/// Mean AP over the supplied thresholds for one category and size range.
fn category_ap(
    images: &[u64],
    gt_index: &BTreeMap<u64, Vec<Bbox>>,
    det_index: &BTreeMap<u64, Vec<(f64, Bbox)>>,
    range: Range,
    thresholds: &[f64],
    recall_points: usize,
) -> Option<f64> {
    let empty_g: Vec<Bbox> = Vec::new();
    let empty_d: Vec<(f64, Bbox)> = Vec::new();
    let npig: usize = gt_index.values().flatten().filter(|g| in_range(g, range)).count();
    if npig == 0 {
        return None;
    }
    let mut total = 0.0;
    for &t in thresholds {
        let mut scored: Vec<(f64, bool)> = Vec::new();
        for img in images {
            let gts = gt_index.get(img).unwrap_or(&empty_g);
            let dets = det_index.get(img).unwrap_or(&empty_d);
            if dets.is_empty() {
                continue;
            }
            let ignore: Vec<bool> = gts.iter().map(|g| !in_range(g, range)).collect();
            let boxes: Vec<Bbox> = dets.iter().map(|d| d.1).collect();
            for (k, m) in match_sorted(&boxes, gts, &ignore, t).into_iter().enumerate() {
                let outcome = match m {
                    Some(g) if ignore[g] => MatchOutcome::Ignored,
                    Some(_) => MatchOutcome::TruePositive,
                    None if !in_range(&boxes[k], range) => MatchOutcome::Ignored,
                    None => MatchOutcome::FalsePositive,
                };
                if outcome != MatchOutcome::Ignored {
                    scored.push((dets[k].0, outcome == MatchOutcome::TruePositive));
                }
            }
        }
        // stable: equal scores keep image order, then per-image rank
        scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(core::cmp::Ordering::Equal));
        let flags: Vec<bool> = scored.iter().map(|s| s.1).collect();
        total += interpolated_ap(&flags, npig, recall_points)?;
    }
    Some(total / thresholds.len() as f64)
}

fn mean_present(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = values.flatten().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

pub fn evaluate(gts: &GroundTruthSet, dets: &[Detection], cfg: &EvalConfig) -> Result<EvalReport> {
    cfg.validate()?;
    validate_detections(gts, dets)?;

    // category -> image -> boxes
    let mut gt_index: BTreeMap<u64, BTreeMap<u64, Vec<Bbox>>> = BTreeMap::new();
    for a in gts.annotations() {
        gt_index.entry(a.category_id).or_default().entry(a.image_id).or_default().push(a.bbox);
    }
    let mut grouped: BTreeMap<u64, BTreeMap<u64, Vec<usize>>> = BTreeMap::new();
    for (i, d) in dets.iter().enumerate() {
        grouped.entry(d.category_id).or_default().entry(d.image_id).or_default().push(i);
    }
    let mut det_index: BTreeMap<u64, BTreeMap<u64, Vec<(f64, Bbox)>>> = BTreeMap::new();
    for (cat, per_img) in grouped {
        let entry = det_index.entry(cat).or_default();
        for (img, mut idx) in per_img {
            sort_by_score(&mut idx, |i| dets[i].score);
            idx.truncate(cfg.max_dets_per_image);
            entry.insert(img, idx.into_iter().map(|i| (dets[i].score, dets[i].bbox)).collect());
        }
    }

    let ranges: Vec<Range> =
        core::iter::once(None).chain(SizeBucket::ALL.iter().map(|b| Some(b.range(&cfg.size_buckets)))).collect();
    let single = |t: f64| cfg.threshold_index(t).map(|i| [cfg.iou_thresholds[i]]);
    let (t50, t75) = (single(0.5), single(0.75));

    let empty_g = BTreeMap::new();
    let empty_d = BTreeMap::new();
    let mut per_category = BTreeMap::new();
    // [range][category]
    let mut by_range: Vec<Vec<Option<f64>>> = vec![Vec::new(); ranges.len()];
    let mut at50 = Vec::new();
    let mut at75 = Vec::new();
    for cat in gts.categories() {
        let g = gt_index.get(&cat.id).unwrap_or(&empty_g);
        let d = det_index.get(&cat.id).unwrap_or(&empty_d);
        let ap_of = |range: Range, thr: &[f64]| category_ap(gts.images(), g, d, range, thr, cfg.recall_points);
        for (r, &range) in ranges.iter().enumerate() {
            by_range[r].push(ap_of(range, &cfg.iou_thresholds));
        }
        per_category.insert(cat.id, by_range[0].last().copied().flatten());
        if let Some(t) = t50 {
            at50.push(ap_of(None, &t));
        }
        if let Some(t) = t75 {
            at75.push(ap_of(None, &t));
        }
    }

    let mean_of = |v: &Vec<Option<f64>>| mean_present(v.iter().copied());
    Ok(EvalReport {
        ap: mean_of(&by_range[0]),
        ap50: mean_present(at50.into_iter()),
        ap75: mean_present(at75.into_iter()),
        ap_vt: mean_of(&by_range[1]),
        ap_t: mean_of(&by_range[2]),
        ap_s: mean_of(&by_range[3]),
        ap_m: mean_of(&by_range[4]),
        per_category,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(x: f64, y: f64, w: f64, h: f64) -> Bbox {
        Bbox::new(x, y, w, h).unwrap()
    }

    fn det(img: u64, cat: u64, bbox: Bbox, score: f64) -> Detection {
        Detection { image_id: img, category_id: cat, bbox, score }
    }

    fn gt_set(boxes: &[(u64, u64, Bbox)]) -> GroundTruthSet {
        let mut images: Vec<u64> = boxes.iter().map(|b| b.0).collect();
        images.push(1);
        let cats = vec![Category { id: 1, name: "vehicle".into() }, Category { id: 2, name: "ship".into() }];
        let anns = boxes
            .iter()
            .enumerate()
            .map(|(i, &(img, cat, bbox))| Annotation { id: i as u64 + 1, image_id: img, category_id: cat, bbox })
            .collect();
        GroundTruthSet::new(images, cats, anns).unwrap()
    }

    #[test]
    fn bucket_examples() {
        let s = |side: f64| size_bucket(&b(0.0, 0.0, side, side), &AI_TOD_BOUNDARIES);
        assert_eq!(s(4.0), Some(SizeBucket::VeryTiny));
        assert_eq!(s(12.0), Some(SizeBucket::Tiny));
        assert_eq!(s(20.0), Some(SizeBucket::Small));
        assert_eq!(s(40.0), Some(SizeBucket::Medium));
        // lower edges belong to the bucket, upper edges to the next
        assert_eq!(s(2.0), Some(SizeBucket::VeryTiny));
        assert_eq!(s(8.0), Some(SizeBucket::Tiny));
        assert_eq!(s(16.0), Some(SizeBucket::Small));
        assert_eq!(s(32.0), Some(SizeBucket::Medium));
        assert_eq!(s(64.0), None);
        assert_eq!(s(1.5), None);
        // sqrt(4 * 16) = 8
        assert_eq!(size_bucket(&b(0.0, 0.0, 4.0, 16.0), &AI_TOD_BOUNDARIES), Some(SizeBucket::Tiny));
    }

    #[test]
    fn matching_examples() {
        let g = b(0.0, 0.0, 10.0, 10.0);
        assert_eq!(match_detections(&[det(1, 1, g, 0.9)], &[(1, g)], 0.5), [true]);
        let two = [det(1, 1, g.translated(1.0, 0.0), 0.6), det(1, 1, g, 0.9)];
        assert_eq!(match_detections(&two, &[(1, g)], 0.5), [false, true]);
        assert_eq!(match_detections(&[det(1, 1, g.translated(50.0, 0.0), 0.9)], &[(1, g)], 0.5), [false]);
        // other category never matches
        assert_eq!(match_detections(&[det(1, 2, g, 0.9)], &[(1, g)], 0.5), [false]);
    }

    #[test]
    fn equal_scores_keep_input_order() {
        let g = b(0.0, 0.0, 10.0, 10.0);
        let dets = [det(1, 1, g.translated(2.0, 0.0), 0.5), det(1, 1, g, 0.5)];
        assert_eq!(match_detections(&dets, &[(1, g)], 0.5), [true, false]);
    }

    #[test]
    fn highest_iou_gt_wins() {
        let near = b(0.0, 0.0, 10.0, 10.0);
        let far = b(3.0, 0.0, 10.0, 10.0);
        let d = det(1, 1, b(0.5, 0.0, 10.0, 10.0), 0.9);
        let d2 = det(1, 1, b(3.0, 0.0, 10.0, 10.0), 0.8);
        // first det overlaps both; takes `near`, leaving `far` for the second
        assert_eq!(match_detections(&[d, d2], &[(1, far), (1, near)], 0.5), [true, true]);
    }

    #[test]
    fn ap_examples() {
        assert_eq!(average_precision(&[true], 1, 101), 1.0);
        assert_eq!(average_precision(&[false], 1, 101), 0.0);
        assert!((average_precision(&[false, true], 1, 101) - 0.5).abs() < 1e-15);
        assert_eq!(average_precision(&[true], 0, 101), 0.0);
        // half the recall reached: 51 of 101 samples at precision 1
        assert!((average_precision(&[true], 2, 101) - 51.0 / 101.0).abs() < 1e-15);
    }

    #[test]
    fn perfect_detections_score_one() {
        let boxes = [
            (1, 1, b(0.0, 0.0, 4.0, 4.0)),
            (1, 1, b(20.0, 20.0, 12.0, 12.0)),
            (2, 2, b(5.0, 5.0, 20.0, 20.0)),
            (2, 1, b(50.0, 50.0, 40.0, 40.0)),
        ];
        let gts = gt_set(&boxes);
        let dets: Vec<Detection> = boxes.iter().map(|&(i, c, bb)| det(i, c, bb, 1.0)).collect();
        let r = evaluate(&gts, &dets, &EvalConfig::default()).unwrap();
        for (name, v) in r.rows() {
            assert_eq!(v, Some(1.0), "{name}");
        }
    }

    #[test]
    fn empty_detections_score_zero() {
        let gts = gt_set(&[(1, 1, b(0.0, 0.0, 4.0, 4.0)), (1, 2, b(0.0, 0.0, 40.0, 40.0))]);
        let r = evaluate(&gts, &[], &EvalConfig::default()).unwrap();
        assert_eq!(r.ap, Some(0.0));
        assert_eq!(r.ap50, Some(0.0));
        assert_eq!(r.ap_vt, Some(0.0));
        assert_eq!(r.ap_m, Some(0.0));
        assert_eq!(r.ap_t, None);
        assert_eq!(r.ap_s, None);
    }

    #[test]
    fn out_of_bucket_matches_are_ignored() {
        // a very tiny gt and a medium gt; the medium one is detected perfectly,
        // the tiny one missed. AP_m must be 1 and AP_vt 0.
        let gts = gt_set(&[(1, 1, b(0.0, 0.0, 4.0, 4.0)), (1, 1, b(100.0, 100.0, 40.0, 40.0))]);
        let dets = [det(1, 1, b(100.0, 100.0, 40.0, 40.0), 0.9)];
        let r = evaluate(&gts, &dets, &EvalConfig::default()).unwrap();
        assert_eq!(r.ap_m, Some(1.0));
        assert_eq!(r.ap_vt, Some(0.0));
        assert!((r.ap.unwrap() - 51.0 / 101.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_gt_counts_only_overall() {
        let gts = gt_set(&[(1, 1, b(0.0, 0.0, 100.0, 100.0))]);
        let r = evaluate(&gts, &[det(1, 1, b(0.0, 0.0, 100.0, 100.0), 0.5)], &EvalConfig::default()).unwrap();
        assert_eq!(r.ap, Some(1.0));
        assert!(SizeBucket::ALL.iter().all(|&k| r.bucket(k).is_none()));
    }

    #[test]
    fn max_dets_truncates_lowest_scores() {
        let gts = gt_set(&[(1, 1, b(0.0, 0.0, 10.0, 10.0)), (1, 1, b(30.0, 0.0, 10.0, 10.0))]);
        let dets = [det(1, 1, b(0.0, 0.0, 10.0, 10.0), 0.9), det(1, 1, b(30.0, 0.0, 10.0, 10.0), 0.8)];
        let cfg = EvalConfig { max_dets_per_image: 1, ..EvalConfig::default() };
        let r = evaluate(&gts, &dets, &cfg).unwrap();
        assert!((r.ap.unwrap() - 51.0 / 101.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_references_are_listed() {
        let gts = gt_set(&[(1, 1, b(0.0, 0.0, 4.0, 4.0))]);
        let dets = [det(9, 1, b(0.0, 0.0, 4.0, 4.0), 0.5), det(1, 7, b(0.0, 0.0, 4.0, 4.0), 0.5)];
        match evaluate(&gts, &dets, &EvalConfig::default()) {
            Err(Error::UnknownReferences(list)) => {
                assert_eq!(list.len(), 2);
                assert!(list[0].contains("detection #0") && list[0].contains("image_id 9"));
                assert!(list[1].contains("category_id 7"));
            }
            other => panic!("{other:?}"),
        }
        let bad = GroundTruthSet::new(
            vec![1],
            vec![Category { id: 1, name: "a".into() }],
            vec![Annotation { id: 5, image_id: 2, category_id: 1, bbox: b(0.0, 0.0, 1.0, 1.0) }],
        );
        assert!(matches!(bad, Err(Error::UnknownReferences(v)) if v[0].contains("id 5")));
    }

    #[test]
    fn config_validation() {
        let mut c = EvalConfig::default();
        assert!(c.validate().is_ok());
        c.iou_thresholds = vec![0.5, 0.5];
        assert!(c.validate().is_err());
        c.iou_thresholds = vec![0.0];
        assert!(c.validate().is_err());
        let c = EvalConfig { size_buckets: [2.0, 8.0, 8.0, 32.0, 64.0], ..EvalConfig::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn missing_fixed_thresholds_leave_ap50_absent() {
        let gts = gt_set(&[(1, 1, b(0.0, 0.0, 4.0, 4.0))]);
        let cfg = EvalConfig { iou_thresholds: vec![0.6, 0.7], ..EvalConfig::default() };
        let r = evaluate(&gts, &[], &cfg).unwrap();
        assert_eq!((r.ap50, r.ap75), (None, None));
        assert_eq!(r.ap, Some(0.0));
    }
}
