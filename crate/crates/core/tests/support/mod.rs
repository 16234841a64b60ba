//! Test-only oracles. Nothing here calls into the evaluator or the loss
//! implementations it is used to check.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scaleloss_core::evaluator::{Annotation, Category, Detection, GroundTruthSet};
use scaleloss_core::{Bbox, MatchedPair};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Covered unit cells of two integer-aligned boxes: `(intersection, union)`.
pub fn raster_counts(a: &Bbox, b: &Bbox) -> (u64, u64) {
    let x0 = a.x.min(b.x) as i64;
    let y0 = a.y.min(b.y) as i64;
    let x1 = (a.x + a.w).max(b.x + b.w) as i64;
    let y1 = (a.y + a.h).max(b.y + b.h) as i64;
    let covers = |bx: &Bbox, px: i64, py: i64| {
        px >= bx.x as i64 && px < (bx.x + bx.w) as i64 && py >= bx.y as i64 && py < (bx.y + bx.h) as i64
    };
    let (mut inter, mut union) = (0, 0);
    for py in y0..y1 {
        for px in x0..x1 {
            let (ia, ib) = (covers(a, px, py), covers(b, px, py));
            inter += u64::from(ia && ib);
            union += u64::from(ia || ib);
        }
    }
    (inter, union)
}

pub fn random_int_box(r: &mut ChaCha8Rng) -> Bbox {
    Bbox::new(
        r.random_range(0..64) as f64,
        r.random_range(0..64) as f64,
        r.random_range(1..=64) as f64,
        r.random_range(1..=64) as f64,
    )
    .unwrap()
}

/// Pair whose boxes partially overlap on both axes with every edge at least
/// `margin` away from its counterpart, so no kink lies within a small step.
pub fn random_partial_pair(r: &mut ChaCha8Rng, margin: f64) -> MatchedPair {
    loop {
        let w = r.random_range(1.0..60.0);
        let h = r.random_range(1.0..60.0);
        let gt = Bbox::new(r.random_range(0.0..100.0), r.random_range(0.0..100.0), w, h).unwrap();
        let pw = w * r.random_range(0.5..1.5);
        let ph = h * r.random_range(0.5..1.5);
        let dx = r.random_range(-0.8..0.8) * w.min(pw);
        let dy = r.random_range(-0.8..0.8) * h.min(ph);
        let pred = Bbox::new(gt.x + dx, gt.y + dy, pw, ph).unwrap();
        let edges_apart = |a0: f64, aw: f64, b0: f64, bw: f64| {
            (a0 - b0).abs() > margin && (a0 + aw - b0 - bw).abs() > margin && {
                let ov = (a0 + aw).min(b0 + bw) - a0.max(b0);
                ov > margin
            }
        };
        if edges_apart(gt.x, gt.w, pred.x, pred.w) && edges_apart(gt.y, gt.h, pred.y, pred.h) {
            return MatchedPair { gt, pred };
        }
    }
}

fn oracle_iou(a: &Bbox, b: &Bbox) -> f64 {
    let iw = ((a.x + a.w).min(b.x + b.w) - a.x.max(b.x)).max(0.0);
    let ih = ((a.y + a.h).min(b.y + b.h) - a.y.max(b.y)).max(0.0);
    let i = iw * ih;
    if i == 0.0 {
        0.0
    } else {
        i / (a.w * a.h + b.w * b.h - i)
    }
}

fn size(b: &Bbox) -> f64 {
    (b.w * b.h).sqrt()
}

type Range = Option<(f64, f64)>;

fn inside(b: &Bbox, r: Range) -> bool {
    r.is_none_or(|(lo, hi)| size(b) >= lo && size(b) < hi)
}

/// Matches the score-ordered `dets` of one image; returns per detection
/// `Some(true)` TP, `Some(false)` FP, `None` ignored.
fn oracle_match(dets: &[Bbox], gts: &[Bbox], range: Range, thr: f64) -> Vec<Option<bool>> {
    let floor = thr.min(1.0 - 1e-10);
    let mut used = vec![false; gts.len()];
    let mut out = Vec::new();
    for d in dets {
        let pick = |want_ignored: bool, used: &[bool]| {
            let mut best: Option<(f64, usize)> = None;
            for (g, gt) in gts.iter().enumerate() {
                if used[g] || inside(gt, range) == want_ignored {
                    continue;
                }
                let v = oracle_iou(d, gt);
                if v >= floor && best.is_none_or(|(bv, _)| v >= bv) {
                    best = Some((v, g));
                }
            }
            best.map(|b| b.1)
        };
        let chosen = pick(false, &used).map(|g| (g, true)).or_else(|| pick(true, &used).map(|g| (g, false)));
        match chosen {
            Some((g, counts)) => {
                used[g] = true;
                out.push(if counts { Some(true) } else { None });
            }
            None if !inside(d, range) => out.push(None),
            None => out.push(Some(false)),
        }
    }
    out
}

/// AP by enumerating every score cutoff of the merged detection list and
/// taking, for each sampled recall, the best precision among cutoffs that
/// reach it.
fn oracle_ap(
    images: &[u64],
    gts: &BTreeMap<u64, Vec<Bbox>>,
    dets: &BTreeMap<u64, Vec<(f64, Bbox)>>,
    range: Range,
    thr: f64,
    recall_points: usize,
) -> Option<f64> {
    let npig = gts.values().flatten().filter(|g| inside(g, range)).count();
    if npig == 0 {
        return None;
    }
    // merged order: (score desc, image order, rank) -- (image, rank) pairs
    let mut merged: Vec<(f64, usize, u64, usize)> = Vec::new();
    for (pos, img) in images.iter().enumerate() {
        for (rank, d) in dets.get(img).map(Vec::as_slice).unwrap_or(&[]).iter().enumerate() {
            merged.push((d.0, pos, *img, rank));
        }
    }
    merged.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)).then(a.3.cmp(&b.3)));

    let mut curve = Vec::new();
    for cut in 1..=merged.len() {
        let mut per_img: BTreeMap<u64, usize> = BTreeMap::new();
        for m in &merged[..cut] {
            *per_img.entry(m.2).or_default() += 1;
        }
        let (mut tp, mut fp) = (0usize, 0usize);
        for (img, k) in per_img {
            let boxes: Vec<Bbox> = dets[&img][..k].iter().map(|d| d.1).collect();
            let g = gts.get(&img).cloned().unwrap_or_default();
            for o in oracle_match(&boxes, &g, range, thr) {
                match o {
                    Some(true) => tp += 1,
                    Some(false) => fp += 1,
                    None => {}
                }
            }
        }
        if tp + fp > 0 {
            curve.push((tp as f64 / npig as f64, tp as f64 / (tp + fp) as f64));
        }
    }
    let mut sum = 0.0;
    for j in 0..recall_points {
        let r = j as f64 / (recall_points - 1) as f64;
        sum += curve.iter().filter(|c| c.0 >= r).map(|c| c.1).fold(0.0, f64::max);
    }
    Some(sum / recall_points as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub ap: Option<f64>,
    pub ap50: Option<f64>,
    pub ap75: Option<f64>,
    pub buckets: [Option<f64>; 4],
    pub per_category: BTreeMap<u64, Option<f64>>,
}

fn mean(v: &[Option<f64>]) -> Option<f64> {
    let p: Vec<f64> = v.iter().flatten().copied().collect();
    (!p.is_empty()).then(|| p.iter().sum::<f64>() / p.len() as f64)
}

/// Brute-force counterpart of `evaluate` for the default configuration
/// (thresholds 0.50:0.05:0.95, 101 recall points, boundaries 2/8/16/32/64).
pub fn oracle_evaluate(gts: &GroundTruthSet, dets: &[Detection], max_dets: usize) -> OracleReport {
    let thresholds: Vec<f64> = (0..10).map(|i| (50 + 5 * i) as f64 / 100.0).collect();
    let b = [2.0, 8.0, 16.0, 32.0, 64.0];
    let ranges: [Range; 5] = [None, Some((b[0], b[1])), Some((b[1], b[2])), Some((b[2], b[3])), Some((b[3], b[4]))];
    let mut by_range: Vec<Vec<Option<f64>>> = vec![Vec::new(); 5];
    let (mut a50, mut a75) = (Vec::new(), Vec::new());
    let mut per_category = BTreeMap::new();
    for cat in gts.categories() {
        let mut g: BTreeMap<u64, Vec<Bbox>> = BTreeMap::new();
        for a in gts.annotations().iter().filter(|a| a.category_id == cat.id) {
            g.entry(a.image_id).or_default().push(a.bbox);
        }
        let mut d: BTreeMap<u64, Vec<(f64, Bbox)>> = BTreeMap::new();
        for x in dets.iter().filter(|x| x.category_id == cat.id) {
            d.entry(x.image_id).or_default().push((x.score, x.bbox));
        }
        for v in d.values_mut() {
            v.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
            v.truncate(max_dets);
        }
        let ap_over = |range: Range, ts: &[f64]| -> Option<f64> {
            let aps: Vec<Option<f64>> = ts.iter().map(|&t| oracle_ap(gts.images(), &g, &d, range, t, 101)).collect();
            if aps.iter().any(Option::is_none) {
                None
            } else {
                mean(&aps)
            }
        };
        for (k, r) in ranges.iter().enumerate() {
            by_range[k].push(ap_over(*r, &thresholds));
        }
        per_category.insert(cat.id, by_range[0].last().copied().flatten());
        a50.push(ap_over(None, &[0.5]));
        a75.push(ap_over(None, &[0.75]));
    }
    OracleReport {
        ap: mean(&by_range[0]),
        ap50: mean(&a50),
        ap75: mean(&a75),
        buckets: [mean(&by_range[1]), mean(&by_range[2]), mean(&by_range[3]), mean(&by_range[4])],
        per_category,
    }
}

/// Random evaluation instance: up to 5 images with up to 10 ground truths
/// each, detections that are jittered copies of ground truths plus clutter.
pub fn random_instance(seed: u64) -> (GroundTruthSet, Vec<Detection>) {
    let mut r = rng(seed);
    let n_img = r.random_range(1..=5u64);
    let n_cat = r.random_range(1..=3u64);
    let images: Vec<u64> = (1..=n_img).collect();
    let categories: Vec<Category> = (1..=n_cat).map(|id| Category { id, name: format!("c{id}") }).collect();
    let mut anns = Vec::new();
    let mut dets = Vec::new();
    let mut next_id = 1;
    for &img in &images {
        for _ in 0..r.random_range(0..=10) {
            let side = r.random_range(1.5f64..80.0);
            let aspect = r.random_range(0.6f64..1.6);
            let bbox = Bbox::new(r.random_range(0.0..200.0), r.random_range(0.0..200.0), side * aspect, side / aspect)
                .unwrap();
            let category_id = r.random_range(1..=n_cat);
            anns.push(Annotation { id: next_id, image_id: img, category_id, bbox });
            next_id += 1;
            for _ in 0..r.random_range(0..=2) {
                let j = 0.25 * bbox.w.min(bbox.h);
                let cat = if r.random_bool(0.85) { category_id } else { r.random_range(1..=n_cat) };
                let d = Bbox::new(
                    bbox.x + r.random_range(-j..j),
                    bbox.y + r.random_range(-j..j),
                    bbox.w * r.random_range(0.8..1.25),
                    bbox.h * r.random_range(0.8..1.25),
                )
                .unwrap();
                dets.push(Detection { image_id: img, category_id: cat, bbox: d, score: r.random_range(0.0..1.0) });
            }
        }
        for _ in 0..r.random_range(0..=4) {
            let side = r.random_range(1.5f64..80.0);
            let bbox = Bbox::new(r.random_range(0.0..200.0), r.random_range(0.0..200.0), side, side).unwrap();
            dets.push(Detection {
                image_id: img,
                category_id: r.random_range(1..=n_cat),
                bbox,
                score: r.random_range(0.0..1.0),
            });
        }
    }
    (GroundTruthSet::new(images, categories, anns).unwrap(), dets)
}
