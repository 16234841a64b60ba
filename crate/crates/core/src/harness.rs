//! Desk-scale experiments on the scale imbalance of IoU-based regression.
//!
//! Scenes are sets of ground-truth boxes drawn from the four size buckets,
//! each paired with a jittered prediction. [`regress`] runs plain gradient
//! descent directly on the predicted boxes under one of three losses and
//! records, per step and object, the object's share of the batch loss, its
//! gradient norm and its IoU. [`loss_share_report`] compares the initial
//! shares of the smallest, middle and largest area terciles between the plain
//! `1 - IoU^2` loss and the SFL.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::distr::{Distribution, Uniform};
use rand::Rng;

use crate::boxgeom::{axis_shift_iou, iou, Bbox, MatchedPair};
use crate::error::{Error, Result};
use crate::evaluator::{size_bucket, SizeBucket, AI_TOD_BOUNDARIES};
use crate::losses::{iou_with_gradient, l1_gradient, l1_terms, sfl_weights, BoxGradient, LossConfig, DEFAULT_BETA};
use crate::math::{exp, ln};
use crate::rng::{SeedTree, DEFAULT_SEED};

/// How predictions are derived from ground truths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JitterModel {
    /// Shift along one random axis, in a random direction, by `fraction` of
    /// the box's extent on that axis. Every object starts at IoU
    /// `(1 - fraction) / (1 + fraction)` regardless of its size.
    AxisShift { fraction: f64 },
    /// Independent offsets up to `translation` times the extent on each axis
    /// and side rescaling by a factor in `[1 - scale, 1 + scale]`.
    Uniform { translation: f64, scale: f64 },
}

impl JitterModel {
    fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && (0.0..1.0).contains(&v);
        let valid = match *self {
            JitterModel::AxisShift { fraction } => ok(fraction),
            JitterModel::Uniform { translation, scale } => ok(translation) && ok(scale),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::Config(format!("jitter fractions must lie in [0, 1), got {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    /// Side of the square image, in pixels.
    pub extent: f64,
    /// Objects per bucket: very tiny, tiny, small, medium.
    pub counts: [usize; 4],
    /// `[lo, hi)` side-length range per bucket.
    pub size_ranges: [(f64, f64); 4],
    pub jitter: JitterModel,
    pub seed: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        let b = AI_TOD_BOUNDARIES;
        Self {
            extent: 512.0,
            counts: [8, 8, 8, 8],
            size_ranges: [(b[0], b[1]), (b[1], b[2]), (b[2], b[3]), (b[3], b[4])],
            jitter: JitterModel::AxisShift { fraction: 0.25 },
            seed: DEFAULT_SEED,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        if self.counts.iter().sum::<usize>() == 0 {
            return Err(Error::Config("scene needs at least one object".into()));
        }
        if !(self.extent.is_finite() && self.extent > 0.0) {
            return Err(Error::Config(format!("extent must be positive, got {}", self.extent)));
        }
        for (i, &(lo, hi)) in self.size_ranges.iter().enumerate() {
            if self.counts[i] == 0 {
                continue;
            }
            if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                return Err(Error::Config(format!("bad size range [{lo}, {hi}) for bucket {i}")));
            }
            if lo > self.extent {
                return Err(Error::Config(format!(
                    "bucket {i} objects ({lo} px) do not fit in a {} px image",
                    self.extent
                )));
            }
        }
        self.jitter.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub gts: Vec<Bbox>,
    pub preds: Vec<Bbox>,
}

impl Scene {
    pub fn pairs(&self) -> Vec<MatchedPair> {
        self.gts.iter().zip(&self.preds).map(|(&gt, &pred)| MatchedPair { gt, pred }).collect()
    }
}

const MAX_PLACEMENT_TRIES: usize = 64;

/// Draws a scene. Objects are listed bucket by bucket, smallest first.
pub fn gen_scene(cfg: &SceneConfig) -> Result<Scene> {
    cfg.validate()?;
    let tree = SeedTree::new(cfg.seed);
    let mut rng = tree.stream(0);
    let unit = Uniform::new(0.0f64, 1.0).expect("valid range");
    let mut gts = Vec::new();
    let mut preds = Vec::new();
    for (bucket, &count) in cfg.counts.iter().enumerate() {
        let (lo, hi) = cfg.size_ranges[bucket];
        let hi = hi.min(cfg.extent);
        for _ in 0..count {
            let mut placed = None;
            for _ in 0..MAX_PLACEMENT_TRIES {
                let w = lo + (hi - lo) * unit.sample(&mut rng);
                let h = lo + (hi - lo) * unit.sample(&mut rng);
                let x = (cfg.extent - w) * unit.sample(&mut rng);
                let y = (cfg.extent - h) * unit.sample(&mut rng);
                let gt = Bbox::new(x, y, w, h)?;
                let pred = jitter(&gt, cfg.jitter, &mut rng, &unit)?;
                if iou(&gt, &pred) > 0.0 {
                    placed = Some((gt, pred));
                    break;
                }
            }
            let (gt, pred) = placed.ok_or_else(|| {
                Error::Config(format!(
                    "could not place a bucket {bucket} object with positive initial IoU after {MAX_PLACEMENT_TRIES} tries"
                ))
            })?;
            gts.push(gt);
            preds.push(pred);
        }
    }
    Ok(Scene { gts, preds })
}

fn jitter<R: Rng>(gt: &Bbox, model: JitterModel, rng: &mut R, unit: &Uniform<f64>) -> Result<Bbox> {
    match model {
        JitterModel::AxisShift { fraction } => {
            let horizontal = rng.random_bool(0.5);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            Ok(if horizontal {
                gt.translated(sign * fraction * gt.w, 0.0)
            } else {
                gt.translated(0.0, sign * fraction * gt.h)
            })
        }
        JitterModel::Uniform { translation, scale } => {
            let mut sym = |k: f64| k * (2.0 * unit.sample(rng) - 1.0);
            let dx = sym(translation) * gt.w;
            let dy = sym(translation) * gt.h;
            let sw = 1.0 + sym(scale);
            let sh = 1.0 + sym(scale);
            Bbox::new(gt.x + dx, gt.y + dy, gt.w * sw, gt.h * sh)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossVariant {
    /// `sum (1 - IoU^2)`
    Plain,
    /// `sum beta ln(2 - s) (1 - IoU^2)`
    Sfl,
    /// `l1 + alpha * sfl`
    L1Sfl,
}

impl LossVariant {
    pub fn name(self) -> &'static str {
        match self {
            LossVariant::Plain => "plain",
            LossVariant::Sfl => "sfl",
            LossVariant::L1Sfl => "l1+sfl",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectState {
    /// Fraction of the batch loss owed to this object.
    pub share: f64,
    /// Norm of the loss gradient with respect to the predicted `(x, y, w, h)`.
    pub grad_norm: f64,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub total_loss: f64,
    pub objects: Vec<ObjectState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTrace {
    pub variant: LossVariant,
    pub gts: Vec<Bbox>,
    pub initial_preds: Vec<Bbox>,
    pub final_preds: Vec<Bbox>,
    /// One record per evaluated step, taken before that step's update.
    pub steps: Vec<StepRecord>,
    /// Mean final IoU per size bucket (very tiny, tiny, small, medium).
    pub final_bucket_iou: [Option<f64>; 4],
}

impl RegressionTrace {
    pub fn initial(&self) -> &StepRecord {
        &self.steps[0]
    }

    pub fn final_mean_iou(&self) -> f64 {
        let sum: f64 = self.gts.iter().zip(&self.final_preds).map(|(g, p)| iou(g, p)).sum();
        sum / self.gts.len() as f64
    }
}

/// Per-object loss terms and gradients for the current predictions.
fn evaluate_terms(
    pairs: &[MatchedPair],
    variant: LossVariant,
    cfg: &LossConfig,
    weights: &[f64],
) -> Result<(Vec<f64>, Vec<BoxGradient>, Vec<f64>)> {
    let l1 = match variant {
        LossVariant::L1Sfl => Some(l1_terms(pairs)?),
        _ => None,
    };
    let mut terms = Vec::with_capacity(pairs.len());
    let mut grads = Vec::with_capacity(pairs.len());
    let mut ious = Vec::with_capacity(pairs.len());
    for (i, p) in pairs.iter().enumerate() {
        let (v, g) = iou_with_gradient(&p.gt, &p.pred);
        let base = 1.0 - v * v;
        let base_grad = g.scale(-2.0 * v);
        let (term, grad) = match variant {
            LossVariant::Plain => (base, base_grad),
            LossVariant::Sfl => (weights[i] * base, base_grad.scale(weights[i])),
            LossVariant::L1Sfl => {
                let l1g = l1_gradient(pairs, i)?;
                let sfl_g = base_grad.scale(weights[i] * cfg.alpha);
                (l1.as_ref().map_or(0.0, |t| t[i]) + cfg.alpha * weights[i] * base, l1g.add(&sfl_g))
            }
        };
        terms.push(term);
        grads.push(grad);
        ious.push(v);
    }
    Ok((terms, grads, ious))
}

/// Gradient descent on the predicted boxes.
///
/// Positions are updated directly; widths and heights are updated in log
/// space so they stay positive. Stops early once every gradient vanishes.
/// When the batch loss is exactly zero, shares are reported as uniform.
pub fn regress(
    gts: &[Bbox],
    preds: &[Bbox],
    variant: LossVariant,
    cfg: &LossConfig,
    steps: usize,
    learning_rate: f64,
) -> Result<RegressionTrace> {
    cfg.validate()?;
    if gts.is_empty() || gts.len() != preds.len() {
        return Err(Error::InvalidBatch("ground truths and predictions must be non-empty and equally long"));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be >= 1".into()));
    }
    if !(learning_rate.is_finite() && learning_rate > 0.0) {
        return Err(Error::InvalidArgument(format!("learning rate must be > 0, got {learning_rate}")));
    }
    for b in gts.iter().chain(preds) {
        b.validate()?;
    }
    let n = gts.len();
    // (x, y, ln w, ln h)
    let mut params: Vec<[f64; 4]> = preds.iter().map(|p| [p.x, p.y, ln(p.w), ln(p.h)]).collect();
    let mut pairs: Vec<MatchedPair> = gts.iter().zip(preds).map(|(&gt, &pred)| MatchedPair { gt, pred }).collect();
    let weights = sfl_weights(&pairs, cfg.beta)?;
    let mut records = Vec::with_capacity(steps);

    for step in 0..steps {
        let (terms, grads, ious) = evaluate_terms(&pairs, variant, cfg, &weights)?;
        let total: f64 = terms.iter().sum();
        if !total.is_finite() || grads.iter().any(|g| !g.is_finite()) {
            return Err(Error::Diverged { step });
        }
        let objects = (0..n)
            .map(|i| ObjectState {
                share: if total > 0.0 { terms[i] / total } else { 1.0 / n as f64 },
                grad_norm: grads[i].norm(),
                iou: ious[i],
            })
            .collect::<Vec<_>>();
        let converged = objects.iter().all(|o| o.grad_norm == 0.0);
        records.push(StepRecord { step, total_loss: total, objects });
        if converged {
            break;
        }
        for i in 0..n {
            let p = &mut params[i];
            let g = &grads[i];
            let (w, h) = (pairs[i].pred.w, pairs[i].pred.h);
            p[0] -= learning_rate * g.d_x;
            p[1] -= learning_rate * g.d_y;
            p[2] -= learning_rate * g.d_w * w;
            p[3] -= learning_rate * g.d_h * h;
            let pred = Bbox { x: p[0], y: p[1], w: exp(p[2]), h: exp(p[3]) };
            if pred.validate().is_err() {
                return Err(Error::Diverged { step });
            }
            pairs[i].pred = pred;
        }
    }

    let final_preds: Vec<Bbox> = pairs.iter().map(|p| p.pred).collect();
    let mut sums = [(0.0, 0usize); 4];
    for p in &pairs {
        if let Some(b) = size_bucket(&p.gt, &AI_TOD_BOUNDARIES) {
            sums[b.index()].0 += p.iou();
            sums[b.index()].1 += 1;
        }
    }
    let final_bucket_iou = sums.map(|(s, c)| (c > 0).then(|| s / c as f64));
    Ok(RegressionTrace {
        variant,
        gts: gts.to_vec(),
        initial_preds: preds.to_vec(),
        final_preds,
        steps: records,
        final_bucket_iou,
    })
}

/// One area tercile of a [`ShareReport`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TercileRow {
    /// 0 = smallest areas.
    pub tercile: usize,
    pub count: usize,
    pub min_area: f64,
    pub max_area: f64,
    pub plain_share: f64,
    pub sfl_share: f64,
    pub plain_grad_norm: f64,
    pub sfl_grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShareReport {
    /// Non-empty terciles, smallest first.
    pub rows: Vec<TercileRow>,
}

impl ShareReport {
    /// Whether the smallest tercile's initial share is strictly larger under
    /// the SFL than under the plain loss.
    pub fn rebalanced(&self) -> bool {
        self.rows.first().is_some_and(|r| r.sfl_share > r.plain_share)
    }
}

/// Index groups of the smallest, middle and largest thirds by area. Sizes
/// differ by at most one, with the extra objects going to the smaller
/// terciles.
pub fn area_terciles(gts: &[Bbox]) -> [Vec<usize>; 3] {
    let mut order: Vec<usize> = (0..gts.len()).collect();
    order.sort_by(|&a, &b| gts[a].area().partial_cmp(&gts[b].area()).unwrap_or(core::cmp::Ordering::Equal));
    let n = order.len();
    let (base, extra) = (n / 3, n % 3);
    let mut out: [Vec<usize>; 3] = Default::default();
    let mut start = 0;
    for (k, group) in out.iter_mut().enumerate() {
        let len = base + usize::from(k < extra);
        *group = order[start..start + len].to_vec();
        start += len;
    }
    out
}

/// Initial loss shares and gradient norms per area tercile under the plain
/// loss and the SFL. Both traces must start from the same scene.
pub fn loss_share_report(plain: &RegressionTrace, sfl: &RegressionTrace) -> Result<ShareReport> {
    if plain.gts != sfl.gts || plain.initial_preds != sfl.initial_preds {
        return Err(Error::InvalidArgument("traces were produced from different scenes".into()));
    }
    let (p0, s0) = (plain.initial(), sfl.initial());
    let rows = area_terciles(&plain.gts)
        .iter()
        .enumerate()
        .filter(|(_, g)| !g.is_empty())
        .map(|(k, group)| {
            let sum =
                |rec: &StepRecord, f: fn(&ObjectState) -> f64| group.iter().map(|&i| f(&rec.objects[i])).sum::<f64>();
            let c = group.len() as f64;
            let areas = group.iter().map(|&i| plain.gts[i].area());
            TercileRow {
                tercile: k,
                count: group.len(),
                min_area: areas.clone().fold(f64::INFINITY, f64::min),
                max_area: areas.fold(f64::NEG_INFINITY, f64::max),
                plain_share: sum(p0, |o| o.share),
                sfl_share: sum(s0, |o| o.share),
                plain_grad_norm: sum(p0, |o| o.grad_norm) / c,
                sfl_grad_norm: sum(s0, |o| o.grad_norm) / c,
            }
        })
        .collect();
    Ok(ShareReport { rows })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub side: f64,
    pub shift: f64,
    pub iou: f64,
    /// `1 - IoU^2`
    pub loss: f64,
}

/// IoU and plain loss of square boxes shifted along one axis, for every
/// `(side, shift)` combination. Shifts of at least the side give IoU 0.
pub fn iou_decay_curve(sides: &[f64], shifts: &[f64]) -> Vec<CurvePoint> {
    let mut out = Vec::with_capacity(sides.len() * shifts.len());
    for &side in sides {
        for &shift in shifts {
            let v = axis_shift_iou(side, shift);
            out.push(CurvePoint { side, shift, iou: v, loss: 1.0 - v * v });
        }
    }
    out
}

/// `[1, 1/ln 2, 2/ln 2]`.
pub fn default_betas() -> Vec<f64> {
    vec![1.0, 1.0 / core::f64::consts::LN_2, DEFAULT_BETA]
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub beta: f64,
    pub final_bucket_iou: [Option<f64>; 4],
    pub final_mean_iou: f64,
}

/// SFL regression on one scene for each `beta`.
pub fn beta_sweep(scene: &SceneConfig, betas: &[f64], steps: usize, learning_rate: f64) -> Result<Vec<SweepRow>> {
    if betas.is_empty() {
        return Err(Error::InvalidArgument("beta list is empty".into()));
    }
    let s = gen_scene(scene)?;
    betas
        .iter()
        .map(|&beta| {
            let cfg = LossConfig::new(1.0, beta)?;
            let t = regress(&s.gts, &s.preds, LossVariant::Sfl, &cfg, steps, learning_rate)?;
            Ok(SweepRow { beta, final_bucket_iou: t.final_bucket_iou, final_mean_iou: t.final_mean_iou() })
        })
        .collect()
}

/// Bucket of each ground truth in a scene.
pub fn scene_buckets(gts: &[Bbox]) -> Vec<Option<SizeBucket>> {
    gts.iter().map(|g| size_bucket(g, &AI_TOD_BOUNDARIES)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(x: f64, y: f64, w: f64, h: f64) -> Bbox {
        Bbox::new(x, y, w, h).unwrap()
    }

    #[test]
    fn scenes_are_reproducible() {
        let cfg = SceneConfig::default();
        assert_eq!(gen_scene(&cfg).unwrap(), gen_scene(&cfg).unwrap());
        let other = SceneConfig { seed: cfg.seed + 1, ..cfg.clone() };
        assert_ne!(gen_scene(&cfg).unwrap(), gen_scene(&other).unwrap());
    }

    #[test]
    fn scene_objects_sit_in_their_buckets() {
        let s = gen_scene(&SceneConfig::default()).unwrap();
        assert_eq!(s.gts.len(), 32);
        let buckets = scene_buckets(&s.gts);
        for (i, bk) in buckets.iter().enumerate() {
            assert_eq!(bk.unwrap().index(), i / 8);
            let g = &s.gts[i];
            assert!(g.x >= 0.0 && g.right() <= 512.0 && g.y >= 0.0 && g.bottom() <= 512.0);
        }
    }

    #[test]
    fn zero_jitter_is_identity() {
        let cfg = SceneConfig { jitter: JitterModel::AxisShift { fraction: 0.0 }, ..SceneConfig::default() };
        let s = gen_scene(&cfg).unwrap();
        assert_eq!(s.gts, s.preds);
        let t = regress(&s.gts, &s.preds, LossVariant::L1Sfl, &LossConfig::default(), 200, 0.05).unwrap();
        assert_eq!(t.steps.len(), 1);
        assert!(t.steps[0].objects.iter().all(|o| o.grad_norm == 0.0 && o.iou == 1.0));
        assert_eq!(t.final_preds, s.gts);
    }

    #[test]
    fn axis_shift_gives_closed_form_iou() {
        let cfg = SceneConfig {
            counts: [10, 0, 0, 0],
            jitter: JitterModel::AxisShift { fraction: 0.5 },
            ..SceneConfig::default()
        };
        let s = gen_scene(&cfg).unwrap();
        for (g, p) in s.gts.iter().zip(&s.preds) {
            assert!((iou(g, p) - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_jitter_keeps_overlap() {
        let cfg =
            SceneConfig { jitter: JitterModel::Uniform { translation: 0.4, scale: 0.3 }, ..SceneConfig::default() };
        let s = gen_scene(&cfg).unwrap();
        assert!(s.gts.iter().zip(&s.preds).all(|(g, p)| iou(g, p) > 0.0));
    }

    #[test]
    fn infeasible_scene_is_config_error() {
        let bad = SceneConfig { jitter: JitterModel::AxisShift { fraction: 1.0 }, ..SceneConfig::default() };
        assert!(matches!(gen_scene(&bad), Err(Error::Config(_))));
        let empty = SceneConfig { counts: [0; 4], ..SceneConfig::default() };
        assert!(matches!(gen_scene(&empty), Err(Error::Config(_))));
        let huge = SceneConfig { extent: 20.0, ..SceneConfig::default() };
        assert!(matches!(gen_scene(&huge), Err(Error::Config(_))));
    }

    #[test]
    fn single_object_share_is_one() {
        let gt = [b(10.0, 10.0, 6.0, 6.0)];
        let pred = [b(11.5, 10.0, 6.0, 6.0)];
        for v in [LossVariant::Plain, LossVariant::Sfl, LossVariant::L1Sfl] {
            let t = regress(&gt, &pred, v, &LossConfig::default(), 20, 0.05).unwrap();
            assert!(t.steps.iter().all(|s| s.objects[0].share == 1.0));
        }
    }

    #[test]
    fn shares_sum_to_one_and_iou_improves() {
        let s = gen_scene(&SceneConfig::default()).unwrap();
        for v in [LossVariant::Plain, LossVariant::Sfl, LossVariant::L1Sfl] {
            let t = regress(&s.gts, &s.preds, v, &LossConfig::default(), 50, 0.05).unwrap();
            for rec in &t.steps {
                let total: f64 = rec.objects.iter().map(|o| o.share).sum();
                assert!((total - 1.0).abs() < 1e-9);
            }
            assert!(t.steps.last().unwrap().total_loss < t.steps[0].total_loss, "{v:?}");
        }
    }

    #[test]
    fn two_object_share_example() {
        // areas 4 and 104, both IoU 0.5
        let gts = [b(0.0, 0.0, 2.0, 2.0), b(50.0, 50.0, 8.0, 13.0)];
        let preds = [gts[0].translated(2.0 / 3.0, 0.0), gts[1].translated(8.0 / 3.0, 0.0)];
        let cfg = LossConfig::default();
        let sfl = regress(&gts, &preds, LossVariant::Sfl, &cfg, 1, 0.05).unwrap();
        let plain = regress(&gts, &preds, LossVariant::Plain, &cfg, 1, 0.05).unwrap();
        assert_eq!(sfl.initial().objects[0].share, 1.0);
        assert!((plain.initial().objects[0].share - 0.5).abs() < 1e-12);
        let rep = loss_share_report(&plain, &sfl).unwrap();
        assert_eq!(rep.rows.len(), 2);
        assert!(rep.rebalanced());
    }

    #[test]
    fn equal_areas_give_identical_shares() {
        let gts: Vec<Bbox> = (0..6).map(|i| b(20.0 * i as f64, 0.0, 5.0, 5.0)).collect();
        let preds: Vec<Bbox> = gts.iter().enumerate().map(|(i, g)| g.translated(0.2 * (i + 1) as f64, 0.0)).collect();
        let cfg = LossConfig::default();
        let plain = regress(&gts, &preds, LossVariant::Plain, &cfg, 1, 0.05).unwrap();
        let sfl = regress(&gts, &preds, LossVariant::Sfl, &cfg, 1, 0.05).unwrap();
        let rep = loss_share_report(&plain, &sfl).unwrap();
        for r in &rep.rows {
            assert!((r.plain_share - r.sfl_share).abs() < 1e-12);
        }
        assert!(!rep.rebalanced());
    }

    #[test]
    fn mismatched_scenes_rejected() {
        let cfg = LossConfig::default();
        let a = regress(&[b(0.0, 0.0, 4.0, 4.0)], &[b(1.0, 0.0, 4.0, 4.0)], LossVariant::Plain, &cfg, 1, 0.1).unwrap();
        let c = regress(&[b(0.0, 0.0, 5.0, 4.0)], &[b(1.0, 0.0, 4.0, 4.0)], LossVariant::Sfl, &cfg, 1, 0.1).unwrap();
        assert!(loss_share_report(&a, &c).is_err());
    }

    #[test]
    fn terciles_split_evenly() {
        let gts: Vec<Bbox> = [9.0, 1.0, 4.0, 16.0, 25.0, 2.0, 3.0].iter().map(|&a| b(0.0, 0.0, a, 1.0)).collect();
        let t = area_terciles(&gts);
        assert_eq!(t[0], [1, 5, 6]);
        assert_eq!(t[1], [2, 0]);
        assert_eq!(t[2], [3, 4]);
        let two = area_terciles(&gts[..2]);
        assert_eq!((two[0].len(), two[1].len(), two[2].len()), (1, 1, 0));
    }

    #[test]
    fn divergence_is_reported() {
        let gts = [b(0.0, 0.0, 4.0, 4.0)];
        let preds = [b(1.0, 0.0, 4.0, 4.0)];
        let cfg = LossConfig::new(1.0, 1.0).unwrap();
        let err = regress(&gts, &preds, LossVariant::Plain, &cfg, 10, 1e308).unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }));
    }

    #[test]
    fn bad_regress_arguments() {
        let g = [b(0.0, 0.0, 4.0, 4.0)];
        let cfg = LossConfig::default();
        assert!(regress(&g, &g, LossVariant::Plain, &cfg, 0, 0.1).is_err());
        assert!(regress(&g, &g, LossVariant::Plain, &cfg, 1, 0.0).is_err());
        assert!(regress(&g, &[], LossVariant::Plain, &cfg, 1, 0.1).is_err());
    }

    #[test]
    fn decay_curve_examples() {
        let c = iou_decay_curve(&[8.0, 64.0], &[0.0, 4.0]);
        assert_eq!(c.len(), 4);
        assert_eq!((c[0].iou, c[0].loss), (1.0, 0.0));
        assert!((c[1].iou - 1.0 / 3.0).abs() < 1e-12 && (c[1].loss - 8.0 / 9.0).abs() < 1e-12);
        assert!((c[3].iou - 60.0 / 68.0).abs() < 1e-12);
        assert!((c[3].loss - 0.2214532871972318).abs() < 1e-12);
        let sq = b(0.0, 0.0, 64.0, 64.0);
        assert!((c[3].iou - iou(&sq, &sq.translated(4.0, 0.0))).abs() < 1e-12);
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn sweep_defaults() {
        let betas = default_betas();
        assert_eq!(betas.len(), 3);
        assert_eq!(betas[0], 1.0);
        assert!((betas[1] - 1.4426950408889634).abs() < 1e-12);
        assert!((betas[2] - 2.8853900817779268).abs() < 1e-12);
        let scene = SceneConfig { counts: [3, 3, 3, 3], ..SceneConfig::default() };
        let a = beta_sweep(&scene, &betas, 10, 0.05).unwrap();
        assert_eq!(a, beta_sweep(&scene, &betas, 10, 0.05).unwrap());
        assert_eq!(a.len(), 3);
        assert!(beta_sweep(&scene, &[], 10, 0.05).is_err());
    }
}
