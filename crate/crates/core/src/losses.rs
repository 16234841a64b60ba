//! Multi-task detection loss: cross-entropy for class and objectness, and a
//! position loss mixing L1 with the scale-feedback loss (SFL).
//!
//! The SFL of a batch of matched pairs is
//!
//! ```text
//! sfl = sum_i  beta * ln(2 - s_i) * (1 - IoU_i^2)
//! ```
//!
//! where `s_i` is the min-max normalized ground-truth area of pair `i`. The
//! weight `beta * ln(2 - s)` falls from `beta * ln 2` for the smallest object
//! of the batch to 0 for the largest, so small objects carry a larger share of
//! the localization signal.
//!
//! Gradients are taken with respect to the predicted box `(x, y, w, h)` only;
//! `s_i` depends on ground truths and is constant under differentiation.

use alloc::vec::Vec;

use crate::boxgeom::{normalized_areas, Bbox, MatchedPair};
use crate::error::{Error, Result};
use crate::math;

/// `2 / ln 2`, the default SFL scale. With it the smallest object of a batch
/// gets weight exactly 2.
pub const DEFAULT_BETA: f64 = 2.0 / core::f64::consts::LN_2;

/// Mixing factors of the position loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    /// Weight of the SFL term relative to L1.
    pub alpha: f64,
    /// Scale of the `ln(2 - s)` adjustment factor.
    pub beta: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self { alpha: 1.0, beta: DEFAULT_BETA }
    }
}

impl LossConfig {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let cfg = Self { alpha, beta };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::Config(alloc::format!("alpha must be finite and >= 0, got {}", self.alpha)));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::Config(alloc::format!("beta must be finite and > 0, got {}", self.beta)));
        }
        Ok(())
    }
}

/// Position loss and its two addends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionLoss {
    pub l1: f64,
    pub sfl: f64,
    pub alpha: f64,
    pub pos: f64,
}

impl PositionLoss {
    pub fn new(l1: f64, sfl: f64, alpha: f64) -> Self {
        Self { l1, sfl, alpha, pos: l1 + alpha * sfl }
    }
}

/// Every term of the total loss.
///
/// `pos = l1 + alpha * sfl` and `total = cls + obj + pos`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub cls: f64,
    pub obj: f64,
    pub l1: f64,
    pub sfl: f64,
    pub alpha: f64,
    pub pos: f64,
    pub total: f64,
}

/// Partial derivatives of a scalar loss with respect to one predicted box.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BoxGradient {
    pub d_x: f64,
    pub d_y: f64,
    pub d_w: f64,
    pub d_h: f64,
}

impl BoxGradient {
    pub const ZERO: Self = Self { d_x: 0.0, d_y: 0.0, d_w: 0.0, d_h: 0.0 };

    pub fn from_array(a: [f64; 4]) -> Self {
        Self { d_x: a[0], d_y: a[1], d_w: a[2], d_h: a[3] }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.d_x, self.d_y, self.d_w, self.d_h]
    }

    pub fn scale(&self, k: f64) -> Self {
        Self { d_x: self.d_x * k, d_y: self.d_y * k, d_w: self.d_w * k, d_h: self.d_h * k }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { d_x: self.d_x + o.d_x, d_y: self.d_y + o.d_y, d_w: self.d_w + o.d_w, d_h: self.d_h + o.d_h }
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(self.d_x * self.d_x + self.d_y * self.d_y + self.d_w * self.d_w + self.d_h * self.d_h)
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

fn check_batch(pairs: &[MatchedPair]) -> Result<()> {
    if pairs.is_empty() {
        return Err(Error::InvalidBatch("no matched pairs"));
    }
    Ok(())
}

/// Binary cross-entropy of a logit against a target in `[0, 1]`.
///
/// Uses `max(z, 0) - z t + ln(1 + e^{-|z|})`, which equals
/// `-[t ln sigma(z) + (1 - t) ln(1 - sigma(z))]` without overflowing.
pub fn bce(logit: f64, target: f64) -> f64 {
    let z = logit;
    let v = z.max(0.0) - z * target + math::ln_1p(math::exp(-z.abs()));
    if v < 0.0 {
        0.0
    } else {
        v
    }
}

/// Mean cross-entropy over `(logit, target)` entries.
pub fn bce_mean(entries: &[(f64, f64)]) -> Result<f64> {
    if entries.is_empty() {
        return Err(Error::InvalidBatch("no cross-entropy entries"));
    }
    let mut sum = 0.0;
    for &(z, t) in entries {
        if !(0.0..=1.0).contains(&t) || !z.is_finite() {
            return Err(Error::InvalidArgument(alloc::format!("bad cross-entropy entry (logit {z}, target {t})")));
        }
        sum += bce(z, t);
    }
    Ok(sum / entries.len() as f64)
}

fn abs_diff(p: &MatchedPair) -> [f64; 4] {
    let (g, q) = (p.gt.to_array(), p.pred.to_array());
    [(q[0] - g[0]).abs(), (q[1] - g[1]).abs(), (q[2] - g[2]).abs(), (q[3] - g[3]).abs()]
}

/// L1 loss: mean absolute error of each of x, y, w, h over the batch, summed
/// over the four channels.
pub fn l1_loss(pairs: &[MatchedPair]) -> Result<f64> {
    Ok(l1_terms(pairs)?.iter().sum())
}

/// Per-pair contributions to [`l1_loss`]; they sum to the loss.
pub fn l1_terms(pairs: &[MatchedPair]) -> Result<Vec<f64>> {
    check_batch(pairs)?;
    let n = pairs.len() as f64;
    Ok(pairs.iter().map(|p| abs_diff(p).iter().sum::<f64>() / n).collect())
}

/// Scale-feedback weight `beta * ln(2 - s)` for a normalized area `s`.
#[inline]
pub fn sfl_weight(s: f64, beta: f64) -> f64 {
    beta * math::ln(2.0 - s)
}

/// Per-pair SFL weights `beta * ln(2 - s_i)`.
pub fn sfl_weights(pairs: &[MatchedPair], beta: f64) -> Result<Vec<f64>> {
    check_batch(pairs)?;
    check_beta(beta)?;
    let gts: Vec<Bbox> = pairs.iter().map(|p| p.gt).collect();
    Ok(normalized_areas(&gts)?.into_iter().map(|s| sfl_weight(s, beta)).collect())
}

/// Per-pair SFL summands `beta * ln(2 - s_i) * (1 - IoU_i^2)`.
pub fn sfl_terms(pairs: &[MatchedPair], beta: f64) -> Result<Vec<f64>> {
    let weights = sfl_weights(pairs, beta)?;
    Ok(pairs
        .iter()
        .zip(weights)
        .map(|(p, w)| {
            let iou = p.iou();
            w * (1.0 - iou * iou)
        })
        .collect())
}

pub fn sfl(pairs: &[MatchedPair], beta: f64) -> Result<f64> {
    Ok(sfl_terms(pairs, beta)?.iter().sum())
}

/// Unweighted IoU loss `sum_i (1 - IoU_i^2)`.
pub fn plain_iou_loss(pairs: &[MatchedPair]) -> Result<f64> {
    Ok(plain_iou_terms(pairs)?.iter().sum())
}

pub fn plain_iou_terms(pairs: &[MatchedPair]) -> Result<Vec<f64>> {
    check_batch(pairs)?;
    Ok(pairs
        .iter()
        .map(|p| {
            let iou = p.iou();
            1.0 - iou * iou
        })
        .collect())
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(alloc::format!("beta must be finite and > 0, got {beta}")))
    }
}

/// `l1 + alpha * sfl`.
pub fn position_loss(pairs: &[MatchedPair], cfg: &LossConfig) -> Result<PositionLoss> {
    cfg.validate()?;
    let l1 = l1_loss(pairs)?;
    let s = sfl(pairs, cfg.beta)?;
    Ok(PositionLoss::new(l1, s, cfg.alpha))
}

/// Sums class, objectness and position losses.
pub fn total_loss(cls: f64, obj: f64, pos: PositionLoss) -> Result<LossBreakdown> {
    for (name, v) in [("cls", cls), ("obj", obj), ("pos", pos.pos), ("l1", pos.l1), ("sfl", pos.sfl)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::InvalidArgument(alloc::format!("{name} loss must be finite and >= 0, got {v}")));
        }
    }
    Ok(LossBreakdown { cls, obj, l1: pos.l1, sfl: pos.sfl, alpha: pos.alpha, pos: pos.pos, total: cls + obj + pos.pos })
}

/// d/dlo and d/dhi of `min(hi, g_hi) - max(lo, g_lo)`. Ties take the midpoint
/// of the one-sided derivatives.
#[inline]
fn overlap_partials(lo: f64, hi: f64, g_lo: f64, g_hi: f64) -> (f64, f64) {
    let d_hi = if hi < g_hi {
        1.0
    } else if hi > g_hi {
        0.0
    } else {
        0.5
    };
    let d_lo = if lo > g_lo {
        -1.0
    } else if lo < g_lo {
        0.0
    } else {
        -0.5
    };
    (d_lo, d_hi)
}

/// IoU of `pred` against `gt` and its gradient with respect to `pred`.
///
/// Where the boxes do not overlap the clamped IoU is locally constant and the
/// gradient is zero, including on the touching boundary.
pub fn iou_with_gradient(gt: &Bbox, pred: &Bbox) -> (f64, BoxGradient) {
    let ix = crate::boxgeom::overlap(pred.x, pred.w, gt.x, gt.w);
    let iy = crate::boxgeom::overlap(pred.y, pred.h, gt.y, gt.h);
    if ix <= 0.0 || iy <= 0.0 {
        return (0.0, BoxGradient::ZERO);
    }
    let (dx_lo, dx_hi) = overlap_partials(pred.x, pred.right(), gt.x, gt.right());
    let (dy_lo, dy_hi) = overlap_partials(pred.y, pred.bottom(), gt.y, gt.bottom());

    let inter = ix * iy;
    let union = pred.area() + gt.area() - inter;
    let iou = inter / union;

    // d(inter) for x, y, w, h
    let di = [(dx_lo + dx_hi) * iy, (dy_lo + dy_hi) * ix, dx_hi * iy, dy_hi * ix];
    // d(pred area)
    let da = [0.0, 0.0, pred.h, pred.w];
    let mut g = [0.0; 4];
    for k in 0..4 {
        let du = da[k] - di[k];
        g[k] = (di[k] * union - inter * du) / (union * union);
    }
    (iou, BoxGradient::from_array(g))
}

/// Gradient of `1 - IoU^2` for one pair.
pub fn plain_iou_gradient(pair: &MatchedPair) -> BoxGradient {
    let (iou, g) = iou_with_gradient(&pair.gt, &pair.pred);
    g.scale(-2.0 * iou)
}

fn check_index(pairs: &[MatchedPair], index: usize) -> Result<()> {
    check_batch(pairs)?;
    if index >= pairs.len() {
        return Err(Error::IndexOutOfRange { index, len: pairs.len() });
    }
    Ok(())
}

/// Gradient of the batch SFL with respect to the predicted box of pair `index`.
pub fn sfl_gradient(pairs: &[MatchedPair], beta: f64, index: usize) -> Result<BoxGradient> {
    check_index(pairs, index)?;
    let weights = sfl_weights(pairs, beta)?;
    Ok(plain_iou_gradient(&pairs[index]).scale(weights[index]))
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Subgradient of [`l1_loss`] for pair `index` (0 where pred equals gt).
pub fn l1_gradient(pairs: &[MatchedPair], index: usize) -> Result<BoxGradient> {
    check_index(pairs, index)?;
    let n = pairs.len() as f64;
    let (g, q) = (pairs[index].gt.to_array(), pairs[index].pred.to_array());
    Ok(BoxGradient::from_array([
        sign(q[0] - g[0]) / n,
        sign(q[1] - g[1]) / n,
        sign(q[2] - g[2]) / n,
        sign(q[3] - g[3]) / n,
    ]))
}

/// Gradient of `l1 + alpha * sfl` for pair `index`.
pub fn position_gradient(pairs: &[MatchedPair], cfg: &LossConfig, index: usize) -> Result<BoxGradient> {
    cfg.validate()?;
    let l1 = l1_gradient(pairs, index)?;
    let s = sfl_gradient(pairs, cfg.beta, index)?;
    Ok(l1.add(&s.scale(cfg.alpha)))
}

/// Central-difference gradient of `f` at `point`.
pub fn central_difference<F>(f: F, point: &[f64], step: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut probe = point.to_vec();
    (0..point.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + step;
            let up = f(&probe);
            probe[i] = orig - step;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * step)
        })
        .collect()
}

/// Worst elementwise relative error between `analytic` and the central
/// difference of `f`, with denominator `max(|analytic|, |numeric|, 1e-8)`.
pub fn finite_diff_check<F>(f: F, point: &[f64], analytic: &[f64], step: f64) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    assert!(step > 0.0, "finite-difference step must be positive");
    assert_eq!(point.len(), analytic.len(), "gradient length must match point");
    central_difference(f, point, step)
        .iter()
        .zip(analytic)
        .map(|(n, a)| (a - n).abs() / a.abs().max(n.abs()).max(1e-8))
        .fold(0.0, f64::max)
}
