//! Axis-aligned boxes in pixel units and their overlap geometry.
//!
//! Boxes are parameterized by the top-left corner plus width and height.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Axis-aligned box: top-left `(x, y)`, width `w`, height `h`, in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bbox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Bbox {
    /// Validated constructor: all fields finite, `w > 0`, `h > 0`.
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        let b = Self { x, y, w, h };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.x.is_finite() && self.y.is_finite() && self.w.is_finite() && self.h.is_finite();
        if finite && self.w > 0.0 && self.h > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidBox { x: self.x, y: self.y, w: self.w, h: self.h })
        }
    }

    #[inline]
    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    #[inline]
    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    #[inline]
    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    /// Object size as used by the size buckets: `sqrt(w * h)`.
    #[inline]
    pub fn size(&self) -> f64 {
        crate::math::sqrt(self.area())
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self { x: self.x + dx, y: self.y + dy, ..*self }
    }

    /// Scales coordinates and extents about the origin.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { x: self.x * factor, y: self.y * factor, w: self.w * factor, h: self.h * factor }
    }

    /// As `[x, y, w, h]`.
    pub fn to_array(&self) -> [f64; 4] {
        [self.x, self.y, self.w, self.h]
    }
}

/// A ground-truth box and the prediction regressed onto it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedPair {
    pub gt: Bbox,
    pub pred: Bbox,
}

impl MatchedPair {
    pub fn new(gt: Bbox, pred: Bbox) -> Result<Self> {
        gt.validate()?;
        pred.validate()?;
        Ok(Self { gt, pred })
    }

    pub fn iou(&self) -> f64 {
        iou(&self.gt, &self.pred)
    }
}

/// Length of the overlap of `[a0, a0 + aw)` and `[b0, b0 + bw)`, clamped at
/// zero. A nested interval contributes its own width exactly.
#[inline]
pub(crate) fn overlap(a0: f64, aw: f64, b0: f64, bw: f64) -> f64 {
    let (a1, b1) = (a0 + aw, b0 + bw);
    if a0 >= b0 && a1 <= b1 {
        return aw;
    }
    if b0 >= a0 && b1 <= a1 {
        return bw;
    }
    let lo = if a0 > b0 { a0 } else { b0 };
    let hi = if a1 < b1 { a1 } else { b1 };
    let d = hi - lo;
    if d <= 0.0 {
        0.0
    } else {
        d.min(aw).min(bw)
    }
}

pub fn intersection_area(a: &Bbox, b: &Bbox) -> f64 {
    overlap(a.x, a.w, b.x, b.w) * overlap(a.y, a.h, b.y, b.h)
}

pub fn iou(a: &Bbox, b: &Bbox) -> f64 {
    let inter = intersection_area(a, b);
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    let v = inter / union;
    // identical extents can round to 1 - ulp through the union sum
    if v > 1.0 {
        1.0
    } else {
        v
    }
}

/// Min-max normalized ground-truth areas of a batch.
///
/// The smallest box maps to 0 and the largest to 1. A batch whose areas are all
/// equal maps every entry to 0.5.
pub fn normalized_areas(gts: &[Bbox]) -> Result<Vec<f64>> {
    if gts.is_empty() {
        return Err(Error::InvalidBatch("no ground-truth boxes"));
    }
    let areas: Vec<f64> = gts.iter().map(Bbox::area).collect();
    let (min, max) = areas.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &a| (lo.min(a), hi.max(a)));
    let range = max - min;
    if range <= 0.0 {
        return Ok(alloc::vec![0.5; areas.len()]);
    }
    Ok(areas.into_iter().map(|a| (a - min) / range).collect())
}

/// IoU of a square of side `side` with a copy of itself translated by `shift`
/// along one axis: `(side - shift) / (side + shift)`.
///
/// The shift is taken by magnitude; shifts of at least `side` give 0.
pub fn axis_shift_iou(side: f64, shift: f64) -> f64 {
    let shift = shift.abs();
    if shift >= side {
        return 0.0;
    }
    (side - shift) / (side + shift)
}
