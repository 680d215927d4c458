//! Tracking evaluation metrics: center-error precision (PR), overlap
//! success (SR) with its area-under-curve form, and the multi-modal
//! variants (MPR, MSR) that credit a frame when either modality gets the
//! object right.

use crate::error::{Error, Result};

/// Axis-aligned box: top-left corner plus non-negative extent, in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

impl BBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        for (name, v) in [("x", x), ("y", y), ("w", w), ("h", h)] {
            if !v.is_finite() {
                return Err(Error::Validation(format!("box field {name} is not finite")));
            }
        }
        if w < 0.0 || h < 0.0 {
            return Err(Error::Validation(format!(
                "box extent must be non-negative, got w={w}, h={h}"
            )));
        }
        Ok(Self { x, y, w, h })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }
}

/// One tracked sequence: per-frame (prediction, ground truth) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct BBoxSequence {
    frames: Vec<(BBox, BBox)>,
}

impl BBoxSequence {
    pub fn new(frames: Vec<(BBox, BBox)>) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::Validation(
                "sequence needs at least one frame".into(),
            ));
        }
        Ok(Self { frames })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frames(&self) -> &[(BBox, BBox)] {
        &self.frames
    }
}

/// Aligned visible and thermal sequences over the same frames, each with
/// its own per-modality ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalPair {
    visible: BBoxSequence,
    thermal: BBoxSequence,
}

impl ModalPair {
    pub fn new(visible: BBoxSequence, thermal: BBoxSequence) -> Result<Self> {
        if visible.len() != thermal.len() {
            return Err(Error::Validation(format!(
                "modalities disagree on frame count: visible {} vs thermal {}",
                visible.len(),
                thermal.len()
            )));
        }
        Ok(Self { visible, thermal })
    }

    pub fn len(&self) -> usize {
        self.visible.len()
    }

    pub fn is_empty(&self) -> bool {
        self.visible.is_empty()
    }

    pub fn visible(&self) -> &BBoxSequence {
        &self.visible
    }

    pub fn thermal(&self) -> &BBoxSequence {
        &self.thermal
    }
}

/// Euclidean distance between the two box centers.
pub fn center_error(p: &BBox, g: &BBox) -> f64 {
    let (px, py) = p.center();
    let (gx, gy) = g.center();
    ((px - gx).powi(2) + (py - gy).powi(2)).sqrt()
}

/// Intersection over union; a zero-area union counts as no overlap.
pub fn iou(p: &BBox, g: &BBox) -> f64 {
    let ix = (p.x + p.w).min(g.x + g.w) - p.x.max(g.x);
    let iy = (p.y + p.h).min(g.y + g.h) - p.y.max(g.y);
    let inter = ix.max(0.0) * iy.max(0.0);
    let union = p.area() + g.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Fraction of frames whose center error lies strictly below `xi_pr`.
pub fn precision_rate(seq: &BBoxSequence, xi_pr: f64) -> f64 {
    let hits = seq
        .frames()
        .iter()
        .filter(|(p, g)| center_error(p, g) < xi_pr)
        .count();
    hits as f64 / seq.len() as f64
}

/// Fraction of frames whose IoU reaches `xi_sr` (inclusive).
pub fn success_rate(seq: &BBoxSequence, xi_sr: f64) -> f64 {
    let hits = seq
        .frames()
        .iter()
        .filter(|(p, g)| iou(p, g) >= xi_sr)
        .count();
    hits as f64 / seq.len() as f64
}

/// Mean success rate over the 21-point threshold grid 0.00, 0.05, …, 1.00.
pub fn success_auc(seq: &BBoxSequence) -> f64 {
    let total: f64 = (0..=20)
        .map(|i| success_rate(seq, i as f64 / 20.0))
        .sum();
    total / 21.0
}

fn min_center_errors(pair: &ModalPair) -> Vec<f64> {
    pair.visible()
        .frames()
        .iter()
        .zip(pair.thermal().frames())
        .map(|((pv, gv), (pt, gt))| center_error(pv, gv).min(center_error(pt, gt)))
        .collect()
}

fn max_ious(pair: &ModalPair) -> Vec<f64> {
    pair.visible()
        .frames()
        .iter()
        .zip(pair.thermal().frames())
        .map(|((pv, gv), (pt, gt))| iou(pv, gv).max(iou(pt, gt)))
        .collect()
}

/// Multi-modal precision: per frame the smaller center error of the two
/// modalities enters the strict-threshold count.
pub fn mpr(pair: &ModalPair, xi_pr: f64) -> f64 {
    let errors = min_center_errors(pair);
    let hits = errors.iter().filter(|&&c| c < xi_pr).count();
    hits as f64 / pair.len() as f64
}

/// Multi-modal success: per frame the larger IoU of the two modalities
/// enters the inclusive-threshold count.
pub fn msr(pair: &ModalPair, xi_sr: f64) -> f64 {
    let overlaps = max_ious(pair);
    let hits = overlaps.iter().filter(|&&v| v >= xi_sr).count();
    hits as f64 / pair.len() as f64
}

/// Mean multi-modal success over the 21-point threshold grid.
pub fn msr_auc(pair: &ModalPair) -> f64 {
    let overlaps = max_ious(pair);
    let n = pair.len() as f64;
    let total: f64 = (0..=20)
        .map(|i| {
            let xi = i as f64 / 20.0;
            overlaps.iter().filter(|&&v| v >= xi).count() as f64 / n
        })
        .sum();
    total / 21.0
}
