//! Evaluation metrics for segmentation and temporal grounding.
//!
//! - Region similarity `J` is mask IoU; two empty masks agree vacuously and
//!   score 1, an empty mask against a non-empty one scores 0.
//! - Contour accuracy `F` is the boundary F-measure: boundary pixels are mask
//!   pixels with at least one 4-neighbor outside the mask (the image border
//!   counts as outside), precision/recall are the fractions of boundary
//!   pixels within a Euclidean pixel-distance tolerance of the other
//!   boundary, and the default tolerance is `ceil(0.008 * image diagonal)`.
//! - `tIoU` is interval IoU; `R@k` is the fraction of tIoU values strictly
//!   exceeding `k`.
//! - The joint temporal-retrieval protocol gates mask metrics on tIoU: below
//!   the threshold a sample scores (0, 0), above it J/F are averaged over
//!   frames inside the intersection of the two intervals.

use crate::codec::TimeInterval;
use crate::error::{Error, Result};
use crate::mask::BinaryMask;
use crate::scalar::{real, real_of_usize, Real};

/// A predicted interval with its ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalPair<F> {
    pub predicted: TimeInterval<F>,
    pub truth: TimeInterval<F>,
}

impl<F: Real> IntervalPair<F> {
    pub fn tiou(&self) -> F {
        tiou(&self.predicted, &self.truth)
    }
}

fn check_same_shape(pred: &BinaryMask, truth: &BinaryMask) -> Result<()> {
    if !pred.same_shape(truth) {
        return Err(Error::Shape(format!(
            "mask {}x{} vs mask {}x{}",
            pred.width(),
            pred.height(),
            truth.width(),
            truth.height()
        )));
    }
    Ok(())
}

/// Region similarity: intersection over union of two masks.
pub fn region_j<F: Real>(pred: &BinaryMask, truth: &BinaryMask) -> Result<F> {
    check_same_shape(pred, truth)?;
    let mut inter = 0usize;
    let mut union = 0usize;
    for (p, t) in pred.bits().iter().zip(truth.bits()) {
        if *p && *t {
            inter += 1;
        }
        if *p || *t {
            union += 1;
        }
    }
    if union == 0 {
        return Ok(F::one());
    }
    Ok(real_of_usize::<F>(inter) / real_of_usize(union))
}

/// Boundary pixels of a mask: set pixels with at least one 4-neighbor outside
/// the mask, where the image border counts as outside.
pub fn boundary_pixels(mask: &BinaryMask) -> Vec<(u32, u32)> {
    let (w, h) = (mask.width(), mask.height());
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) {
                continue;
            }
            let outside = (x == 0 || !mask.get(x - 1, y))
                || (x + 1 == w || !mask.get(x + 1, y))
                || (y == 0 || !mask.get(x, y - 1))
                || (y + 1 == h || !mask.get(x, y + 1));
            if outside {
                out.push((x, y));
            }
        }
    }
    out
}

/// Default contour tolerance: `ceil(0.008 * image diagonal)` pixels.
pub fn default_contour_tolerance<F: Real>(width: u32, height: u32) -> F {
    let diag = (f64::from(width).powi(2) + f64::from(height).powi(2)).sqrt();
    real((0.008 * diag).ceil())
}

/// Contour accuracy: boundary F-measure at the given pixel tolerance.
pub fn contour_f<F: Real>(pred: &BinaryMask, truth: &BinaryMask, tol_radius: F) -> Result<F> {
    check_same_shape(pred, truth)?;
    if !(tol_radius >= F::zero()) {
        return Err(Error::Domain(format!(
            "contour tolerance must be non-negative, got {tol_radius}"
        )));
    }
    let pred_b = boundary_pixels(pred);
    let truth_b = boundary_pixels(truth);
    match (pred_b.is_empty(), truth_b.is_empty()) {
        (true, true) => return Ok(F::one()),
        (true, false) | (false, true) => return Ok(F::zero()),
        _ => {}
    }

    let w = pred.width();
    let h = pred.height();
    let near_truth = stamp_within(&truth_b, w, h, tol_radius);
    let near_pred = stamp_within(&pred_b, w, h, tol_radius);

    let prec_hits = pred_b
        .iter()
        .filter(|(x, y)| near_truth[(y * w + x) as usize])
        .count();
    let rec_hits = truth_b
        .iter()
        .filter(|(x, y)| near_pred[(y * w + x) as usize])
        .count();
    let precision = real_of_usize::<F>(prec_hits) / real_of_usize(pred_b.len());
    let recall = real_of_usize::<F>(rec_hits) / real_of_usize(truth_b.len());
    if precision + recall == F::zero() {
        return Ok(F::zero());
    }
    Ok(real::<F>(2.0) * precision * recall / (precision + recall))
}

/// Boolean grid marking every pixel within `tol` (Euclidean, inclusive) of a
/// listed pixel.
fn stamp_within<F: Real>(pixels: &[(u32, u32)], w: u32, h: u32, tol: F) -> Vec<bool> {
    let mut grid = vec![false; (w * h) as usize];
    let r = tol.to_i64().unwrap_or(0).max(0);
    let tol_sq = tol * tol;
    for &(px, py) in pixels {
        for dy in -r..=r {
            let y = i64::from(py) + dy;
            if y < 0 || y >= i64::from(h) {
                continue;
            }
            for dx in -r..=r {
                let x = i64::from(px) + dx;
                if x < 0 || x >= i64::from(w) {
                    continue;
                }
                let d_sq = real::<F>((dx * dx + dy * dy) as f64);
                if d_sq <= tol_sq {
                    grid[(y * i64::from(w) + x) as usize] = true;
                }
            }
        }
    }
    grid
}

/// Arithmetic mean of J and F.
pub fn jf_mean<F: Real>(j: F, f: F) -> F {
    (j + f) / real(2.0)
}

/// Interval IoU. Zero-length union with differing intervals scores 0; two
/// identical points score 1.
pub fn tiou<F: Real>(predicted: &TimeInterval<F>, truth: &TimeInterval<F>) -> F {
    let lo = predicted.start_seconds().max(truth.start_seconds());
    let hi = predicted.end_seconds().min(truth.end_seconds());
    let inter = (hi - lo).max(F::zero());
    let union = predicted.length() + truth.length() - inter;
    if union <= F::zero() {
        // Both degenerate: same point counts as full agreement.
        return if predicted.start_seconds() == truth.start_seconds()
            && predicted.end_seconds() == truth.end_seconds()
        {
            F::one()
        } else {
            F::zero()
        };
    }
    inter / union
}

/// Fraction of tIoU values strictly exceeding each threshold.
pub fn recall_at<F: Real>(tious: &[F], thresholds: &[F]) -> Result<Vec<(F, F)>> {
    if tious.is_empty() {
        return Err(Error::Degenerate("recall over an empty tIoU list".into()));
    }
    let n = real_of_usize::<F>(tious.len());
    Ok(thresholds
        .iter()
        .map(|k| {
            let hits = tious.iter().filter(|v| **v > *k).count();
            (*k, real_of_usize::<F>(hits) / n)
        })
        .collect())
}

/// Joint temporal-retrieval mask protocol: gate on tIoU, then average J and F
/// over timestamped frames inside the intersection of the two intervals.
/// Prediction frames are matched to truth frames by timestamp; a truth frame
/// without a prediction scores against an empty mask.
pub fn pixtrqa_gated_masks<F: Real>(
    pred_interval: &TimeInterval<F>,
    truth_interval: &TimeInterval<F>,
    pred_masks: &[(F, BinaryMask)],
    truth_masks: &[(F, BinaryMask)],
    threshold: F,
    tol_radius: F,
) -> Result<(F, F)> {
    let overlap = tiou(pred_interval, truth_interval);
    if overlap < threshold {
        return Ok((F::zero(), F::zero()));
    }
    let lo = pred_interval.start_seconds().max(truth_interval.start_seconds());
    let hi = pred_interval.end_seconds().min(truth_interval.end_seconds());
    let mut j_sum = F::zero();
    let mut f_sum = F::zero();
    let mut count = 0usize;
    for (ts, truth) in truth_masks {
        if *ts < lo || *ts > hi {
            continue;
        }
        let empty;
        let pred = match pred_masks.iter().find(|(pt, _)| pt == ts) {
            Some((_, m)) => m,
            None => {
                empty = BinaryMask::empty(truth.width(), truth.height());
                &empty
            }
        };
        j_sum += region_j::<F>(pred, truth)?;
        f_sum += contour_f::<F>(pred, truth, tol_radius)?;
        count += 1;
    }
    if count == 0 {
        return Err(Error::Degenerate(
            "no frames inside the interval intersection despite passing the gate".into(),
        ));
    }
    let n = real_of_usize::<F>(count);
    Ok((j_sum / n, f_sum / n))
}

/// Fraction of exact matches between predicted and true choice labels.
pub fn choice_accuracy<T: PartialEq, F: Real>(preds: &[T], truths: &[T]) -> Result<F> {
    if preds.len() != truths.len() {
        return Err(Error::Shape(format!(
            "{} predictions vs {} truths",
            preds.len(),
            truths.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::Degenerate("no choices to score".into()));
    }
    let hits = preds.iter().zip(truths).filter(|(p, t)| p == t).count();
    Ok(real_of_usize::<F>(hits) / real_of_usize(preds.len()))
}

/// Semantic average: mean over dimensions per sample, then mean over samples.
/// Each score must lie in `[0, 5]`.
pub fn savg_aggregate<F: Real>(scores: &[Vec<F>]) -> Result<F> {
    if scores.is_empty() {
        return Err(Error::Degenerate("no samples to aggregate".into()));
    }
    let five = real::<F>(5.0);
    let mut total = F::zero();
    for (i, dims) in scores.iter().enumerate() {
        if dims.is_empty() {
            return Err(Error::Degenerate(format!(
                "sample {i} has no dimension scores"
            )));
        }
        for s in dims {
            if !(*s >= F::zero() && *s <= five) {
                return Err(Error::Domain(format!(
                    "semantic score {s} outside [0, 5] at sample {i}"
                )));
            }
        }
        let sum: F = dims.iter().copied().sum();
        total += sum / real_of_usize(dims.len());
    }
    Ok(total / real_of_usize(scores.len()))
}
