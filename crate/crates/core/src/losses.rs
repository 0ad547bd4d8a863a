//! Training objective: next-token NLL, mask BCE + soft-Dice, weighted total.
//!
//! Every loss ships with its closed-form gradient w.r.t. the logits, checked
//! against central finite differences in the test suites.
//!
//! Conventions:
//! - NLL is the mean of `-log softmax(row)[target]` over non-ignored
//!   positions.
//! - BCE is the per-pixel mean of the stable logit form
//!   `max(x, 0) - x*t + ln(1 + e^{-|x|})`, so the value is
//!   resolution-independent.
//! - Dice is `1 - (2*sum(p*t) + eps) / (sum(p) + sum(t) + eps)` on sigmoid
//!   probabilities `p`, with `eps` defaulting to 1.0 to keep empty masks
//!   well-defined.
//! - The mask loss is `alpha * BCE + beta * Dice`; the total objective is
//!   `gamma * text + mask`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{log_sum_exp, sigmoid, Matrix};
use crate::mask::{BinaryMask, MaskLogits};
use crate::scalar::{real, real_of_usize, Real};

/// Default Dice smoothing constant.
pub const DEFAULT_DICE_EPSILON: f64 = 1.0;

/// Component weights for the composite objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights<F> {
    /// BCE weight.
    pub alpha: F,
    /// Dice weight.
    pub beta: F,
    /// Text-loss weight.
    pub gamma: F,
}

impl<F: Real> LossWeights<F> {
    pub fn new(alpha: F, beta: F, gamma: F) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if !v.is_finite() || v < F::zero() {
                return Err(Error::Domain(format!(
                    "loss weight {name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(Self { alpha, beta, gamma })
    }
}

impl<F: Real> Default for LossWeights<F> {
    /// The published defaults: alpha 2.0, beta 0.5, gamma 1.0.
    fn default() -> Self {
        Self {
            alpha: real(2.0),
            beta: real(0.5),
            gamma: real(1.0),
        }
    }
}

fn check_targets<F: Real>(logits: &Matrix<F>, targets: &[u32], ignore: &[bool]) -> Result<usize> {
    if targets.len() != logits.rows() || ignore.len() != logits.rows() {
        return Err(Error::Shape(format!(
            "{} logit rows, {} targets, {} ignore flags",
            logits.rows(),
            targets.len(),
            ignore.len()
        )));
    }
    for (i, t) in targets.iter().enumerate() {
        if !ignore[i] && *t as usize >= logits.cols() {
            return Err(Error::Domain(format!(
                "target id {t} at position {i} outside vocabulary of {}",
                logits.cols()
            )));
        }
    }
    let n = ignore.iter().filter(|b| !**b).count();
    if n == 0 {
        return Err(Error::Degenerate(
            "no non-ignored positions for the NLL".into(),
        ));
    }
    Ok(n)
}

/// Mean negative log-likelihood of `targets` under row-wise softmax, skipping
/// ignored positions (prompt tokens).
pub fn nll_next_token<F: Real>(
    logits: &Matrix<F>,
    targets: &[u32],
    ignore: &[bool],
) -> Result<F> {
    let n = check_targets(logits, targets, ignore)?;
    let mut total = F::zero();
    for i in 0..logits.rows() {
        if ignore[i] {
            continue;
        }
        let row = logits.row(i);
        total += log_sum_exp(row) - row[targets[i] as usize];
    }
    Ok(total / real_of_usize(n))
}

/// Gradient of [`nll_next_token`] w.r.t. the logits: `(softmax - onehot) / N`
/// on non-ignored rows, zero elsewhere.
pub fn nll_next_token_grad<F: Real>(
    logits: &Matrix<F>,
    targets: &[u32],
    ignore: &[bool],
) -> Result<Matrix<F>> {
    let n = check_targets(logits, targets, ignore)?;
    let inv_n = F::one() / real_of_usize(n);
    let mut grad = Matrix::zeros(logits.rows(), logits.cols());
    for i in 0..logits.rows() {
        if ignore[i] {
            continue;
        }
        let row = logits.row(i);
        let lse = log_sum_exp(row);
        let grow = grad.row_mut(i);
        for (g, x) in grow.iter_mut().zip(row) {
            *g = (*x - lse).exp() * inv_n;
        }
        grow[targets[i] as usize] -= inv_n;
    }
    Ok(grad)
}

fn check_mask_shapes<F: Real>(pred: &MaskLogits<F>, target: &BinaryMask) -> Result<()> {
    if !pred.matches_mask(target) {
        return Err(Error::Shape(format!(
            "logit grid {}x{} vs target mask {}x{}",
            pred.width(),
            pred.height(),
            target.width(),
            target.height()
        )));
    }
    if pred.values().is_empty() {
        return Err(Error::Degenerate("empty mask grids".into()));
    }
    Ok(())
}

/// Per-pixel mean binary cross-entropy between logits and a boolean target.
pub fn bce_mask<F: Real>(pred: &MaskLogits<F>, target: &BinaryMask) -> Result<F> {
    check_mask_shapes(pred, target)?;
    let mut total = F::zero();
    for (x, t) in pred.values().iter().zip(target.bits()) {
        let tv = if *t { F::one() } else { F::zero() };
        total += x.max(F::zero()) - *x * tv + (F::one() + (-x.abs()).exp()).ln();
    }
    Ok(total / real_of_usize(pred.values().len()))
}

/// Gradient of [`bce_mask`] w.r.t. the logits: `(sigmoid(x) - t) / (W*H)`.
pub fn bce_mask_grad<F: Real>(pred: &MaskLogits<F>, target: &BinaryMask) -> Result<MaskLogits<F>> {
    check_mask_shapes(pred, target)?;
    let inv = F::one() / real_of_usize(pred.values().len());
    let values = pred
        .values()
        .iter()
        .zip(target.bits())
        .map(|(x, t)| {
            let tv = if *t { F::one() } else { F::zero() };
            (sigmoid(*x) - tv) * inv
        })
        .collect();
    MaskLogits::from_values(pred.width(), pred.height(), values)
}

/// Soft Dice loss on sigmoid probabilities; always in `[0, 1)`.
pub fn dice_mask<F: Real>(pred: &MaskLogits<F>, target: &BinaryMask, epsilon: F) -> Result<F> {
    check_mask_shapes(pred, target)?;
    if !(epsilon > F::zero()) {
        return Err(Error::Domain(format!(
            "dice epsilon must be positive, got {epsilon}"
        )));
    }
    let (mut sum_pt, mut sum_p, mut sum_t) = (F::zero(), F::zero(), F::zero());
    for (x, t) in pred.values().iter().zip(target.bits()) {
        let p = sigmoid(*x);
        sum_p += p;
        if *t {
            sum_pt += p;
            sum_t += F::one();
        }
    }
    Ok(F::one() - (real::<F>(2.0) * sum_pt + epsilon) / (sum_p + sum_t + epsilon))
}

/// Gradient of [`dice_mask`] w.r.t. the logits.
pub fn dice_mask_grad<F: Real>(
    pred: &MaskLogits<F>,
    target: &BinaryMask,
    epsilon: F,
) -> Result<MaskLogits<F>> {
    check_mask_shapes(pred, target)?;
    if !(epsilon > F::zero()) {
        return Err(Error::Domain(format!(
            "dice epsilon must be positive, got {epsilon}"
        )));
    }
    let two = real::<F>(2.0);
    let probs: Vec<F> = pred.values().iter().map(|x| sigmoid(*x)).collect();
    let (mut sum_pt, mut sum_p, mut sum_t) = (F::zero(), F::zero(), F::zero());
    for (p, t) in probs.iter().zip(target.bits()) {
        sum_p += *p;
        if *t {
            sum_pt += *p;
            sum_t += F::one();
        }
    }
    let numer = two * sum_pt + epsilon;
    let denom = sum_p + sum_t + epsilon;
    // d(1 - N/D)/dp_i = (N - 2*t_i*D) / D^2, then chain through sigmoid.
    let values = probs
        .iter()
        .zip(target.bits())
        .map(|(p, t)| {
            let tv = if *t { F::one() } else { F::zero() };
            let dldp = (numer - two * tv * denom) / (denom * denom);
            dldp * *p * (F::one() - *p)
        })
        .collect();
    MaskLogits::from_values(pred.width(), pred.height(), values)
}

/// Composite mask loss `alpha * BCE + beta * Dice`.
pub fn mask_loss<F: Real>(
    pred: &MaskLogits<F>,
    target: &BinaryMask,
    weights: &LossWeights<F>,
    epsilon: F,
) -> Result<F> {
    Ok(weights.alpha * bce_mask(pred, target)? + weights.beta * dice_mask(pred, target, epsilon)?)
}

/// Gradient of [`mask_loss`] w.r.t. the logits.
pub fn mask_loss_grad<F: Real>(
    pred: &MaskLogits<F>,
    target: &BinaryMask,
    weights: &LossWeights<F>,
    epsilon: F,
) -> Result<MaskLogits<F>> {
    let bce = bce_mask_grad(pred, target)?;
    let dice = dice_mask_grad(pred, target, epsilon)?;
    let values = bce
        .values()
        .iter()
        .zip(dice.values())
        .map(|(b, d)| weights.alpha * *b + weights.beta * *d)
        .collect();
    MaskLogits::from_values(pred.width(), pred.height(), values)
}

/// Total objective `gamma * text + mask`.
pub fn total_loss<F: Real>(text_loss: F, mask_loss: F, weights: &LossWeights<F>) -> F {
    weights.gamma * text_loss + mask_loss
}
