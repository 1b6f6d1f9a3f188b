//! Forecast error measures.

use crate::ensemble::direction_correct;
use crate::error::{Error, Result};

fn check_lengths(preds: &[f64], targets: &[f64]) -> Result<()> {
    if preds.len() != targets.len() {
        return Err(Error::LengthMismatch {
            left: preds.len(),
            right: targets.len(),
        });
    }
    if preds.is_empty() {
        return Err(Error::Empty);
    }
    Ok(())
}

/// Mean squared relative error, `((y - t) / t)^2`, falling back to the plain
/// squared error where `t == 0`. Predicting "no change" scores exactly 1 on
/// any series without zero targets.
pub fn nse_error(preds: &[f64], targets: &[f64]) -> Result<f64> {
    check_lengths(preds, targets)?;
    let sum: f64 = preds
        .iter()
        .zip(targets)
        .map(|(&y, &t)| {
            let d = if t == 0.0 { y - t } else { (y - t) / t };
            d * d
        })
        .sum();
    Ok(sum / preds.len() as f64)
}

/// Fraction of steps whose predicted direction matches the realised one.
pub fn direction_accuracy(preds: &[f64], targets: &[f64]) -> Result<f64> {
    check_lengths(preds, targets)?;
    let hits = preds
        .iter()
        .zip(targets)
        .filter(|(&y, &t)| direction_correct(y, t))
        .count();
    Ok(hits as f64 / preds.len() as f64)
}
