//! Loss evaluators on realized outcomes: given the true labeling and a
//! (possibly partial) prediction, what loss was actually incurred.
//!
//! These are shared by the minimizers, the brute-force oracle and the sweep
//! harness, so every component scores outcomes the same way.

use crate::error::{Error, Result};
use crate::penalty::PenaltySpec;
use crate::types::{GroundTruth, PartialLabeling, PartialRanking};

/// Degree of uncertainty of a marginal probability, `2 * min(p, 1 - p)`.
/// Maximal (1) at `p = 1/2`, zero at certain labels.
pub fn uncertainty(p: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p));
    2.0 * p.min(1.0 - p)
}

/// Hamming loss extended to partial predictions: mistakes on the decided
/// labels plus the abstention penalty. Reduces to the plain Hamming count
/// when nothing is abstained.
pub fn generalized_hamming(
    y: &GroundTruth,
    yhat: &PartialLabeling,
    f: &PenaltySpec,
) -> Result<f64> {
    check_len(y.len(), yhat.len())?;
    check_len(f.label_count(), yhat.len())?;
    let mistakes = decided_mistakes(y, yhat);
    Ok(mistakes as f64 + f.value(yhat.abstention_count()))
}

/// Mistake count on the decided labels only (no penalty).
pub fn decided_mistakes(y: &GroundTruth, yhat: &PartialLabeling) -> usize {
    debug_assert_eq!(y.len(), yhat.len());
    (0..y.len())
        .filter(|&i| matches!(yhat.get(i).decided_bit(), Some(bit) if bit != y.get(i)))
        .count()
}

/// Number of label pairs ranked irrelevant-above-relevant. Only pairs with
/// both labels inside the ranking are scored; unranked labels contribute
/// nothing.
pub fn rank_loss(y: &GroundTruth, pi: &PartialRanking) -> Result<usize> {
    for &label in pi.order() {
        if label >= y.len() {
            return Err(Error::invalid(format!(
                "ranking refers to label index {label}, but there are only {} labels",
                y.len()
            )));
        }
    }
    let order = pi.order();
    let mut inversions = 0;
    for i in 0..order.len() {
        for j in (i + 1)..order.len() {
            if !y.get(order[i]) && y.get(order[j]) {
                inversions += 1;
            }
        }
    }
    Ok(inversions)
}

/// Rank loss of a partial ranking plus the penalty for the unranked labels.
pub fn generalized_rank(y: &GroundTruth, pi: &PartialRanking, f: &PenaltySpec) -> Result<f64> {
    check_len(f.label_count(), y.len())?;
    if pi.len() > y.len() {
        return Err(Error::DimensionMismatch { expected: y.len(), got: pi.len() });
    }
    let inversions = rank_loss(y, pi)?;
    Ok(inversions as f64 + f.value(y.len() - pi.len()))
}

/// F-measure between two binary sequences of equal length (possibly empty).
/// Returns 1 when both sides are all-zero: perfect agreement on emptiness.
pub fn f_measure(y: &[bool], yhat: &[bool]) -> Result<f64> {
    check_len(y.len(), yhat.len())?;
    let tp = y.iter().zip(yhat).filter(|&(&a, &b)| a && b).count();
    let denom = y.iter().filter(|&&a| a).count() + yhat.iter().filter(|&&b| b).count();
    if denom == 0 {
        Ok(1.0)
    } else {
        Ok(2.0 * tp as f64 / denom as f64)
    }
}

/// Generalized F-measure of a partial prediction: F on the decided part minus
/// the abstention penalty; full abstention scores `1 - f(m)`. Can be negative.
pub fn generalized_f(y: &GroundTruth, yhat: &PartialLabeling, f: &PenaltySpec) -> Result<f64> {
    check_len(y.len(), yhat.len())?;
    check_len(f.label_count(), yhat.len())?;
    let a = yhat.abstention_count();
    if a == yhat.len() {
        return Ok(1.0 - f.value(a));
    }
    let mut yd = Vec::with_capacity(yhat.len() - a);
    let mut yhat_d = Vec::with_capacity(yhat.len() - a);
    for i in 0..yhat.len() {
        if let Some(bit) = yhat.get(i).decided_bit() {
            yd.push(y.get(i));
            yhat_d.push(bit);
        }
    }
    Ok(f_measure(&yd, &yhat_d)? - f.value(a))
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
