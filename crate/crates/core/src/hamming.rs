//! Exact risk minimizers for decomposable generalized losses and their
//! Hamming instantiations.
//!
//! For a loss that decomposes over labels, the optimal partial prediction
//! keeps the `d` labels with the smallest label-wise expected losses and
//! abstains on the rest, with `d` chosen against the abstention penalty.
//! Everything here is a closed form over one sort.

use crate::error::{Error, Result};
use crate::loss::uncertainty;
use crate::penalty::PenaltySpec;
use crate::types::{LabelPrediction, MarginalVector, PartialLabeling};

/// Per-label mistake costs of a decomposable loss. Correct predictions cost
/// zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelwiseLossSpec {
    /// Cost of predicting 1 when the truth is 0, per label.
    false_positive: Vec<f64>,
    /// Cost of predicting 0 when the truth is 1, per label.
    false_negative: Vec<f64>,
}

impl LabelwiseLossSpec {
    pub fn new(false_positive: Vec<f64>, false_negative: Vec<f64>) -> Result<Self> {
        if false_positive.len() != false_negative.len() {
            return Err(Error::DimensionMismatch {
                expected: false_positive.len(),
                got: false_negative.len(),
            });
        }
        if false_positive.is_empty() {
            return Err(Error::invalid("loss spec needs at least one label"));
        }
        for &cost in false_positive.iter().chain(false_negative.iter()) {
            if !cost.is_finite() || cost < 0.0 {
                return Err(Error::invalid(format!(
                    "mistake costs must be finite and nonnegative, got {cost}"
                )));
            }
        }
        Ok(Self { false_positive, false_negative })
    }

    /// Unit costs on every label: the Hamming loss.
    pub fn unit(m: usize) -> Self {
        Self { false_positive: vec![1.0; m], false_negative: vec![1.0; m] }
    }

    pub fn len(&self) -> usize {
        self.false_positive.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn false_positive(&self, i: usize) -> f64 {
        self.false_positive[i]
    }

    pub fn false_negative(&self, i: usize) -> f64 {
        self.false_negative[i]
    }

    /// Expected loss of the better side per label, and which side that is.
    /// Predicting 1 risks the false-positive cost with probability `1 - p`,
    /// predicting 0 the false-negative cost with probability `p`; ties
    /// predict 0.
    fn scores(&self, p: &MarginalVector) -> (Vec<f64>, Vec<bool>) {
        let m = p.len();
        let mut scores = Vec::with_capacity(m);
        let mut bits = Vec::with_capacity(m);
        for i in 0..m {
            let if_one = self.false_positive[i] * (1.0 - p.get(i));
            let if_zero = self.false_negative[i] * p.get(i);
            if if_one < if_zero {
                scores.push(if_one);
                bits.push(true);
            } else {
                scores.push(if_zero);
                bits.push(false);
            }
        }
        (scores, bits)
    }
}

/// Result of a decomposable-loss minimization.
#[derive(Debug, Clone)]
pub struct RiskReport {
    pub prediction: PartialLabeling,
    /// Expected generalized loss of `prediction`, penalty included.
    pub expected_loss: f64,
    /// Label-wise expected losses `s_i`, in original label order.
    pub per_label_scores: Vec<f64>,
    /// Size of the decided set.
    pub decided_count: usize,
}

/// Risk minimizer for an arbitrary decomposable loss: sorts labels by their
/// label-wise expected losses (ties by index) and keeps the cheapest prefix,
/// trading the rest against the penalty. Ties between prefix sizes decide
/// more labels.
pub fn minimize_decomposable(
    p: &MarginalVector,
    losses: &LabelwiseLossSpec,
    f: &PenaltySpec,
) -> Result<RiskReport> {
    let m = p.len();
    if losses.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: losses.len() });
    }
    if f.label_count() != m {
        return Err(Error::DimensionMismatch { expected: m, got: f.label_count() });
    }
    let (scores, bits) = losses.scores(p);
    Ok(assemble(&scores, &bits, f))
}

/// Hamming instantiation: unit costs, so the sort order is the uncertainty
/// order `u_i = 2 min(p_i, 1 - p_i)`.
pub fn minimize_hamming(p: &MarginalVector, f: &PenaltySpec) -> Result<RiskReport> {
    minimize_decomposable(p, &LabelwiseLossSpec::unit(p.len()), f)
}

/// Constant-per-abstention Hamming minimizer in closed form: decide exactly
/// the labels with `min(p_i, 1 - p_i) <= c`.
pub fn minimize_hamming_const(p: &MarginalVector, c: f64) -> Result<RiskReport> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::invalid(format!("abstention cost must be in [0, 1], got {c}")));
    }
    let m = p.len();
    let mut entries = Vec::with_capacity(m);
    let mut scores = Vec::with_capacity(m);
    let mut expected = 0.0;
    let mut decided_count = 0;
    for i in 0..m {
        let pi = p.get(i);
        let s = pi.min(1.0 - pi);
        scores.push(s);
        if s <= c {
            decided_count += 1;
            expected += s;
            entries.push(if pi > 0.5 { LabelPrediction::One } else { LabelPrediction::Zero });
        } else {
            expected += c;
            entries.push(LabelPrediction::Abstain);
        }
    }
    Ok(RiskReport {
        prediction: PartialLabeling::new(entries)?,
        expected_loss: expected,
        per_label_scores: scores,
        decided_count,
    })
}

fn assemble(scores: &[f64], bits: &[bool], f: &PenaltySpec) -> RiskReport {
    let m = scores.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| scores[i].partial_cmp(&scores[j]).expect("finite scores").then(i.cmp(&j)));

    // Best prefix size; on equal totals the larger d wins, so boundary ties
    // are decided rather than abstained.
    let mut best_d = 0;
    let mut best_total = f.value(m);
    let mut prefix = 0.0;
    for d in 1..=m {
        prefix += scores[order[d - 1]];
        let total = prefix + f.value(m - d);
        if total <= best_total {
            best_total = total;
            best_d = d;
        }
    }

    let mut entries = vec![LabelPrediction::Abstain; m];
    for &i in order.iter().take(best_d) {
        entries[i] = if bits[i] { LabelPrediction::One } else { LabelPrediction::Zero };
    }
    RiskReport {
        prediction: PartialLabeling::new(entries).expect("m >= 1"),
        expected_loss: best_total,
        per_label_scores: scores.to_vec(),
        decided_count: best_d,
    }
}

/// Whether no decided label is more uncertain than any abstained one.
pub fn is_uncertainty_aligned(p: &MarginalVector, yhat: &PartialLabeling) -> bool {
    let decided_max = (0..p.len())
        .filter(|&i| yhat.get(i) != LabelPrediction::Abstain)
        .map(|i| uncertainty(p.get(i)))
        .fold(f64::NEG_INFINITY, f64::max);
    let abstained_min = (0..p.len())
        .filter(|&i| yhat.get(i) == LabelPrediction::Abstain)
        .map(|i| uncertainty(p.get(i)))
        .fold(f64::INFINITY, f64::min);
    decided_max <= abstained_min
}
