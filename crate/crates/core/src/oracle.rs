//! Brute-force ground truth at small label counts: exact expectations by
//! enumerating all `2^m` labelings, and exhaustive optimization over all
//! partial predictions or subset rankings. Every fast minimizer in this crate
//! is verified against these.

use crate::error::{Error, Result};
use crate::hamming::LabelwiseLossSpec;
use crate::par;
use crate::penalty::PenaltySpec;
use crate::types::{
    LabelPrediction, LossKind, MarginalVector, PartialLabeling, PartialRanking,
};

/// Enumeration bound for exact expectations.
pub const MAX_ENUM_LABELS: usize = 20;
/// Bound for the exhaustive search over all `3^m` partial labelings.
pub const MAX_HAMMING_BRUTE: usize = 8;
/// Bound for the exhaustive search over all subset rankings.
pub const MAX_RANK_BRUTE: usize = 7;
/// Bound for the exhaustive search over all `3^m` partial F predictions.
pub const MAX_F_BRUTE: usize = 7;

/// The full label distribution spelled out: one probability per labeling,
/// derived from marginals under conditional independence. Labelings are
/// encoded as bit masks, bit `i` = label `i`.
#[derive(Debug, Clone)]
pub struct EnumeratedDistribution {
    m: usize,
    probs: Vec<f64>,
}

impl EnumeratedDistribution {
    pub fn from_marginals(p: &MarginalVector) -> Result<Self> {
        let m = p.len();
        if m > MAX_ENUM_LABELS {
            return Err(Error::CapacityExceeded { m, limit: MAX_ENUM_LABELS });
        }
        let mut probs = vec![1.0];
        for i in 0..m {
            let pi = p.get(i);
            let mut next = vec![0.0; probs.len() * 2];
            for (mask, &q) in probs.iter().enumerate() {
                next[mask] = q * (1.0 - pi);
                next[mask | 1 << i] = q * pi;
            }
            probs = next;
        }
        Ok(Self { m, probs })
    }

    pub fn label_count(&self) -> usize {
        self.m
    }

    pub fn prob(&self, mask: u32) -> f64 {
        self.probs[mask as usize]
    }

    pub fn masks(&self) -> impl Iterator<Item = u32> {
        0..(1u32 << self.m)
    }

    /// Exact expected generalized Hamming loss of a partial labeling.
    pub fn expected_hamming(&self, yhat: &PartialLabeling, f: &PenaltySpec) -> Result<f64> {
        self.check(yhat.len(), f)?;
        let (ones, decided) = masks_of(yhat);
        let a = yhat.abstention_count();
        let mut acc = 0.0;
        for mask in self.masks() {
            acc += self.prob(mask) * ((mask ^ ones) & decided).count_ones() as f64;
        }
        Ok(acc + f.value(a))
    }

    /// Expected generalized loss under per-label mistake costs.
    pub fn expected_labelwise(
        &self,
        yhat: &PartialLabeling,
        losses: &LabelwiseLossSpec,
        f: &PenaltySpec,
    ) -> Result<f64> {
        self.check(yhat.len(), f)?;
        if losses.len() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, got: losses.len() });
        }
        let mut acc = 0.0;
        for mask in self.masks() {
            let q = self.prob(mask);
            let mut cost = 0.0;
            for i in 0..self.m {
                let truth = mask >> i & 1 == 1;
                match yhat.get(i).decided_bit() {
                    Some(true) if !truth => cost += losses.false_positive(i),
                    Some(false) if truth => cost += losses.false_negative(i),
                    _ => {}
                }
            }
            acc += q * cost;
        }
        Ok(acc + f.value(yhat.abstention_count()))
    }

    /// Exact expected generalized rank loss of a partial ranking.
    pub fn expected_rank(&self, pi: &PartialRanking, f: &PenaltySpec) -> Result<f64> {
        if f.label_count() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, got: f.label_count() });
        }
        for &label in pi.order() {
            if label >= self.m {
                return Err(Error::invalid(format!("ranking refers to label index {label}")));
            }
        }
        let order = pi.order();
        let mut acc = 0.0;
        for mask in self.masks() {
            let q = self.prob(mask);
            let mut inv = 0usize;
            for i in 0..order.len() {
                for j in (i + 1)..order.len() {
                    if mask >> order[i] & 1 == 0 && mask >> order[j] & 1 == 1 {
                        inv += 1;
                    }
                }
            }
            acc += q * inv as f64;
        }
        Ok(acc + f.value(self.m - order.len()))
    }

    /// Exact expected generalized F-measure of a partial labeling (value,
    /// higher is better; can be negative).
    pub fn expected_f(&self, yhat: &PartialLabeling, f: &PenaltySpec) -> Result<f64> {
        self.check(yhat.len(), f)?;
        let a = yhat.abstention_count();
        if a == self.m {
            return Ok(1.0 - f.value(a));
        }
        let (ones, decided) = masks_of(yhat);
        let pred_ones = ones.count_ones();
        let mut acc = 0.0;
        for mask in self.masks() {
            let tp = (mask & ones).count_ones();
            let denom = (mask & decided).count_ones() + pred_ones;
            let fv = if denom == 0 { 1.0 } else { 2.0 * tp as f64 / denom as f64 };
            acc += self.prob(mask) * fv;
        }
        Ok(acc - f.value(a))
    }

    fn check(&self, pred_len: usize, f: &PenaltySpec) -> Result<()> {
        if pred_len != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, got: pred_len });
        }
        if f.label_count() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, got: f.label_count() });
        }
        Ok(())
    }
}

/// A prediction of either shape, for the common expectation entry point.
#[derive(Debug, Clone)]
pub enum PartialPrediction {
    Labeling(PartialLabeling),
    Ranking(PartialRanking),
}

/// Exact expectation of the chosen generalized loss by full enumeration.
/// For `FMeasure` this is the loss `1 - E(F_G)`.
pub fn exact_expected_loss(
    p: &MarginalVector,
    prediction: &PartialPrediction,
    kind: LossKind,
    f: &PenaltySpec,
) -> Result<f64> {
    let dist = EnumeratedDistribution::from_marginals(p)?;
    match (kind, prediction) {
        (LossKind::Hamming, PartialPrediction::Labeling(yhat)) => dist.expected_hamming(yhat, f),
        (LossKind::Rank, PartialPrediction::Ranking(pi)) => dist.expected_rank(pi, f),
        (LossKind::FMeasure, PartialPrediction::Labeling(yhat)) => {
            Ok(1.0 - dist.expected_f(yhat, f)?)
        }
        _ => Err(Error::invalid("prediction shape does not match the loss kind")),
    }
}

/// Exhaustive argmin of the expected generalized Hamming loss over all `3^m`
/// partial labelings. Ties resolve to the first candidate in enumeration
/// order (ternary counting, digits 0 < 1 < abstain).
pub fn brute_minimize_hamming(
    p: &MarginalVector,
    f: &PenaltySpec,
) -> Result<(PartialLabeling, f64)> {
    let m = capacity_check(p, f, MAX_HAMMING_BRUTE)?;
    let dist = EnumeratedDistribution::from_marginals(p)?;
    let n_candidates = 3usize.pow(m as u32);
    let (best, value) = par::argmin_range(n_candidates, |idx| {
        let (ones, decided, a) = decode_ternary(idx, m);
        let mut acc = 0.0;
        for mask in dist.masks() {
            acc += dist.prob(mask) * ((mask ^ ones) & decided).count_ones() as f64;
        }
        acc + f.value(a)
    });
    Ok((ternary_labeling(best, m), value))
}

/// Exhaustive argmin for an arbitrary decomposable loss.
pub fn brute_minimize_labelwise(
    p: &MarginalVector,
    losses: &LabelwiseLossSpec,
    f: &PenaltySpec,
) -> Result<(PartialLabeling, f64)> {
    let m = capacity_check(p, f, MAX_HAMMING_BRUTE)?;
    if losses.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: losses.len() });
    }
    let dist = EnumeratedDistribution::from_marginals(p)?;
    let n_candidates = 3usize.pow(m as u32);
    let (best, value) = par::argmin_range(n_candidates, |idx| {
        let yhat = ternary_labeling(idx, m);
        dist.expected_labelwise(&yhat, losses, f).expect("dimensions verified")
    });
    Ok((ternary_labeling(best, m), value))
}

/// Exhaustive argmin of the expected generalized rank loss over every subset
/// of labels and every ordering of each subset.
pub fn brute_minimize_rank(
    p: &MarginalVector,
    f: &PenaltySpec,
) -> Result<(PartialRanking, f64)> {
    let m = capacity_check(p, f, MAX_RANK_BRUTE)?;
    let dist = EnumeratedDistribution::from_marginals(p)?;
    let candidates = all_subset_orderings(m);
    let scores = par::map_slice(&candidates, |order| {
        let pi = PartialRanking::new(order.clone()).expect("distinct by construction");
        dist.expected_rank(&pi, f).expect("valid indices")
    });
    let mut best = 0;
    for i in 1..scores.len() {
        if scores[i] < scores[best] {
            best = i;
        }
    }
    Ok((PartialRanking::new(candidates[best].clone())?, scores[best]))
}

/// Exhaustive argmax of the expected generalized F-measure over all `3^m`
/// partial predictions.
pub fn brute_maximize_f(p: &MarginalVector, f: &PenaltySpec) -> Result<(PartialLabeling, f64)> {
    let m = capacity_check(p, f, MAX_F_BRUTE)?;
    let dist = EnumeratedDistribution::from_marginals(p)?;
    let n_candidates = 3usize.pow(m as u32);
    let (best, neg_value) = par::argmin_range(n_candidates, |idx| {
        let (ones, decided, a) = decode_ternary(idx, m);
        if a == m {
            return -(1.0 - f.value(a));
        }
        let pred_ones = ones.count_ones();
        let mut acc = 0.0;
        for mask in dist.masks() {
            let tp = (mask & ones).count_ones();
            let denom = (mask & decided).count_ones() + pred_ones;
            let fv = if denom == 0 { 1.0 } else { 2.0 * tp as f64 / denom as f64 };
            acc += dist.prob(mask) * fv;
        }
        -(acc - f.value(a))
    });
    Ok((ternary_labeling(best, m), -neg_value))
}

fn capacity_check(p: &MarginalVector, f: &PenaltySpec, limit: usize) -> Result<usize> {
    let m = p.len();
    if m > limit {
        return Err(Error::CapacityExceeded { m, limit });
    }
    if f.label_count() != m {
        return Err(Error::DimensionMismatch { expected: m, got: f.label_count() });
    }
    Ok(m)
}

/// Candidate `idx` in ternary counting: digit `i` is the prediction for label
/// `i` (0, 1, or abstain). Returns (ones mask, decided mask, abstentions).
fn decode_ternary(mut idx: usize, m: usize) -> (u32, u32, usize) {
    let (mut ones, mut decided) = (0u32, 0u32);
    let mut abstained = 0;
    for i in 0..m {
        match idx % 3 {
            0 => decided |= 1 << i,
            1 => {
                decided |= 1 << i;
                ones |= 1 << i;
            }
            _ => abstained += 1,
        }
        idx /= 3;
    }
    (ones, decided, abstained)
}

fn ternary_labeling(mut idx: usize, m: usize) -> PartialLabeling {
    let mut entries = Vec::with_capacity(m);
    for _ in 0..m {
        entries.push(match idx % 3 {
            0 => LabelPrediction::Zero,
            1 => LabelPrediction::One,
            _ => LabelPrediction::Abstain,
        });
        idx /= 3;
    }
    PartialLabeling::new(entries).expect("m >= 1")
}

fn masks_of(yhat: &PartialLabeling) -> (u32, u32) {
    let (mut ones, mut decided) = (0u32, 0u32);
    for i in 0..yhat.len() {
        match yhat.get(i) {
            LabelPrediction::One => {
                ones |= 1 << i;
                decided |= 1 << i;
            }
            LabelPrediction::Zero => decided |= 1 << i,
            LabelPrediction::Abstain => {}
        }
    }
    (ones, decided)
}

/// Every ordering of every subset of `[m]`, subsets by ascending bit mask,
/// orderings lexicographically within a subset. The empty ranking comes
/// first.
fn all_subset_orderings(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..1 << m {
        let members: Vec<usize> = (0..m).filter(|&i| mask >> i & 1 == 1).collect();
        permute_into(&members, &mut Vec::new(), &mut vec![false; members.len()], &mut out);
        if members.is_empty() {
            out.push(Vec::new());
        }
    }
    out
}

fn permute_into(
    members: &[usize],
    current: &mut Vec<usize>,
    used: &mut Vec<bool>,
    out: &mut Vec<Vec<usize>>,
) {
    if !members.is_empty() && current.len() == members.len() {
        out.push(current.clone());
        return;
    }
    for i in 0..members.len() {
        if !used[i] {
            used[i] = true;
            current.push(members[i]);
            permute_into(members, current, used, out);
            current.pop();
            used[i] = false;
        }
    }
}
