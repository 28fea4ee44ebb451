//! Domain types shared by every minimizer and the brute-force oracle.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Per-label relevance probabilities `p_1..p_m` for a single instance.
///
/// This is the sole probabilistic input of every minimizer in the crate.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalVector {
    probs: Vec<f64>,
}

impl MarginalVector {
    /// Validates that every entry lies in `[0, 1]` and that `m >= 1`.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("marginal vector must have at least one label"));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!(
                    "marginal probability at index {i} is {p}, outside [0, 1]"
                )));
            }
        }
        Ok(Self { probs })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false // m >= 1 by construction
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.probs.iter()
    }
}

impl std::ops::Index<usize> for MarginalVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.probs[i]
    }
}

/// What the classifier says about one label: relevant, irrelevant, or nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LabelPrediction {
    Zero,
    One,
    Abstain,
}

impl LabelPrediction {
    /// `Some(bit)` when decided, `None` on abstention.
    pub fn decided_bit(self) -> Option<bool> {
        match self {
            LabelPrediction::Zero => Some(false),
            LabelPrediction::One => Some(true),
            LabelPrediction::Abstain => None,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            LabelPrediction::Zero => '0',
            LabelPrediction::One => '1',
            LabelPrediction::Abstain => '?',
        }
    }
}

/// A prediction over `{0, 1, ?}` per label. The indices it decides form the
/// decided set `D`, the rest the abstained set `A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialLabeling {
    entries: Vec<LabelPrediction>,
}

impl PartialLabeling {
    pub fn new(entries: Vec<LabelPrediction>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("partial labeling must have at least one label"));
        }
        Ok(Self { entries })
    }

    /// Full prediction (no abstentions) from a bit vector.
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        Self::new(
            bits.iter()
                .map(|&b| if b { LabelPrediction::One } else { LabelPrediction::Zero })
                .collect(),
        )
    }

    /// Abstains on all `m` labels.
    pub fn all_abstain(m: usize) -> Result<Self> {
        Self::new(vec![LabelPrediction::Abstain; m])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, i: usize) -> LabelPrediction {
        self.entries[i]
    }

    pub fn entries(&self) -> &[LabelPrediction] {
        &self.entries
    }

    /// Indices the classifier decides on, ascending.
    pub fn decided_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.entries[i] != LabelPrediction::Abstain).collect()
    }

    /// Indices the classifier abstains on, ascending.
    pub fn abstained_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.entries[i] == LabelPrediction::Abstain).collect()
    }

    pub fn abstention_count(&self) -> usize {
        self.entries.iter().filter(|&&e| e == LabelPrediction::Abstain).count()
    }

    pub fn decided_count(&self) -> usize {
        self.len() - self.abstention_count()
    }

    pub fn is_full(&self) -> bool {
        self.abstention_count() == 0
    }
}

impl fmt::Display for PartialLabeling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", e.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PartialLabeling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let entries = s
            .split(',')
            .map(|tok| match tok.trim() {
                "0" => Ok(LabelPrediction::Zero),
                "1" => Ok(LabelPrediction::One),
                "?" => Ok(LabelPrediction::Abstain),
                other => Err(Error::invalid(format!("unknown label symbol {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }
}

/// A ranking of a subset of the labels, most-probably-relevant first.
/// Entries are 0-based label indices; an empty order means full abstention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialRanking {
    order: Vec<usize>,
}

impl PartialRanking {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for &i in &order {
            if !seen.insert(i) {
                return Err(Error::invalid(format!("duplicate label index {i} in ranking")));
            }
        }
        Ok(Self { order })
    }

    pub fn empty() -> Self {
        Self { order: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn contains(&self, label: usize) -> bool {
        self.order.contains(&label)
    }
}

impl fmt::Display for PartialRanking {
    /// 1-based label indices joined by `>`; `-` for the empty ranking.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.order.is_empty() {
            return f.write_str("-");
        }
        for (i, &label) in self.order.iter().enumerate() {
            if i > 0 {
                f.write_str(">")?;
            }
            write!(f, "{}", label + 1)?;
        }
        Ok(())
    }
}

/// An observed labeling: which labels are actually relevant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    labels: Vec<bool>,
}

impl GroundTruth {
    pub fn new(labels: Vec<bool>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::invalid("ground truth must have at least one label"));
        }
        Ok(Self { labels })
    }

    /// Decodes bit `i` of `mask` as label `i`. Used by the enumeration oracle.
    pub fn from_mask(mask: u32, m: usize) -> Result<Self> {
        Self::new((0..m).map(|i| mask >> i & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, i: usize) -> bool {
        self.labels[i]
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    /// Number of relevant labels `r(y)`.
    pub fn relevant_count(&self) -> usize {
        self.labels.iter().filter(|&&b| b).count()
    }
}

/// Which loss family a prediction is optimized or evaluated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Hamming,
    Rank,
    FMeasure,
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Hamming => "hamming",
            LossKind::Rank => "rank",
            LossKind::FMeasure => "f1",
        })
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hamming" => Ok(LossKind::Hamming),
            "rank" => Ok(LossKind::Rank),
            "f1" => Ok(LossKind::FMeasure),
            other => Err(Error::invalid(format!("unknown loss kind {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marginal_vector_rejects_out_of_range() {
        assert!(MarginalVector::new(vec![0.5, 1.2]).is_err());
        assert!(MarginalVector::new(vec![-0.1]).is_err());
        assert!(MarginalVector::new(vec![]).is_err());
        assert!(MarginalVector::new(vec![0.0, 1.0, 0.5]).is_ok());
    }

    #[test]
    fn partial_labeling_sets_partition() {
        let y: PartialLabeling = "1,?,0,?".parse().unwrap();
        assert_eq!(y.decided_indices(), vec![0, 2]);
        assert_eq!(y.abstained_indices(), vec![1, 3]);
        assert_eq!(y.abstention_count(), 2);
        assert_eq!(y.to_string(), "1,?,0,?");
    }

    #[test]
    fn ranking_rejects_duplicates() {
        assert!(PartialRanking::new(vec![1, 3, 1]).is_err());
        let r = PartialRanking::new(vec![0, 3]).unwrap();
        assert_eq!(r.to_string(), "1>4");
        assert_eq!(PartialRanking::empty().to_string(), "-");
    }
}
