//! Abstention penalties: nondecreasing functions of the abstention count.

use crate::error::{Error, Result};

/// Shape of the penalty as a function of the number of abstained labels.
#[derive(Debug, Clone, PartialEq)]
pub enum PenaltyKind {
    /// `f(a) = a * c`: every abstention costs the same.
    Linear { cost: f64 },
    /// `f(a) = a * m * c / (m + a)`: marginal cost of abstention decreases.
    Concave { cost: f64 },
    /// Explicit values `f(0..=m)`.
    Table(Vec<f64>),
}

/// A validated abstention penalty for a fixed label count.
///
/// Guarantees `f(0) = 0` and `f` nondecreasing. The experiment harness calls
/// the linear form SEP and the concave form PAR.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltySpec {
    kind: PenaltyKind,
    label_count: usize,
}

impl PenaltySpec {
    pub fn linear(label_count: usize, cost: f64) -> Result<Self> {
        Self::checked(PenaltyKind::Linear { cost }, label_count)
    }

    pub fn concave(label_count: usize, cost: f64) -> Result<Self> {
        Self::checked(PenaltyKind::Concave { cost }, label_count)
    }

    /// Explicit table of `m + 1` values `f(0), f(1), ..., f(m)`.
    pub fn table(label_count: usize, values: Vec<f64>) -> Result<Self> {
        Self::checked(PenaltyKind::Table(values), label_count)
    }

    fn checked(kind: PenaltyKind, label_count: usize) -> Result<Self> {
        if label_count == 0 {
            return Err(Error::invalid("penalty needs at least one label"));
        }
        match &kind {
            PenaltyKind::Linear { cost } | PenaltyKind::Concave { cost } => {
                if !cost.is_finite() || *cost < 0.0 {
                    return Err(Error::invalid(format!(
                        "abstention cost must be finite and nonnegative, got {cost}"
                    )));
                }
            }
            PenaltyKind::Table(values) => {
                if values.len() != label_count + 1 {
                    return Err(Error::DimensionMismatch {
                        expected: label_count + 1,
                        got: values.len(),
                    });
                }
                if values[0] != 0.0 {
                    return Err(Error::invalid("penalty table must start with f(0) = 0"));
                }
                for w in values.windows(2) {
                    if !w[1].is_finite() || w[1] < w[0] {
                        return Err(Error::invalid("penalty table must be nondecreasing"));
                    }
                }
            }
        }
        Ok(Self { kind, label_count })
    }

    pub fn label_count(&self) -> usize {
        self.label_count
    }

    pub fn kind(&self) -> &PenaltyKind {
        &self.kind
    }

    /// Penalty for abstaining on `a` of the `m` labels.
    pub fn eval(&self, a: usize) -> Result<f64> {
        if a > self.label_count {
            return Err(Error::invalid(format!(
                "abstention count {a} exceeds label count {}",
                self.label_count
            )));
        }
        Ok(self.value(a))
    }

    /// Like [`eval`](Self::eval) but for callers that already guarantee
    /// `a <= m`.
    pub(crate) fn value(&self, a: usize) -> f64 {
        debug_assert!(a <= self.label_count);
        match &self.kind {
            PenaltyKind::Linear { cost } => a as f64 * cost,
            PenaltyKind::Concave { cost } => {
                let (a, m) = (a as f64, self.label_count as f64);
                a * m * cost / (m + a)
            }
            PenaltyKind::Table(values) => values[a],
        }
    }

    /// Whether every increment `f(k+1) - f(k)` is at most one. Losses whose
    /// single-label mistakes cost 1 are monotonic exactly under this bound.
    pub fn has_unit_increments(&self) -> bool {
        (0..self.label_count).all(|a| self.value(a + 1) - self.value(a) <= 1.0)
    }
}
