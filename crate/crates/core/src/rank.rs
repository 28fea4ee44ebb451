//! Expected partial rank loss under conditional independence and its exact
//! minimizer.
//!
//! After sorting labels by descending relevance probability, the optimal
//! decision set of any size is a boundary set: a prefix plus a suffix of the
//! sorted positions. The minimizer grows such a set greedily, one position
//! per step, keeping the expected loss updated incrementally, and finally
//! picks the size that wins against the abstention penalty.

use crate::error::{Error, Result};
use crate::penalty::PenaltySpec;
use crate::types::{MarginalVector, PartialRanking};

/// Stable permutation sorting labels by descending probability; ties keep
/// ascending original index. Entry `pos` is the original label index at
/// sorted position `pos`.
pub fn sort_descending(p: &MarginalVector) -> Vec<usize> {
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&i, &j| p.get(j).partial_cmp(&p.get(i)).expect("no NaN").then(i.cmp(&j)));
    order
}

/// A decision set over *sorted positions*: a prefix `{1..=a}` plus a suffix
/// `{b..=m}` (1-based), or one of the two degenerate sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundarySelection {
    /// Nothing ranked (full abstention).
    Empty,
    /// Only the top-probability position.
    Single,
    /// `{1..=a} ∪ {b..=m}` with `1 <= a < b <= m`.
    TwoSided { a: usize, b: usize },
}

impl BoundarySelection {
    pub fn validate(&self, m: usize) -> Result<()> {
        match *self {
            BoundarySelection::Empty => Ok(()),
            BoundarySelection::Single if m >= 1 => Ok(()),
            BoundarySelection::Single => Err(Error::invalid("empty label set")),
            BoundarySelection::TwoSided { a, b } => {
                if a >= 1 && a < b && b <= m {
                    Ok(())
                } else {
                    Err(Error::invalid(format!(
                        "boundary selection needs 1 <= a < b <= m, got a={a} b={b} m={m}"
                    )))
                }
            }
        }
    }

    /// Number of selected positions.
    pub fn len(&self, m: usize) -> usize {
        match *self {
            BoundarySelection::Empty => 0,
            BoundarySelection::Single => 1,
            BoundarySelection::TwoSided { a, b } => m + a - b + 1,
        }
    }

    /// Selected positions as 0-based indices into the sorted order, ascending.
    pub fn positions(&self, m: usize) -> Vec<usize> {
        match *self {
            BoundarySelection::Empty => Vec::new(),
            BoundarySelection::Single => vec![0],
            BoundarySelection::TwoSided { a, b } => (0..a).chain(b - 1..m).collect(),
        }
    }
}

/// Expected rank loss of the ranking that keeps the selected positions in
/// sorted order: sum over selected position pairs `i < j` of
/// `p_(j) * (1 - p_(i))`. Zero when fewer than two positions are selected.
pub fn expected_partial_rank_loss(
    p_sorted: &MarginalVector,
    selection: &BoundarySelection,
) -> Result<f64> {
    let ps = p_sorted.as_slice();
    if ps.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::invalid("probabilities must be sorted descending"));
    }
    selection.validate(ps.len())?;
    let positions = selection.positions(ps.len());
    let mut acc = 0.0;
    for i in 0..positions.len() {
        for j in (i + 1)..positions.len() {
            acc += ps[positions[j]] * (1.0 - ps[positions[i]]);
        }
    }
    Ok(acc)
}

/// One row of the per-size sweep the minimizer runs through.
#[derive(Debug, Clone)]
pub struct RankCandidate {
    /// Number of ranked labels.
    pub d: usize,
    pub selection: BoundarySelection,
    /// Expected rank loss of the selection, without penalty.
    pub expected_rank_loss: f64,
    /// Expected rank loss plus `f(m - d)`.
    pub total: f64,
}

/// Result of [`minimize_rank`].
#[derive(Debug, Clone)]
pub struct RankRiskReport {
    /// Ranked label indices (0-based, original numbering), best first.
    pub ranking: PartialRanking,
    pub selection: BoundarySelection,
    /// Expected generalized loss of `ranking`, penalty included.
    pub expected_loss: f64,
    /// One candidate per considered size `d`, ascending.
    pub per_d_curve: Vec<RankCandidate>,
}

/// Options for [`minimize_rank_with`].
#[derive(Debug, Clone, Copy)]
pub struct RankOptions {
    /// Consider the single-label ranking (`d = 1`). The greedy chain itself
    /// only produces sizes 0 and 2..=m; a lone top label has zero pairwise
    /// loss and can win, so it is included by default.
    pub include_single: bool,
}

impl Default for RankOptions {
    fn default() -> Self {
        Self { include_single: true }
    }
}

/// Minimizes the expected generalized rank loss. `O(m log m)`: one sort plus
/// constant work per greedy step.
pub fn minimize_rank(p: &MarginalVector, f: &PenaltySpec) -> Result<RankRiskReport> {
    minimize_rank_with(p, f, RankOptions::default())
}

pub fn minimize_rank_with(
    p: &MarginalVector,
    f: &PenaltySpec,
    opts: RankOptions,
) -> Result<RankRiskReport> {
    let m = p.len();
    if f.label_count() != m {
        return Err(Error::DimensionMismatch { expected: m, got: f.label_count() });
    }
    let order = sort_descending(p);
    let ps: Vec<f64> = order.iter().map(|&i| p.get(i)).collect();

    let mut curve = Vec::with_capacity(m + 1);
    curve.push(RankCandidate {
        d: 0,
        selection: BoundarySelection::Empty,
        expected_rank_loss: 0.0,
        total: f.value(m),
    });
    if opts.include_single {
        curve.push(RankCandidate {
            d: 1,
            selection: BoundarySelection::Single,
            expected_rank_loss: 0.0,
            total: f.value(m - 1),
        });
    }

    if m >= 2 {
        // Greedy chain from ⟪1, m⟫. Each step inserts the cheaper of the two
        // inner boundary positions; the expected loss, the uncovered prefix
        // mass and the covered suffix mass update in O(1).
        let (mut a, mut b) = (1usize, m);
        let mut expected = ps[m - 1] * (1.0 - ps[0]);
        let mut left_comp = 1.0 - ps[0]; // sum of 1 - p over {1..=a}
        let mut right_prob = ps[m - 1]; // sum of p over {b..=m}
        curve.push(RankCandidate {
            d: 2,
            selection: BoundarySelection::TwoSided { a, b },
            expected_rank_loss: expected,
            total: expected + f.value(m - 2),
        });
        for d in 3..=m {
            let grow_left = ps[a] * left_comp + (1.0 - ps[a]) * right_prob;
            let grow_right = ps[b - 2] * left_comp + (1.0 - ps[b - 2]) * right_prob;
            if grow_left <= grow_right {
                expected += grow_left;
                left_comp += 1.0 - ps[a];
                a += 1;
            } else {
                expected += grow_right;
                b -= 1;
                right_prob += ps[b - 1];
            }
            curve.push(RankCandidate {
                d,
                selection: BoundarySelection::TwoSided { a, b },
                expected_rank_loss: expected,
                total: expected + f.value(m - d),
            });
        }
    }

    // Ties across sizes go to the larger d.
    let mut best = 0;
    for i in 1..curve.len() {
        if curve[i].total <= curve[best].total {
            best = i;
        }
    }
    let selection = curve[best].selection;
    let labels: Vec<usize> = selection.positions(m).iter().map(|&pos| order[pos]).collect();
    Ok(RankRiskReport {
        ranking: PartialRanking::new(labels)?,
        selection,
        expected_loss: curve[best].total,
        per_d_curve: curve,
    })
}
