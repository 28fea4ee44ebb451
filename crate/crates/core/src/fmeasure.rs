//! Expected-F computation and maximization, with and without abstention.
//!
//! Everything runs on the probability-sorted labels. `Q(k, k1)` is the
//! Poisson-binomial chance that the top `k` labels contain exactly `k1`
//! relevant ones; `S(k, k1, l)` folds the suffix distribution from position
//! `l` on into the harmonic denominators of the F-measure. Candidate decision
//! sets are prefix-plus-suffix windows `⟪k, l⟫`: top `k` predicted relevant,
//! positions `l..=m` predicted irrelevant, the gap abstained.

use crate::error::{Error, Result};
use crate::penalty::PenaltySpec;
use crate::rank::sort_descending;
use crate::types::{LabelPrediction, MarginalVector, PartialLabeling};

/// Running compensated sum; the per-candidate scores are reduced over up to
/// `m` products and feed 1e-9 comparisons against enumeration.
#[derive(Debug, Default, Clone, Copy)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum
    }
}

/// Distribution of the relevant-label count among each sorted prefix.
#[derive(Debug, Clone)]
pub struct PrefixCountTable {
    rows: Vec<Vec<f64>>,
}

impl PrefixCountTable {
    pub fn label_count(&self) -> usize {
        self.rows.len() - 1
    }

    /// `P(top-k contains exactly k1 relevant labels)`; zero outside `0..=k`.
    pub fn get(&self, k: usize, k1: isize) -> f64 {
        if k1 < 0 || k1 > k as isize {
            0.0
        } else {
            self.rows[k][k1 as usize]
        }
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.rows[k]
    }
}

/// Builds the prefix-count table for probabilities already sorted descending.
/// `O(m^2)` time and space.
pub fn build_prefix_counts(p_sorted: &MarginalVector) -> PrefixCountTable {
    let m = p_sorted.len();
    let mut rows = Vec::with_capacity(m + 1);
    rows.push(vec![1.0]);
    for k in 1..=m {
        let pk = p_sorted.get(k - 1);
        let prev = &rows[k - 1];
        let mut row = vec![0.0; k + 1];
        for k1 in 0..=k {
            let stay = if k1 < prev.len() { prev[k1] * (1.0 - pk) } else { 0.0 };
            let step = if k1 >= 1 { prev[k1 - 1] * pk } else { 0.0 };
            row[k1] = stay + step;
        }
        rows.push(row);
    }
    PrefixCountTable { rows }
}

/// Rolling suffix table for a fixed `k`: entry `k1` holds
/// `S(k, k1, l) = sum over k2 of P(suffix count = k2) / (k + k1 + k2)`
/// for the current suffix start `l`. Created at `l = m + 1` (empty suffix)
/// and advanced one position left at a time.
#[derive(Debug, Clone)]
pub struct SuffixWeightTable {
    values: Vec<f64>,
    suffix_start: usize,
}

impl SuffixWeightTable {
    /// `k >= 1`; at `l = m + 1` the table is `S(k, k1) = 1 / (k + k1)`.
    pub fn new(k: usize, m: usize) -> Self {
        assert!(k >= 1, "suffix table needs k >= 1");
        let values = (0..=m).map(|i| 1.0 / (k + i) as f64).collect();
        Self { values, suffix_start: m + 1 }
    }

    pub fn suffix_start(&self) -> usize {
        self.suffix_start
    }

    /// Absorbs the label at position `suffix_start - 1`, whose relevance
    /// probability is `p`, moving the suffix start one to the left.
    pub fn advance(&mut self, p: f64) {
        debug_assert!(self.suffix_start >= 2);
        self.suffix_start -= 1;
        for i in 0..self.suffix_start {
            self.values[i] = p * self.values[i + 1] + (1.0 - p) * self.values[i];
        }
    }

    pub fn get(&self, k1: usize) -> f64 {
        self.values[k1]
    }
}

/// `2 * sum over k1 of k1 * Q(k, k1) * S(k, k1)` for the current suffix.
fn raw_f(q_row: &[f64], suffix: &SuffixWeightTable) -> f64 {
    let mut acc = KahanSum::default();
    for (k1, &q) in q_row.iter().enumerate().skip(1) {
        acc.add(k1 as f64 * q * suffix.get(k1));
    }
    2.0 * acc.value()
}

/// Expected F-measure of the full prediction marking the top `k` labels
/// relevant. `k = 0` is the probability that no label is relevant, under the
/// empty-match convention.
pub fn expected_f_full(p: &MarginalVector, k: usize) -> Result<f64> {
    let m = p.len();
    if k > m {
        return Err(Error::invalid(format!("k = {k} out of range for {m} labels")));
    }
    if k == 0 {
        return Ok(p.iter().map(|&pi| 1.0 - pi).product());
    }
    let order = sort_descending(p);
    let ps = MarginalVector::new(order.iter().map(|&i| p.get(i)).collect())?;
    let q = build_prefix_counts(&ps);
    let mut suffix = SuffixWeightTable::new(k, m);
    for l in ((k + 1)..=m).rev() {
        suffix.advance(ps.get(l - 1));
    }
    Ok(raw_f(q.row(k), &suffix))
}

/// Result of an expected-F maximization.
#[derive(Debug, Clone)]
pub struct FMaxReport {
    pub prediction: PartialLabeling,
    /// Expected (generalized) F-measure of `prediction`, penalty included.
    pub expected_value: f64,
    /// Number of labels predicted relevant.
    pub k_star: usize,
    /// Sorted position where the predicted-irrelevant suffix starts;
    /// `m + 1` when no label is predicted irrelevant.
    pub l_star: usize,
    /// All `(k, l, value)` candidates, only kept on request.
    pub per_kl_grid: Option<Vec<(usize, usize, f64)>>,
}

/// Options for [`maximize_f_abstain_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct FOptions {
    /// Restrict `k = 0` to full abstention. Under the empty-match convention
    /// an all-zero decided suffix can win, so the extra candidates are on by
    /// default; this switch reproduces the bare candidate grid instead.
    pub skip_zero_suffix: bool,
    /// Retain the full `(k, l)` value grid in the report. Off by default to
    /// keep memory at `O(m)`.
    pub keep_grid: bool,
}

/// Expected-F maximizer over full predictions: evaluates every top-k
/// prediction and keeps the best, ties toward smaller `k`.
pub fn maximize_f_full(p: &MarginalVector) -> FMaxReport {
    let m = p.len();
    let order = sort_descending(p);
    let ps: Vec<f64> = order.iter().map(|&i| p.get(i)).collect();
    let sorted = MarginalVector::new(ps.clone()).expect("validated");
    let q = build_prefix_counts(&sorted);

    let values = crate::par::map_range(m, |i| {
        let k = i + 1;
        let mut suffix = SuffixWeightTable::new(k, m);
        for l in ((k + 1)..=m).rev() {
            suffix.advance(ps[l - 1]);
        }
        raw_f(q.row(k), &suffix)
    });

    let mut best_k = 0;
    let mut best_value: f64 = ps.iter().map(|&pi| 1.0 - pi).product();
    for (i, &v) in values.iter().enumerate() {
        if v > best_value {
            best_value = v;
            best_k = i + 1;
        }
    }

    let mut entries = vec![LabelPrediction::Zero; m];
    for pos in 0..best_k {
        entries[order[pos]] = LabelPrediction::One;
    }
    FMaxReport {
        prediction: PartialLabeling::new(entries).expect("m >= 1"),
        expected_value: best_value,
        k_star: best_k,
        l_star: best_k + 1,
        per_kl_grid: None,
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    value: f64,
    abstained: usize,
    k: usize,
    l: usize,
}

/// `b` replaces `a` when it scores higher; ties prefer fewer abstentions,
/// then smaller `k`.
fn improves(a: &Candidate, b: &Candidate) -> bool {
    b.value > a.value
        || (b.value == a.value
            && (b.abstained < a.abstained || (b.abstained == a.abstained && b.k < a.k)))
}

/// Expected-F maximizer over partial predictions: evaluates every window
/// `⟪k, l⟫` (top `k` relevant, suffix from `l` irrelevant, gap abstained)
/// plus full abstention, in `O(m^3)` total. The per-`k` scans run in
/// parallel with the `parallel` feature; the result does not depend on
/// scheduling.
pub fn maximize_f_abstain(p: &MarginalVector, f: &PenaltySpec) -> Result<FMaxReport> {
    maximize_f_abstain_with(p, f, FOptions::default())
}

pub fn maximize_f_abstain_with(
    p: &MarginalVector,
    f: &PenaltySpec,
    opts: FOptions,
) -> Result<FMaxReport> {
    let m = p.len();
    if f.label_count() != m {
        return Err(Error::DimensionMismatch { expected: m, got: f.label_count() });
    }
    let order = sort_descending(p);
    let ps: Vec<f64> = order.iter().map(|&i| p.get(i)).collect();
    let sorted = MarginalVector::new(ps.clone()).expect("validated");
    let q = build_prefix_counts(&sorted);

    // Full abstention is always a candidate: F is 1 on an empty decided set.
    let mut best =
        Candidate { value: 1.0 - f.value(m), abstained: m, k: 0, l: m + 1 };
    let mut grid: Option<Vec<(usize, usize, f64)>> =
        if opts.keep_grid { Some(vec![(0, m + 1, best.value)]) } else { None };

    if !opts.skip_zero_suffix {
        // k = 0 with a decided all-zero suffix: scores the probability that
        // the suffix is entirely irrelevant.
        let mut zero_prob = 1.0;
        let mut extras = Vec::with_capacity(m);
        for l in (1..=m).rev() {
            zero_prob *= 1.0 - ps[l - 1];
            extras.push(Candidate {
                value: zero_prob - f.value(l - 1),
                abstained: l - 1,
                k: 0,
                l,
            });
        }
        for cand in extras {
            if let Some(g) = grid.as_mut() {
                g.push((cand.k, cand.l, cand.value));
            }
            if improves(&best, &cand) {
                best = cand;
            }
        }
    }

    let per_k = crate::par::map_range(m, |i| {
        let k = i + 1;
        let q_row = q.row(k);
        let mut suffix = SuffixWeightTable::new(k, m);
        let mut rows = Vec::with_capacity(m - k + 1);
        rows.push(Candidate {
            value: raw_f(q_row, &suffix) - f.value(m - k),
            abstained: m - k,
            k,
            l: m + 1,
        });
        for l in ((k + 1)..=m).rev() {
            suffix.advance(ps[l - 1]);
            rows.push(Candidate {
                value: raw_f(q_row, &suffix) - f.value(l - k - 1),
                abstained: l - k - 1,
                k,
                l,
            });
        }
        rows
    });
    for rows in &per_k {
        for cand in rows {
            if let Some(g) = grid.as_mut() {
                g.push((cand.k, cand.l, cand.value));
            }
            if improves(&best, cand) {
                best = *cand;
            }
        }
    }

    let mut entries = vec![LabelPrediction::Abstain; m];
    for pos in 0..best.k {
        entries[order[pos]] = LabelPrediction::One;
    }
    for pos in (best.l - 1)..m {
        entries[order[pos]] = LabelPrediction::Zero;
    }
    Ok(FMaxReport {
        prediction: PartialLabeling::new(entries)?,
        expected_value: best.value,
        k_star: best.k,
        l_star: best.l,
        per_kl_grid: grid,
    })
}
