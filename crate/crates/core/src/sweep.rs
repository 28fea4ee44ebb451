//! Cross-validated cost sweeps: train per fold, minimize on the test split
//! across a grid of abstention costs, and report the partial-abstention
//! series next to the full-prediction (MLC) and full-abstention (ABS)
//! baselines.
//!
//! Reported losses follow the usual normalizations: Hamming as
//! `mean loss * 100 / m`, rank loss as `mean loss / m`, abstention size as a
//! percentage of `m`. F-measure sweeps report the expected/realized F itself
//! (higher is better).

use std::fmt;
use std::str::FromStr;

use crate::data::{kfold, Dataset};
use crate::error::{Error, Result};
use crate::fmeasure::{maximize_f_abstain, maximize_f_full};
use crate::hamming::minimize_hamming;
use crate::loss;
use crate::par;
use crate::penalty::PenaltySpec;
use crate::rank::{minimize_rank, sort_descending};
use crate::trainer::{train, TrainConfig};
use crate::types::{GroundTruth, LossKind, MarginalVector, PartialLabeling, PartialRanking};

/// Penalty family of an experiment series: linear (SEP) or concave (PAR).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PenaltyFamily {
    Sep,
    Par,
}

impl PenaltyFamily {
    pub fn build(self, label_count: usize, cost: f64) -> Result<PenaltySpec> {
        match self {
            PenaltyFamily::Sep => PenaltySpec::linear(label_count, cost),
            PenaltyFamily::Par => PenaltySpec::concave(label_count, cost),
        }
    }
}

impl fmt::Display for PenaltyFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PenaltyFamily::Sep => "sep",
            PenaltyFamily::Par => "par",
        })
    }
}

impl FromStr for PenaltyFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sep" => Ok(PenaltyFamily::Sep),
            "par" => Ok(PenaltyFamily::Par),
            other => Err(Error::invalid(format!("unknown penalty {other:?}, expected sep|par"))),
        }
    }
}

/// Inclusive arithmetic cost grid `start, start + step, ..., stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl CostGrid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err(Error::invalid("grid bounds must be finite"));
        }
        if start < 0.0 || stop < start || step <= 0.0 {
            return Err(Error::invalid(format!(
                "grid needs 0 <= start <= stop and step > 0, got {start}:{stop}:{step}"
            )));
        }
        Ok(Self { start, stop, step })
    }

    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| {
                // Snap accumulated float error so emitted costs print cleanly.
                let c = self.start + i as f64 * self.step;
                (c * 1e10).round() / 1e10
            })
            .collect()
    }
}

impl FromStr for CostGrid {
    type Err = Error;

    /// Parses `start:stop:step`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::invalid(format!("grid must be start:stop:step, got {s:?}")));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| Error::invalid(format!("bad grid number {p:?}"))))
            .collect::<Result<_>>()?;
        CostGrid::new(nums[0], nums[1], nums[2])
    }
}

/// Which curve a result row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Series {
    /// The partial-abstention risk minimizer.
    Partial,
    /// Full prediction baseline.
    Mlc,
    /// Full abstention baseline.
    Abs,
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Series::Partial => "partial",
            Series::Mlc => "mlc",
            Series::Abs => "abs",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub loss: LossKind,
    pub penalty: PenaltyFamily,
    pub grid: CostGrid,
    pub folds: usize,
    pub seed: u64,
    pub train: TrainConfig,
}

/// One aggregated result: a (series, cost, fold) cell.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub loss: LossKind,
    pub penalty: PenaltyFamily,
    pub series: Series,
    pub cost: f64,
    pub fold: usize,
    /// Mean generalized loss (penalty included), normalized as in the module
    /// docs. For `f1` this is the generalized F-measure, higher is better.
    pub gen_loss: f64,
    /// Mean loss on the decided part only, same normalization.
    pub partial_loss: f64,
    /// Mean abstention size as a percentage of the label count.
    pub abstention_pct: f64,
}

/// Fixed-order CSV emission of sweep rows.
pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("loss,penalty,series,c,fold,gen_loss,partial_loss,abstention_pct\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.loss, r.penalty, r.series, r.cost, r.fold, r.gen_loss, r.partial_loss, r.abstention_pct
        ));
    }
    out
}

/// Per-instance evaluation result, pre-normalization.
struct Outcome {
    gen: f64,
    partial: f64,
    abstained: usize,
}

/// Cross-validated sweep on a labeled dataset: trains one model per fold,
/// then scores realized losses on the held-out rows for every grid cost.
/// Rows come out in canonical order: series, then cost, then fold.
pub fn run_sweep_dataset(ds: &Dataset, cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let costs = cfg.grid.points();
    if cfg.folds < 2 {
        return Err(Error::invalid("sweep needs at least 2 folds"));
    }
    let plan = kfold(ds.len(), cfg.folds, cfg.seed)?;
    let m = ds.label_count();

    // One model per fold; the marginals of each held-out row are reused for
    // every grid point.
    let folds: Vec<(Vec<MarginalVector>, Vec<GroundTruth>)> = par::map_range(
        plan.fold_count(),
        |fold| {
            let train_ds = ds.subset(&plan.train_rows(fold)).expect("nonempty train split");
            let model = train(&train_ds, &cfg.train).expect("training validated inputs");
            let test = plan.test_rows(fold);
            let marginals: Vec<MarginalVector> = test
                .iter()
                .map(|&row| model.predict_marginals(ds.features(row)).expect("dims match"))
                .collect();
            let truths: Vec<GroundTruth> = test.iter().map(|&row| ds.truth(row)).collect();
            (marginals, truths)
        },
    );

    let mut rows = Vec::new();
    for series in [Series::Partial, Series::Mlc, Series::Abs] {
        for &c in &costs {
            let f = cfg.penalty.build(m, c)?;
            for (fold, (marginals, truths)) in folds.iter().enumerate() {
                let outcomes = par::map_range(marginals.len(), |i| {
                    realized_outcome(cfg.loss, series, &marginals[i], &truths[i], &f)
                });
                rows.push(aggregate(cfg, series, c, fold, m, &outcomes));
            }
        }
    }
    Ok(rows)
}

/// Sweep directly on given marginals (perfect-calibration mode): no training
/// or folds; scores are exact expectations under the marginals themselves.
/// The fold column is always 0.
pub fn run_sweep_marginals(marginals: &[MarginalVector], cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let Some(first) = marginals.first() else {
        return Err(Error::invalid("no marginal rows"));
    };
    let m = first.len();
    if marginals.iter().any(|r| r.len() != m) {
        return Err(Error::invalid("marginal rows must all have the same width"));
    }
    let costs = cfg.grid.points();
    let mut rows = Vec::new();
    for series in [Series::Partial, Series::Mlc, Series::Abs] {
        for &c in &costs {
            let f = cfg.penalty.build(m, c)?;
            let outcomes =
                par::map_slice(marginals, |p| expected_outcome(cfg.loss, series, p, &f));
            rows.push(aggregate(cfg, series, c, 0, m, &outcomes));
        }
    }
    Ok(rows)
}

fn aggregate(
    cfg: &SweepConfig,
    series: Series,
    cost: f64,
    fold: usize,
    m: usize,
    outcomes: &[Outcome],
) -> SweepRow {
    let n = outcomes.len() as f64;
    let mean_gen = outcomes.iter().map(|o| o.gen).sum::<f64>() / n;
    let mean_partial = outcomes.iter().map(|o| o.partial).sum::<f64>() / n;
    let mean_abst = outcomes.iter().map(|o| o.abstained as f64).sum::<f64>() / n;
    let (gen_loss, partial_loss) = match cfg.loss {
        LossKind::Hamming => (mean_gen * 100.0 / m as f64, mean_partial * 100.0 / m as f64),
        LossKind::Rank => (mean_gen / m as f64, mean_partial / m as f64),
        LossKind::FMeasure => (mean_gen, mean_partial),
    };
    SweepRow {
        loss: cfg.loss,
        penalty: cfg.penalty,
        series,
        cost,
        fold,
        gen_loss,
        partial_loss,
        abstention_pct: mean_abst * 100.0 / m as f64,
    }
}

fn threshold_bits(p: &MarginalVector) -> Vec<bool> {
    p.iter().map(|&pi| pi > 0.5).collect()
}

fn realized_outcome(
    kind: LossKind,
    series: Series,
    p: &MarginalVector,
    y: &GroundTruth,
    f: &PenaltySpec,
) -> Outcome {
    let m = p.len();
    match (kind, series) {
        (LossKind::Hamming, Series::Partial) => {
            let r = minimize_hamming(p, f).expect("validated");
            let raw = loss::decided_mistakes(y, &r.prediction) as f64;
            let a = r.prediction.abstention_count();
            Outcome { gen: raw + f.eval(a).expect("a <= m"), partial: raw, abstained: a }
        }
        (LossKind::Hamming, Series::Mlc) => {
            let pred = PartialLabeling::from_bits(&threshold_bits(p)).expect("m >= 1");
            let raw = loss::decided_mistakes(y, &pred) as f64;
            Outcome { gen: raw, partial: raw, abstained: 0 }
        }
        (LossKind::Rank, Series::Partial) => {
            let r = minimize_rank(p, f).expect("validated");
            let raw = loss::rank_loss(y, &r.ranking).expect("valid indices") as f64;
            let a = m - r.ranking.len();
            Outcome { gen: raw + f.eval(a).expect("a <= m"), partial: raw, abstained: a }
        }
        (LossKind::Rank, Series::Mlc) => {
            let full = PartialRanking::new(sort_descending(p)).expect("distinct");
            let raw = loss::rank_loss(y, &full).expect("valid indices") as f64;
            Outcome { gen: raw, partial: raw, abstained: 0 }
        }
        (LossKind::FMeasure, Series::Partial) => {
            let r = maximize_f_abstain(p, f).expect("validated");
            let a = r.prediction.abstention_count();
            let gen = loss::generalized_f(y, &r.prediction, f).expect("validated");
            Outcome { gen, partial: gen + f.eval(a).expect("a <= m"), abstained: a }
        }
        (LossKind::FMeasure, Series::Mlc) => {
            let r = maximize_f_full(p);
            let gen = loss::generalized_f(y, &r.prediction, f).expect("validated");
            Outcome { gen, partial: gen, abstained: 0 }
        }
        (_, Series::Abs) => abstention_outcome(kind, m, f),
    }
}

fn expected_outcome(kind: LossKind, series: Series, p: &MarginalVector, f: &PenaltySpec) -> Outcome {
    let m = p.len();
    match (kind, series) {
        (LossKind::Hamming, Series::Partial) => {
            let r = minimize_hamming(p, f).expect("validated");
            let a = r.prediction.abstention_count();
            let penalty = f.eval(a).expect("a <= m");
            Outcome { gen: r.expected_loss, partial: r.expected_loss - penalty, abstained: a }
        }
        (LossKind::Hamming, Series::Mlc) => {
            let expected: f64 = p.iter().map(|&pi| pi.min(1.0 - pi)).sum();
            Outcome { gen: expected, partial: expected, abstained: 0 }
        }
        (LossKind::Rank, Series::Partial) => {
            let r = minimize_rank(p, f).expect("validated");
            let a = m - r.ranking.len();
            let penalty = f.eval(a).expect("a <= m");
            Outcome { gen: r.expected_loss, partial: r.expected_loss - penalty, abstained: a }
        }
        (LossKind::Rank, Series::Mlc) => {
            let expected = full_ranking_expected_loss(p);
            Outcome { gen: expected, partial: expected, abstained: 0 }
        }
        (LossKind::FMeasure, Series::Partial) => {
            let r = maximize_f_abstain(p, f).expect("validated");
            let a = r.prediction.abstention_count();
            let penalty = f.eval(a).expect("a <= m");
            Outcome { gen: r.expected_value, partial: r.expected_value + penalty, abstained: a }
        }
        (LossKind::FMeasure, Series::Mlc) => {
            let r = maximize_f_full(p);
            Outcome { gen: r.expected_value, partial: r.expected_value, abstained: 0 }
        }
        (_, Series::Abs) => abstention_outcome(kind, m, f),
    }
}

fn abstention_outcome(kind: LossKind, m: usize, f: &PenaltySpec) -> Outcome {
    let fm = f.eval(m).expect("m <= m");
    match kind {
        LossKind::Hamming | LossKind::Rank => Outcome { gen: fm, partial: 0.0, abstained: m },
        LossKind::FMeasure => Outcome { gen: 1.0 - fm, partial: 1.0, abstained: m },
    }
}

/// Expected rank loss of the full descending-probability ranking, via prefix
/// sums of `1 - p` over the sorted order.
fn full_ranking_expected_loss(p: &MarginalVector) -> f64 {
    let order = sort_descending(p);
    let mut above = 0.0; // sum of (1 - p) over already-placed positions
    let mut total = 0.0;
    for &i in &order {
        total += p.get(i) * above;
        above += 1.0 - p.get(i);
    }
    total
}
