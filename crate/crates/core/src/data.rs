//! Dataset ingestion, synthetic generation under label independence, and
//! cross-validation splitting.
//!
//! The CSV schema is a header `f0,...,f{d-1},l0,...,l{m-1}` followed by one
//! row per instance; labels must be 0 or 1. Marginal-matrix files use the
//! same convention with columns `p0,...,p{m-1}`.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::types::{GroundTruth, MarginalVector};

/// A feature matrix with binary label matrix and, for synthetic data, the
/// true marginals each label was sampled from.
#[derive(Debug, Clone)]
pub struct Dataset {
    n: usize,
    feature_dim: usize,
    label_count: usize,
    features: Vec<f64>,
    labels: Vec<bool>,
    true_marginals: Option<Vec<f64>>,
}

impl Dataset {
    pub fn new(
        feature_dim: usize,
        label_count: usize,
        features: Vec<f64>,
        labels: Vec<bool>,
    ) -> Result<Self> {
        if feature_dim == 0 || label_count == 0 {
            return Err(Error::invalid("feature and label dimensions must be positive"));
        }
        if !features.len().is_multiple_of(feature_dim) {
            return Err(Error::invalid("feature matrix size is not a multiple of the dimension"));
        }
        let n = features.len() / feature_dim;
        if n == 0 {
            return Err(Error::invalid("dataset must contain at least one row"));
        }
        if labels.len() != n * label_count {
            return Err(Error::DimensionMismatch { expected: n * label_count, got: labels.len() });
        }
        Ok(Self { n, feature_dim, label_count, features, labels, true_marginals: None })
    }

    pub fn with_true_marginals(mut self, marginals: Vec<f64>) -> Result<Self> {
        if marginals.len() != self.n * self.label_count {
            return Err(Error::DimensionMismatch {
                expected: self.n * self.label_count,
                got: marginals.len(),
            });
        }
        self.true_marginals = Some(marginals);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false // n >= 1 by construction
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn label_count(&self) -> usize {
        self.label_count
    }

    pub fn features(&self, row: usize) -> &[f64] {
        &self.features[row * self.feature_dim..(row + 1) * self.feature_dim]
    }

    pub fn labels(&self, row: usize) -> &[bool] {
        &self.labels[row * self.label_count..(row + 1) * self.label_count]
    }

    pub fn truth(&self, row: usize) -> GroundTruth {
        GroundTruth::new(self.labels(row).to_vec()).expect("m >= 1")
    }

    pub fn true_marginals(&self, row: usize) -> Option<&[f64]> {
        self.true_marginals
            .as_ref()
            .map(|m| &m[row * self.label_count..(row + 1) * self.label_count])
    }

    pub fn has_true_marginals(&self) -> bool {
        self.true_marginals.is_some()
    }

    /// New dataset holding the given rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Result<Dataset> {
        if rows.is_empty() {
            return Err(Error::invalid("subset must keep at least one row"));
        }
        let mut features = Vec::with_capacity(rows.len() * self.feature_dim);
        let mut labels = Vec::with_capacity(rows.len() * self.label_count);
        let mut marginals = self.true_marginals.as_ref().map(|_| Vec::new());
        for &r in rows {
            if r >= self.n {
                return Err(Error::invalid(format!("row index {r} out of range")));
            }
            features.extend_from_slice(self.features(r));
            labels.extend_from_slice(self.labels(r));
            if let Some(out) = marginals.as_mut() {
                out.extend_from_slice(self.true_marginals(r).expect("present"));
            }
        }
        let ds = Dataset::new(self.feature_dim, self.label_count, features, labels)?;
        match marginals {
            Some(m) => ds.with_true_marginals(m),
            None => Ok(ds),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (0..self.feature_dim)
            .map(|j| format!("f{j}"))
            .chain((0..self.label_count).map(|j| format!("l{j}")))
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in 0..self.n {
            let mut fields: Vec<String> =
                self.features(row).iter().map(|v| v.to_string()).collect();
            fields.extend(self.labels(row).iter().map(|&b| if b { "1" } else { "0" }.to_string()));
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// The stored true marginals as a `p0..p{m-1}` CSV, when present.
    pub fn true_marginals_csv(&self) -> Option<String> {
        let marginals = self.true_marginals.as_ref()?;
        let mut out = String::new();
        let header: Vec<String> = (0..self.label_count).map(|j| format!("p{j}")).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in 0..self.n {
            let fields: Vec<String> = marginals
                [row * self.label_count..(row + 1) * self.label_count]
                .iter()
                .map(|v| v.to_string())
                .collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        Some(out)
    }
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    parse_csv(&std::fs::read_to_string(path)?)
}

pub fn parse_csv(text: &str) -> Result<Dataset> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, message: "empty file".into() })?;
    let columns: Vec<&str> = header.trim_end_matches('\r').split(',').map(str::trim).collect();
    let feature_dim = columns.iter().take_while(|c| c.starts_with('f')).count();
    let label_count = columns.len() - feature_dim;
    for (j, col) in columns.iter().enumerate() {
        let expected =
            if j < feature_dim { format!("f{j}") } else { format!("l{}", j - feature_dim) };
        if *col != expected {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected column {expected:?}, found {col:?}"),
            });
        }
    }
    if feature_dim == 0 || label_count == 0 {
        return Err(Error::Parse {
            line: 1,
            message: "header must declare feature columns f0.. and label columns l0..".into(),
        });
    }

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut rows = 0;
    for (idx, raw) in lines {
        let line = idx + 1;
        let trimmed = raw.trim_end_matches('\r');
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != columns.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", columns.len(), fields.len()),
            });
        }
        for (j, field) in fields.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("column {:?}: cannot parse {field:?} as a number", columns[j]),
            })?;
            if j < feature_dim {
                features.push(value);
            } else if value == 0.0 || value == 1.0 {
                labels.push(value == 1.0);
            } else {
                return Err(Error::Parse {
                    line,
                    message: format!(
                        "column {:?}: label must be 0 or 1, found {field:?}",
                        columns[j]
                    ),
                });
            }
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Parse { line: 1, message: "no data rows".into() });
    }
    Dataset::new(feature_dim, label_count, features, labels)
}

pub fn load_marginals_csv(path: impl AsRef<Path>) -> Result<Vec<MarginalVector>> {
    parse_marginals_csv(&std::fs::read_to_string(path)?)
}

pub fn parse_marginals_csv(text: &str) -> Result<Vec<MarginalVector>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, message: "empty file".into() })?;
    let columns: Vec<&str> = header.trim_end_matches('\r').split(',').map(str::trim).collect();
    for (j, col) in columns.iter().enumerate() {
        if *col != format!("p{j}") {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected column \"p{j}\", found {col:?}"),
            });
        }
    }
    let mut out = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let trimmed = raw.trim_end_matches('\r');
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != columns.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", columns.len(), fields.len()),
            });
        }
        let mut probs = Vec::with_capacity(fields.len());
        for (j, field) in fields.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("column \"p{j}\": cannot parse {field:?} as a number"),
            })?;
            probs.push(value);
        }
        out.push(MarginalVector::new(probs).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?);
    }
    if out.is_empty() {
        return Err(Error::Parse { line: 1, message: "no data rows".into() });
    }
    Ok(out)
}

pub fn marginals_to_csv(rows: &[MarginalVector]) -> String {
    let m = rows.first().map_or(0, MarginalVector::len);
    let mut out = String::new();
    let header: Vec<String> = (0..m).map(|j| format!("p{j}")).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for r in rows {
        let fields: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Synthetic dataset with labels independent given the features: standard
/// normal features, one random logistic model per label, each label sampled
/// from its own marginal. The sampling marginals are stored alongside.
/// Deterministic for a fixed seed.
pub fn synth(m: usize, n: usize, d: usize, seed: u64) -> Result<Dataset> {
    if m == 0 || n == 0 || d == 0 {
        return Err(Error::invalid("synthetic dataset sizes must be positive"));
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let scale = 2.0 / (d as f64).sqrt();
    let weights: Vec<f64> =
        (0..m * d).map(|_| rng.sample::<f64, _>(StandardNormal) * scale).collect();
    let biases: Vec<f64> =
        (0..m).map(|_| rng.sample::<f64, _>(StandardNormal) * 0.5).collect();

    let mut features = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n * m);
    let mut marginals = Vec::with_capacity(n * m);
    for _ in 0..n {
        let x: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        features.extend_from_slice(&x);
        for label in 0..m {
            let z = biases[label]
                + weights[label * d..(label + 1) * d]
                    .iter()
                    .zip(&x)
                    .map(|(w, xi)| w * xi)
                    .sum::<f64>();
            let p = 1.0 / (1.0 + (-z).exp());
            marginals.push(p);
            labels.push(rng.gen::<f64>() < p);
        }
    }
    Dataset::new(d, m, features, labels)?.with_true_marginals(marginals)
}

/// A shuffled partition of `0..n` into `k` folds of near-equal size.
#[derive(Debug, Clone)]
pub struct FoldPlan {
    folds: Vec<Vec<usize>>,
}

pub fn kfold(n: usize, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 || k > n {
        return Err(Error::invalid(format!("fold count must satisfy 2 <= k <= n, got k={k} n={n}")));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    // Fisher-Yates, explicit so the plan is stable across dependency bumps.
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        indices.swap(i, j);
    }
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        folds.push(indices[start..start + size].to_vec());
        start += size;
    }
    Ok(FoldPlan { folds })
}

impl FoldPlan {
    pub fn fold_count(&self) -> usize {
        self.folds.len()
    }

    pub fn test_rows(&self, fold: usize) -> &[usize] {
        &self.folds[fold]
    }

    /// All rows outside the fold, ascending.
    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        let mut rows: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != fold)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        rows.sort_unstable();
        rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip() {
        let ds = synth(2, 7, 3, 42).unwrap();
        let text = ds.to_csv();
        let back = parse_csv(&text).unwrap();
        assert_eq!(back.to_csv(), text);
        assert_eq!(back.len(), 7);
        assert_eq!(back.feature_dim(), 3);
        assert_eq!(back.label_count(), 2);
    }

    #[test]
    fn csv_parse_basics() {
        let ds = parse_csv("f0,f1,l0,l1\n0.5,1,1,0\n-2,0.25,0,0\n3,4,1,1\n").unwrap();
        assert_eq!((ds.len(), ds.feature_dim(), ds.label_count()), (3, 2, 2));
        assert_eq!(ds.labels(0), &[true, false]);

        let bad = parse_csv("f0,l0\n1.0,2\n");
        match bad {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("l0"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }

        assert!(parse_csv("").is_err());
        assert!(parse_csv("f0,l0\n").is_err()); // header only
        assert!(parse_csv("x0,l0\n1,0\n").is_err()); // bad header
    }

    #[test]
    fn crlf_accepted() {
        let ds = parse_csv("f0,l0\r\n1.5,1\r\n").unwrap();
        assert_eq!(ds.len(), 1);
        assert!(ds.labels(0)[0]);
    }

    #[test]
    fn synth_is_deterministic() {
        let a = synth(2, 4, 3, 7).unwrap();
        let b = synth(2, 4, 3, 7).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.true_marginals_csv(), b.true_marginals_csv());
        let c = synth(2, 4, 3, 8).unwrap();
        assert_ne!(a.to_csv(), c.to_csv());
    }

    #[test]
    fn synth_rejects_degenerate_sizes() {
        assert!(synth(2, 4, 0, 7).is_err());
        assert!(synth(0, 4, 3, 7).is_err());
        assert!(synth(2, 0, 3, 7).is_err());
    }

    #[test]
    fn synth_label_frequencies_match_marginals() {
        let n = 100_000;
        let ds = synth(3, n, 4, 11).unwrap();
        for label in 0..3 {
            let mut freq = 0.0;
            let mut mean_p = 0.0;
            for row in 0..n {
                freq += f64::from(ds.labels(row)[label]);
                mean_p += ds.true_marginals(row).unwrap()[label];
            }
            freq /= n as f64;
            mean_p /= n as f64;
            // Three standard errors of a Bernoulli mean.
            let se = (mean_p * (1.0 - mean_p) / n as f64).sqrt();
            assert!(
                (freq - mean_p).abs() <= 3.0 * se.max(1e-4),
                "label {label}: freq={freq} mean_p={mean_p}"
            );
        }
    }

    #[test]
    fn marginals_csv_roundtrip() {
        let rows = vec![
            MarginalVector::new(vec![0.9, 0.8, 0.7, 0.3]).unwrap(),
            MarginalVector::new(vec![0.1, 0.2, 0.5, 1.0]).unwrap(),
        ];
        let text = marginals_to_csv(&rows);
        let back = parse_marginals_csv(&text).unwrap();
        assert_eq!(back, rows);
        assert!(parse_marginals_csv("p0\n1.5\n").is_err());
    }

    #[test]
    fn kfold_examples() {
        let plan = kfold(10, 10, 0).unwrap();
        assert!(plan.folds.iter().all(|f| f.len() == 1));

        let plan = kfold(11, 10, 0).unwrap();
        let mut sizes: Vec<usize> = plan.folds.iter().map(Vec::len).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 1, 1, 1, 1, 1, 1, 1, 1, 2]);

        assert_eq!(kfold(20, 5, 3).unwrap().folds, kfold(20, 5, 3).unwrap().folds);
        assert!(kfold(5, 1, 0).is_err());
        assert!(kfold(5, 6, 0).is_err());
    }

    #[test]
    fn kfold_partitions() {
        let plan = kfold(23, 4, 9).unwrap();
        let mut all: Vec<usize> = plan.folds.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
        let train = plan.train_rows(2);
        assert_eq!(train.len(), 23 - plan.test_rows(2).len());
        for r in plan.test_rows(2) {
            assert!(!train.contains(r));
        }
    }

    #[test]
    fn threshold_loss_matches_calibration() {
        // With calibrated marginals, the realized Hamming loss of the
        // threshold-at-1/2 prediction converges to the mean of min(p, 1-p).
        let n = 100_000;
        let ds = synth(4, n, 3, 5).unwrap();
        let mut realized = 0.0;
        let mut expected = 0.0;
        for row in 0..n {
            let p = ds.true_marginals(row).unwrap();
            let y = ds.labels(row);
            for j in 0..4 {
                let pred = p[j] > 0.5;
                realized += f64::from(pred != y[j]);
                expected += p[j].min(1.0 - p[j]);
            }
        }
        let per_slot = (realized - expected).abs() / (n as f64 * 4.0);
        assert!(per_slot < 0.01, "gap {per_slot}");
    }
}
