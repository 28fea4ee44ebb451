//! Binary relevance training: one L2-regularized logistic regression per
//! label, fit by batch gradient descent with Armijo backtracking. The models
//! turn feature vectors into the marginal probabilities the minimizers
//! consume.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::par;
use crate::types::MarginalVector;

const SCHEMA_VERSION: u32 = 1;
const PROB_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Inverse penalty weight: the objective adds `|w|^2 / (2 * c_reg)`,
    /// bias excluded.
    pub c_reg: f64,
    pub max_iter: usize,
    /// Convergence threshold on the gradient norm divided by the number of
    /// training rows.
    pub tol: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { c_reg: 1.0, max_iter: 500, tol: 1e-5, seed: 0 }
    }
}

/// Convergence record of one per-label fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelFit {
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
}

/// Per-label logistic models plus the feature standardization they were
/// trained under. Immutable once trained.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BRModel {
    schema_version: u32,
    feature_dim: usize,
    label_count: usize,
    c_reg: f64,
    seed: u64,
    feature_mean: Vec<f64>,
    feature_scale: Vec<f64>,
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
    fits: Vec<LabelFit>,
    degenerate_features: bool,
}

impl BRModel {
    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn label_count(&self) -> usize {
        self.label_count
    }

    pub fn fits(&self) -> &[LabelFit] {
        &self.fits
    }

    /// True when every feature column had zero variance, leaving only the
    /// bias terms: the model predicts the same marginals everywhere.
    pub fn degenerate_features(&self) -> bool {
        self.degenerate_features
    }

    /// Marginal probabilities for one feature vector, clamped into
    /// `(0, 1)` so downstream expectations never see hard 0/1.
    pub fn predict_marginals(&self, features: &[f64]) -> Result<MarginalVector> {
        if features.len() != self.feature_dim {
            return Err(Error::DimensionMismatch {
                expected: self.feature_dim,
                got: features.len(),
            });
        }
        let standardized: Vec<f64> = (0..self.feature_dim)
            .map(|j| (features[j] - self.feature_mean[j]) / self.feature_scale[j])
            .collect();
        let probs = (0..self.label_count)
            .map(|label| {
                let z = self.biases[label]
                    + self.weights[label]
                        .iter()
                        .zip(&standardized)
                        .map(|(w, x)| w * x)
                        .sum::<f64>();
                sigmoid(z).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
            })
            .collect();
        MarginalVector::new(probs)
    }

    /// Marginals for every row of a dataset, in row order.
    pub fn predict_dataset(&self, ds: &Dataset) -> Result<Vec<MarginalVector>> {
        if ds.feature_dim() != self.feature_dim {
            return Err(Error::DimensionMismatch {
                expected: self.feature_dim,
                got: ds.feature_dim(),
            });
        }
        let rows = par::map_range(ds.len(), |row| {
            self.predict_marginals(ds.features(row)).expect("dimension checked")
        });
        Ok(rows)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: BRModel = serde_json::from_str(text)
            .map_err(|e| Error::invalid(format!("model file: {e}")))?;
        if model.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(format!(
                "unsupported model schema version {}",
                model.schema_version
            )));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Trains one logistic model per label. Label fits are independent and run
/// in parallel under the `parallel` feature; the result is identical either
/// way.
pub fn train(ds: &Dataset, config: &TrainConfig) -> Result<BRModel> {
    if config.c_reg <= 0.0 || !config.c_reg.is_finite() {
        return Err(Error::invalid("regularization c_reg must be positive"));
    }
    if config.tol <= 0.0 {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let (n, d, m) = (ds.len(), ds.feature_dim(), ds.label_count());

    let (standardized, mean, scale, degenerate) = standardize(ds);
    let fits = par::map_range(m, |label| {
        let targets: Vec<f64> = (0..n).map(|row| f64::from(ds.labels(row)[label])).collect();
        fit_logistic(&standardized, &targets, n, d, config)
    });

    let mut weights = Vec::with_capacity(m);
    let mut biases = Vec::with_capacity(m);
    let mut label_fits = Vec::with_capacity(m);
    for (w, b, fit) in fits {
        weights.push(w);
        biases.push(b);
        label_fits.push(fit);
    }
    Ok(BRModel {
        schema_version: SCHEMA_VERSION,
        feature_dim: d,
        label_count: m,
        c_reg: config.c_reg,
        seed: config.seed,
        feature_mean: mean,
        feature_scale: scale,
        weights,
        biases,
        fits: label_fits,
        degenerate_features: degenerate,
    })
}

fn standardize(ds: &Dataset) -> (Vec<f64>, Vec<f64>, Vec<f64>, bool) {
    let (n, d) = (ds.len(), ds.feature_dim());
    let mut mean = vec![0.0; d];
    for row in 0..n {
        for (j, &x) in ds.features(row).iter().enumerate() {
            mean[j] += x;
        }
    }
    for mj in &mut mean {
        *mj /= n as f64;
    }
    let mut var = vec![0.0; d];
    for row in 0..n {
        for (j, &x) in ds.features(row).iter().enumerate() {
            var[j] += (x - mean[j]).powi(2);
        }
    }
    let mut informative = 0;
    let scale: Vec<f64> = var
        .iter()
        .map(|&v| {
            let sd = (v / n as f64).sqrt();
            if sd > 0.0 {
                informative += 1;
                sd
            } else {
                1.0
            }
        })
        .collect();
    let mut out = Vec::with_capacity(n * d);
    for row in 0..n {
        for (j, &x) in ds.features(row).iter().enumerate() {
            out.push((x - mean[j]) / scale[j]);
        }
    }
    (out, mean, scale, informative == 0)
}

/// Regularized negative log-likelihood, its gradient, and the descent loop.
/// Returns (weights, bias, fit record).
fn fit_logistic(
    x: &[f64],
    y: &[f64],
    n: usize,
    d: usize,
    config: &TrainConfig,
) -> (Vec<f64>, f64, LabelFit) {
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut step = 1.0;
    let mut iterations = 0;
    let mut converged = false;

    let mut objective = eval_objective(x, y, n, d, &w, b, config.c_reg);
    let grad_norm = loop {
        let (gw, gb) = eval_gradient(x, y, n, d, &w, b, config.c_reg);
        let g_sq: f64 = gw.iter().map(|g| g * g).sum::<f64>() + gb * gb;
        let grad_norm = g_sq.sqrt() / n as f64;
        if grad_norm <= config.tol {
            converged = true;
            break grad_norm;
        }
        if iterations >= config.max_iter {
            break grad_norm;
        }

        // Armijo backtracking; the accepted step never increases the
        // objective.
        let mut accepted = false;
        while step > 1e-18 {
            let cand_w: Vec<f64> = w.iter().zip(&gw).map(|(wi, gi)| wi - step * gi).collect();
            let cand_b = b - step * gb;
            let cand_obj = eval_objective(x, y, n, d, &cand_w, cand_b, config.c_reg);
            if cand_obj <= objective - 1e-4 * step * g_sq {
                w = cand_w;
                b = cand_b;
                objective = cand_obj;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break grad_norm; // step underflow: no further progress possible
        }
        iterations += 1;
        step = (step * 2.0).min(1e6);
    };
    (w, b, LabelFit { iterations, grad_norm, converged })
}

/// Regularized logistic negative log-likelihood on standardized features.
/// One of the two building blocks of the per-label fit; public so the
/// gradient can be verified against finite differences of this function.
pub fn eval_objective(
    x: &[f64],
    y: &[f64],
    n: usize,
    d: usize,
    w: &[f64],
    b: f64,
    c_reg: f64,
) -> f64 {
    let mut nll = 0.0;
    for row in 0..n {
        let z = b + dot(&x[row * d..(row + 1) * d], w);
        // ln(1 + e^z) - y z, evaluated without overflow
        nll += z.max(0.0) + (-z.abs()).exp().ln_1p() - y[row] * z;
    }
    nll + w.iter().map(|wi| wi * wi).sum::<f64>() / (2.0 * c_reg)
}

/// Analytic gradient of [`eval_objective`] in `(weights, bias)`.
pub fn eval_gradient(
    x: &[f64],
    y: &[f64],
    n: usize,
    d: usize,
    w: &[f64],
    b: f64,
    c_reg: f64,
) -> (Vec<f64>, f64) {
    let mut gw = vec![0.0; d];
    let mut gb = 0.0;
    for row in 0..n {
        let features = &x[row * d..(row + 1) * d];
        let residual = sigmoid(b + dot(features, w)) - y[row];
        gb += residual;
        for (g, &xj) in gw.iter_mut().zip(features) {
            *g += residual * xj;
        }
    }
    for (g, wi) in gw.iter_mut().zip(w) {
        *g += wi / c_reg;
    }
    (gw, gb)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;
    use rand::{Rng, SeedableRng};
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn toy_dataset() -> Dataset {
        // Linearly separable in the first feature.
        let features = vec![-2.0, 0.3, -1.0, -0.1, 1.0, 0.2, 2.0, -0.3, 1.5, 0.0, -1.5, 0.1];
        let labels = vec![false, false, true, true, true, false];
        Dataset::new(2, 1, features, labels).unwrap()
    }

    #[test]
    fn separable_toy_reaches_full_accuracy() {
        let ds = toy_dataset();
        let model = train(&ds, &TrainConfig::default()).unwrap();
        let mut last_p = 0.0;
        for row in 0..ds.len() {
            let p = model.predict_marginals(ds.features(row)).unwrap().get(0);
            assert_eq!(p > 0.5, ds.labels(row)[0], "row {row} p={p}");
            last_p = p;
        }
        // Probabilities increase along the separating direction.
        let low = model.predict_marginals(&[-3.0, 0.0]).unwrap().get(0);
        let high = model.predict_marginals(&[3.0, 0.0]).unwrap().get(0);
        assert!(low < 0.5 && high > 0.5 && low < last_p.max(high));
    }

    #[test]
    fn all_negative_label_stays_below_half() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(1);
        let n = 50;
        let features: Vec<f64> = (0..n * 3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let labels = vec![false; n];
        let ds = Dataset::new(3, 1, features, labels).unwrap();
        let model = train(&ds, &TrainConfig::default()).unwrap();
        for row in 0..n {
            let p = model.predict_marginals(ds.features(row)).unwrap().get(0);
            assert!(p < 0.5, "row {row} p={p}");
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(2);
        for _ in 0..30 {
            let n = rng.gen_range(3..12);
            let d = rng.gen_range(1..5);
            let x: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let y: Vec<f64> = (0..n).map(|_| f64::from(rng.gen::<bool>())).collect();
            let w: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b: f64 = rng.gen_range(-1.0..1.0);
            let c_reg = rng.gen_range(0.2..2.0);

            let (gw, gb) = eval_gradient(&x, &y, n, d, &w, b, c_reg);
            let h = 1e-5;
            for j in 0..d {
                let mut wp = w.clone();
                let mut wm = w.clone();
                wp[j] += h;
                wm[j] -= h;
                let numeric = (eval_objective(&x, &y, n, d, &wp, b, c_reg)
                    - eval_objective(&x, &y, n, d, &wm, b, c_reg))
                    / (2.0 * h);
                let rel = (gw[j] - numeric).abs() / gw[j].abs().max(numeric.abs()).max(1.0);
                assert!(rel < 1e-5, "dim {j}: analytic {} numeric {numeric}", gw[j]);
            }
            let numeric_b = (eval_objective(&x, &y, n, d, &w, b + h, c_reg)
                - eval_objective(&x, &y, n, d, &w, b - h, c_reg))
                / (2.0 * h);
            let rel = (gb - numeric_b).abs() / gb.abs().max(numeric_b.abs()).max(1.0);
            assert!(rel < 1e-5);
        }
    }

    #[test]
    fn training_never_increases_objective() {
        let ds = data::synth(2, 300, 4, 13).unwrap();
        let model = train(&ds, &TrainConfig::default()).unwrap();
        // The zero model scores n*ln(2) on each label; training must do
        // at least as well.
        let (standardized, ..) = standardize(&ds);
        for label in 0..2 {
            let y: Vec<f64> = (0..ds.len()).map(|r| f64::from(ds.labels(r)[label])).collect();
            let trained = eval_objective(
                &standardized,
                &y,
                ds.len(),
                4,
                &model.weights[label],
                model.biases[label],
                1.0,
            );
            let zero = eval_objective(&standardized, &y, ds.len(), 4, &[0.0; 4], 0.0, 1.0);
            assert!(trained <= zero + 1e-12);
        }
    }

    #[test]
    fn recovers_synthetic_marginals() {
        let ds = data::synth(3, 4000, 6, 21).unwrap();
        let model = train(&ds, &TrainConfig::default()).unwrap();
        let mut mae = 0.0;
        for row in 0..ds.len() {
            let p = model.predict_marginals(ds.features(row)).unwrap();
            let truth = ds.true_marginals(row).unwrap();
            for (j, t) in truth.iter().enumerate() {
                mae += (p.get(j) - t).abs();
            }
        }
        mae /= (ds.len() * 3) as f64;
        assert!(mae < 0.05, "mae = {mae}");
    }

    #[test]
    fn deterministic_and_persistent() {
        let ds = data::synth(2, 200, 3, 31).unwrap();
        let cfg = TrainConfig::default();
        let a = train(&ds, &cfg).unwrap();
        let b = train(&ds, &cfg).unwrap();
        assert_eq!(a.to_json(), b.to_json());

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        a.save(&path).unwrap();
        let back = BRModel::load(&path).unwrap();
        assert_eq!(back.to_json(), a.to_json());
        let x = ds.features(0);
        assert_eq!(back.predict_marginals(x).unwrap(), a.predict_marginals(x).unwrap());
    }

    #[test]
    fn clamping_and_dimension_checks() {
        let model = BRModel {
            schema_version: SCHEMA_VERSION,
            feature_dim: 1,
            label_count: 2,
            c_reg: 1.0,
            seed: 0,
            feature_mean: vec![0.0],
            feature_scale: vec![1.0],
            weights: vec![vec![0.0], vec![0.0]],
            biases: vec![0.0, 50.0],
            fits: vec![
                LabelFit { iterations: 0, grad_norm: 0.0, converged: true },
                LabelFit { iterations: 0, grad_norm: 0.0, converged: true },
            ],
            degenerate_features: false,
        };
        let p = model.predict_marginals(&[0.0]).unwrap();
        assert_eq!(p.get(0), 0.5);
        assert!(p.get(1) >= 1.0 - 1e-12 && p.get(1) < 1.0);
        assert!(model.predict_marginals(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn degenerate_features_flagged() {
        let ds = Dataset::new(2, 1, vec![1.0; 12], vec![true, false, true, false, true, false])
            .unwrap();
        let model = train(&ds, &TrainConfig::default()).unwrap();
        assert!(model.degenerate_features());
        let p0 = model.predict_marginals(&[1.0, 1.0]).unwrap();
        let p1 = model.predict_marginals(&[9.0, -4.0]).unwrap();
        assert_eq!(p0, p1); // constant model
    }

    #[test]
    fn config_validation() {
        let ds = toy_dataset();
        assert!(train(&ds, &TrainConfig { c_reg: 0.0, ..TrainConfig::default() }).is_err());
        assert!(train(&ds, &TrainConfig { tol: 0.0, ..TrainConfig::default() }).is_err());
    }
}
