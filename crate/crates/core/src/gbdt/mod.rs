//! Second-order gradient-boosted decision trees for binary logistic loss.
//!
//! Trees are grown depth-first with exact greedy split search over midpoints
//! between consecutive distinct feature values. Each tree sees a row sample
//! (without replacement) and a column sample drawn from a seeded generator,
//! so training is a pure function of `(X, y, config)`.

mod model;
mod split;
mod tree;

pub use model::{load_model, save_model, Ensemble, MODEL_VERSION};
pub use split::{best_split, split_gain, SplitInfo};
pub use tree::{grow_tree, Node, Tree};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::descriptor::FeatureLayout;
use crate::encoding::EncodingScheme;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub colsample_per_tree: f64,
    pub rowsample_per_tree: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub base_score: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            n_trees: 100,
            max_depth: 6,
            learning_rate: 0.1,
            colsample_per_tree: 1.0,
            rowsample_per_tree: 1.0,
            lambda: 1.0,
            gamma: 0.0,
            base_score: 0.5,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.n_trees == 0 {
            return bad("n_trees must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad("learning_rate must lie in (0, 1]");
        }
        for (name, v) in [
            ("colsample_per_tree", self.colsample_per_tree),
            ("rowsample_per_tree", self.rowsample_per_tree),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidConfig(format!("{name} must lie in (0, 1]")));
            }
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be non-negative");
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad("gamma must be non-negative");
        }
        if !(self.base_score > 0.0 && self.base_score < 1.0) {
            return bad("base_score must lie in (0, 1)");
        }
        Ok(())
    }
}

pub fn sigmoid(m: f64) -> f64 {
    1.0 / (1.0 + (-m).exp())
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Gradient and hessian of the logistic loss with respect to the margin.
pub fn logistic_grad_hess(margin: f64, label: u8) -> (f64, f64) {
    let p = sigmoid(margin);
    (p - label as f64, p * (1.0 - p))
}

/// Mean logistic loss of margins against 0/1 labels.
pub fn log_loss(margins: &[f64], labels: &[u8]) -> f64 {
    let total: f64 = margins
        .iter()
        .zip(labels)
        .map(|(&m, &y)| {
            // log(1 + exp(-m)) for y = 1, log(1 + exp(m)) for y = 0, computed stably
            let z = if y == 1 { -m } else { m };
            if z > 0.0 {
                z + (-z).exp().ln_1p()
            } else {
                z.exp().ln_1p()
            }
        })
        .sum();
    total / margins.len().max(1) as f64
}

/// Column-major training matrix.
#[derive(Debug, Clone)]
pub struct ColumnData {
    pub n_rows: usize,
    pub columns: Vec<Vec<f64>>,
}

impl ColumnData {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut columns = vec![Vec::with_capacity(rows.len()); n_cols];
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n_cols {
                return Err(Error::TrainingData(format!(
                    "row {i} has {} columns, expected {n_cols}",
                    r.len()
                )));
            }
            if let Some(j) = r.iter().position(|v| !v.is_finite()) {
                return Err(Error::TrainingData(format!(
                    "row {i} column {j} is not finite"
                )));
            }
            for (c, v) in columns.iter_mut().zip(r) {
                c.push(*v);
            }
        }
        Ok(ColumnData {
            n_rows: rows.len(),
            columns,
        })
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }
}

/// Feature layout and labeler encoding a model is bound to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub layout: FeatureLayout,
    pub scheme: EncodingScheme,
}

impl ModelMeta {
    pub fn new(layout: FeatureLayout, scheme: EncodingScheme) -> Self {
        ModelMeta { layout, scheme }
    }

    pub fn generic(n_cols: usize) -> Self {
        ModelMeta {
            layout: FeatureLayout::generic(n_cols),
            scheme: EncodingScheme::none(),
        }
    }

    pub fn n_features(&self) -> usize {
        self.layout.len() + self.scheme.encoded_length()
    }
}

fn sample_size(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64).round() as usize).clamp(1, n)
}

/// Trains an ensemble; see [`train_with_history`].
pub fn train(x: &[Vec<f64>], y: &[u8], config: &TrainConfig, meta: ModelMeta) -> Result<Ensemble> {
    train_with_history(x, y, config, meta).map(|(e, _)| e)
}

/// Trains an ensemble and returns the mean training log-loss before the
/// first tree and after every tree (`n_trees + 1` values).
pub fn train_with_history(
    x: &[Vec<f64>],
    y: &[u8],
    config: &TrainConfig,
    meta: ModelMeta,
) -> Result<(Ensemble, Vec<f64>)> {
    config.validate()?;
    if x.is_empty() {
        return Err(Error::TrainingData("empty training set".into()));
    }
    if x.len() != y.len() {
        return Err(Error::TrainingData(format!(
            "{} rows but {} labels",
            x.len(),
            y.len()
        )));
    }
    if let Some(i) = y.iter().position(|&v| v > 1) {
        return Err(Error::TrainingData(format!(
            "label {} at row {i} is not binary",
            y[i]
        )));
    }
    let data = ColumnData::from_rows(x)?;
    if data.n_cols() != meta.n_features() {
        return Err(Error::Dimension {
            expected: meta.n_features(),
            actual: data.n_cols(),
        });
    }

    let n = data.n_rows;
    let n_cols = data.n_cols();
    let order = tree::presort(&data);
    let base_margin = logit(config.base_score);
    let mut margins = vec![base_margin; n];
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut history = Vec::with_capacity(config.n_trees + 1);
    history.push(log_loss(&margins, y));
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut trees = Vec::with_capacity(config.n_trees);
    let mut in_sample = vec![false; n];

    for _ in 0..config.n_trees {
        for i in 0..n {
            let (g, h) = logistic_grad_hess(margins[i], y[i]);
            grad[i] = g;
            hess[i] = h;
        }
        in_sample.iter_mut().for_each(|v| *v = false);
        if config.rowsample_per_tree < 1.0 {
            for i in sample(&mut rng, n, sample_size(config.rowsample_per_tree, n)) {
                in_sample[i] = true;
            }
        } else {
            in_sample.iter_mut().for_each(|v| *v = true);
        }
        let mut features: Vec<usize> = if config.colsample_per_tree < 1.0 {
            sample(&mut rng, n_cols, sample_size(config.colsample_per_tree, n_cols)).into_vec()
        } else {
            (0..n_cols).collect()
        };
        features.sort_unstable();

        let t = tree::grow_presorted(&data, &order, &grad, &hess, &in_sample, &features, config);
        for (i, m) in margins.iter_mut().enumerate() {
            *m += t.predict_with(|f| data.columns[f][i]);
        }
        history.push(log_loss(&margins, y));
        trees.push(t);
    }

    Ok((
        Ensemble {
            version: MODEL_VERSION,
            config: config.clone(),
            seed: config.seed,
            layout: meta.layout,
            scheme: meta.scheme,
            k: meta.scheme.k,
            encoded_length: meta.scheme.encoded_length(),
            base_margin,
            trees,
        },
        history,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grad_hess_at_zero_margin() {
        assert_eq!(logistic_grad_hess(0.0, 1), (-0.5, 0.25));
        assert_eq!(logistic_grad_hess(0.0, 0), (0.5, 0.25));
        let (g, h) = logistic_grad_hess(40.0, 1);
        assert!(g.abs() < 1e-15 && h < 1e-15);
    }

    #[test]
    fn grad_hess_ranges() {
        for m in [-30.0, -3.0, -0.1, 0.0, 0.7, 5.0, 30.0] {
            for y in [0u8, 1] {
                let (g, h) = logistic_grad_hess(m, y);
                assert!(g > -1.0 && g < 1.0);
                assert!(h >= 0.0 && h <= 0.25);
            }
        }
    }

    #[test]
    fn config_validation() {
        let ok = TrainConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            TrainConfig { n_trees: 0, ..ok.clone() },
            TrainConfig { learning_rate: 0.0, ..ok.clone() },
            TrainConfig { learning_rate: 1.5, ..ok.clone() },
            TrainConfig { colsample_per_tree: 0.0, ..ok.clone() },
            TrainConfig { rowsample_per_tree: 1.1, ..ok.clone() },
            TrainConfig { lambda: -1.0, ..ok.clone() },
            TrainConfig { gamma: -0.1, ..ok.clone() },
            TrainConfig { base_score: 1.0, ..ok.clone() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn rejects_bad_training_data() {
        let cfg = TrainConfig::default();
        assert!(train(&[], &[], &cfg, ModelMeta::generic(1)).is_err());
        assert!(train(&[vec![1.0]], &[2], &cfg, ModelMeta::generic(1)).is_err());
        assert!(train(&[vec![1.0], vec![2.0]], &[1], &cfg, ModelMeta::generic(1)).is_err());
        assert!(matches!(
            train(&[vec![1.0, 2.0]], &[1], &cfg, ModelMeta::generic(1)),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn single_positive_example_saturates() {
        let cfg = TrainConfig {
            n_trees: 200,
            learning_rate: 1.0,
            lambda: 0.0,
            max_depth: 2,
            ..TrainConfig::default()
        };
        let e = train(&[vec![0.3]], &[1], &cfg, ModelMeta::generic(1)).unwrap();
        let p = e.predict_proba(&[0.3]).unwrap();
        assert!(p > 0.999, "{p}");
    }

    #[test]
    fn log_loss_is_stable() {
        assert!((log_loss(&[0.0], &[1]) - 2f64.ln()).abs() < 1e-15);
        assert!(log_loss(&[800.0], &[0]).is_finite());
        assert!(log_loss(&[-800.0], &[1]).is_finite());
    }
}
