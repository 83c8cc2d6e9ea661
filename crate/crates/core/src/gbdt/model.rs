use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{sigmoid, ModelMeta, TrainConfig, Tree};
use crate::descriptor::FeatureLayout;
use crate::encoding::EncodingScheme;
use crate::error::{Error, Result};

pub const MODEL_VERSION: u32 = 1;

/// A trained ensemble together with the input layout it expects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub version: u32,
    pub config: TrainConfig,
    pub seed: u64,
    pub layout: FeatureLayout,
    pub scheme: EncodingScheme,
    #[serde(rename = "K")]
    pub k: usize,
    pub encoded_length: usize,
    pub base_margin: f64,
    pub trees: Vec<Tree>,
}

impl Ensemble {
    /// An ensemble without trees; predicts `sigmoid(base_margin)` everywhere.
    pub fn constant(base_margin: f64, meta: ModelMeta, config: TrainConfig) -> Self {
        Ensemble {
            version: MODEL_VERSION,
            seed: config.seed,
            config,
            k: meta.scheme.k,
            encoded_length: meta.scheme.encoded_length(),
            layout: meta.layout,
            scheme: meta.scheme,
            base_margin,
            trees: Vec::new(),
        }
    }

    pub fn n_features(&self) -> usize {
        self.layout.len() + self.encoded_length
    }

    pub fn meta(&self) -> ModelMeta {
        ModelMeta::new(self.layout.clone(), self.scheme)
    }

    fn check_dim(&self, row: &[f64]) -> Result<()> {
        if row.len() != self.n_features() {
            return Err(Error::Dimension {
                expected: self.n_features(),
                actual: row.len(),
            });
        }
        Ok(())
    }

    pub fn predict_margin(&self, row: &[f64]) -> Result<f64> {
        self.check_dim(row)?;
        Ok(self.base_margin + self.trees.iter().map(|t| t.predict(row)).sum::<f64>())
    }

    pub fn predict_proba(&self, row: &[f64]) -> Result<f64> {
        self.predict_margin(row).map(sigmoid)
    }

    pub fn predict_batch(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        rows.iter().map(|r| self.predict_proba(r)).collect()
    }

    /// Checks internal consistency after deserialization.
    pub fn validate(&self) -> Result<()> {
        if self.version != MODEL_VERSION {
            return Err(Error::Model(format!(
                "model version {} is not supported (expected {MODEL_VERSION})",
                self.version
            )));
        }
        if self.k != self.scheme.k || self.encoded_length != self.scheme.encoded_length() {
            return Err(Error::Model(format!(
                "stored K={} / encoded_length={} disagree with scheme {:?}",
                self.k, self.encoded_length, self.scheme
            )));
        }
        if !self.base_margin.is_finite() {
            return Err(Error::Model("non-finite base margin".into()));
        }
        let n = self.n_features();
        for (i, t) in self.trees.iter().enumerate() {
            t.check(n)
                .map_err(|e| Error::Model(format!("tree {i}: {e}")))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::json("model", e))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let e: Ensemble = serde_json::from_str(text).map_err(|e| Error::json("model", e))?;
        e.validate()?;
        Ok(e)
    }
}

pub fn save_model(model: &Ensemble, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model.to_json()?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Ensemble> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ensemble::from_json(&text)
}
