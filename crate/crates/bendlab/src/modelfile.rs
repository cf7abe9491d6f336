//! Versioned model documents (`"bendlab-model/1"`).
//!
//! A model embeds the ordered feature names it was trained on and their
//! SHA-256 fingerprint, so it refuses to run against a different layout.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use bendlab_core::featex::FeatureRegistry;
use bendlab_core::learn;
use bendlab_core::{DecisionTree, Forest, Label, TreeParams};

pub const MODEL_VERSION: &str = "bendlab-model/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Unbounded depth, uniform class weights.
    Full,
    /// Unbounded depth, balanced class weights.
    Balanced,
    /// SMOTE oversampling of the training side, then a full tree.
    Smote,
    /// Random forest of full trees.
    Forest,
}

impl Preset {
    pub const SMOTE_K: usize = 5;
    pub const SMOTE_RATIO: f64 = 1.0;
    pub const FOREST_TREES: usize = 25;

    pub fn name(self) -> &'static str {
        match self {
            Preset::Full => "full",
            Preset::Balanced => "balanced",
            Preset::Smote => "smote",
            Preset::Forest => "forest",
        }
    }

    pub fn tree_params(self) -> TreeParams {
        match self {
            Preset::Balanced => TreeParams::balanced(),
            _ => TreeParams::full(),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Classifier {
    Tree(DecisionTree),
    Forest(Forest),
}

impl Classifier {
    pub fn n_features(&self) -> usize {
        match self {
            Classifier::Tree(t) => t.n_features,
            Classifier::Forest(f) => f.trees.first().map_or(0, |t| t.n_features),
        }
    }

    pub fn predict(&self, values: &[f64]) -> bendlab_core::Result<Label> {
        match self {
            Classifier::Tree(t) => learn::predict(t, values),
            Classifier::Forest(f) => learn::predict_forest(f, values),
        }
    }

    pub fn feature_importance(&self) -> Vec<f64> {
        match self {
            Classifier::Tree(t) => learn::feature_importance(t),
            Classifier::Forest(f) => f.feature_importance(),
        }
    }

    fn check(&self) -> Result<(), &'static str> {
        let trees: Vec<&DecisionTree> = match self {
            Classifier::Tree(t) => vec![t],
            Classifier::Forest(f) => {
                if f.trees.is_empty() || f.trees.len() != f.tree_seeds.len() {
                    return Err("forest has no trees or mismatched seeds");
                }
                f.trees.iter().collect()
            }
        };
        trees.into_iter().try_for_each(|t| t.check_structure())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: String,
    pub preset: Preset,
    pub seed: u64,
    pub params: TreeParams,
    pub registry: Vec<String>,
    /// Hex SHA-256 of the registry names joined by newlines.
    pub fingerprint: String,
    pub model: Classifier,
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("model file is not valid JSON for {MODEL_VERSION}: {0}")]
    Format(String),
    #[error("unsupported model version \"{0}\" (expected \"{MODEL_VERSION}\")")]
    Version(String),
    #[error("model feature layout does not match this build's registry: {0}")]
    Registry(String),
    #[error("model structure is invalid: {0}")]
    Structure(&'static str),
}

pub fn registry_names() -> Vec<String> {
    FeatureRegistry.names().map(str::to_string).collect()
}

pub fn fingerprint(names: &[String]) -> String {
    let digest = Sha256::digest(names.join("\n").as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

impl ModelFile {
    pub fn new(preset: Preset, seed: u64, model: Classifier) -> Self {
        let registry = registry_names();
        let params = preset.tree_params();
        ModelFile {
            version: MODEL_VERSION.to_string(),
            preset,
            seed,
            params,
            fingerprint: fingerprint(&registry),
            registry,
            model,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model serialization cannot fail");
        s.push('\n');
        s
    }

    pub fn from_json(source: &str) -> Result<Self, ModelError> {
        let value: serde_json::Value = serde_json::from_str(source).map_err(|e| ModelError::Format(e.to_string()))?;
        match value.get("version").and_then(|v| v.as_str()) {
            Some(MODEL_VERSION) => {}
            Some(other) => return Err(ModelError::Version(other.to_string())),
            None => return Err(ModelError::Format("missing \"version\"".to_string())),
        }
        let m: ModelFile = serde_json::from_value(value).map_err(|e| ModelError::Format(e.to_string()))?;
        let current = registry_names();
        if m.registry != current {
            let first = m
                .registry
                .iter()
                .zip(&current)
                .position(|(a, b)| a != b)
                .unwrap_or(m.registry.len().min(current.len()));
            return Err(ModelError::Registry(format!(
                "{} names in model vs {} expected, first difference at feature {}",
                m.registry.len(),
                current.len(),
                first
            )));
        }
        if m.fingerprint != fingerprint(&m.registry) {
            return Err(ModelError::Registry("fingerprint does not match the registry names".to_string()));
        }
        if m.model.n_features() != current.len() {
            return Err(ModelError::Registry(format!(
                "model expects {} features, registry has {}",
                m.model.n_features(),
                current.len()
            )));
        }
        m.model.check().map_err(ModelError::Structure)?;
        Ok(m)
    }
}
