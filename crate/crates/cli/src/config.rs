use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use fatigue_uq::model::LossSpec;
use fatigue_uq::piml::{AugmentationSpec, PhysicsLossSpec};
use fatigue_uq::{DatasetSchema, ModelSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Built-in schema name, path to a schema file, or an inline table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SchemaRef {
    Named(String),
    Inline(DatasetSchema),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub path: PathBuf,
    pub schema: SchemaRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvConfig {
    pub k: usize,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self { k: 5, seed: 0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PimlConfig {
    /// Append the Basquin-life feature.
    pub augment: bool,
    pub augmentation: AugmentationSpec,
    /// Train every family that supports it with the bounded-life loss.
    pub physics_loss: bool,
    pub loss: PhysicsLossSpec,
    /// Also run the plain configuration and write a side-by-side comparison.
    pub compare_baseline: bool,
}

impl PimlConfig {
    pub fn any(&self) -> bool {
        self.augment || self.physics_loss
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetConfig,
    pub models: Vec<ModelSpec>,
    #[serde(default)]
    pub cv: CvConfig,
    #[serde(default)]
    pub piml: PimlConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub emit_plots: bool,
    /// Worker threads; the rayon default when absent.
    #[serde(default)]
    pub threads: Option<usize>,
}

/// A parsed config with paths resolved against the file's directory.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub schema: DatasetSchema,
    pub dataset_path: PathBuf,
    pub output_dir: PathBuf,
    pub hash: String,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.models.is_empty() {
            return Err(CliError::Config("at least one model is required".into()));
        }
        if self.cv.k < 2 {
            return Err(CliError::Config(format!("cv.k must be >= 2, got {}", self.cv.k)));
        }
        if self.threads == Some(0) {
            return Err(CliError::Config("threads must be >= 1".into()));
        }
        let mut names = BTreeSet::new();
        for m in &self.models {
            let name = m.display_name();
            if !names.insert(slug(&name)) {
                return Err(CliError::Config(format!("duplicate model name `{name}`; set `name` to disambiguate")));
            }
            m.validate().map_err(|e| CliError::Config(format!("model `{name}`: {e}")))?;
        }
        if self.piml.physics_loss {
            self.piml.loss.validate().map_err(|e| CliError::Config(format!("piml.loss: {e}")))?;
        }
        if self.piml.augment && self.piml.augmentation.min_group_size < 2 {
            return Err(CliError::Config("piml.augmentation.min_group_size must be >= 2".into()));
        }
        Ok(())
    }

    /// Models as trained in the physics-informed variant: families that
    /// accept the bounded-life loss and have no explicit loss get it.
    pub fn models_with_physics_loss(&self) -> Vec<ModelSpec> {
        self.models
            .iter()
            .map(|m| {
                if self.piml.physics_loss && m.family.accepts_physics_loss() && m.loss == LossSpec::Mse {
                    m.clone().with_loss(LossSpec::Physics(self.piml.loss))
                } else {
                    m.clone()
                }
            })
            .collect()
    }

    /// Models with any configured physics loss removed.
    pub fn plain_models(&self) -> Vec<ModelSpec> {
        self.models.iter().map(|m| m.clone().with_loss(LossSpec::Mse)).collect()
    }
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| CliError::Config(format!("{} is not UTF-8", path.display())))?;
    let config = RunConfig::from_toml(&text)?;
    config.validate()?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let schema = match &config.dataset.schema {
        SchemaRef::Inline(s) => {
            s.validate().map_err(|e| CliError::Config(e.to_string()))?;
            s.clone()
        }
        SchemaRef::Named(name) => match DatasetSchema::builtin(name) {
            Some(s) => s,
            None => {
                let p = base.join(name);
                let text = std::fs::read_to_string(&p)
                    .map_err(|e| CliError::Config(format!("schema `{name}` is not built in and {} is unreadable: {e}", p.display())))?;
                DatasetSchema::from_toml(&text).map_err(|e| CliError::Config(e.to_string()))?
            }
        },
    };
    Ok(LoadedConfig {
        dataset_path: base.join(&config.dataset.path),
        output_dir: base.join(&config.output_dir),
        schema,
        config,
        hash: hex::encode(Sha256::digest(&bytes)),
    })
}

/// File-name form of a model name.
pub fn slug(name: &str) -> String {
    let s: String = name.chars().map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' }).collect();
    s.trim_matches('_').to_string()
}
