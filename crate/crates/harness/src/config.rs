use std::path::{Path, PathBuf};
use std::time::Duration;

use kitchen_core::taskgen::{assemble_bundle, Category};
use kitchen_core::TaskBundle;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompt::Method;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("bundle {path}: {reason}")]
    Bundle { path: PathBuf, reason: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Where the benchmark instances come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BundleSource {
    /// Every `*.json` file in the directory, in file-name order.
    Dir(PathBuf),
    /// Generated on the fly for each combination.
    Grid {
        categories: Vec<Category>,
        dishes: Vec<usize>,
        agents: Vec<usize>,
        seeds: Vec<u64>,
    },
}

/// One model/method run. The API key is read from the environment variable
/// named by `api_key_env` and never written anywhere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: String,
    pub endpoint: String,
    #[serde(default)]
    pub api_key_env: Option<String>,
    pub method: Method,
    pub output: PathBuf,
    pub bundles: BundleSource,
    #[serde(default = "default_retries")]
    pub retries: u32,
    #[serde(default = "default_backoff_ms")]
    pub backoff_ms: u64,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default)]
    pub max_tokens: Option<u32>,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
}

fn default_retries() -> u32 {
    3
}

fn default_backoff_ms() -> u64 {
    1000
}

fn default_parallelism() -> usize {
    4
}

fn default_timeout_secs() -> u64 {
    300
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<ExperimentConfig, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        if cfg.parallelism == 0 {
            return Err(ConfigError::Invalid(
                "parallelism must be at least 1".into(),
            ));
        }
        if cfg.timeout_secs == 0 {
            return Err(ConfigError::Invalid("timeout_secs must be positive".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_toml(&text)?;
        // Relative paths are taken from the config file's directory.
        let base = path.parent().unwrap_or(Path::new("."));
        if cfg.output.is_relative() {
            cfg.output = base.join(&cfg.output);
        }
        if let BundleSource::Dir(dir) = &mut cfg.bundles {
            if dir.is_relative() {
                *dir = base.join(&*dir);
            }
        }
        Ok(cfg)
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.timeout_secs)
    }

    pub fn api_key(&self) -> Option<String> {
        self.api_key_env
            .as_deref()
            .and_then(|name| std::env::var(name).ok())
    }
}

impl BundleSource {
    pub fn load(&self) -> Result<Vec<TaskBundle>, ConfigError> {
        match self {
            BundleSource::Dir(dir) => load_dir(dir),
            BundleSource::Grid {
                categories,
                dishes,
                agents,
                seeds,
            } => {
                let mut out = Vec::new();
                for &c in categories {
                    for &d in dishes {
                        for &a in agents {
                            for &s in seeds {
                                let b = assemble_bundle(c, d, a, s).map_err(|e| {
                                    ConfigError::Bundle {
                                        path: PathBuf::from(format!("{c}-d{d}-a{a}-s{s}")),
                                        reason: e.to_string(),
                                    }
                                })?;
                                out.push(b);
                            }
                        }
                    }
                }
                Ok(out)
            }
        }
    }
}

pub fn load_dir(dir: &Path) -> Result<Vec<TaskBundle>, ConfigError> {
    let io = |source| ConfigError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let text = std::fs::read_to_string(&path).map_err(|source| ConfigError::Io {
                path: path.clone(),
                source,
            })?;
            TaskBundle::from_json(&text).map_err(|e| ConfigError::Bundle {
                path,
                reason: e.to_string(),
            })
        })
        .collect()
}
