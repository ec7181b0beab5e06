use std::path::PathBuf;

use recast_core::{BackendPaths, Thresholds};
use thiserror::Error;

pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_FEEDBACK_LOG: &str = "feedback.jsonl";
pub const DEFAULT_FEEDBACK_QUEUE: usize = 1024;
pub const ENV_PREFIX: &str = "RECAST_";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("missing required setting `{0}`")]
    Missing(&'static str),
    #[error("invalid value {value:?} for {key}")]
    Invalid { key: String, value: String },
    #[error(transparent)]
    Thresholds(#[from] recast_core::Error),
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub port: u16,
    pub paths: BackendPaths,
    pub feedback_log: PathBuf,
    pub feedback_queue: usize,
    pub thresholds: Thresholds,
    /// `None` allows any origin.
    pub cors_origins: Option<Vec<String>>,
}

/// Partially specified configuration, as collected from flags or the
/// environment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub port: Option<u16>,
    pub lexicon: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub feedback_log: Option<PathBuf>,
    pub feedback_queue: Option<usize>,
    pub attn_cutoff: Option<f64>,
    pub alt_toxicity_max: Option<f64>,
    pub knn: Option<usize>,
    pub mlm_topk: Option<usize>,
    pub cors_origins: Option<Vec<String>>,
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.trim().parse().map_err(|_| ConfigError::Invalid {
        key: key.to_string(),
        value: value.to_string(),
    })
}

impl ConfigOverrides {
    /// Reads `RECAST_*` variables; unrelated variables are ignored.
    pub fn from_env<I>(vars: I) -> Result<Self, ConfigError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut out = ConfigOverrides::default();
        for (key, value) in vars {
            let Some(name) = key.strip_prefix(ENV_PREFIX) else {
                continue;
            };
            match name {
                "PORT" => out.port = Some(parse(&key, &value)?),
                "LEXICON" => out.lexicon = Some(value.into()),
                "EMBEDDINGS" => out.embeddings = Some(value.into()),
                "CORPUS" => out.corpus = Some(value.into()),
                "FEEDBACK_LOG" => out.feedback_log = Some(value.into()),
                "FEEDBACK_QUEUE" => out.feedback_queue = Some(parse(&key, &value)?),
                "ATTN_CUTOFF" => out.attn_cutoff = Some(parse(&key, &value)?),
                "ALT_TOXICITY_MAX" => out.alt_toxicity_max = Some(parse(&key, &value)?),
                "KNN" => out.knn = Some(parse(&key, &value)?),
                "MLM_TOPK" => out.mlm_topk = Some(parse(&key, &value)?),
                "CORS_ORIGINS" => {
                    out.cors_origins = Some(
                        value
                            .split(',')
                            .map(str::trim)
                            .filter(|s| !s.is_empty())
                            .map(String::from)
                            .collect(),
                    )
                }
                _ => {}
            }
        }
        Ok(out)
    }

    /// Fields set in `over` replace the ones in `self`.
    pub fn merge(self, over: ConfigOverrides) -> ConfigOverrides {
        ConfigOverrides {
            port: over.port.or(self.port),
            lexicon: over.lexicon.or(self.lexicon),
            embeddings: over.embeddings.or(self.embeddings),
            corpus: over.corpus.or(self.corpus),
            feedback_log: over.feedback_log.or(self.feedback_log),
            feedback_queue: over.feedback_queue.or(self.feedback_queue),
            attn_cutoff: over.attn_cutoff.or(self.attn_cutoff),
            alt_toxicity_max: over.alt_toxicity_max.or(self.alt_toxicity_max),
            knn: over.knn.or(self.knn),
            mlm_topk: over.mlm_topk.or(self.mlm_topk),
            cors_origins: over.cors_origins.or(self.cors_origins),
        }
    }

    pub fn into_config(self) -> Result<ServiceConfig, ConfigError> {
        let defaults = Thresholds::default();
        let thresholds = Thresholds {
            attn_cutoff: self.attn_cutoff.unwrap_or(defaults.attn_cutoff),
            alt_toxicity_max: self.alt_toxicity_max.unwrap_or(defaults.alt_toxicity_max),
            knn: self.knn.unwrap_or(defaults.knn),
            mlm_topk: self.mlm_topk.unwrap_or(defaults.mlm_topk),
        };
        thresholds.validate()?;
        let feedback_queue = self.feedback_queue.unwrap_or(DEFAULT_FEEDBACK_QUEUE);
        if feedback_queue == 0 {
            return Err(ConfigError::Invalid {
                key: "feedback_queue".into(),
                value: "0".into(),
            });
        }
        Ok(ServiceConfig {
            port: self.port.unwrap_or(DEFAULT_PORT),
            paths: BackendPaths {
                lexicon: self.lexicon.ok_or(ConfigError::Missing("lexicon"))?,
                embeddings: self.embeddings.ok_or(ConfigError::Missing("embeddings"))?,
                corpus: self.corpus.ok_or(ConfigError::Missing("corpus"))?,
            },
            feedback_log: self
                .feedback_log
                .unwrap_or_else(|| PathBuf::from(DEFAULT_FEEDBACK_LOG)),
            feedback_queue,
            thresholds,
            cors_origins: self.cors_origins,
        })
    }
}
