//! Flat `key=value` configuration with `#` comments.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use thiserror::Error;

use crate::seedgen::{DerivationContext, SeedError};

pub const DEFAULT_MASTER_SECRET_ENV: &str = "PEX_MASTER_SECRET";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("environment variable {0} is not set")]
    MissingSecret(String),
    #[error(transparent)]
    Secret(#[from] SeedError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub listen_http: SocketAddr,
    pub listen_auth: SocketAddr,
    pub course_id: String,
    /// Name of the environment variable holding the master secret.
    pub master_secret_env: String,
    /// `None` selects the bundled corpus.
    pub corpus_path: Option<PathBuf>,
    pub log_dir: PathBuf,
    pub roster_path: PathBuf,
    pub prompt_deadline: Duration,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            listen_http: ([127, 0, 0, 1], 8080).into(),
            listen_auth: ([127, 0, 0, 1], 8023).into(),
            course_id: "course".into(),
            master_secret_env: DEFAULT_MASTER_SECRET_ENV.into(),
            corpus_path: None,
            log_dir: "logs".into(),
            roster_path: "roster.txt".into(),
            prompt_deadline: Duration::from_secs(60),
        }
    }
}

impl Config {
    /// Parses config text; relative paths are resolved against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut config = Config::default();
        config.log_dir = base_dir.join(&config.log_dir);
        config.roster_path = base_dir.join(&config.roster_path);
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| ConfigError::Parse {
                line: i + 1,
                reason,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected key=value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let addr = |v: &str| {
                v.parse::<SocketAddr>()
                    .map_err(|e| err(format!("{key}: {e}")))
            };
            match key {
                "listen_http" => config.listen_http = addr(value)?,
                "listen_auth" => config.listen_auth = addr(value)?,
                "course_id" => config.course_id = value.to_string(),
                "master_secret_env" => config.master_secret_env = value.to_string(),
                "corpus_path" => config.corpus_path = Some(base_dir.join(value)),
                "log_dir" => config.log_dir = base_dir.join(value),
                "roster_path" => config.roster_path = base_dir.join(value),
                "prompt_deadline_secs" => {
                    let secs: u64 = value.parse().map_err(|e| err(format!("{key}: {e}")))?;
                    config.prompt_deadline = Duration::from_secs(secs);
                }
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base)
    }

    /// Reads the master secret from the configured environment variable.
    pub fn derivation_context(&self) -> Result<DerivationContext, ConfigError> {
        let secret = std::env::var(&self.master_secret_env)
            .map_err(|_| ConfigError::MissingSecret(self.master_secret_env.clone()))?;
        Ok(DerivationContext::new(
            secret.into_bytes(),
            self.course_id.clone(),
        )?)
    }
}
